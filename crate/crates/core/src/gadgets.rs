//! Generators for the hard instance families behind the lower bounds.
//!
//! Every generator is a pure function of its parameters; the only randomness
//! is the optional uniform choice of the witness position. Infeasible sizes
//! are rounded up to the next feasible `n` and the requested value is kept in
//! [`GadgetParams::requested_n`].

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{Color, Domain, Point};
use crate::pointset::PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Emd1d,
    Emd2d,
    Emd3d,
    CellSampling,
    Mst,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Emd1d => "emd1d",
            Family::Emd2d => "emd2d",
            Family::Emd3d => "emd3d",
            Family::CellSampling => "cellsampling",
            Family::Mst => "mst",
        }
    }
}

/// Where the odd gadget goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    None,
    At(usize),
    /// Uniform over all segments or cells.
    Random,
}

impl Witness {
    fn resolve<R: Rng + ?Sized>(self, slots: usize, rng: &mut R) -> Result<Option<usize>> {
        match self {
            Witness::None => Ok(None),
            Witness::At(j) if j < slots => Ok(Some(j)),
            Witness::At(j) => Err(Error::InvalidParameter(format!("witness {j} out of range 0..{slots}"))),
            Witness::Random => Ok(Some(rng.gen_range(0..slots))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    Exact,
    /// Order of growth only; `value` is the leading term.
    Order,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeclaredCost {
    pub value: f64,
    pub kind: CostKind,
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GadgetParams {
    /// Size actually generated; see each family for how it relates to the
    /// point count.
    pub n: u64,
    pub requested_n: u64,
    /// `s` for the EMD families, `c` for cell sampling, unused for MST.
    pub param: u64,
    pub witness: Option<usize>,
    /// Number of positions the witness can take.
    pub slots: usize,
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GadgetInstance {
    pub points: PointSet,
    pub family: Family,
    pub params: GadgetParams,
    pub declared_cost: Option<DeclaredCost>,
}

fn round_up(n: u64, m: u64) -> u64 {
    n.max(1).div_ceil(m) * m
}

/// Exact integer root: the smallest `r` with `r^k ≥ n`.
fn ceil_root(n: u64, k: u32) -> u64 {
    let mut r = (n as f64).powf(1.0 / k as f64).floor().max(1.0) as u64;
    while r.pow(k) < n {
        r += 1;
    }
    while r > 1 && (r - 1).pow(k) >= n {
        r -= 1;
    }
    r
}

fn exact_root(s: u64, k: u32) -> Result<u64> {
    let r = ceil_root(s, k);
    if r.pow(k) == s {
        Ok(r)
    } else {
        Err(Error::Infeasible(format!("s = {s} is not a perfect {k}-th power")))
    }
}

/// One 1D gadget on `[x0, x0 + len − 1]` along `axis`, with `q` red and `q`
/// blue points. Near: two alternating unit-spaced runs of `q` points, one from
/// the left endpoint and one ending at the right endpoint, every red directly
/// followed by a blue. Far: all red at the left endpoint, all blue at the
/// right. `flip` swaps the colours.
fn line_gadget(out: &mut Vec<(Color, Point)>, base: Point, axis: usize, len: i64, q: i64, far: bool, flip: bool) {
    let (first, second) = if flip { (Color::Blue, Color::Red) } else { (Color::Red, Color::Blue) };
    let at = |off: i64| {
        let mut p = base;
        p.0[axis] += off;
        p
    };
    if far {
        for _ in 0..q {
            out.push((first, at(0)));
            out.push((second, at(len - 1)));
        }
        return;
    }
    for k in 0..q {
        let c = if k % 2 == 0 { first } else { second };
        out.push((c, at(k)));
        out.push((c, at(len - q + k)));
    }
}

/// A `dim`-dimensional gadget on the cube of side `g` at `base`: one line
/// gadget when `dim = 1`, otherwise two copies of the `(dim−1)` gadget on
/// opposite facets along axis `dim−1`, the second with its colours flipped.
fn cube_gadget(out: &mut Vec<(Color, Point)>, base: Point, dim: usize, g: i64, q: i64, far: bool, flip: bool) {
    if dim == 1 {
        line_gadget(out, base, 0, g, q, far, flip);
        return;
    }
    cube_gadget(out, base, dim - 1, g, q, far, flip);
    let mut top = base;
    top.0[dim - 1] += g - 1;
    cube_gadget(out, top, dim - 1, g, q, far, !flip);
}

fn to_pointset(domain: Domain, entries: &[(Color, Point)]) -> Result<PointSet> {
    let mut ps = PointSet::new(domain);
    // red first, then blue, each in generation order
    for want in [Color::Red, Color::Blue, Color::Plain] {
        for (c, p) in entries.iter().filter(|(c, _)| *c == want) {
            ps.push(*c, *p)?;
        }
    }
    Ok(ps)
}

/// Coloured EMD instances with `|R| = |B| = n`.
///
/// The domain is cut into `8s` segments (`d = 1`), a `4√s × 4√s` grid
/// (`d = 2`) or a `4∛s`-per-axis grid (`d = 3`). Each cell carries a gadget of
/// half its side in its middle; in one dimension the gadget fills the
/// segment. All gadgets are near gadgets except the witness, which is far.
/// Without a witness the cost is exactly `n`; with one it is
/// `n − P + P·(g − 1)` where `P` is the witness's red population and `g` the
/// gadget side.
///
/// `n` is rounded up so that every line gadget holds an even number of points
/// of each colour. `delta` defaults to the smallest power of two `≥ 16n`.
pub fn gen_emd_lb<R: Rng + ?Sized>(
    d: usize,
    n: u64,
    s: u64,
    delta: Option<i64>,
    witness: Witness,
    rng: &mut R,
) -> Result<GadgetInstance> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidParameter(format!("EMD gadgets need d in 1..=3, got {d}")));
    }
    if s == 0 || s > n {
        return Err(Error::InvalidParameter(format!("need 1 ≤ s ≤ n, got s = {s}, n = {n}")));
    }
    let root = if d == 1 { 1 } else { exact_root(s, d as u32)? };
    let per_axis = if d == 1 { 8 * s } else { 4 * root };
    let slots = per_axis.pow(d as u32);
    // line gadgets per cell: 2^{d−1}
    let lines = slots * (1 << (d - 1));
    let n_adj = round_up(n, 2 * lines);
    let q = (n_adj / lines) as i64;
    let delta = match delta {
        Some(x) => x,
        None => ((16 * n_adj).max(2 * per_axis) as u64).next_power_of_two() as i64,
    };
    let domain = Domain::new(d, delta)?;
    let cell = delta / per_axis as i64;
    let (g, inset) = if d == 1 { (cell, 0) } else { (cell / 2, cell / 4) };
    if g < 2 * q {
        return Err(Error::Infeasible(format!(
            "gadget side {g} cannot hold {q} points per colour per run (n = {n_adj}, s = {s}, Δ = {delta})"
        )));
    }
    let w = witness.resolve(slots as usize, rng)?;
    let mut entries = Vec::with_capacity(2 * n_adj as usize);
    for idx in 0..slots as usize {
        let mut base = Point::default();
        let mut rest = idx;
        for k in 0..d {
            base.0[k] = (rest % per_axis as usize) as i64 * cell + inset;
            rest /= per_axis as usize;
        }
        cube_gadget(&mut entries, base, d, g, q, w == Some(idx), false);
    }
    let pop = q * (1 << (d - 1));
    let declared = match w {
        None => DeclaredCost { value: n_adj as f64, kind: CostKind::Exact, note: "every red point has a blue at distance 1" },
        Some(_) => DeclaredCost {
            value: (n_adj as i64 - pop + pop * (g - 1)) as f64,
            kind: CostKind::Exact,
            note: "near gadgets at unit cost plus the witness's red points at distance g − 1",
        },
    };
    Ok(GadgetInstance {
        points: to_pointset(domain, &entries)?,
        family: [Family::Emd1d, Family::Emd2d, Family::Emd3d][d - 1],
        params: GadgetParams { n: n_adj, requested_n: n, param: s, witness: w, slots: slots as usize, delta },
        declared_cost: Some(declared),
    })
}

/// One-dimensional cell-sampling instances over unit cells.
///
/// `√n/(4c)` segments of `4c√n` cells each. The uniform instance stacks
/// `4c√n` points in the leftmost cell of every segment; the witness segment
/// instead stacks `2c√n` points there and puts one point in each of the next
/// `2c√n` cells. `n` is rounded up to the square of the next multiple of `4c`.
/// The declared cost is the number of non-empty cells.
pub fn gen_cellsampling_lb<R: Rng + ?Sized>(n: u64, c: u64, witness: Witness, rng: &mut R) -> Result<GadgetInstance> {
    if c == 0 {
        return Err(Error::InvalidParameter("c must be positive".into()));
    }
    let root = round_up(ceil_root(n, 2), 4 * c);
    let n_adj = root * root;
    let segments = root / (4 * c);
    let seg_len = (4 * c * root) as i64;
    let delta = n_adj.max(2).next_power_of_two() as i64;
    let domain = Domain::new(1, delta)?;
    let w = witness.resolve(segments as usize, rng)?;
    let mut pts = Vec::with_capacity(n_adj as usize);
    for j in 0..segments as usize {
        let x0 = j as i64 * seg_len;
        if w == Some(j) {
            let half = (2 * c * root) as i64;
            pts.extend(std::iter::repeat_n(Point::new(&[x0]), half as usize));
            pts.extend((1..=half).map(|k| Point::new(&[x0 + k])));
        } else {
            pts.extend(std::iter::repeat_n(Point::new(&[x0]), seg_len as usize));
        }
    }
    let cells = match w {
        None => segments,
        Some(_) => 2 * c * root + segments,
    };
    Ok(GadgetInstance {
        points: PointSet::from_points(domain, Color::Plain, &pts)?,
        family: Family::CellSampling,
        params: GadgetParams { n: n_adj, requested_n: n, param: c, witness: w, slots: segments as usize, delta },
        declared_cost: Some(DeclaredCost { value: cells as f64, kind: CostKind::Exact, note: "non-empty unit cells" }),
    })
}

/// Side lengths of the MST construction for `n = k^6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MstLayout {
    pub k: i64,
    /// Cells per axis, `4k`, so `16k² = 16n^{1/3}` cells in all.
    pub per_axis: i64,
    /// `4k⁵ = 4n^{5/6}`.
    pub cell_side: i64,
    /// `k⁵ = n^{5/6}`.
    pub gadget_side: i64,
    /// Finer cells have side `k = n^{1/6}`, `k⁴ = n^{2/3}` per axis.
    pub fine: i64,
}

impl MstLayout {
    pub fn new(k: i64) -> Self {
        Self { k, per_axis: 4 * k, cell_side: 4 * k.pow(5), gadget_side: k.pow(5), fine: k.pow(4) }
    }

    pub fn cells(&self) -> usize {
        (self.per_axis * self.per_axis) as usize
    }
}

/// One point per diagonal finer cell, relative to the gadget corner.
pub fn strip_gadget(layout: &MstLayout) -> Vec<Point> {
    (0..layout.fine).map(|i| Point::new(&[i * layout.k, i * layout.k])).collect()
}

/// Row `i` holds a point in column `i·k² mod k⁴`.
pub fn uniform_gadget(layout: &MstLayout) -> Vec<Point> {
    let k2 = layout.k * layout.k;
    (0..layout.fine).map(|i| Point::new(&[(i * k2 % layout.fine) * layout.k, i * layout.k])).collect()
}

/// Planar MST instances: a `4k × 4k` grid of cells of side `4k⁵`, each with a
/// gadget of side `k⁵` in its middle. `n` is rounded up to the next sixth
/// power `k^6` (`k ≥ 2`). Every cell gets the strip gadget except the witness,
/// which gets the uniform gadget, so the instance holds
/// `16n^{1/3}·n^{2/3} = 16n` points.
pub fn gen_mst_lb<R: Rng + ?Sized>(n: u64, witness: Witness, rng: &mut R) -> Result<GadgetInstance> {
    let k = ceil_root(n, 6).max(2) as i64;
    let layout = MstLayout::new(k);
    let n_adj = k.pow(6) as u64;
    let delta = ((layout.per_axis * layout.cell_side) as u64).next_power_of_two() as i64;
    let domain = Domain::new(2, delta)?;
    let w = witness.resolve(layout.cells(), rng)?;
    let strip = strip_gadget(&layout);
    let uniform = uniform_gadget(&layout);
    let inset = (layout.cell_side - layout.gadget_side) / 2;
    let mut pts = Vec::with_capacity(16 * n_adj as usize);
    for idx in 0..layout.cells() {
        let x0 = (idx as i64 % layout.per_axis) * layout.cell_side + inset;
        let y0 = (idx as i64 / layout.per_axis) * layout.cell_side + inset;
        let g = if w == Some(idx) { &uniform } else { &strip };
        pts.extend(g.iter().map(|p| Point::new(&[x0 + p.0[0], y0 + p.0[1]])));
    }
    // strip gadgets dominate: 16n^{1/3} of cost Θ(n^{5/6}) each
    let lead = 16.0 * (n_adj as f64).powf(1.0 / 3.0) * (n_adj as f64).powf(5.0 / 6.0);
    Ok(GadgetInstance {
        points: PointSet::from_points(domain, Color::Plain, &pts)?,
        family: Family::Mst,
        params: GadgetParams { n: n_adj, requested_n: n, param: 0, witness: w, slots: layout.cells(), delta },
        declared_cost: Some(DeclaredCost { value: lead, kind: CostKind::Order, note: "n^{7/6}" }),
    })
}
