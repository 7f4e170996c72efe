//! Traversing the spanner through cells: which same-level cells are joined to
//! a given cell by a spanner edge of length at most `r`.

use crate::geom::{Domain, QuadCell, Shift};
use crate::mst::wspd::{in_wspd_unordered, representative, size, well_separated};
use crate::oracle::{QueryLedger, RangeCountOracle};

/// `i*` with `2^{i*} ≤ εr/10 < 2^{i*+1}`, clamped to `0..=cap`.
pub fn witness_level(eps: f64, r: f64, cap: u32) -> u32 {
    let x = eps * r / 10.0;
    if x < 2.0 {
        return 0;
    }
    (x.log2().floor() as u32).min(cap)
}

fn nonempty<O: RangeCountOracle>(o: &O, dom: &Domain, c: &QuadCell, ledger: &mut QueryLedger) -> bool {
    let rect = c.rect(dom);
    !rect.is_empty() && o.count(&rect, ledger) > 0
}

/// Whether `(x, y)` itself is a witness for an edge of length `≤ r`.
pub fn is_witness(dom: &Domain, x: &QuadCell, y: &QuadCell, r: f64, eps: f64) -> bool {
    let d = x.distance(y);
    if well_separated(x, y, eps) {
        d <= r && in_wspd_unordered(dom, x, y, eps)
    } else {
        d + size(x) + size(y) <= r
    }
}

/// Cells of the same level as `c`, other than `c`, that hold a point and are
/// joined to `c` by a witness pair of non-empty subcells of level `≥ i*` whose
/// levels differ by at most one. Candidate cells lie within box distance `r`
/// of `c`; subcell pairs are pruned once their box distance exceeds `r`.
/// When `c` is smaller than `εr`, WSPD pairs of ancestors can also produce an
/// edge between the two cells; those are checked through their
/// representatives. Returned in index order.
pub fn neighbor_cells<O: RangeCountOracle>(
    o: &O,
    c: &QuadCell,
    r: f64,
    eps: f64,
    ledger: &mut QueryLedger,
) -> Vec<QuadCell> {
    let dom = o.domain();
    let istar = witness_level(eps, r, c.level());
    let side = c.side();
    // ancestors up to size εr can pair up; their representatives may then sit
    // further apart than r
    let coarse = coarse_limit(c, r, eps);
    let centre_limit = r + 1.5 * std::f64::consts::SQRT_2 * coarse;
    let reach = (r.max(centre_limit) / side as f64).floor() as i64 + 1;
    let d = dom.dim();
    let mut out = Vec::new();
    let mut offset = vec![-reach; d];
    loop {
        if offset.iter().any(|&k| k != 0) {
            let idx: Vec<i64> = c.index().iter().zip(&offset).map(|(a, b)| a + b).collect();
            let cand = QuadCell::from_index(&dom, c.level(), &idx, &Shift::ZERO);
            if (c.gap(&cand) <= r || (coarse > 0.0 && c.distance(&cand) <= centre_limit))
                && nonempty(o, &dom, &cand, ledger)
                && (search(o, &dom, c, &cand, r, eps, istar, ledger) || coarse_pair(o, &dom, c, &cand, r, eps, ledger))
            {
                out.push(cand);
            }
        }
        // odometer over the offset box
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if offset[k] < reach {
                offset[k] += 1;
                break;
            }
            offset[k] = -reach;
        }
    }
}

/// Largest side of a strict ancestor of `c` that fits `εr`, or 0.
fn coarse_limit(c: &QuadCell, r: f64, eps: f64) -> f64 {
    let twice = (2 * c.side()) as f64;
    if twice > eps * r {
        0.0
    } else {
        2f64.powi((eps * r).log2().floor() as i32)
    }
}

/// A WSPD pair `(X, Y)` with `X ⊇ c`, `Y ⊇ c'`, at least one strictly larger
/// than `c`, `d(X,Y) ≤ r`, whose representatives lie in `c` and `c'`.
fn coarse_pair<O: RangeCountOracle>(
    o: &O,
    dom: &Domain,
    c: &QuadCell,
    c2: &QuadCell,
    r: f64,
    eps: f64,
    ledger: &mut QueryLedger,
) -> bool {
    let base = c.level();
    let top = dom.root_level();
    let mut lx = base;
    while lx <= top && (1i64 << lx) as f64 <= eps * r {
        for ly in lx.saturating_sub(1).max(base)..=(lx + 1).min(top) {
            if lx == base && ly == base {
                continue;
            }
            let (x, y) = (c.ancestor(lx), c2.ancestor(ly));
            if x.distance(&y) > r || !well_separated(&x, &y, eps) || !in_wspd_unordered(dom, &x, &y, eps) {
                continue;
            }
            let inside = |cell: &QuadCell, target: &QuadCell, ledger: &mut QueryLedger| {
                representative(o, cell, ledger).map(|p| target.contains_point(&p)).unwrap_or(false)
            };
            if inside(&x, c, ledger) && inside(&y, c2, ledger) {
                return true;
            }
        }
        lx += 1;
    }
    false
}

/// `x` and `y` share a level. Checks the pair, then every pair with one side
/// replaced by a child, then recurses into equal-level child pairs.
#[allow(clippy::too_many_arguments)]
fn search<O: RangeCountOracle>(
    o: &O,
    dom: &Domain,
    x: &QuadCell,
    y: &QuadCell,
    r: f64,
    eps: f64,
    istar: u32,
    ledger: &mut QueryLedger,
) -> bool {
    if is_witness(dom, x, y, r, eps) {
        return true;
    }
    if x.gap(y) > r || x.level() <= istar {
        return false;
    }
    let xs: Vec<QuadCell> = x.children().filter(|g| nonempty(o, dom, g, ledger)).collect();
    let ys: Vec<QuadCell> = y.children().filter(|g| nonempty(o, dom, g, ledger)).collect();
    if xs.iter().any(|g| is_witness(dom, g, y, r, eps)) || ys.iter().any(|h| is_witness(dom, x, h, r, eps)) {
        return true;
    }
    for g in &xs {
        for h in &ys {
            if search(o, dom, g, h, r, eps, istar, ledger) {
                return true;
            }
        }
    }
    false
}
