//! Discrete-domain geometry: points, closed ranges, (shifted) quadtree cells,
//! z-order and the quadtree tree metric.
//!
//! A shifted quadtree with shift `v` is the standard dyadic grid laid over the
//! translated domain `[0, Δ)^d + v`. Its root has side `2Δ` (level
//! `log₂Δ + 1`), so the whole domain sits inside the root for every shift in
//! `[0, Δ)^d`. Clipping a shifted cell back to the domain always yields a single
//! [`Rect`], so every cell query is one oracle call.

use std::cmp::Ordering;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// The discrete space `[Δ]^d` with `Δ` a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Domain {
    dim: usize,
    delta: i64,
}

impl Domain {
    pub fn new(dim: usize, delta: i64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidDomain(format!("dimension {dim} not in 1..=3")));
        }
        if delta < 1 || (delta & (delta - 1)) != 0 {
            return Err(Error::InvalidDomain(format!("Δ = {delta} is not a power of two")));
        }
        if delta > 1 << 30 {
            return Err(Error::InvalidDomain(format!("Δ = {delta} exceeds 2^30")));
        }
        Ok(Self { dim, delta })
    }

    /// Smallest power-of-two domain whose side is at least `extent`.
    pub fn padded(dim: usize, extent: i64) -> Result<Self> {
        let delta = (extent.max(1) as u64).next_power_of_two() as i64;
        Self::new(dim, delta)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> i64 {
        self.delta
    }

    pub fn log_delta(&self) -> u32 {
        self.delta.trailing_zeros()
    }

    /// Level of the root cell (side `2Δ`).
    pub fn root_level(&self) -> u32 {
        self.log_delta() + 1
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.0[..self.dim].iter().all(|&x| (0..self.delta).contains(&x))
            && p.0[self.dim..].iter().all(|&x| x == 0)
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { point: p.coords(self.dim).to_vec(), delta: self.delta, dim: self.dim })
        }
    }

    pub fn full_rect(&self) -> Rect {
        let mut hi = [0; MAX_DIM];
        hi[..self.dim].fill(self.delta - 1);
        Rect { lo: [0; MAX_DIM], hi }
    }
}

/// Point colour; plain points belong to uncoloured inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Red,
    Blue,
    Plain,
}

impl Color {
    pub fn tag(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Blue => 'B',
            Color::Plain => 'P',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "R" => Some(Color::Red),
            "B" => Some(Color::Blue),
            "P" => Some(Color::Plain),
            _ => None,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
            Color::Plain => Color::Plain,
        }
    }
}

/// An integer point. Axes beyond the domain dimension are always zero, so the
/// derived ordering is the lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Point(pub [i64; MAX_DIM]);

impl Point {
    pub fn new(coords: &[i64]) -> Self {
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point(c)
    }

    pub fn coords(&self, dim: usize) -> &[i64] {
        &self.0[..dim]
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.dist2(other) as f64).sqrt()
    }

    pub fn dist2(&self, other: &Point) -> i64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// Closed axis-aligned range `[lo, hi]`. All empty ranges are canonicalised to
/// [`Rect::EMPTY`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    lo: [i64; MAX_DIM],
    hi: [i64; MAX_DIM],
}

impl Rect {
    pub const EMPTY: Rect = Rect { lo: [1, 1, 1], hi: [0, 0, 0] };

    /// Builds `[lo, hi]` clipped to the domain.
    pub fn new(domain: &Domain, lo: &[i64], hi: &[i64]) -> Rect {
        let mut r = Rect { lo: [0; MAX_DIM], hi: [0; MAX_DIM] };
        for k in 0..domain.dim() {
            r.lo[k] = lo[k].max(0);
            r.hi[k] = hi[k].min(domain.delta() - 1);
            if r.lo[k] > r.hi[k] {
                return Rect::EMPTY;
            }
        }
        r
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(self.hi.iter()).any(|(a, b)| a > b)
    }

    pub fn lo(&self) -> &[i64; MAX_DIM] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64; MAX_DIM] {
        &self.hi
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..MAX_DIM).all(|k| self.lo[k] <= p.0[k] && p.0[k] <= self.hi[k])
    }

    /// Replaces the bounds on one axis, keeping the others.
    pub fn with_axis(&self, axis: usize, lo: i64, hi: i64) -> Rect {
        if self.is_empty() || lo > hi {
            return Rect::EMPTY;
        }
        let mut r = *self;
        r.lo[axis] = lo;
        r.hi[axis] = hi;
        r
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        let mut r = *self;
        for k in 0..MAX_DIM {
            r.lo[k] = r.lo[k].max(other.lo[k]);
            r.hi[k] = r.hi[k].min(other.hi[k]);
            if r.lo[k] > r.hi[k] {
                return Rect::EMPTY;
            }
        }
        r
    }
}

/// The random translation of a shifted quadtree. `Shift::ZERO` is the plain
/// quadtree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Shift {
    v: [i64; MAX_DIM],
    seed: Option<u64>,
}

impl Shift {
    pub const ZERO: Shift = Shift { v: [0; MAX_DIM], seed: None };

    pub fn new(domain: &Domain, v: &[i64]) -> Result<Self> {
        let p = Point::new(v);
        domain.check(&p)?;
        Ok(Shift { v: p.0, seed: None })
    }

    /// Uniform shift in `[0, Δ)^d`.
    pub fn random<R: Rng + ?Sized>(domain: &Domain, rng: &mut R) -> Self {
        let mut v = [0; MAX_DIM];
        for x in v.iter_mut().take(domain.dim()) {
            *x = rng.gen_range(0..domain.delta());
        }
        Shift { v, seed: None }
    }

    /// Reproducible shift drawn from its own seeded stream.
    pub fn from_seed(domain: &Domain, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Self::random(domain, &mut rng);
        s.seed = Some(seed);
        s
    }

    pub fn vector(&self) -> &[i64; MAX_DIM] {
        &self.v
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// A cell of a (possibly shifted) quadtree: side `2^level`, index `idx` in the
/// shifted frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadCell {
    dim: u8,
    level: u32,
    idx: [i64; MAX_DIM],
    v: [i64; MAX_DIM],
}

impl QuadCell {
    pub fn root(domain: &Domain, shift: &Shift) -> Self {
        QuadCell { dim: domain.dim() as u8, level: domain.root_level(), idx: [0; MAX_DIM], v: shift.v }
    }

    /// Builds a cell from explicit indices.
    pub fn from_index(domain: &Domain, level: u32, idx: &[i64], shift: &Shift) -> Self {
        let mut i = [0; MAX_DIM];
        i[..domain.dim()].copy_from_slice(&idx[..domain.dim()]);
        QuadCell { dim: domain.dim() as u8, level, idx: i, v: shift.v }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> &[i64] {
        &self.idx[..self.dim()]
    }

    pub fn shift_vector(&self) -> &[i64; MAX_DIM] {
        &self.v
    }

    pub fn side(&self) -> i64 {
        1 << self.level
    }

    /// The cell clipped to the domain, in original coordinates.
    pub fn rect(&self, domain: &Domain) -> Rect {
        let side = self.side();
        let mut lo = [0; MAX_DIM];
        let mut hi = [0; MAX_DIM];
        for k in 0..self.dim() {
            lo[k] = self.idx[k] * side - self.v[k];
            hi[k] = lo[k] + side - 1;
        }
        Rect::new(domain, &lo, &hi)
    }

    pub fn parent(&self) -> Option<QuadCell> {
        let mut p = *self;
        p.level += 1;
        for k in 0..self.dim() {
            p.idx[k] >>= 1;
        }
        Some(p)
    }

    /// Ancestor at `level` (or the cell itself).
    pub fn ancestor(&self, level: u32) -> QuadCell {
        debug_assert!(level >= self.level);
        let up = level - self.level;
        let mut a = *self;
        a.level = level;
        for k in 0..self.dim() {
            a.idx[k] >>= up;
        }
        a
    }

    /// The `2^d` children in lexicographic order of their centres.
    pub fn children(&self) -> impl Iterator<Item = QuadCell> + '_ {
        let d = self.dim();
        debug_assert!(self.level > 0);
        (0..1usize << d).map(move |k| self.child(k))
    }

    /// Child number `k` in lexicographic order (axis 0 most significant).
    pub fn child(&self, k: usize) -> QuadCell {
        let d = self.dim();
        let mut c = *self;
        c.level -= 1;
        for a in 0..d {
            c.idx[a] = 2 * self.idx[a] + ((k >> (d - 1 - a)) & 1) as i64;
        }
        c
    }

    /// Position of `child` among this cell's children.
    pub fn child_rank(&self, child: &QuadCell) -> usize {
        let d = self.dim();
        (0..d).fold(0, |acc, a| (acc << 1) | (child.idx[a] & 1) as usize)
    }

    pub fn contains_cell(&self, other: &QuadCell) -> bool {
        other.level <= self.level && other.ancestor(self.level).idx == self.idx
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        (0..self.dim()).all(|k| (p.0[k] + self.v[k]) >> self.level == self.idx[k])
    }

    /// Centre in the shifted frame.
    pub fn center(&self) -> [f64; MAX_DIM] {
        let half = self.side() as f64 / 2.0;
        let mut c = [0.0; MAX_DIM];
        for k in 0..self.dim() {
            c[k] = (self.idx[k] * self.side()) as f64 + half;
        }
        c
    }

    /// Euclidean distance between the two cell centres.
    pub fn distance(&self, other: &QuadCell) -> f64 {
        let (a, b) = (self.center(), other.center());
        a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    /// Smallest Euclidean distance between the two closed cell boxes.
    pub fn gap(&self, other: &QuadCell) -> f64 {
        let mut s = 0.0;
        for k in 0..self.dim() {
            let (alo, ahi) = (self.idx[k] * self.side(), (self.idx[k] + 1) * self.side());
            let (blo, bhi) = (other.idx[k] * other.side(), (other.idx[k] + 1) * other.side());
            let g = (blo - ahi).max(alo - bhi).max(0) as f64;
            s += g * g;
        }
        s.sqrt()
    }
}

/// The unique cell of side `2^level` containing `p` in the given shifted tree.
pub fn cell_of(domain: &Domain, p: &Point, level: u32, shift: &Shift) -> QuadCell {
    let mut idx = [0; MAX_DIM];
    for k in 0..domain.dim() {
        idx[k] = (p.0[k] + shift.v[k]) >> level;
    }
    QuadCell { dim: domain.dim() as u8, level, idx, v: shift.v }
}

/// Euclidean distance between cell centres.
pub fn cell_distance(c: &QuadCell, c2: &QuadCell) -> f64 {
    c.distance(c2)
}

/// Interleaved key realising the z-order of the shifted quadtree: within each
/// bit position axis 0 is most significant, matching the lexicographic order
/// of child centres.
pub fn z_order_key(domain: &Domain, p: &Point, shift: &Shift) -> u128 {
    let d = domain.dim();
    let mut key = 0u128;
    for bit in (0..domain.root_level()).rev() {
        for k in 0..d {
            key = (key << 1) | (((p.0[k] + shift.v[k]) >> bit) & 1) as u128;
        }
    }
    key
}

pub fn z_order_cmp(domain: &Domain, p: &Point, q: &Point, shift: &Shift) -> Ordering {
    z_order_key(domain, p, shift).cmp(&z_order_key(domain, q, shift))
}

/// A length under the quadtree metric ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TreeDist(pub u64);

/// Level of the lowest shifted cell containing both points (0 iff `p == q`).
pub fn meeting_level(domain: &Domain, p: &Point, q: &Point, shift: &Shift) -> u32 {
    let diff = (0..domain.dim())
        .map(|k| ((p.0[k] + shift.v[k]) ^ (q.0[k] + shift.v[k])) as u64)
        .fold(0, |a, b| a | b);
    64 - diff.leading_zeros()
}

/// ℓ-length of an edge whose endpoints first meet at `level`: `2^{level+2} − 4`.
pub fn tree_length_at(level: u32) -> u64 {
    (1u64 << (level + 2)) - 4
}

/// Tree-metric distance: leaf-to-leaf path length in the shifted quadtree
/// whose edge from level `i` to `i + 1` weighs `2^{i+1}`.
pub fn tree_distance(domain: &Domain, p: &Point, q: &Point, shift: &Shift) -> TreeDist {
    TreeDist(tree_length_at(meeting_level(domain, p, q, shift)))
}
