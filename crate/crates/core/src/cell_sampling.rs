//! Sampling and counting non-empty cells of an (unshifted) grid.
//!
//! When at most `⌈√n⌉` cells are occupied they are enumerated outright and the
//! sample is exactly uniform. Otherwise `x = ⌈√n·log₂n⌉` uniform points are
//! drawn, each weighted by `n/(x·n_p)` where `n_p` counts its cell; a point is
//! then picked proportionally to weight. The weight sum `m'` estimates the
//! number of occupied cells without bias.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{cell_of, Domain, QuadCell, Shift};
use crate::oracle::{Estimate, QueryLedger, RangeCountOracle};
use crate::primitives::sample_uniform_known;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Enumerated,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSample {
    pub cell: QuadCell,
    /// `m` when enumerated, `m'` otherwise.
    pub weight_sum: f64,
    pub sample_size: usize,
    pub branch: Branch,
}

/// Level of a grid with cell side `r`.
pub fn level_of_side(domain: &Domain, r: i64) -> Result<u32> {
    if r < 1 || r & (r - 1) != 0 || r > 2 * domain.delta() {
        return Err(Error::InvalidParameter(format!("cell side {r} is not a power of two in 1..=2Δ")));
    }
    Ok(r.trailing_zeros())
}

/// All non-empty cells of the grid at `level` with their counts, or `None`
/// once more than `cap` are confirmed at any level of the descent.
pub fn enumerate_nonempty<O: RangeCountOracle>(
    o: &O,
    level: u32,
    cap: usize,
    ledger: &mut QueryLedger,
) -> Option<Vec<(QuadCell, u64)>> {
    let dom = o.domain();
    let root = QuadCell::root(&dom, &Shift::ZERO);
    let n = o.count(&root.rect(&dom), ledger);
    enumerate_below(o, root, n, level, cap, ledger)
}

/// Descent from `top` (whose count is `top_count`) to the grid at `level`.
pub fn enumerate_below<O: RangeCountOracle>(
    o: &O,
    top: QuadCell,
    top_count: u64,
    level: u32,
    cap: usize,
    ledger: &mut QueryLedger,
) -> Option<Vec<(QuadCell, u64)>> {
    let dom = o.domain();
    if top_count == 0 {
        return Some(Vec::new());
    }
    let mut frontier = vec![(top, top_count)];
    while frontier[0].0.level() > level {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for &(c, cnt) in &frontier {
            let nchild = 1usize << dom.dim();
            let mut rest = cnt;
            for i in 0..nchild {
                let child = c.child(i);
                let cc = if i + 1 == nchild {
                    rest
                } else {
                    let r = child.rect(&dom);
                    if r.is_empty() { 0 } else { o.count(&r, ledger) }
                };
                rest -= cc;
                if cc > 0 {
                    next.push((child, cc));
                    if next.len() > cap {
                        return None;
                    }
                }
                if rest == 0 {
                    break;
                }
            }
        }
        frontier = next;
    }
    Some(frontier)
}

/// Prepared sampling state for one grid; draws are free after preparation.
#[derive(Debug, Clone)]
pub enum CellSampler {
    Enumerated(Vec<QuadCell>),
    Weighted { cells: Vec<QuadCell>, weights: Vec<f64>, m_prime: f64 },
}

impl CellSampler {
    /// Runs the enumeration attempt and, if it overflows, the weighted sample.
    /// `n` must be the (already queried) size of the set.
    pub fn prepare<O: RangeCountOracle, R: Rng + ?Sized>(
        o: &O,
        level: u32,
        n: u64,
        rng: &mut R,
        ledger: &mut QueryLedger,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySet);
        }
        let dom = o.domain();
        let cap = (n as f64).sqrt().ceil() as usize;
        let root = QuadCell::root(&dom, &Shift::ZERO);
        if let Some(cells) = enumerate_below(o, root, n, level, cap, ledger) {
            return Ok(CellSampler::Enumerated(cells.into_iter().map(|(c, _)| c).collect()));
        }
        let x = sample_size(n);
        let mut cells = Vec::with_capacity(x);
        let mut weights = Vec::with_capacity(x);
        for _ in 0..x {
            let p = sample_uniform_known(o, n, rng, ledger)?;
            let c = cell_of(&dom, &p, level, &Shift::ZERO);
            let np = o.count(&c.rect(&dom), ledger);
            cells.push(c);
            weights.push(n as f64 / (x as f64 * np as f64));
        }
        let m_prime = weights.iter().sum();
        Ok(CellSampler::Weighted { cells, weights, m_prime })
    }

    pub fn branch(&self) -> Branch {
        match self {
            CellSampler::Enumerated(_) => Branch::Enumerated,
            CellSampler::Weighted { .. } => Branch::Weighted,
        }
    }

    /// Exact `m` or the estimate `m'`.
    pub fn estimate(&self) -> f64 {
        match self {
            CellSampler::Enumerated(c) => c.len() as f64,
            CellSampler::Weighted { m_prime, .. } => *m_prime,
        }
    }

    pub fn sample_size(&self) -> usize {
        match self {
            CellSampler::Enumerated(c) => c.len(),
            CellSampler::Weighted { cells, .. } => cells.len(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> QuadCell {
        match self {
            CellSampler::Enumerated(c) => c[rng.gen_range(0..c.len())],
            CellSampler::Weighted { cells, weights, .. } => {
                let dist = WeightedIndex::new(weights).expect("positive weights");
                cells[dist.sample(rng)]
            }
        }
    }

    /// Many draws sharing one weighted-index table.
    pub fn draw_many<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<QuadCell> {
        match self {
            CellSampler::Enumerated(_) => (0..count).map(|_| self.draw(rng)).collect(),
            CellSampler::Weighted { cells, weights, .. } => {
                let dist = WeightedIndex::new(weights).expect("positive weights");
                (0..count).map(|_| cells[dist.sample(rng)]).collect()
            }
        }
    }
}

/// `x = ⌈√n·log₂n⌉`, at least 1.
pub fn sample_size(n: u64) -> usize {
    let nf = n as f64;
    ((nf.sqrt() * nf.log2()).ceil() as usize).max(1)
}

/// One almost-uniform non-empty cell of side `r`.
pub fn cell_sampling<O: RangeCountOracle, R: Rng + ?Sized>(
    o: &O,
    r: i64,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<CellSample> {
    let dom = o.domain();
    let level = level_of_side(&dom, r)?;
    let n = o.count(&dom.full_rect(), ledger);
    let s = CellSampler::prepare(o, level, n, rng, ledger)?;
    Ok(CellSample { cell: s.draw(rng), weight_sum: s.estimate(), sample_size: s.sample_size(), branch: s.branch() })
}

/// Number of non-empty cells of side `r`: exact when enumerated, `m'` otherwise.
pub fn estimate_nonempty_count<O: RangeCountOracle, R: Rng + ?Sized>(
    o: &O,
    r: i64,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Estimate> {
    let before = ledger.clone();
    let dom = o.domain();
    let level = level_of_side(&dom, r)?;
    let n = o.count(&dom.full_rect(), ledger);
    let s = CellSampler::prepare(o, level, n, rng, ledger)?;
    let exact = if s.branch() == Branch::Enumerated { 1.0 } else { 0.0 };
    Ok(Estimate::new(s.estimate(), &before, ledger)
        .with_param("r", r as f64)
        .with_param("n", n as f64)
        .with_param("x", s.sample_size() as f64)
        .with_param("enumerated", exact))
}
