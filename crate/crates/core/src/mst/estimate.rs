//! Component counts of the thresholded spanner and the MST weight estimate
//! assembled from them.

use std::collections::VecDeque;

use rand::Rng;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::cell_sampling::CellSampler;
use crate::error::{Error, Result};
use crate::geom::QuadCell;
use crate::mst::exact::level_length;
use crate::mst::neighbors::neighbor_cells;
use crate::mst::scale::{preprocess_domain, ScaledOracle};
use crate::oracle::{Estimate, Memoized, QueryLedger, RangeCountOracle};

/// Seeds per component estimate are `⌈SEED_CONSTANT/ε²⌉`.
pub const SEED_CONSTANT: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MstParams {
    pub eps: f64,
    pub seed_constant: f64,
    /// Independent component estimates averaged per level; `⌈log₂Δ'⌉` if unset.
    pub reps: Option<usize>,
}

impl MstParams {
    pub fn new(eps: f64) -> Self {
        Self { eps, seed_constant: SEED_CONSTANT, reps: None }
    }

    pub fn seeds(&self) -> usize {
        (self.seed_constant / (self.eps * self.eps)).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentEstimate {
    pub level: u32,
    /// Quadtree level of the contraction grid.
    pub grid_level: u32,
    pub c_hat: f64,
    pub seeds: usize,
    pub threshold: usize,
    pub n_hat: f64,
}

/// Level whose side is the largest power of two `≤ (1+ε)^i/4`, or 0 when that
/// is below 1; capped at `max_level`.
pub fn contraction_level(eps: f64, i: u32, max_level: u32) -> u32 {
    let quarter = level_length(eps, i as i32) / 4.0;
    if quarter < 1.0 {
        return 0;
    }
    (quarter.log2().floor() as u32).min(max_level)
}

/// `w = ⌈log_{1+ε}(2Δ')⌉`.
pub fn top_level(eps: f64, delta_eff: i64) -> u32 {
    ((2.0 * delta_eff as f64).ln() / (1.0 + eps).ln()).ceil() as u32
}

/// Neighbour lists of one contraction grid, shared by every BFS on it.
#[derive(Debug, Default)]
pub struct NeighborCache {
    lists: FxHashMap<QuadCell, Vec<QuadCell>>,
}

impl NeighborCache {
    fn get<O: RangeCountOracle>(&mut self, o: &O, c: &QuadCell, r: f64, eps: f64, ledger: &mut QueryLedger) -> &[QuadCell] {
        self.lists.entry(*c).or_insert_with(|| neighbor_cells(o, c, r, eps, ledger))
    }
}

/// `β` of one seed: 0 when the BFS passes `t` vertices, 1 when isolated,
/// `d(v)/2m` otherwise.
fn seed_beta<O: RangeCountOracle>(
    o: &O,
    seed: &QuadCell,
    r: f64,
    eps: f64,
    t: usize,
    cache: &mut NeighborCache,
    ledger: &mut QueryLedger,
) -> f64 {
    let deg = cache.get(o, seed, r, eps, ledger).len();
    if deg == 0 {
        return 1.0;
    }
    let mut seen = FxHashSet::default();
    seen.insert(*seed);
    let mut queue = VecDeque::from([*seed]);
    let mut degree_sum = 0usize;
    while let Some(v) = queue.pop_front() {
        let nbrs = cache.get(o, &v, r, eps, ledger).to_vec();
        degree_sum += nbrs.len();
        for u in nbrs {
            if seen.insert(u) {
                if seen.len() > t {
                    return 0.0;
                }
                queue.push_back(u);
            }
        }
    }
    deg as f64 / degree_sum as f64
}

/// `ĉ_i = (n̂/r)·Σ β'_j`, averaged over `reps` fresh cell samples. `n` is the
/// (already queried) size of the input and `o` the rescaled oracle.
#[allow(clippy::too_many_arguments)]
pub fn estimate_components<O: RangeCountOracle, R: Rng + ?Sized>(
    o: &O,
    n: u64,
    i: u32,
    params: &MstParams,
    reps: usize,
    cache: &mut NeighborCache,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<ComponentEstimate> {
    let dom = o.domain();
    let eps = params.eps;
    let w = top_level(eps, dom.delta());
    if i > w {
        return Err(Error::InvalidParameter(format!("level {i} above w = {w}")));
    }
    let grid_level = contraction_level(eps, i, dom.root_level());
    let r = level_length(eps, i as i32);
    let seeds = params.seeds();
    let t = (n as f64).sqrt().ceil() as usize;
    let (mut c_sum, mut n_sum) = (0.0, 0.0);
    for _ in 0..reps.max(1) {
        let sampler = CellSampler::prepare(o, grid_level, n, rng, ledger)?;
        let n_hat = sampler.estimate();
        let beta: f64 = sampler
            .draw_many(seeds, rng)
            .iter()
            .map(|s| seed_beta(o, s, r, eps, t, cache, ledger))
            .sum();
        c_sum += n_hat / seeds as f64 * beta;
        n_sum += n_hat;
    }
    let k = reps.max(1) as f64;
    Ok(ComponentEstimate { level: i, grid_level, c_hat: c_sum / k, seeds, threshold: t, n_hat: n_sum / k })
}

/// `L̂ = σ·(n − (1+ε)^w + ε·Σ_{i<w} (1+ε)^i·ĉ_i)` on the rescaled input.
pub fn estimate_mst<O: RangeCountOracle, R: Rng + ?Sized>(
    o: &O,
    params: &MstParams,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Estimate> {
    let before = ledger.clone();
    let eps = params.eps;
    ledger.set_phase("preprocess");
    let cfg = preprocess_domain(o, eps, ledger)?;
    let scaled = Memoized::new(ScaledOracle { inner: o, config: cfg });
    let n = cfg.n;
    let delta_eff = cfg.effective.delta();
    let w = top_level(eps, delta_eff);
    let reps = params.reps.unwrap_or(cfg.effective.log_delta().max(1) as usize);

    ledger.set_phase("components");
    let mut sum = 0.0;
    for i in 0..w {
        let mut cache = NeighborCache::default();
        let c = estimate_components(&scaled, n, i, params, reps, &mut cache, rng, ledger)?;
        sum += level_length(eps, i as i32) * c.c_hat;
    }
    let eff = n as f64 - level_length(eps, w as i32) + eps * sum;
    let value = cfg.scale as f64 * eff;
    Ok(Estimate::new(value, &before, ledger)
        .with_param("eps", eps)
        .with_param("n", n as f64)
        .with_param("delta_eff", delta_eff as f64)
        .with_param("scale", cfg.scale as f64)
        .with_param("w", w as f64)
        .with_param("seeds", params.seeds() as f64)
        .with_param("reps", reps as f64)
        .with_param("threshold", (n as f64).sqrt().ceil()))
}

/// `8·√n·ε^{-4}·log₂³Δ'`.
pub fn query_ceiling(n: u64, eps: f64, delta_eff: i64) -> f64 {
    let l = (delta_eff as f64).log2();
    8.0 * (n as f64).sqrt() * eps.powi(-4) * l * l * l
}
