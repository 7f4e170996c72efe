//! Exact baselines with direct point access.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::geom::{cell_of, Domain, Point, QuadCell, Shift};
use crate::hungarian::min_cost_assignment;

/// Largest instance [`exact_emd`] accepts.
pub const EXACT_EMD_CAP: usize = 1024;

fn check_sizes(red: &[Point], blue: &[Point]) -> Result<()> {
    if red.len() != blue.len() {
        return Err(Error::SizeMismatch { red: red.len(), blue: blue.len() });
    }
    Ok(())
}

/// Optimal 1D matching cost: the k-th leftmost red goes to the k-th leftmost blue.
pub fn exact_emd_1d(red: &[Point], blue: &[Point]) -> Result<i64> {
    check_sizes(red, blue)?;
    let mut r: Vec<i64> = red.iter().map(|p| p.0[0]).collect();
    let mut b: Vec<i64> = blue.iter().map(|p| p.0[0]).collect();
    r.sort_unstable();
    b.sort_unstable();
    Ok(r.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum())
}

/// Minimum-cost perfect matching under Euclidean distance.
pub fn exact_emd(red: &[Point], blue: &[Point]) -> Result<f64> {
    check_sizes(red, blue)?;
    if red.len() > EXACT_EMD_CAP {
        return Err(Error::CapExceeded { n: red.len(), cap: EXACT_EMD_CAP });
    }
    let cost: Vec<Vec<f64>> = red.iter().map(|r| blue.iter().map(|b| r.dist(b)).collect()).collect();
    Ok(min_cost_assignment(&cost).0)
}

/// `ℓ(M) = Σ_i Σ_{c ∈ G_i} |n_r(c) − n_b(c)|·2^{i+1}`, by bucketing at every level.
pub fn greedy_matching_cost_exact(domain: &Domain, red: &[Point], blue: &[Point], shift: &Shift) -> Result<u64> {
    check_sizes(red, blue)?;
    let mut total = 0u64;
    for level in 0..domain.root_level() {
        let mut buckets: FxHashMap<[i64; 3], i64> = FxHashMap::default();
        for p in red {
            let c = cell_of(domain, p, level, shift);
            *buckets.entry(key(&c)).or_default() += 1;
        }
        for p in blue {
            let c = cell_of(domain, p, level, shift);
            *buckets.entry(key(&c)).or_default() -= 1;
        }
        let surplus: u64 = buckets.values().map(|v| v.unsigned_abs()).sum();
        total += surplus << (level + 1);
    }
    Ok(total)
}

fn key(c: &QuadCell) -> [i64; 3] {
    let mut k = [0; 3];
    k[..c.dim()].copy_from_slice(c.index());
    k
}

/// One edge of the greedy matching: input indices and the level of the cell
/// where the two points were paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyEdge {
    pub red: usize,
    pub blue: usize,
    pub level: u32,
}

/// Runs the bottom-up z-order greedy matching on explicit points. Points that
/// share a location are ordered by their input position.
pub fn simulate_greedy_matching(domain: &Domain, red: &[Point], blue: &[Point], shift: &Shift) -> Result<Vec<GreedyEdge>> {
    check_sizes(red, blue)?;
    let mut edges = Vec::with_capacity(red.len());
    let root = QuadCell::root(domain, shift);
    let reds: Vec<usize> = (0..red.len()).collect();
    let blues: Vec<usize> = (0..blue.len()).collect();
    let (ur, ub) = simulate_cell(domain, red, blue, shift, root, reds, blues, &mut edges);
    debug_assert!(ur.is_empty() && ub.is_empty());
    Ok(edges)
}

#[allow(clippy::too_many_arguments)]
fn simulate_cell(
    domain: &Domain,
    red: &[Point],
    blue: &[Point],
    shift: &Shift,
    cell: QuadCell,
    reds: Vec<usize>,
    blues: Vec<usize>,
    edges: &mut Vec<GreedyEdge>,
) -> (Vec<usize>, Vec<usize>) {
    let (mut ur, mut ub) = if cell.level() == 0 {
        (reds, blues)
    } else {
        let nchild = 1usize << domain.dim();
        let mut rparts = vec![Vec::new(); nchild];
        let mut bparts = vec![Vec::new(); nchild];
        for &i in &reds {
            rparts[cell.child_rank(&cell_of(domain, &red[i], cell.level() - 1, shift))].push(i);
        }
        for &i in &blues {
            bparts[cell.child_rank(&cell_of(domain, &blue[i], cell.level() - 1, shift))].push(i);
        }
        let (mut ur, mut ub) = (Vec::new(), Vec::new());
        for (k, (rp, bp)) in rparts.into_iter().zip(bparts).enumerate() {
            if rp.is_empty() && bp.is_empty() {
                continue;
            }
            let (r, b) = simulate_cell(domain, red, blue, shift, cell.child(k), rp, bp, edges);
            ur.extend(r);
            ub.extend(b);
        }
        (ur, ub)
    };
    let m = ur.len().min(ub.len());
    for (&r, &b) in ur[..m].iter().zip(ub[..m].iter()) {
        edges.push(GreedyEdge { red: r, blue: b, level: cell.level() });
    }
    (ur.split_off(m), ub.split_off(m))
}
