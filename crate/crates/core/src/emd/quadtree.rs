//! The greedy z-order matching on a shifted quadtree, seen through the oracle.
//!
//! A cell's unmatched points are the tail of the concatenation (in child
//! order) of its children's unmatched sequences; only one colour survives, and
//! there are `|n_r(c) − n_b(c)|` of them. At a leaf the first
//! `min(n_r, n_b)` copies of each colour are matched on the spot.

use rand::Rng;

use crate::emd::{EmdParams, EMD_CONSTANT_C, EMD_CONSTANT_KAPPA};
use crate::error::{Error, Result};
use crate::geom::{cell_of, tree_length_at, Color, Domain, Point, QuadCell, Shift};
use crate::oracle::{ColoredOracle, Estimate, Memoized, QueryLedger, RangeCountOracle};
use crate::primitives::kth_zorder_ranked;

/// A point's partner: its location, which copy at that location, and the
/// level of the cell where the pair was formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mate {
    pub point: Point,
    pub copy: u64,
    pub level: u32,
}

fn counts<O: RangeCountOracle>(co: &ColoredOracle<O>, dom: &Domain, c: &QuadCell, ledger: &mut QueryLedger) -> (u64, u64) {
    let r = c.rect(dom);
    if r.is_empty() {
        return (0, 0);
    }
    (co.red.count(&r, ledger), co.blue.count(&r, ledger))
}

/// Unmatched red and blue surpluses of every child of `c`.
fn child_surpluses<O: RangeCountOracle>(
    co: &ColoredOracle<O>,
    dom: &Domain,
    c: &QuadCell,
    ledger: &mut QueryLedger,
) -> Vec<(u64, u64)> {
    c.children()
        .map(|ch| {
            let (r, b) = counts(co, dom, &ch, ledger);
            (r.saturating_sub(b), b.saturating_sub(r))
        })
        .collect()
}

fn pick(color: Color, pair: (u64, u64)) -> u64 {
    if color == Color::Blue {
        pair.1
    } else {
        pair.0
    }
}

/// Ascends from the leaf of `p`. Returns the cell where copy `copy` of colour
/// `color` at `p` is matched and its rank among the opposite colour's
/// unmatched points in that cell's children, stopping early (with `None`)
/// above `max_level`.
fn ascend<O: RangeCountOracle>(
    co: &ColoredOracle<O>,
    p: &Point,
    color: Color,
    copy: u64,
    shift: &Shift,
    max_level: u32,
    ledger: &mut QueryLedger,
) -> Result<Option<(QuadCell, u64)>> {
    let dom = co.domain();
    let leaf = cell_of(&dom, p, 0, shift);
    let here = counts(co, &dom, &leaf, ledger);
    let own = pick(color, here);
    let opp = pick(color.opposite(), here);
    if copy == 0 || copy > own {
        return Err(Error::RankOutOfRange { k: copy, count: own });
    }
    let matched = own.min(opp);
    if copy <= matched {
        return Ok(Some((leaf, copy)));
    }
    let mut rho = copy - matched;
    let mut cell = leaf;
    while cell.level() < dom.root_level() {
        let parent = cell.parent().expect("below root");
        if parent.level() > max_level {
            return Ok(None);
        }
        let kids = child_surpluses(co, &dom, &parent, ledger);
        let mine = parent.child_rank(&cell);
        let before: u64 = kids[..mine].iter().map(|&k| pick(color, k)).sum();
        let rank = before + rho;
        let opp_total: u64 = kids.iter().map(|&k| pick(color.opposite(), k)).sum();
        if rank <= opp_total {
            return Ok(Some((parent, rank)));
        }
        rho = rank - opp_total;
        cell = parent;
    }
    Err(Error::Infeasible("point left unmatched at the root; |R| ≠ |B|".into()))
}

/// The partner of copy `copy` (1-based) of colour `color` at location `p`
/// under the greedy matching of `shift`.
pub fn find_mate<O: RangeCountOracle>(
    co: &ColoredOracle<O>,
    p: &Point,
    color: Color,
    copy: u64,
    shift: &Shift,
    ledger: &mut QueryLedger,
) -> Result<Mate> {
    let dom = co.domain();
    let (cell, rank) = ascend(co, p, color, copy, shift, u32::MAX, ledger)?
        .expect("unbounded ascent always resolves");
    if cell.level() == 0 {
        return Ok(Mate { point: *p, copy, level: 0 });
    }
    let want = color.opposite();
    let level = cell.level();
    // `pos` indexes the concatenated unmatched `want` sequence of `cell`'s children
    let mut cell = cell;
    let mut pos = rank;
    loop {
        let kids = child_surpluses(co, &dom, &cell, ledger);
        let mut k = 0;
        while pos > pick(want, kids[k]) {
            pos -= pick(want, kids[k]);
            k += 1;
        }
        let child = cell.child(k);
        if child.level() == 0 {
            let (r, b) = counts(co, &dom, &child, ledger);
            return Ok(Mate { point: Point(*child.rect(&dom).lo()), copy: r.min(b) + pos, level });
        }
        let grand = child_surpluses(co, &dom, &child, ledger);
        let ur: u64 = grand.iter().map(|g| g.0).sum();
        let ub: u64 = grand.iter().map(|g| g.1).sum();
        pos += ur.min(ub);
        cell = child;
    }
}

/// Level of the cell where the given copy is matched, if at most `max_level`.
pub fn mate_level<O: RangeCountOracle>(
    co: &ColoredOracle<O>,
    p: &Point,
    color: Color,
    copy: u64,
    shift: &Shift,
    max_level: u32,
    ledger: &mut QueryLedger,
) -> Result<Option<u32>> {
    Ok(ascend(co, p, color, copy, shift, max_level, ledger)?.map(|(c, _)| c.level()))
}

/// Levels at or above the returned value hold the long edges:
/// `⌈log₂(Δ / s^{1/d})⌉`, clamped to the tree.
pub fn short_cutoff(dom: &Domain, s: u64) -> u32 {
    let d = dom.dim() as f64;
    let v = (dom.delta() as f64 / (s as f64).powf(1.0 / d)).log2().ceil();
    (v.max(1.0) as u32).min(dom.root_level())
}

/// Exact ℓ-length of the matching edges formed in cells of level ≥ `cutoff`,
/// from the red/blue counts of every non-empty cell at levels ≥ `cutoff − 1`.
pub fn long_edge_cost<O: RangeCountOracle>(
    co: &ColoredOracle<O>,
    n: u64,
    shift: &Shift,
    cutoff: u32,
    ledger: &mut QueryLedger,
) -> u64 {
    let dom = co.domain();
    let mut frontier = vec![(QuadCell::root(&dom, shift), n, n)];
    let mut total = 0;
    let nchild = 1usize << dom.dim();
    while let Some(&(c0, _, _)) = frontier.first() {
        if c0.level() < cutoff.max(1) {
            break;
        }
        let mut next = Vec::new();
        for &(c, nr, nb) in &frontier {
            let (mut rr, mut rb) = (nr, nb);
            let (mut ur, mut ub) = (0, 0);
            for k in 0..nchild {
                let child = c.child(k);
                let (kr, kb) = if k + 1 == nchild {
                    (rr, rb)
                } else if rr == 0 && rb == 0 {
                    (0, 0)
                } else {
                    let r = child.rect(&dom);
                    if r.is_empty() {
                        (0, 0)
                    } else {
                        let kr = if rr == 0 { 0 } else { co.red.count(&r, ledger) };
                        let kb = if rb == 0 { 0 } else { co.blue.count(&r, ledger) };
                        (kr, kb)
                    }
                };
                rr -= kr;
                rb -= kb;
                ur += kr.saturating_sub(kb);
                ub += kb.saturating_sub(kr);
                if kr + kb > 0 {
                    next.push((child, kr, kb));
                }
            }
            total += ur.min(ub) * tree_length_at(c.level());
        }
        frontier = next;
    }
    total
}

/// Estimator for `d ≥ 2`: exact long part plus sampled short classes, the
/// smallest result over several random shifts.
pub fn estimate_emd<O: RangeCountOracle, R: Rng + ?Sized>(
    co: &ColoredOracle<O>,
    params: &EmdParams,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Estimate> {
    let dom = co.domain();
    let before = ledger.clone();
    let memo = ColoredOracle { red: Memoized::new(&co.red), blue: Memoized::new(&co.blue) };
    ledger.set_phase("size");
    let n = memo.red.count(&dom.full_rect(), ledger);
    let s = params.s;
    if s < 2 || s > n.max(2) {
        return Err(Error::InvalidParameter(format!("s = {s} outside 2..=n ({n})")));
    }
    let log_delta = dom.log_delta().max(1) as f64;
    let cutoff = short_cutoff(&dom, s);
    // a pair formed at level j ≥ 1 has length 2^{j+2} − 4, which lies in class j + 2
    let t = cutoff as usize + 1;
    let x = params.sample_size(log_delta);
    let reps = params.class_reps(log_delta);
    let shifts = params.shift_reps(log_delta);
    let mut best_value = f64::INFINITY;
    let (mut best_long, mut best_short) = (0.0, 0.0);
    for _ in 0..shifts {
        let shift = Shift::random(&dom, rng);
        // answers depend on the shift only through the rect, so the cache carries over
        ledger.set_phase("long");
        let long = long_edge_cost(&memo, n, &shift, cutoff, ledger) as f64;
        ledger.set_phase("short");
        let root = QuadCell::root(&dom, &shift);
        let mut best = vec![f64::INFINITY; t + 1];
        for _ in 0..reps {
            let mut hits = vec![0u64; t + 1];
            for _ in 0..x {
                let k = rng.gen_range(1..=n);
                let (p, copy) = kth_zorder_ranked(&memo.red, &root, n, k, ledger)?;
                if let Some(j) = mate_level(&memo, &p, Color::Red, copy, &shift, cutoff - 1, ledger)? {
                    if j >= 1 {
                        hits[j as usize + 2] += 1;
                    }
                }
            }
            for i in 1..=t {
                best[i] = best[i].min(hits[i] as f64 * n as f64 / x as f64);
            }
        }
        let short: f64 = (1..=t).map(|i| best[i] * (1u64 << i) as f64).sum();
        if short + long < best_value {
            best_value = short + long;
            best_long = long;
            best_short = short;
        }
    }
    Ok(Estimate::new(best_value, &before, ledger)
        .with_param("s", s as f64)
        .with_param("n", n as f64)
        .with_param("d", dom.dim() as f64)
        .with_param("x", x as f64)
        .with_param("class_reps", reps as f64)
        .with_param("shifts", shifts as f64)
        .with_param("cutoff_level", cutoff as f64)
        .with_param("classes", t as f64)
        .with_param("long", best_long)
        .with_param("short", best_short)
        .with_param("C", EMD_CONSTANT_C)
        .with_param("kappa", EMD_CONSTANT_KAPPA))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emd::{greedy_matching_cost_exact, simulate_greedy_matching};
    use crate::oracle::ExactOracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn colored(dom: Domain, r: &[Point], b: &[Point]) -> ColoredOracle<ExactOracle> {
        ColoredOracle::new(ExactOracle::build(dom, r).unwrap(), ExactOracle::build(dom, b).unwrap()).unwrap()
    }

    fn copy_numbers(pts: &[Point]) -> Vec<u64> {
        (0..pts.len()).map(|i| 1 + pts[..i].iter().filter(|q| **q == pts[i]).count() as u64).collect()
    }

    #[test]
    fn single_pair_mates_each_other() {
        let dom = Domain::new(2, 16).unwrap();
        let r = [Point::new(&[1, 14])];
        let b = [Point::new(&[12, 3])];
        let co = colored(dom, &r, &b);
        let mut l = QueryLedger::new();
        let m = find_mate(&co, &r[0], Color::Red, 1, &Shift::ZERO, &mut l).unwrap();
        assert_eq!((m.point, m.copy), (b[0], 1));
        let back = find_mate(&co, &b[0], Color::Blue, 1, &Shift::ZERO, &mut l).unwrap();
        assert_eq!(back.point, r[0]);
    }

    #[test]
    fn coinciding_pair_matches_at_leaf() {
        let dom = Domain::new(2, 16).unwrap();
        let p = [Point::new(&[5, 5])];
        let co = colored(dom, &p, &p);
        let mut l = QueryLedger::new();
        let m = find_mate(&co, &p[0], Color::Red, 1, &Shift::ZERO, &mut l).unwrap();
        assert_eq!((m.point, m.level), (p[0], 0));
    }

    #[test]
    fn find_mate_matches_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in 1..=3 {
            let dom = Domain::new(d, 16).unwrap();
            for _ in 0..6 {
                let n = rng.gen_range(1..=60);
                let mut gen = || Point::new(&(0..d).map(|_| rng.gen_range(0..16)).collect::<Vec<_>>());
                let r: Vec<Point> = (0..n).map(|_| gen()).collect();
                let b: Vec<Point> = (0..n).map(|_| gen()).collect();
                let co = colored(dom, &r, &b);
                let (rc, bc) = (copy_numbers(&r), copy_numbers(&b));
                for _ in 0..4 {
                    let shift = Shift::random(&dom, &mut rng);
                    let mut l = QueryLedger::new();
                    for e in simulate_greedy_matching(&dom, &r, &b, &shift).unwrap() {
                        let m = find_mate(&co, &r[e.red], Color::Red, rc[e.red], &shift, &mut l).unwrap();
                        assert_eq!((m.point, m.copy, m.level), (b[e.blue], bc[e.blue], e.level));
                        let back = find_mate(&co, &m.point, Color::Blue, m.copy, &shift, &mut l).unwrap();
                        assert_eq!((back.point, back.copy), (r[e.red], rc[e.red]));
                        let lv = mate_level(&co, &r[e.red], Color::Red, rc[e.red], &shift, e.level, &mut l).unwrap();
                        assert_eq!(lv, Some(e.level));
                        if e.level > 0 {
                            let lv = mate_level(&co, &r[e.red], Color::Red, rc[e.red], &shift, e.level - 1, &mut l);
                            assert_eq!(lv.unwrap(), None);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn long_cost_with_zero_cutoff_is_full_greedy_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let dom = Domain::new(2, 64).unwrap();
        for _ in 0..10 {
            let r: Vec<Point> = (0..80).map(|_| Point::new(&[rng.gen_range(0..64), rng.gen_range(0..64)])).collect();
            let b: Vec<Point> = (0..80).map(|_| Point::new(&[rng.gen_range(0..64), rng.gen_range(0..64)])).collect();
            let co = colored(dom, &r, &b);
            let shift = Shift::random(&dom, &mut rng);
            let mut l = QueryLedger::new();
            let want = greedy_matching_cost_exact(&dom, &r, &b, &shift).unwrap();
            assert_eq!(long_edge_cost(&co, 80, &shift, 0, &mut l), want);
            for cutoff in 1..=dom.root_level() {
                let sim: u64 = simulate_greedy_matching(&dom, &r, &b, &shift)
                    .unwrap()
                    .iter()
                    .filter(|e| e.level >= cutoff)
                    .map(|e| tree_length_at(e.level))
                    .sum();
                assert_eq!(long_edge_cost(&co, 80, &shift, cutoff, &mut l), sim);
            }
        }
    }

    #[test]
    fn identical_sets_estimate_zero() {
        let dom = Domain::new(2, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p: Vec<Point> = (0..40).map(|_| Point::new(&[rng.gen_range(0..64), rng.gen_range(0..64)])).collect();
        let co = colored(dom, &p, &p);
        let mut l = QueryLedger::new();
        let e = estimate_emd(&co, &EmdParams::new(4), &mut rng, &mut l).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.queries_used, l.total());
    }
}
