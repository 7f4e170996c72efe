//! Oracle subroutines: k-th point selection, uniform sampling and bounding
//! squares.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{cell_of, Domain, Point, QuadCell, Rect, Shift, MAX_DIM};
use crate::oracle::{QueryLedger, RangeCountOracle};

/// The lexicographically `k`-th point (1-based, with multiplicity) inside `q`.
pub fn kth_lex<O: RangeCountOracle>(o: &O, q: &Rect, k: u64, ledger: &mut QueryLedger) -> Result<Point> {
    let total = o.count(q, ledger);
    kth_lex_known(o, q, total, k, ledger)
}

/// [`kth_lex`] when the caller already knows `count(q)`.
pub fn kth_lex_known<O: RangeCountOracle>(
    o: &O,
    q: &Rect,
    total: u64,
    k: u64,
    ledger: &mut QueryLedger,
) -> Result<Point> {
    if k == 0 || k > total {
        return Err(Error::RankOutOfRange { k, count: total });
    }
    let d = o.domain().dim();
    let mut rect = *q;
    let mut k = k;
    let mut cur = total;
    let mut out = [0; MAX_DIM];
    for (axis, slot) in out.iter_mut().enumerate().take(d) {
        let lo = rect.lo()[axis];
        // invariant: count(axis ≤ l) < k ≤ count(axis ≤ r) = cur
        let (mut l, mut r) = (lo - 1, rect.hi()[axis]);
        let mut below = 0;
        while r - l > 1 {
            let m = l + (r - l) / 2;
            let c = o.count(&rect.with_axis(axis, lo, m), ledger);
            if c >= k {
                r = m;
                cur = c;
            } else {
                l = m;
                below = c;
            }
        }
        *slot = r;
        k -= below;
        cur -= below;
        rect = rect.with_axis(axis, r, r);
    }
    debug_assert!(k <= cur);
    Ok(Point(out))
}

/// The `k`-th point of `cell` in the z-order of the shifted quadtree.
pub fn kth_zorder<O: RangeCountOracle>(
    o: &O,
    cell: &QuadCell,
    k: u64,
    ledger: &mut QueryLedger,
) -> Result<Point> {
    let total = o.count(&cell.rect(&o.domain()), ledger);
    kth_zorder_ranked(o, cell, total, k, ledger).map(|(p, _)| p)
}

/// Z-order selection from a cell whose count is known. Also returns the rank
/// of the selected copy among the points sharing its location.
pub fn kth_zorder_ranked<O: RangeCountOracle>(
    o: &O,
    cell: &QuadCell,
    cell_count: u64,
    k: u64,
    ledger: &mut QueryLedger,
) -> Result<(Point, u64)> {
    if k == 0 || k > cell_count {
        return Err(Error::RankOutOfRange { k, count: cell_count });
    }
    let dom = o.domain();
    let mut c = *cell;
    let mut count = cell_count;
    let mut k = k;
    while c.level() > 0 {
        let nchild = 1usize << dom.dim();
        let mut rest = count;
        let mut next = None;
        for i in 0..nchild {
            let child = c.child(i);
            let cc = if i + 1 == nchild {
                rest
            } else {
                let r = child.rect(&dom);
                if r.is_empty() { 0 } else { o.count(&r, ledger) }
            };
            if k <= cc {
                next = Some((child, cc));
                break;
            }
            k -= cc;
            rest -= cc;
        }
        let (child, cc) = next.expect("child counts sum to the parent count");
        c = child;
        count = cc;
    }
    Ok((Point(*c.rect(&dom).lo()), k))
}

/// A point drawn uniformly from the hidden multiset.
pub fn sample_uniform<O: RangeCountOracle, R: Rng + ?Sized>(
    o: &O,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Point> {
    let full = o.domain().full_rect();
    let n = o.count(&full, ledger);
    sample_uniform_known(o, n, rng, ledger)
}

/// [`sample_uniform`] when `n` is already known.
pub fn sample_uniform_known<O: RangeCountOracle, R: Rng + ?Sized>(
    o: &O,
    n: u64,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Point> {
    if n == 0 {
        return Err(Error::EmptySet);
    }
    let k = rng.gen_range(1..=n);
    kth_lex_known(o, &o.domain().full_rect(), n, k, ledger)
}

/// Smallest axis-aligned square containing every point. It is anchored at the
/// per-axis minima and slid back inside the domain when it would overflow.
pub fn bounding_square<O: RangeCountOracle>(o: &O, ledger: &mut QueryLedger) -> Result<Rect> {
    let dom = o.domain();
    let full = dom.full_rect();
    if o.count(&full, ledger) == 0 {
        return Err(Error::EmptySet);
    }
    let d = dom.dim();
    let top = dom.delta() - 1;
    let mut lo = [0; MAX_DIM];
    let mut hi = [0; MAX_DIM];
    for axis in 0..d {
        // smallest x with a point at coordinate ≤ x
        let (mut l, mut r) = (-1, top);
        while r - l > 1 {
            let m = l + (r - l) / 2;
            if o.count(&full.with_axis(axis, 0, m), ledger) > 0 {
                r = m;
            } else {
                l = m;
            }
        }
        lo[axis] = r;
        // largest x with a point at coordinate ≥ x
        let (mut l, mut r) = (lo[axis], top + 1);
        while r - l > 1 {
            let m = l + (r - l) / 2;
            if o.count(&full.with_axis(axis, m, top), ledger) > 0 {
                l = m;
            } else {
                r = m;
            }
        }
        hi[axis] = l;
    }
    let side = (0..d).map(|k| hi[k] - lo[k] + 1).max().unwrap_or(1);
    for k in 0..d {
        lo[k] = lo[k].min(dom.delta() - side);
        hi[k] = lo[k] + side - 1;
    }
    Ok(Rect::new(&dom, &lo, &hi))
}

/// Number of points of `o` strictly before `p` in lexicographic order.
pub fn lex_rank_below<O: RangeCountOracle>(o: &O, p: &Point, ledger: &mut QueryLedger) -> u64 {
    let dom = o.domain();
    let mut rect = dom.full_rect();
    let mut below = 0;
    for axis in 0..dom.dim() {
        if p.0[axis] > 0 {
            below += o.count(&rect.with_axis(axis, 0, p.0[axis] - 1), ledger);
        }
        rect = rect.with_axis(axis, p.0[axis], p.0[axis]);
    }
    below
}

/// Number of points strictly before `p` in the z-order of `shift`, counted
/// from sibling cells along the root-to-leaf path.
pub fn zorder_rank_below<O: RangeCountOracle>(
    o: &O,
    p: &Point,
    shift: &Shift,
    ledger: &mut QueryLedger,
) -> u64 {
    let dom: Domain = o.domain();
    let mut below = 0;
    for level in (0..dom.root_level()).rev() {
        let here = cell_of(&dom, p, level, shift);
        let parent = here.parent().expect("non-root level");
        for i in 0..parent.child_rank(&here) {
            let r = parent.child(i).rect(&dom);
            if !r.is_empty() {
                below += o.count(&r, ledger);
            }
        }
    }
    below
}
