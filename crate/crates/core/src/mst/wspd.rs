//! Quadtree well-separated pair decomposition.
//!
//! The recursion always splits the larger cell (ties split the second
//! argument) and swaps argument order on every call, exactly as in the
//! textbook procedure. Pairs are reported in a fixed orientation: `a` descends
//! from the first argument of the top-level call, `b` from the second, so
//! `wspd(root, root)` covers every ordered pair of distinct locations exactly
//! once.

use crate::error::Result;
use crate::geom::{Domain, Point, QuadCell, Shift};
use crate::oracle::{QueryLedger, RangeCountOracle};
use crate::primitives::kth_lex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WspdPair {
    pub a: QuadCell,
    pub b: QuadCell,
}

impl WspdPair {
    pub fn distance(&self) -> f64 {
        self.a.distance(&self.b)
    }

    pub fn is_separated(&self, eps: f64) -> bool {
        well_separated(&self.a, &self.b, eps)
    }
}

/// `r(c)`: the side, except that a unit cell holds a single location and has
/// size 0.
pub fn size(c: &QuadCell) -> f64 {
    if c.level() == 0 {
        0.0
    } else {
        c.side() as f64
    }
}

/// `ε·d(c,c') ≥ max{r(c), r(c')}`.
pub fn well_separated(c: &QuadCell, c2: &QuadCell, eps: f64) -> bool {
    size(c).max(size(c2)) <= eps * c.distance(c2)
}

fn nonempty<O: RangeCountOracle>(o: &O, c: &QuadCell, ledger: &mut QueryLedger) -> bool {
    let r = c.rect(&o.domain());
    !r.is_empty() && o.count(&r, ledger) > 0
}

pub fn wspd<O: RangeCountOracle>(
    c: &QuadCell,
    c2: &QuadCell,
    eps: f64,
    o: &O,
    ledger: &mut QueryLedger,
) -> Vec<WspdPair> {
    let mut out = Vec::new();
    recurse(*c, *c2, true, eps, o, ledger, &mut out);
    out
}

fn recurse<O: RangeCountOracle>(
    first: QuadCell,
    second: QuadCell,
    first_left: bool,
    eps: f64,
    o: &O,
    ledger: &mut QueryLedger,
    out: &mut Vec<WspdPair>,
) {
    if first == second && first.level() == 0 {
        return;
    }
    if !nonempty(o, &first, ledger) || !nonempty(o, &second, ledger) {
        return;
    }
    let (c, cp, c_left) = if size(&second) < size(&first) { (second, first, !first_left) } else { (first, second, first_left) };
    if size(&cp) <= eps * c.distance(&cp) {
        out.push(if c_left { WspdPair { a: c, b: cp } } else { WspdPair { a: cp, b: c } });
        return;
    }
    for g in cp.children() {
        recurse(g, c, !c_left, eps, o, ledger, out);
    }
}

/// Whether `(a, b)` is reported by `wspd(root, root)`, assuming both cells are
/// non-empty. Every cell on the recursion path towards `(a, b)` contains one
/// of them, so the replay needs no queries.
pub fn in_wspd(domain: &Domain, a: &QuadCell, b: &QuadCell, eps: f64) -> bool {
    let root = QuadCell::root(domain, &Shift::ZERO);
    let (mut first, mut second, mut first_left) = (root, root, true);
    loop {
        if first == second && first.level() == 0 {
            return false;
        }
        let (c, cp, c_left) = if size(&second) < size(&first) { (second, first, !first_left) } else { (first, second, first_left) };
        let (tc, tcp) = if c_left { (a, b) } else { (b, a) };
        if !c.contains_cell(tc) || !cp.contains_cell(tcp) {
            return false;
        }
        if size(&cp) <= eps * c.distance(&cp) {
            return c == *tc && cp == *tcp;
        }
        if cp == *tcp {
            return false;
        }
        first = tcp.ancestor(cp.level() - 1);
        second = c;
        first_left = !c_left;
    }
}

/// Unordered membership.
pub fn in_wspd_unordered(domain: &Domain, a: &QuadCell, b: &QuadCell, eps: f64) -> bool {
    in_wspd(domain, a, b, eps) || in_wspd(domain, b, a, eps)
}

/// Lexicographically smallest point of a non-empty cell.
pub fn representative<O: RangeCountOracle>(o: &O, cell: &QuadCell, ledger: &mut QueryLedger) -> Result<Point> {
    kth_lex(o, &cell.rect(&o.domain()), 1, ledger)
}
