//! The access model. Estimators only ever see a [`RangeCountOracle`]; every
//! metered call lands in a [`QueryLedger`].

use std::cell::RefCell;
use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Color, Domain, Point, Rect};
use crate::pointset::PointSet;

/// Cumulative query counter with labelled sub-counters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    total: u64,
    phases: BTreeMap<String, u64>,
    #[serde(skip)]
    current: Option<String>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn phases(&self) -> &BTreeMap<String, u64> {
        &self.phases
    }

    /// Subsequent queries are charged to `phase`.
    pub fn set_phase(&mut self, phase: &str) {
        self.current = Some(phase.to_owned());
    }

    pub fn phase(&self) -> &str {
        self.current.as_deref().unwrap_or("default")
    }

    pub fn record(&mut self) {
        self.total += 1;
        let key = self.current.as_deref().unwrap_or("default");
        if let Some(c) = self.phases.get_mut(key) {
            *c += 1;
        } else {
            self.phases.insert(key.to_owned(), 1);
        }
    }

    /// Per-phase difference against an earlier snapshot of the same ledger.
    pub fn since(&self, earlier: &QueryLedger) -> BTreeMap<String, u64> {
        self.phases
            .iter()
            .map(|(k, &v)| (k.clone(), v - earlier.phases.get(k).copied().unwrap_or(0)))
            .filter(|&(_, v)| v > 0)
            .collect()
    }

    pub fn summary(&self) -> String {
        let mut s = format!("queries total={}", self.total);
        for (k, v) in &self.phases {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }
}

/// Black-box orthogonal range counting.
pub trait RangeCountOracle {
    fn domain(&self) -> Domain;

    /// Size of the hidden set. Baselines and tests use this; estimators learn
    /// `n` through a metered query.
    fn len(&self) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact count without touching any ledger.
    fn count_unmetered(&self, q: &Rect) -> u64;

    fn count(&self, q: &Rect, ledger: &mut QueryLedger) -> u64 {
        ledger.record();
        self.count_unmetered(q)
    }
}

impl<T: RangeCountOracle + ?Sized> RangeCountOracle for &T {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn len(&self) -> u64 {
        (**self).len()
    }
    fn count_unmetered(&self, q: &Rect) -> u64 {
        (**self).count_unmetered(q)
    }
    fn count(&self, q: &Rect, ledger: &mut QueryLedger) -> u64 {
        (**self).count(q, ledger)
    }
}

const DENSE_LIMIT: u64 = 1 << 22;

enum Backend {
    Empty,
    /// Inclusive prefix sums over the full grid, one extra zero row per axis.
    Dense(Vec<u32>),
    Line(Vec<i64>),
    /// Merge-sort tree: points by x, each node holds its y values sorted.
    Plane { xs: Vec<i64>, tree: Vec<Vec<i64>> },
    Scan(Vec<Point>),
}

/// Reference oracle over an explicit multiset of points.
pub struct ExactOracle {
    domain: Domain,
    n: u64,
    backend: Backend,
}

impl ExactOracle {
    pub fn build(domain: Domain, points: &[Point]) -> Result<Self> {
        for p in points {
            domain.check(p)?;
        }
        let n = points.len() as u64;
        let d = domain.dim();
        let delta = domain.delta() as u64;
        let backend = if points.is_empty() {
            Backend::Empty
        } else if delta.pow(d as u32) <= DENSE_LIMIT {
            Backend::Dense(dense_prefix(&domain, points))
        } else if d == 1 {
            let mut xs: Vec<i64> = points.iter().map(|p| p.0[0]).collect();
            xs.sort_unstable();
            Backend::Line(xs)
        } else if d == 2 {
            plane_tree(points)
        } else {
            let mut v = points.to_vec();
            v.sort_unstable();
            Backend::Scan(v)
        };
        Ok(Self { domain, n, backend })
    }

    /// Oracle over the points of one colour, or all of them when `color` is `None`.
    pub fn from_set(set: &PointSet, color: Option<Color>) -> Result<Self> {
        let pts: Vec<Point> = set
            .entries()
            .iter()
            .filter(|(c, _)| color.map_or(true, |want| *c == want))
            .map(|&(_, p)| p)
            .collect();
        Self::build(set.domain(), &pts)
    }
}

fn dense_prefix(domain: &Domain, points: &[Point]) -> Vec<u32> {
    let d = domain.dim();
    let s = domain.delta() as usize + 1;
    let mut a = vec![0u32; s.pow(d as u32)];
    let strides: Vec<usize> = (0..d).map(|k| s.pow((d - 1 - k) as u32)).collect();
    for p in points {
        let idx: usize = (0..d).map(|k| (p.0[k] as usize + 1) * strides[k]).sum();
        a[idx] += 1;
    }
    for &stride in &strides {
        for i in 0..a.len() {
            if (i / stride) % s != 0 {
                a[i] += a[i - stride];
            }
        }
    }
    a
}

fn plane_tree(points: &[Point]) -> Backend {
    let mut v: Vec<(i64, i64)> = points.iter().map(|p| (p.0[0], p.0[1])).collect();
    v.sort_unstable();
    let n = v.len();
    let size = n.next_power_of_two();
    let mut tree = vec![Vec::new(); 2 * size];
    for (i, &(_, y)) in v.iter().enumerate() {
        tree[size + i] = vec![y];
    }
    for i in (1..size).rev() {
        let (l, r) = (&tree[2 * i], &tree[2 * i + 1]);
        let mut m = Vec::with_capacity(l.len() + r.len());
        let (mut a, mut b) = (0, 0);
        while a < l.len() || b < r.len() {
            if b == r.len() || (a < l.len() && l[a] <= r[b]) {
                m.push(l[a]);
                a += 1;
            } else {
                m.push(r[b]);
                b += 1;
            }
        }
        tree[i] = m;
    }
    Backend::Plane { xs: v.iter().map(|&(x, _)| x).collect(), tree }
}

fn count_sorted(v: &[i64], lo: i64, hi: i64) -> u64 {
    (v.partition_point(|&y| y <= hi) - v.partition_point(|&y| y < lo)) as u64
}

impl RangeCountOracle for ExactOracle {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn len(&self) -> u64 {
        self.n
    }

    fn count_unmetered(&self, q: &Rect) -> u64 {
        if q.is_empty() {
            return 0;
        }
        let (lo, hi) = (q.lo(), q.hi());
        match &self.backend {
            Backend::Empty => 0,
            Backend::Dense(a) => {
                let d = self.domain.dim();
                let s = self.domain.delta() as usize + 1;
                let mut total: i64 = 0;
                for corner in 0..1usize << d {
                    let mut idx = 0;
                    let mut sign = 1;
                    for k in 0..d {
                        let c = if (corner >> k) & 1 == 1 {
                            sign = -sign;
                            lo[k] as usize
                        } else {
                            hi[k] as usize + 1
                        };
                        idx = idx * s + c;
                    }
                    total += sign * a[idx] as i64;
                }
                total as u64
            }
            Backend::Line(xs) => count_sorted(xs, lo[0], hi[0]),
            Backend::Plane { xs, tree } => {
                let size = tree.len() / 2;
                let mut l = xs.partition_point(|&x| x < lo[0]) + size;
                let mut r = xs.partition_point(|&x| x <= hi[0]) + size;
                let mut total = 0;
                while l < r {
                    if l & 1 == 1 {
                        total += count_sorted(&tree[l], lo[1], hi[1]);
                        l += 1;
                    }
                    if r & 1 == 1 {
                        r -= 1;
                        total += count_sorted(&tree[r], lo[1], hi[1]);
                    }
                    l >>= 1;
                    r >>= 1;
                }
                total
            }
            Backend::Scan(v) => {
                let start = v.partition_point(|p| p.0[0] < lo[0]);
                v[start..].iter().take_while(|p| p.0[0] <= hi[0]).filter(|p| q.contains(p)).count() as u64
            }
        }
    }
}

/// Red and blue views of a two-coloured instance.
pub struct ColoredOracle<O> {
    pub red: O,
    pub blue: O,
}

impl<O: RangeCountOracle> ColoredOracle<O> {
    pub fn new(red: O, blue: O) -> Result<Self> {
        if red.len() != blue.len() {
            return Err(Error::SizeMismatch { red: red.len() as usize, blue: blue.len() as usize });
        }
        if red.domain() != blue.domain() {
            return Err(Error::InvalidDomain("red and blue domains differ".into()));
        }
        Ok(Self { red, blue })
    }

    pub fn domain(&self) -> Domain {
        self.red.domain()
    }

    pub fn get(&self, color: Color) -> &O {
        match color {
            Color::Blue => &self.blue,
            _ => &self.red,
        }
    }
}

impl ColoredOracle<ExactOracle> {
    pub fn from_set(set: &PointSet) -> Result<Self> {
        Self::new(ExactOracle::from_set(set, Some(Color::Red))?, ExactOracle::from_set(set, Some(Color::Blue))?)
    }
}

/// Remembers answers so repeated identical queries are charged once.
pub struct Memoized<O> {
    inner: O,
    cache: RefCell<FxHashMap<Rect, u64>>,
}

impl<O: RangeCountOracle> Memoized<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, cache: RefCell::new(FxHashMap::default()) }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn distinct_queries(&self) -> usize {
        self.cache.borrow().len()
    }
}

impl<O: RangeCountOracle> RangeCountOracle for Memoized<O> {
    fn domain(&self) -> Domain {
        self.inner.domain()
    }

    fn len(&self) -> u64 {
        self.inner.len()
    }

    fn count_unmetered(&self, q: &Rect) -> u64 {
        self.inner.count_unmetered(q)
    }

    fn count(&self, q: &Rect, ledger: &mut QueryLedger) -> u64 {
        if let Some(&c) = self.cache.borrow().get(q) {
            return c;
        }
        let c = self.inner.count(q, ledger);
        self.cache.borrow_mut().insert(*q, c);
        c
    }
}

/// Output of an estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub queries_used: u64,
    pub params: BTreeMap<String, f64>,
    pub phase_breakdown: BTreeMap<String, u64>,
}

impl Estimate {
    pub fn new(value: f64, before: &QueryLedger, after: &QueryLedger) -> Self {
        Self {
            value,
            queries_used: after.total() - before.total(),
            params: BTreeMap::new(),
            phase_breakdown: after.since(before),
        }
    }

    pub fn with_param(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_owned(), v);
        self
    }
}

/// Linear scan over an explicit point list.
pub fn scan_count(points: &[Point], q: &Rect) -> u64 {
    points.iter().filter(|p| q.contains(p)).count() as u64
}
