//! Exact baselines: Euclidean MST and the explicit WSPD spanner.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::geom::{Domain, Point, QuadCell, Shift};
use crate::mst::wspd::{representative, wspd, WspdPair};
use crate::oracle::{ExactOracle, QueryLedger};

/// Largest input [`exact_mst`] accepts.
pub const EXACT_MST_CAP: usize = 4096;
/// Largest input the explicit spanner accepts.
pub const SPANNER_CAP: usize = 1024;

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n], sets: n }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

/// Kruskal on the complete Euclidean graph.
pub fn exact_mst(points: &[Point]) -> Result<f64> {
    if points.len() > EXACT_MST_CAP {
        return Err(Error::CapExceeded { n: points.len(), cap: EXACT_MST_CAP });
    }
    let n = points.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((points[i].dist2(&points[j]), i as u32, j as u32));
        }
    }
    edges.sort_unstable();
    let mut ds = DisjointSets::new(n);
    let mut total = 0.0;
    for (d2, i, j) in edges {
        if ds.union(i as usize, j as usize) {
            total += (d2 as f64).sqrt();
            if ds.sets() == 1 {
                break;
            }
        }
    }
    Ok(total)
}

/// Prim's algorithm in `O(n²)` time and `O(n)` memory, for inputs past the
/// Kruskal cap.
pub fn prim_mst(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut best = vec![i64::MAX; n];
    let mut done = vec![false; n];
    let mut cur = 0;
    done[0] = true;
    let mut total = 0.0;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_d = i64::MAX;
        for j in 0..n {
            if done[j] {
                continue;
            }
            let d = points[cur].dist2(&points[j]);
            if d < best[j] {
                best[j] = d;
            }
            if best[j] < next_d {
                next_d = best[j];
                next = j;
            }
        }
        done[next] = true;
        total += (next_d as f64).sqrt();
        cur = next;
    }
    total
}

/// One spanner edge between vertex indices. `len` is the centre distance of
/// the WSPD pair, `euclidean` the distance between the two representatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpannerEdge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
    pub euclidean: f64,
    pub pair: WspdPair,
}

/// The spanner on the distinct locations of an explicit point set.
#[derive(Debug, Clone)]
pub struct ExplicitSpanner {
    pub domain: Domain,
    pub eps: f64,
    /// Distinct locations, sorted lexicographically.
    pub vertices: Vec<Point>,
    /// One edge per WSPD pair, in both orientations.
    pub edges: Vec<SpannerEdge>,
}

impl ExplicitSpanner {
    pub fn build(domain: Domain, points: &[Point], eps: f64) -> Result<Self> {
        if points.len() > SPANNER_CAP {
            return Err(Error::CapExceeded { n: points.len(), cap: SPANNER_CAP });
        }
        let o = ExactOracle::build(domain, points)?;
        let mut vertices = points.to_vec();
        vertices.sort();
        vertices.dedup();
        let index: FxHashMap<Point, usize> = vertices.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut scratch = QueryLedger::new();
        let root = QuadCell::root(&domain, &Shift::ZERO);
        let pairs = wspd(&root, &root, eps, &o, &mut scratch);
        let mut reps: FxHashMap<QuadCell, usize> = FxHashMap::default();
        let mut rep = |c: &QuadCell| -> Result<usize> {
            if let Some(&i) = reps.get(c) {
                return Ok(i);
            }
            let i = index[&representative(&o, c, &mut scratch)?];
            reps.insert(*c, i);
            Ok(i)
        };
        let mut edges = Vec::with_capacity(pairs.len());
        for pair in pairs {
            let (u, v) = (rep(&pair.a)?, rep(&pair.b)?);
            let euclidean = vertices[u].dist(&vertices[v]);
            edges.push(SpannerEdge { u, v, len: pair.distance(), euclidean, pair });
        }
        Ok(Self { domain, eps, vertices, edges })
    }

    /// MST weight with centre-distance lengths, the graph the estimator sees.
    pub fn mst_cost(&self) -> f64 {
        self.mst_by(|e| e.len)
    }

    /// MST weight of the same edge set measured between representatives.
    pub fn euclidean_mst_cost(&self) -> f64 {
        self.mst_by(|e| e.euclidean)
    }

    fn mst_by(&self, len: impl Fn(&SpannerEdge) -> f64) -> f64 {
        let mut order: Vec<(f64, usize, usize)> = self.edges.iter().map(|e| (len(e), e.u, e.v)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ds = DisjointSets::new(self.vertices.len());
        order.into_iter().filter(|e| ds.union(e.1, e.2)).map(|e| e.0).sum()
    }

    /// Connected components using only edges of length at most `threshold`.
    pub fn components(&self, threshold: f64) -> usize {
        let mut ds = DisjointSets::new(self.vertices.len());
        for e in self.edges.iter().filter(|e| e.len <= threshold) {
            ds.union(e.u, e.v);
        }
        ds.sets()
    }

    /// `c_i`: components of the subgraph with edges of length `≤ (1+ε)^i`.
    pub fn level_components(&self, i: i32) -> usize {
        self.components(level_length(self.eps, i))
    }
}

/// `(1+ε)^i`.
pub fn level_length(eps: f64, i: i32) -> f64 {
    (1.0 + eps).powi(i)
}

/// MST of the spanner with each edge weighted by the distance between its
/// representatives, so the result never undercuts the Euclidean MST.
pub fn spanner_mst_exact(domain: Domain, points: &[Point], eps: f64) -> Result<f64> {
    Ok(ExplicitSpanner::build(domain, points, eps)?.euclidean_mst_cost())
}

pub fn components_exact(domain: Domain, points: &[Point], eps: f64, i: i32) -> Result<usize> {
    Ok(ExplicitSpanner::build(domain, points, eps)?.level_components(i))
}

/// `Σ_{v} β(v)` over an explicit graph, with `β(v) = 1` for isolated vertices
/// and `d(v) / 2m(v)` otherwise.
pub fn beta_sum(n: usize, edges: &[(usize, usize)]) -> f64 {
    let mut ds = DisjointSets::new(n);
    let mut deg = vec![0usize; n];
    for &(u, v) in edges {
        ds.union(u, v);
        deg[u] += 1;
        deg[v] += 1;
    }
    let mut comp_deg = vec![0usize; n];
    for v in 0..n {
        let r = ds.find(v);
        comp_deg[r] += deg[v];
    }
    (0..n)
        .map(|v| if deg[v] == 0 { 1.0 } else { deg[v] as f64 / comp_deg[ds.find(v)] as f64 })
        .sum()
}
