//! Random instance families used by the sweeps.

use rand::Rng;
use rangecount::{Color, Domain, Point, PointSet, Result};

fn uniform_point<R: Rng + ?Sized>(dom: &Domain, rng: &mut R) -> Point {
    let mut p = Point::default();
    for k in 0..dom.dim() {
        p.0[k] = rng.gen_range(0..dom.delta());
    }
    p
}

/// `n` plain points drawn uniformly from `[Δ]^d`.
pub fn uniform<R: Rng + ?Sized>(dom: Domain, n: usize, rng: &mut R) -> Result<PointSet> {
    let pts: Vec<Point> = (0..n).map(|_| uniform_point(&dom, rng)).collect();
    PointSet::from_points(dom, Color::Plain, &pts)
}

/// `n` plain points in `k` square blobs of radius `spread` around uniform centres.
pub fn clustered<R: Rng + ?Sized>(dom: Domain, n: usize, k: usize, spread: i64, rng: &mut R) -> Result<PointSet> {
    let centres: Vec<Point> = (0..k.max(1)).map(|_| uniform_point(&dom, rng)).collect();
    let pts: Vec<Point> = (0..n)
        .map(|i| {
            let mut p = centres[i % centres.len()];
            for k in 0..dom.dim() {
                p.0[k] = (p.0[k] + rng.gen_range(-spread..=spread)).clamp(0, dom.delta() - 1);
            }
            p
        })
        .collect();
    PointSet::from_points(dom, Color::Plain, &pts)
}

/// Uniform red points; each blue point is a red point moved by up to `noise`
/// per axis.
pub fn noisy_pairs<R: Rng + ?Sized>(dom: Domain, n: usize, noise: i64, rng: &mut R) -> Result<PointSet> {
    let red: Vec<Point> = (0..n).map(|_| uniform_point(&dom, rng)).collect();
    let blue: Vec<Point> = red
        .iter()
        .map(|r| {
            let mut p = *r;
            for k in 0..dom.dim() {
                p.0[k] = (p.0[k] + rng.gen_range(-noise..=noise)).clamp(0, dom.delta() - 1);
            }
            p
        })
        .collect();
    PointSet::colored(dom, &red, &blue)
}

/// `n` plain points on exactly `m` distinct grid cells of side `r`: one point
/// per cell, the rest piled onto a few heavy cells.
pub fn skewed_cells<R: Rng + ?Sized>(dom: Domain, m: usize, n: usize, r: i64, rng: &mut R) -> Result<PointSet> {
    let per_axis = dom.delta() / r;
    let mut cells: Vec<Point> = Vec::with_capacity(m);
    let mut seen = std::collections::HashSet::new();
    while cells.len() < m {
        let mut c = Point::default();
        for k in 0..dom.dim() {
            c.0[k] = rng.gen_range(0..per_axis);
        }
        if seen.insert(c) {
            cells.push(c);
        }
    }
    let place = |c: &Point, rng: &mut R| {
        let mut p = *c;
        for k in 0..dom.dim() {
            p.0[k] = c.0[k] * r + rng.gen_range(0..r);
        }
        p
    };
    let mut pts: Vec<Point> = cells.iter().map(|c| place(c, rng)).collect();
    while pts.len() < n {
        let j = (rng.gen::<f64>().powi(3) * m as f64) as usize;
        pts.push(place(&cells[j], rng));
    }
    PointSet::from_points(dom, Color::Plain, &pts)
}
