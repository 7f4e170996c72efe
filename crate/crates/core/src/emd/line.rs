//! The one-dimensional estimator.
//!
//! The optimal 1D matching pairs the k-th leftmost red with the k-th leftmost
//! blue. Long edges are handled by snapping both colours to segment centres
//! and matching the snapped multisets exactly; short edges are counted per
//! dyadic length class from a sample of ranks.

use rand::Rng;

use crate::emd::{EmdParams, EMD_CONSTANT_C};
use crate::error::{Error, Result};
use crate::oracle::{ColoredOracle, Estimate, Memoized, QueryLedger, RangeCountOracle};
use crate::primitives::kth_lex_known;

pub fn estimate_emd_1d<O: RangeCountOracle, R: Rng + ?Sized>(
    co: &ColoredOracle<O>,
    params: &EmdParams,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Estimate> {
    let dom = co.domain();
    if dom.dim() != 1 {
        return Err(Error::InvalidParameter(format!("1D estimator got a {}-dimensional domain", dom.dim())));
    }
    let before = ledger.clone();
    let red = Memoized::new(&co.red);
    let blue = Memoized::new(&co.blue);
    let full = dom.full_rect();
    ledger.set_phase("size");
    let n = red.count(&full, ledger);
    let s = params.s;
    if s < 1 || s > n.max(1) {
        return Err(Error::InvalidParameter(format!("s = {s} outside 1..=n ({n})")));
    }
    let delta = dom.delta();
    let log_delta = dom.log_delta().max(1) as f64;

    ledger.set_phase("long");
    let seg = (delta / (2 * s as i64)).max(1);
    let nseg = ((delta + seg - 1) / seg) as usize;
    let mut nr = Vec::with_capacity(nseg);
    let mut nb = Vec::with_capacity(nseg);
    for j in 0..nseg {
        let lo = j as i64 * seg;
        let q = full.with_axis(0, lo, (lo + seg - 1).min(delta - 1));
        nr.push(red.count(&q, ledger));
        nb.push(blue.count(&q, ledger));
    }
    let long = snapped_long_cost(&nr, &nb, seg);

    ledger.set_phase("short");
    // classes [2^{i-1}, 2^i), i = 1..=t; anything ≥ 2^t ≥ Δ/s is long
    let t = ((delta as f64 / s as f64).log2().ceil().max(1.0)) as usize;
    let x = params.sample_size(log_delta);
    let reps = params.class_reps(log_delta);
    let mut best = vec![f64::INFINITY; t + 1];
    if n > 0 {
        for _ in 0..reps {
            let mut hits = vec![0u64; t + 1];
            for _ in 0..x {
                let k = rng.gen_range(1..=n);
                let r = kth_lex_known(&red, &full, n, k, ledger)?;
                let b = kth_lex_known(&blue, &full, n, k, ledger)?;
                let len = (r.0[0] - b.0[0]).unsigned_abs();
                if len == 0 {
                    continue;
                }
                let class = 64 - len.leading_zeros() as usize;
                if class <= t {
                    hits[class] += 1;
                }
            }
            for i in 1..=t {
                best[i] = best[i].min(hits[i] as f64 * n as f64 / x as f64);
            }
        }
    } else {
        best.iter_mut().for_each(|b| *b = 0.0);
    }
    let short: f64 = (1..=t).map(|i| best[i] * (1u64 << i) as f64).sum();
    let value = short + long as f64;
    Ok(Estimate::new(value, &before, ledger)
        .with_param("s", s as f64)
        .with_param("n", n as f64)
        .with_param("x", x as f64)
        .with_param("class_reps", reps as f64)
        .with_param("classes", t as f64)
        .with_param("segment", seg as f64)
        .with_param("long", long as f64)
        .with_param("short", short)
        .with_param("C", EMD_CONSTANT_C))
}

/// Total length of the snapped sorted matching over edges that span at least
/// one whole segment (segment indices two or more apart).
pub fn snapped_long_cost(nr: &[u64], nb: &[u64], seg: i64) -> i64 {
    let (mut i, mut j) = (0, 0);
    let (mut ri, mut bj) = (nr.first().copied().unwrap_or(0), nb.first().copied().unwrap_or(0));
    let mut total = 0i64;
    loop {
        while ri == 0 && i + 1 < nr.len() {
            i += 1;
            ri = nr[i];
        }
        while bj == 0 && j + 1 < nb.len() {
            j += 1;
            bj = nb[j];
        }
        if ri == 0 || bj == 0 {
            break;
        }
        let m = ri.min(bj);
        let gap = (i as i64 - j as i64).abs();
        if gap >= 2 {
            total += m as i64 * gap * seg;
        }
        ri -= m;
        bj -= m;
    }
    total
}
