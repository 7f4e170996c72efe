//! Rescaling the input to an effective domain of side `Δ' = O(n/ε)`.
//!
//! Effective coordinate `e` on an axis stands for the block
//! `[o + e·σ, o + (e+1)·σ − 1]` of original coordinates, where `o` is the
//! corner of the bounding square. Every effective rectangle is therefore one
//! original rectangle, and one effective query costs one original query.

use crate::error::{Error, Result};
use crate::geom::{Domain, Point, Rect, MAX_DIM};
use crate::oracle::{QueryLedger, RangeCountOracle};
use crate::primitives::bounding_square;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpannerConfig {
    pub eps: f64,
    pub n: u64,
    pub original: Domain,
    pub effective: Domain,
    pub origin: [i64; MAX_DIM],
    /// Side `σ` of the original block behind one effective unit.
    pub scale: i64,
    pub bounding_side: i64,
}

impl SpannerConfig {
    /// Snaps an original point to its effective location.
    pub fn snap(&self, p: &Point) -> Point {
        let mut q = [0; MAX_DIM];
        for k in 0..self.original.dim() {
            q[k] = (p.0[k] - self.origin[k]).div_euclid(self.scale);
        }
        Point(q)
    }

    pub fn to_original(&self, q: &Rect) -> Rect {
        if q.is_empty() {
            return Rect::EMPTY;
        }
        let d = self.original.dim();
        let mut lo = [0; MAX_DIM];
        let mut hi = [0; MAX_DIM];
        for k in 0..d {
            lo[k] = self.origin[k] + q.lo()[k] * self.scale;
            hi[k] = self.origin[k] + (q.hi()[k] + 1) * self.scale - 1;
        }
        Rect::new(&self.original, &lo, &hi)
    }
}

/// The original oracle seen through a [`SpannerConfig`].
#[derive(Debug, Clone, Copy)]
pub struct ScaledOracle<O> {
    pub inner: O,
    pub config: SpannerConfig,
}

impl<O: RangeCountOracle> RangeCountOracle for ScaledOracle<O> {
    fn domain(&self) -> Domain {
        self.config.effective
    }

    fn len(&self) -> u64 {
        self.inner.len()
    }

    fn count_unmetered(&self, q: &Rect) -> u64 {
        let r = self.config.to_original(q);
        if r.is_empty() {
            0
        } else {
            self.inner.count_unmetered(&r)
        }
    }
}

/// `Δ'` is the smallest power of two `≥ 2n/ε`, and `σ = max(1, ⌈S/Δ'⌉)` for a
/// bounding square of side `S`, so the snapped input fits in `[Δ']^d`.
pub fn preprocess_domain<O: RangeCountOracle>(o: &O, eps: f64, ledger: &mut QueryLedger) -> Result<SpannerConfig> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("ε = {eps} outside (0, 1]")));
    }
    let dom = o.domain();
    let n = o.count(&dom.full_rect(), ledger);
    if n < 2 {
        return Err(Error::InvalidParameter(format!("MST needs at least 2 points, got {n}")));
    }
    let sq = bounding_square(o, ledger)?;
    let side = sq.hi()[0] - sq.lo()[0] + 1;
    let target = (2.0 * n as f64 / eps).ceil() as i64;
    let delta_eff = (target.max(2) as u64).next_power_of_two() as i64;
    let scale = ((side + delta_eff - 1) / delta_eff).max(1);
    Ok(SpannerConfig {
        eps,
        n,
        original: dom,
        effective: Domain::new(dom.dim(), delta_eff)?,
        origin: *sq.lo(),
        scale,
        bounding_side: side,
    })
}
