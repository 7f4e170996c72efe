//! Sublinear-query estimators over an orthogonal range-counting oracle.
//!
//! The hidden input is a multiset of integer points in `[Δ]^d` (`d ≤ 3`). The
//! only access is `count(Rect)`, and every call is charged to a
//! [`QueryLedger`]. On top of that model the crate provides:
//!
//! * point selection and uniform sampling ([`primitives`]),
//! * almost-uniform sampling and counting of non-empty grid cells
//!   ([`cell_sampling`]),
//! * Earth Mover's Distance estimators in one and more dimensions ([`emd`]),
//! * a Euclidean MST weight estimator built on a WSPD spanner ([`mst`]),
//! * exact baselines and generators for hard instance families ([`gadgets`]).

pub mod cell_sampling;
pub mod emd;
pub mod error;
pub mod gadgets;
pub mod geom;
pub mod hungarian;
pub mod mst;
pub mod oracle;
pub mod pointset;
pub mod primitives;

pub use error::{Error, Result};
pub use geom::{Color, Domain, Point, QuadCell, Rect, Shift, TreeDist};
pub use oracle::{ColoredOracle, Estimate, ExactOracle, Memoized, QueryLedger, RangeCountOracle};
pub use pointset::PointSet;
