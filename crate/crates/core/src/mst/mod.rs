//! Euclidean MST weight estimation through a WSPD spanner.

mod estimate;
mod exact;
mod neighbors;
mod scale;
mod wspd;

pub use estimate::{
    contraction_level, estimate_components, estimate_mst, query_ceiling, top_level, ComponentEstimate, MstParams,
    NeighborCache, SEED_CONSTANT,
};
pub use exact::{
    beta_sum, components_exact, exact_mst, level_length, prim_mst, spanner_mst_exact, DisjointSets, ExplicitSpanner,
    SpannerEdge, EXACT_MST_CAP, SPANNER_CAP,
};
pub use neighbors::{is_witness, neighbor_cells, witness_level};
pub use scale::{preprocess_domain, ScaledOracle, SpannerConfig};
pub use wspd::{in_wspd, in_wspd_unordered, representative, size, well_separated, wspd, WspdPair};
