//! Earth Mover's Distance: exact baselines, the greedy quadtree matching and
//! the sublinear estimators.

mod exact;
mod line;
mod quadtree;

pub use exact::{
    exact_emd, exact_emd_1d, greedy_matching_cost_exact, simulate_greedy_matching, GreedyEdge, EXACT_EMD_CAP,
};
pub use line::{estimate_emd_1d, snapped_long_cost};
pub use quadtree::{estimate_emd, find_mate, long_edge_cost, mate_level, short_cutoff, Mate};

/// Slack constant on the additive error terms, frozen after calibration.
pub const EMD_CONSTANT_C: f64 = 8.0;
/// Distortion constant of the tree metric, frozen after calibration.
pub const EMD_CONSTANT_KAPPA: f64 = 4.0;

/// Estimator knobs. Unset repetition counts default to `⌈log₂Δ⌉`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmdParams {
    pub s: u64,
    pub class_reps: Option<usize>,
    pub shifts: Option<usize>,
    /// Multiplies the default sample size `⌈s·log₂²Δ⌉`.
    pub sample_factor: f64,
}

impl EmdParams {
    pub fn new(s: u64) -> Self {
        Self { s, class_reps: None, shifts: None, sample_factor: 1.0 }
    }

    pub fn sample_size(&self, log_delta: f64) -> usize {
        ((self.sample_factor * self.s as f64 * log_delta * log_delta).ceil() as usize).max(1)
    }

    pub fn class_reps(&self, log_delta: f64) -> usize {
        self.class_reps.unwrap_or(log_delta.ceil() as usize).max(1)
    }

    pub fn shift_reps(&self, log_delta: f64) -> usize {
        self.shifts.unwrap_or(log_delta.ceil() as usize).max(1)
    }
}
