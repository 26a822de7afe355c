//! Causal State Splitting Reconstruction.
//!
//! Histories of up to `L - 1` symbols are grouped into provisional states
//! whenever their next-symbol counts are statistically indistinguishable
//! (chi-squared homogeneity test at level `alpha`). States are then split
//! until transitions are deterministic given the emitted symbol, and
//! transient states are discarded. What remains is an [`EpsilonMachine`].

mod counts;
mod machine;
mod reconstruct;
mod stationary;

pub use counts::{count_histories, History, HistoryCounts};
pub use machine::{CausalState, EpsilonMachine, INVARIANT_TOLERANCE};
pub use reconstruct::{reconstruct, ReconstructOptions, DEFAULT_ALPHA, DEFAULT_MIN_COUNT};
pub use split_test::{chi_squared_p_value, chi_squared_statistic, split_test, SplitDecision};
pub use stationary::{stationary_distribution, stationary_residual, MAX_ITERATIONS, STATIONARY_TOLERANCE};

/// Default total window length `L`.
pub const DEFAULT_MAX_LEN: usize = 3;
