//! Tail bounds, their Monte Carlo certification, and supporting estimators.

pub mod bounds;
pub mod convergence;
pub mod means;
pub mod ratio;
pub mod sampling;
pub mod source;
pub mod stats;
pub mod tail;

pub use bounds::{
    derivative_bound, expectation_abs_divided_difference, expectation_abs_kernel, expectation_diff_norm,
    expectation_quasi_diff_norm, lipschitz_bound, quasi_lipschitz_bound, theorem1_bound,
};
pub use convergence::{convergence_in_mean_check, omega_second_difference_grid, ConvergenceReport, ConvergenceRow};
pub use means::{mean_corollary, mean_corollary_bound, MeanCorollary};
pub use ratio::{expectation_ratio_series, RatioSeriesResult};
pub use sampling::{map_indexed, tolerate_failures, try_map_indexed, MAX_FAILURE_FRACTION};
pub use source::TensorSource;
pub use stats::{clopper_pearson, normal_critical_value, quantile_sorted, Estimate};
pub use tail::{
    empirical_tail, CommutingTensor, OmegaSpec, StatisticSpec, StatisticSummary, TailExperimentConfig,
    TailExperimentReport, TailRow, ThetaGrid, Verdict,
};
