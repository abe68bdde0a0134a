//! Empirical operator norms and dyadic scaling experiments.
//!
//! Every number produced here is a lower estimate of a true operator norm, so
//! verdicts are one-sided: a measured growth rate can only be found consistent
//! with, or in excess of, a predicted one.

mod estimate;
mod experiment;
mod sweep;

pub use estimate::{
    bank_estimate, estimate_operator_norm, power_iteration, random_band_limited, test_bank, NormEstimate, NormMethod,
    POWER_ITERATIONS, POWER_TOLERANCE,
};
pub use experiment::{boundedness_experiment, ExperimentReport, PartitionCheck};
pub use sweep::{
    dyadic_norm_sweep, predicted_slope, sweep_report, LevelNorm, NormSweepRecord, SweepInputs, SweepReport, SweepSettings,
    DEFAULT_SLOPE_TOLERANCE, MIN_SWEEP_LEVELS,
};
