//! Oscillatory-integral engine: operator application, kernels, periodization
//! and the non-stationary phase check.

mod kernel;
mod nonstat;
mod operator;
mod periodize;
mod ttstar;

pub use kernel::{kernel_field, low_frequency_kernel, KernelOptions, KernelReport, KernelSample};
pub use nonstat::{
    frequency_linear_phase, frequency_quadratic_phase, verify_nonstationary_decay, NonstatOptions, NonstatReport, Window,
};
pub use operator::{
    apply_fio, apply_multiplier, DiscreteOperator, FioOperator, OperatorSpec, QuadratureMode, TruncationReport,
    DENSE_CACHE_LIMIT, SPECTRAL_FLOOR,
};
pub use periodize::{
    periodize_amplitude, periodized_apply, sharp_bump, sharp_bump_multiplier, translate, ModeCoefficient,
    PeriodizationResult, PeriodizationSummary, PeriodizeOptions,
};
pub use ttstar::{ttstar_decay_check, TtStarOptions, TtStarPair, TtStarReport};
