//! Amplitudes, phases, the symbol expression language, seminorm estimation
//! and phase-class verification.

pub mod builtins;
mod amplitude;
mod expr;
mod jet;
mod phase;
mod seminorm;

pub use amplitude::{product_amplitude, AmplitudeDescriptor, ClassTag, JetFn, PointFn, SeparableTerm, ValueFn};
pub use expr::{parse_expression, CompiledExpr, Expression};
pub use jet::{Jet, JetLayout};
pub use phase::{constant_key, homogeneity_defect, phase_samples, phase_samples_on_radii, verify_phase, verify_phase_at_level, PhaseDescriptor, PhaseReport};
pub use seminorm::{estimate_seminorm, SampleMeta, SeminormEstimate, XiSampling};
