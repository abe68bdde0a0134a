//! Order thresholds and admissibility verdicts for linear and multilinear
//! rough operators.

mod exponent;
mod linear;
mod report;
mod scenario;

pub use exponent::Exponent;
pub use linear::{
    critical_recip, general_order_threshold, l2_threshold, m_bar, m_script, order_branch, psido_threshold, OrderBranch,
};
pub use report::{ThresholdReport, Verdict, VerdictStatus, BORDERLINE_TOLERANCE};
pub use scenario::{linear_thresholds, multilinear_admissibility, ScenarioInputs, SCENARIO_TAGS};
