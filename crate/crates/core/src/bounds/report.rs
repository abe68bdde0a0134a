use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Exponent;

/// Margin below which an order counts as sitting on the threshold.
pub const BORDERLINE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Admissible,
    Borderline,
    Inadmissible,
    /// The theorem's hypotheses on the exponents fail, so it says nothing.
    HypothesisViolated,
    /// The result does not cover these inputs (e.g. wrong exponent range).
    NotApplicable,
    /// No order was supplied; only the threshold is reported.
    Unevaluated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub admissible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Lower end for the Lorentz-target range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    pub binding_constraint: String,
    pub target_space: String,
}

impl Verdict {
    /// Strict upper bound `m < threshold`.
    pub fn strict(order: Option<f64>, threshold: f64, constraint: impl Into<String>, target: impl Into<String>) -> Self {
        let status = match order {
            None => VerdictStatus::Unevaluated,
            Some(m) if m <= threshold - BORDERLINE_TOLERANCE => VerdictStatus::Admissible,
            Some(m) if (m - threshold).abs() < BORDERLINE_TOLERANCE => VerdictStatus::Borderline,
            Some(_) => VerdictStatus::Inadmissible,
        };
        Verdict {
            status,
            admissible: status == VerdictStatus::Admissible,
            threshold: Some(threshold),
            lower: None,
            order,
            binding_constraint: constraint.into(),
            target_space: target.into(),
        }
    }

    /// Half-open range `lower ≤ m < upper`; orders below `lower` are left to
    /// the Lebesgue-target result.
    pub fn range(order: Option<f64>, lower: f64, upper: f64, constraint: impl Into<String>, target: impl Into<String>) -> Self {
        let mut v = Verdict::strict(order, upper, constraint, target);
        v.lower = Some(lower);
        if let Some(m) = order {
            if m < lower {
                v.status = VerdictStatus::NotApplicable;
                v.admissible = false;
            }
        }
        v
    }

    pub fn without_threshold(status: VerdictStatus, order: Option<f64>, reason: impl Into<String>, target: impl Into<String>) -> Self {
        Verdict {
            status,
            admissible: false,
            threshold: None,
            lower: None,
            order,
            binding_constraint: reason.into(),
            target_space: target.into(),
        }
    }
}

/// Evaluated thresholds and verdicts for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub scenario: String,
    pub inputs: super::ScenarioInputs,
    /// Target exponent `r` from the Hölder relation of the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_exponent: Option<Exponent>,
    /// Intermediate exponents such as `r₂` or the per-operand `p_j`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub derived_exponents: BTreeMap<String, Exponent>,
    /// Threshold values; `null` marks a quantity that is not defined here.
    pub values: BTreeMap<String, Option<f64>>,
    pub verdicts: BTreeMap<String, Verdict>,
}

impl ThresholdReport {
    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied().flatten()
    }

    pub fn verdict(&self, key: &str) -> Option<&Verdict> {
        self.verdicts.get(key)
    }
}

pub(crate) fn lebesgue_space(r: Exponent) -> String {
    format!("L^{r}")
}

pub(crate) fn lorentz_space(r: Exponent, q: Exponent) -> String {
    format!("L^{{{r},{q}}}")
}
