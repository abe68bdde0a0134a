use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::linear::{
    check_dimension, check_rho, critical_recip, general_order_threshold, l2_threshold, m_bar, m_script, psido_threshold,
};
use super::report::{lebesgue_space, lorentz_space, ThresholdReport, Verdict, VerdictStatus};
use super::Exponent;
use crate::{FioError, Result};

pub const SCENARIO_TAGS: &[&str] = &[
    "linear",
    "psido",
    "bilinear_product",
    "bilinear_Linfty",
    "general_multilinear",
    "smooth_bilinear",
    "bilinear_psido_rough",
    "bilinear_psido_smooth",
    "bilinear_psido_interp",
];

/// Indices a scenario may need. Each tag reads only the fields it uses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Exponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q1: Option<Exponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q2: Option<Exponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Exponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qs: Option<Vec<Exponent>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms: Option<Vec<f64>>,
}

fn need<T: Copy>(v: Option<T>, tag: &str, field: &str) -> Result<T> {
    v.ok_or_else(|| FioError::invalid(format!("scenario {tag} needs `{field}`")))
}

impl ScenarioInputs {
    fn dimension(&self, tag: &str) -> Result<usize> {
        let n = need(self.n, tag, "n")?;
        check_dimension(n)?;
        Ok(n)
    }

    fn rho(&self, tag: &str) -> Result<f64> {
        let rho = need(self.rho, tag, "rho")?;
        check_rho(rho)?;
        Ok(rho)
    }

    fn exponent(&self, v: Option<Exponent>, tag: &str, field: &str) -> Result<Exponent> {
        let e = need(v, tag, field)?;
        e.require_at_least_one()
            .map_err(|_| FioError::invalid(format!("scenario {tag}: `{field}` must lie in [1, inf]")))
    }

    fn delta(&self, tag: &str) -> Result<f64> {
        let d = self.delta.unwrap_or(0.0);
        if !(0.0..=1.0).contains(&d) {
            return Err(FioError::invalid(format!("scenario {tag}: delta must lie in [0, 1]")));
        }
        Ok(d)
    }

    /// Checks an optional user-given `r` against the Hölder relation.
    fn target(&self, computed: Exponent) -> Result<Exponent> {
        if let Some(r) = self.r {
            if (r.recip() - computed.recip()).abs() > 1e-12 {
                return Err(FioError::InconsistentHolder(format!(
                    "given r = {r} but the exponents require r = {computed}"
                )));
            }
        }
        Ok(computed)
    }
}

fn new_report(tag: &str, inputs: &ScenarioInputs) -> ThresholdReport {
    ThresholdReport {
        scenario: tag.to_string(),
        inputs: inputs.clone(),
        target_exponent: None,
        derived_exponents: BTreeMap::new(),
        values: BTreeMap::new(),
        verdicts: BTreeMap::new(),
    }
}

/// All five linear thresholds for `(n, ρ, p, q)`; verdicts stay unevaluated.
pub fn linear_thresholds(n: usize, rho: f64, p: Exponent, q: Exponent) -> Result<ThresholdReport> {
    let inputs = ScenarioInputs {
        n: Some(n),
        rho: Some(rho),
        p: Some(p),
        q: Some(q),
        ..Default::default()
    };
    linear_report("linear", &inputs)
}

fn linear_report(tag: &str, inputs: &ScenarioInputs) -> Result<ThresholdReport> {
    let n = inputs.dimension(tag)?;
    let rho = inputs.rho(tag)?;
    let p = inputs.exponent(inputs.p, tag, "p")?;
    let q = inputs.exponent(inputs.q, tag, "q")?;
    let m = inputs.m;
    let r = inputs.target(Exponent::holder(&[p, q]))?;
    let (bar, branch) = m_bar(n, rho, p, q)?;
    let script = m_script(n, rho, p, q)?;
    let general = general_order_threshold(n, rho, p, q)?;
    let l2 = l2_threshold(n, rho)?;
    let psido = psido_threshold(n, rho, p, q)?;

    let mut rep = new_report(tag, inputs);
    rep.target_exponent = Some(r);
    rep.values.insert("m_bar".into(), Some(bar));
    rep.values.insert("m_script".into(), script);
    rep.values.insert("eq_m1".into(), Some(general));
    rep.values.insert("L2_threshold".into(), Some(l2));
    rep.values.insert("psido_threshold".into(), Some(psido));

    let psido_verdict = Verdict::strict(m, psido, "m < n(rho-1)/min(2,p,q)", lebesgue_space(r));
    if tag == "psido" {
        rep.verdicts.insert("psido".into(), psido_verdict);
        return Ok(rep);
    }
    rep.verdicts.insert(
        "lebesgue".into(),
        Verdict::strict(m, bar, format!("m < m_bar(rho,p,q), branch {}", branch.describe()), lebesgue_space(r)),
    );
    rep.verdicts.insert(
        "lorentz".into(),
        match script {
            Some(upper) => Verdict::range(m, bar, upper, "m_bar(rho,p,q) <= m < M(rho,p,q)", lorentz_space(r, q)),
            None => Verdict::without_threshold(VerdictStatus::NotApplicable, m, "requires 1 < q < 2", lorentz_space(r, q)),
        },
    );
    let s = Exponent::from_recip(critical_recip(p, q))?;
    rep.verdicts.insert(
        "general_order".into(),
        Verdict::strict(m, general, format!("order condition with s = min(2,p,q) = {s}"), lebesgue_space(r)),
    );
    rep.verdicts.insert(
        "l2_source".into(),
        if (q.recip() - 0.5).abs() < 1e-15 {
            Verdict::strict(m, l2, "m < n(rho-1)/2", lebesgue_space(r))
        } else {
            Verdict::without_threshold(VerdictStatus::NotApplicable, m, "requires q = 2", lebesgue_space(r))
        },
    );
    rep.verdicts.insert("psido".into(), psido_verdict);
    Ok(rep)
}

/// Evaluates the scenario named by `tag`.
pub fn multilinear_admissibility(tag: &str, inputs: &ScenarioInputs) -> Result<ThresholdReport> {
    match tag {
        "linear" | "psido" => linear_report(tag, inputs),
        "bilinear_product" => bilinear_product(tag, inputs),
        "bilinear_Linfty" => bilinear_linfty(tag, inputs),
        "general_multilinear" => general_multilinear(tag, inputs),
        "smooth_bilinear" => smooth_bilinear(tag, inputs),
        "bilinear_psido_rough" => bilinear_psido_rough(tag, inputs),
        "bilinear_psido_smooth" => bilinear_psido_smooth(tag, inputs),
        "bilinear_psido_interp" => bilinear_psido_interp(tag, inputs),
        other => Err(FioError::UnknownScenario(other.to_string())),
    }
}

fn bilinear_product(tag: &str, inputs: &ScenarioInputs) -> Result<ThresholdReport> {
    let n = inputs.dimension(tag)?;
    let rho1 = inputs.rho1.or(inputs.rho).ok_or_else(|| FioError::invalid("scenario bilinear_product needs `rho1` or `rho`"))?;
    let rho2 = inputs.rho2.or(inputs.rho).ok_or_else(|| FioError::invalid("scenario bilinear_product needs `rho2` or `rho`"))?;
    check_rho(rho1)?;
    check_rho(rho2)?;
    let p = inputs.exponent(inputs.p, tag, "p")?;
    let q1 = inputs.exponent(inputs.q1, tag, "q1")?;
    let q2 = inputs.exponent(inputs.q2, tag, "q2")?;
    let r = inputs.target(Exponent::holder(&[p, q1, q2]))?;
    let mut rep = new_report(tag, inputs);
    rep.target_exponent = Some(r);
    let order = match (inputs.m1, inputs.m2) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };

    let violation = if q1.recip() > q2.recip() {
        Some("q1 must be the larger exponent: q1 = max(q1, q2)")
    } else if q1.recip() > p.conjugate().recip() + 1e-15 {
        Some("q1 >= p' fails")
    } else {
        None
    };
    if let Some(reason) = violation {
        rep.verdicts.insert(
            "product".into(),
            Verdict::without_threshold(VerdictStatus::HypothesisViolated, inputs.m1, reason, lebesgue_space(r)),
        );
        return Ok(rep);
    }
    let r2 = Exponent::holder(&[p, q1]);
    rep.derived_exponents.insert("r2".into(), r2);
    let (first, _) = m_bar(n, rho1, p, q1)?;
    let (second, _) = m_bar(n, rho2, r2, q2)?;
    rep.values.insert("m1_threshold".into(), Some(first));
    rep.values.insert("m2_threshold".into(), Some(second));

    let v1 = Verdict::strict(order.map(|o| o.0), first, "m1 < m_bar(rho1,p,q1)", lebesgue_space(r));
    let v2 = Verdict::strict(order.map(|o| o.1), second, "m2 < m_bar(rho2,r2,q2)", lebesgue_space(r));
    rep.verdicts.insert("product".into(), combine(&[v1.clone(), v2.clone()], lebesgue_space(r)));

    let lorentz_window = q2.recip() > 0.5 && q2.recip() <= 1.0 && r2.recip() <= 0.5;
    let script = if lorentz_window { m_script(n, rho2, r2, q2)? } else { None };
    rep.values.insert("m2_lorentz_upper".into(), script);
    let lorentz = match script {
        Some(upper) => {
            let v2l = Verdict::range(order.map(|o| o.1), second, upper, "m_bar(rho2,r2,q2) <= m2 < M(rho2,r2,q2)", lorentz_space(r, q2));
            combine(&[v1, v2l], lorentz_space(r, q2))
        }
        None => Verdict::without_threshold(
            VerdictStatus::NotApplicable,
            inputs.m2,
            "requires 1 < q2 < 2 <= r2",
            lorentz_space(r, q2),
        ),
    };
    rep.verdicts.insert("product_lorentz".into(), lorentz);
    Ok(rep)
}

/// Joint verdict of several conditions: the one with the smallest margin binds.
fn combine(parts: &[Verdict], target: String) -> Verdict {
    use VerdictStatus::*;
    let rank = |s: VerdictStatus| match s {
        HypothesisViolated => 0,
        NotApplicable => 1,
        Inadmissible => 2,
        Borderline => 3,
        Unevaluated => 4,
        Admissible => 5,
    };
    let margin = |v: &Verdict| match (v.threshold, v.order) {
        (Some(t), Some(m)) => t - m,
        _ => f64::INFINITY,
    };
    let worst = parts
        .iter()
        .min_by(|a, b| {
            rank(a.status)
                .cmp(&rank(b.status))
                .then(margin(a).partial_cmp(&margin(b)).unwrap_or(std::cmp::Ordering::Equal))
        })
        .expect("at least one condition");
    let mut out = worst.clone();
    out.target_space = target;
    let names: Vec<&str> = parts.iter().map(|p| p.binding_constraint.as_str()).collect();
    if parts.len() > 1 && worst.status == Unevaluated {
        out.binding_constraint = names.join(" and ");
    }
    out
}

fn bilinear_linfty(tag: &str, inputs: &ScenarioInputs) -> Result<ThresholdReport> {
    let n = inputs.dimension(tag)?;
    let rho = inputs.rho(tag)?;
    let q1 = inputs.exponent(inputs.q1, tag, "q1")?;
    let q2 = inputs.exponent(inputs.q2, tag, "q2")?;
    let r = inputs.target(Exponent::holder(&[q1, q2]))?;
    let (qmax, qmin) = (q1.max(q2), q1.min(q2));
    let (outer, _) = m_bar(n, rho, Exponent::INFINITY, qmax)?;
    let (inner, _) = m_bar(n, rho, qmax, qmin)?;
    let threshold = outer + inner;
    let mut rep = new_report(tag, inputs);
    rep.target_exponent = Some(r);
    rep.values.insert("threshold".into(), Some(threshold));
    rep.values.insert("m_bar_inf_qmax".into(), Some(outer));
    rep.values.insert("m_bar_qmax_qmin".into(), Some(inner));
    rep.verdicts.insert(
        "bilinear".into(),
        Verdict::strict(inputs.m, threshold, "m < m_bar(rho,inf,qmax) + m_bar(rho,qmax,qmin)", lebesgue_space(r)),
    );
    Ok(rep)
}

fn general_multilinear(tag: &str, inputs: &ScenarioInputs) -> Result<ThresholdReport> {
    let n = inputs.dimension(tag)?;
    let p = inputs.exponent(inputs.p, tag, "p")?;
    let qs = inputs.qs.clone().ok_or_else(|| FioError::invalid("scenario general_multilinear needs `qs`"))?;
    let ms = inputs.ms.clone().ok_or_else(|| FioError::invalid("scenario general_multilinear needs `ms`"))?;
    if qs.len() != ms.len() || qs.len() < 2 {
        return Err(FioError::invalid("general_multilinear needs matching `qs` and `ms` lists of length >= 2"));
    }
    for q in &qs {
        q.require_at_least_one()?;
    }
    let mut parts = vec![p];
    parts.extend_from_slice(&qs);
    let r = inputs.target(Exponent::holder(&parts))?;
    let mut rep = new_report(tag, inputs);
    rep.target_exponent = Some(r);
    let total: f64 = ms.iter().sum();
    rep.values.insert("m_total".into(), Some(total));

    if ms.iter().any(|&m| m >= 0.0) {
        rep.verdicts.insert(
            "multilinear".into(),
            Verdict::without_threshold(VerdictStatus::HypothesisViolated, Some(total), "every m_j must be negative", lebesgue_space(r)),
        );
        return Ok(rep);
    }
    let smallest = ms.iter().copied().fold(f64::INFINITY, f64::min);
    // Σm / min m ≥ 2/p, with both sides finite (m_j < 0 so the ratio is ≥ 1).
    if total / smallest < 2.0 * p.recip() - 1e-15 {
        rep.verdicts.insert(
            "multilinear".into(),
            Verdict::without_threshold(
                VerdictStatus::HypothesisViolated,
                Some(total),
                "side condition sum(m) / min(m) >= 2/p fails",
                lebesgue_space(r),
            ),
        );
        return Ok(rep);
    }
    let mut verdicts = Vec::with_capacity(ms.len());
    let mut aggregate = 0.0;
    for (j, (&m, &q)) in ms.iter().zip(&qs).enumerate() {
        let pj = Exponent::from_recip(p.recip() * m / total)?;
        rep.derived_exponents.insert(format!("p{}", j + 1), pj);
        let (thr, _) = m_bar(n, 1.0, pj, q)?;
        aggregate += thr;
        rep.values.insert(format!("m{}_threshold", j + 1), Some(thr));
        verdicts.push(Verdict::strict(Some(m), thr, format!("m{0} < m_bar(1,p{0},q{0})", j + 1), lebesgue_space(r)));
    }
    rep.values.insert("aggregate_threshold".into(), Some(aggregate));
    rep.verdicts.insert("multilinear".into(), combine(&verdicts, lebesgue_space(r)));
    rep.verdicts.insert(
        "aggregate".into(),
        Verdict::strict(Some(total), aggregate, "sum(m) < sum of per-operand thresholds", lebesgue_space(r)),
    );
    Ok(rep)
}

fn smooth_bilinear(tag: &str, inputs: &ScenarioInputs) -> Result<ThresholdReport> {
    let n = inputs.dimension(tag)?;
    let rho = inputs.rho(tag)?;
    let delta = inputs.delta(tag)?;
    let q1 = inputs.exponent(inputs.q1, tag, "q1")?;
    let q2 = inputs.exponent(inputs.q2, tag, "q2")?;
    let r = inputs.target(Exponent::holder(&[q1, q2]))?;
    let nf = n as f64;
    let side = |a: Exponent, b: Exponent| -> Result<f64> {
        Ok((rho - nf) * (a.recip() - 0.5).abs() + m_bar(n, rho, a, b)?.0)
    };
    let local = side(q1, q2)?.min(side(q2, q1)?);
    let mut rep = new_report(tag, inputs);
    rep.target_exponent = Some(r);
    rep.values.insert("local_threshold".into(), Some(local));
    rep.verdicts.insert(
        "local".into(),
        Verdict::strict(
            inputs.m,
            local,
            "m < min((rho-n)|1/q1-1/2| + m_bar(rho,q1,q2), (rho-n)|1/q2-1/2| + m_bar(rho,q2,q1))",
            lebesgue_space(r),
        ),
    );
    let both_two = (q1.recip() - 0.5).abs() < 1e-15 && (q2.recip() - 0.5).abs() < 1e-15;
    let global = nf * (rho - 1.0) / 2.0 + nf * (rho - delta).min(0.0) / 2.0;
    rep.values.insert("global_l2_threshold".into(), if both_two { Some(global) } else { None });
    rep.verdicts.insert(
        "global_l2".into(),
        if both_two {
            Verdict::strict(inputs.m, global, "m < n(rho-1)/2 + n min(rho-delta,0)/2", lebesgue_space(r))
        } else {
            Verdict::without_threshold(VerdictStatus::NotApplicable, inputs.m, "requires q1 = q2 = 2", lebesgue_space(r))
        },
    );
    Ok(rep)
}

fn bilinear_psido_rough(tag: &str, inputs: &ScenarioInputs) -> Result<ThresholdReport> {
    let n = inputs.dimension(tag)?;
    let rho = inputs.rho(tag)?;
    let p = inputs.exponent(inputs.p, tag, "p")?;
    let q1 = inputs.exponent(inputs.q1, tag, "q1")?;
    let q2 = inputs.exponent(inputs.q2, tag, "q2")?;
    let r = inputs.target(Exponent::holder(&[p, q1, q2]))?;
    let (qmax, qmin) = (q1.max(q2), q1.min(q2));
    let first = 0.5f64.max(qmax.recip()).max(p.recip());
    let second = 0.5f64.max(qmin.recip()).max(p.recip() + qmax.recip());
    let threshold = n as f64 * (rho - 1.0) * (first + second);
    let mut rep = new_report(tag, inputs);
    rep.target_exponent = Some(r);
    rep.values.insert("threshold".into(), Some(threshold));
    rep.verdicts.insert(
        "bilinear_psido".into(),
        Verdict::strict(
            inputs.m,
            threshold,
            "m < n(rho-1)(1/min(2,qmax,p) + 1/min(2,qmin,p qmax/(qmax+p)))",
            lebesgue_space(r),
        ),
    );
    Ok(rep)
}

fn bilinear_psido_smooth(tag: &str, inputs: &ScenarioInputs) -> Result<ThresholdReport> {
    let n = inputs.dimension(tag)?;
    let rho = inputs.rho(tag)?;
    let delta = inputs.delta(tag)?;
    let q1 = inputs.exponent(inputs.q1, tag, "q1")?;
    let q2 = inputs.exponent(inputs.q2, tag, "q2")?;
    let r = inputs.target(Exponent::holder(&[q1, q2]))?;
    let nf = n as f64;
    let spread = (0.5 - q1.recip()).abs().max((0.5 - q2.recip()).abs());
    let inv_min = 0.5f64.max(q1.recip()).max(q2.recip());
    let threshold = nf * (rho - 1.0) * (spread + inv_min) + nf * (rho - delta).min(0.0) / 2.0;
    let mut rep = new_report(tag, inputs);
    rep.target_exponent = Some(r);
    rep.values.insert("threshold".into(), Some(threshold));
    rep.verdicts.insert(
        "bilinear_psido".into(),
        Verdict::strict(
            inputs.m,
            threshold,
            "m < n(rho-1)[max(|1/2-1/q1|,|1/2-1/q2|) + 1/min(2,q1,q2)] + n min(rho-delta,0)/2",
            lebesgue_space(r),
        ),
    );
    Ok(rep)
}

fn bilinear_psido_interp(tag: &str, inputs: &ScenarioInputs) -> Result<ThresholdReport> {
    let n = inputs.dimension(tag)?;
    let rho = inputs.rho(tag)?;
    let q1 = inputs.exponent(inputs.q1, tag, "q1")?;
    let q2 = inputs.exponent(inputs.q2, tag, "q2")?;
    let r = inputs.target(Exponent::holder(&[q1, q2]))?;
    let inv_r = r.recip();
    let first = 0.5f64.max(q1.recip()).max(q2.recip()).max(1.0 - inv_r);
    let second = 0.5 * (inv_r - 1.0).max(0.0);
    let threshold = n as f64 * (rho - 1.0) * (first + second);
    let mut rep = new_report(tag, inputs);
    rep.target_exponent = Some(r);
    rep.values.insert("threshold".into(), Some(threshold));
    rep.verdicts.insert(
        "bilinear_psido".into(),
        Verdict::strict(
            inputs.m,
            threshold,
            "m < n(rho-1)[max(1/2,1/q1,1/q2,1-1/r) + max(1/r-1,0)/2]",
            lebesgue_space(r),
        ),
    );
    Ok(rep)
}
