use super::SampledField;
use crate::{FioError, Result};

/// Quadrature L^p (quasi-)norm, `(Σ|f|^p w)^{1/p}` with the cell weight `w`
/// of the field's representation; `p = ∞` gives the max modulus.
pub fn lp_norm(field: &SampledField, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(FioError::invalid(format!("L^p exponent must be positive, got {p}")));
    }
    if p.is_infinite() {
        return Ok(field.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let w = field.cell_weight();
    let sum: f64 = if p == 2.0 {
        field.values.iter().map(|v| v.norm_sqr()).sum()
    } else {
        field.values.iter().map(|v| v.norm().powf(p)).sum()
    };
    Ok((sum * w).powf(1.0 / p))
}

/// Lorentz quasi-norm `‖f‖_{L^{r,q}} = (∫_0^∞ (t^{1/r} f*(t))^q dt/t)^{1/q}`.
///
/// The decreasing rearrangement of a grid function is a step function with
/// steps of one cell volume, so the integral is evaluated exactly step by step.
/// With this normalisation `L^{r,r} = L^r` holds identically.
pub fn lorentz_norm(field: &SampledField, r: f64, q: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(FioError::invalid(format!("Lorentz exponent r must be in (0,inf), got {r}")));
    }
    if q.is_nan() || q <= 0.0 {
        return Err(FioError::invalid(format!("Lorentz exponent q must be in (0,inf], got {q}")));
    }
    let cell = field.cell_weight();
    let mut mags: Vec<f64> = field.values.iter().map(|v| v.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    if q.is_infinite() {
        let best = mags
            .iter()
            .enumerate()
            .map(|(k, v)| v * ((k + 1) as f64 * cell).powf(1.0 / r))
            .fold(0.0, f64::max);
        return Ok(best);
    }
    let e = q / r;
    let mut sum = 0.0;
    let mut prev = 0.0;
    for (k, v) in mags.iter().enumerate() {
        if *v == 0.0 {
            break;
        }
        let cur = ((k + 1) as f64 * cell).powf(e);
        sum += v.powf(q) * (cur - prev);
        prev = cur;
    }
    Ok((sum / e).powf(1.0 / q))
}

/// Size of the neglected frequency tail `∫_{|ξ|>Ξ} ⟨ξ⟩^m dξ ≲ Ξ^{m+n}`, or
/// `None` when the tail does not converge (`m ≥ -n`).
pub fn truncation_tail_estimate(order: f64, freq_halfwidth: f64, dim: usize) -> Option<f64> {
    let n = dim as f64;
    if order < -n {
        Some(freq_halfwidth.powf(order + n))
    } else {
        None
    }
}
