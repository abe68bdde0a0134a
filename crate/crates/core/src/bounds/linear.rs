//! Order thresholds for linear operators, evaluated in the reciprocal domain.

use serde::{Deserialize, Serialize};

use super::Exponent;
use crate::{FioError, Result};

/// Which closed form of `𝔪(ρ, p, q)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderBranch {
    /// `p < 2`, or `p ≥ 2` with `q < p'`.
    LowIntegrability,
    /// `2 ≤ p, q`.
    BothAboveTwo,
    /// `p > 2` and `p' ≤ q ≤ 2`.
    Intermediate,
}

impl OrderBranch {
    pub fn describe(self) -> &'static str {
        match self {
            OrderBranch::LowIntegrability => "p < 2 or q < p'",
            OrderBranch::BothAboveTwo => "2 <= p, q",
            OrderBranch::Intermediate => "p > 2 and p' <= q <= 2",
        }
    }
}

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        return Err(FioError::invalid("dimension must be at least 1"));
    }
    Ok(())
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(FioError::invalid(format!("rho must lie in [0, 1], got {rho}")));
    }
    Ok(())
}

/// Branch of `𝔪` for `(p, q)`. On `q = 2` with `p > 2` two branches overlap
/// and give the same value; the `2 ≤ p, q` branch is reported.
pub fn order_branch(p: Exponent, q: Exponent) -> OrderBranch {
    let (a, b) = (p.recip(), q.recip());
    if a > 0.5 || b > 1.0 - a {
        OrderBranch::LowIntegrability
    } else if b <= 0.5 {
        OrderBranch::BothAboveTwo
    } else {
        OrderBranch::Intermediate
    }
}

/// The threshold `𝔪(ρ, p, q)` for `L^q → L^r` boundedness with an `L^p` amplitude.
pub fn m_bar(n: usize, rho: f64, p: Exponent, q: Exponent) -> Result<(f64, OrderBranch)> {
    check_dimension(n)?;
    check_rho(rho)?;
    p.require_at_least_one()?;
    q.require_at_least_one()?;
    let (nf, a, b) = (n as f64, p.recip(), q.recip());
    let branch = order_branch(p, q);
    let value = match branch {
        OrderBranch::LowIntegrability => {
            let inv_min = a.max(b);
            nf * (rho - 1.0) * inv_min - (nf - 1.0) / 2.0 * (a + inv_min)
        }
        OrderBranch::BothAboveTwo => nf * (rho - 1.0) / 2.0 - (nf - 1.0) * (0.5 - b),
        OrderBranch::Intermediate => {
            if (1.0 - 2.0 * a).abs() < 1e-15 {
                return Err(FioError::invalid("the intermediate branch is singular at p = 2"));
            }
            nf * (rho - 1.0) * b - (nf - 1.0) / (1.0 - 2.0 * a) * (b - 0.5)
        }
    };
    Ok((value, branch))
}

/// Upper end `ℳ(ρ, p, q)` of the Lorentz-target range, defined for `1 < q < 2`.
pub fn m_script(n: usize, rho: f64, p: Exponent, q: Exponent) -> Result<Option<f64>> {
    check_dimension(n)?;
    check_rho(rho)?;
    p.require_at_least_one()?;
    let (nf, a, b) = (n as f64, p.recip(), q.recip());
    if !(b > 0.5 && b < 1.0) {
        return Ok(None);
    }
    Ok(Some(nf * (rho - 1.0) * b - (nf - 1.0) / (1.0 + a) * (b - 0.5)))
}

/// `s = min(2, p, q)` by its reciprocal.
pub fn critical_recip(p: Exponent, q: Exponent) -> f64 {
    0.5f64.max(p.recip()).max(q.recip())
}

/// Order condition of the general linear theorem with `s = min(2, p, q)`:
/// `−(n−1)/2 · (1/s + 1/min(p, s')) + n(ρ−1)/s`.
pub fn general_order_threshold(n: usize, rho: f64, p: Exponent, q: Exponent) -> Result<f64> {
    check_dimension(n)?;
    check_rho(rho)?;
    let nf = n as f64;
    let s = critical_recip(p, q);
    let inv_min_p_sprime = p.recip().max(1.0 - s);
    Ok(-(nf - 1.0) / 2.0 * (s + inv_min_p_sprime) + nf * (rho - 1.0) * s)
}

/// `n(ρ−1)/2`: order bound for `L² → L^r` boundedness.
pub fn l2_threshold(n: usize, rho: f64) -> Result<f64> {
    check_dimension(n)?;
    check_rho(rho)?;
    Ok(n as f64 * (rho - 1.0) / 2.0)
}

/// `n(ρ−1)/min(2, p, q)`: order bound for rough pseudodifferential operators.
pub fn psido_threshold(n: usize, rho: f64, p: Exponent, q: Exponent) -> Result<f64> {
    check_dimension(n)?;
    check_rho(rho)?;
    Ok(n as f64 * (rho - 1.0) * critical_recip(p, q))
}
