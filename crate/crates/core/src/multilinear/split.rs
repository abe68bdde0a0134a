use num_complex::Complex64;

use crate::dyadic::{smooth_step, smooth_step_jet};
use crate::symbols::{AmplitudeDescriptor, Jet};
use crate::{EvalError, FioError, Result};

fn transition(s: f64) -> f64 {
    smooth_step((2.0 - s) / 1.5)
}

/// `χ(s) = B(s) / (B(s) + B(1/s))` with `B` a smooth step falling from 1 at
/// `s = 1/2` to 0 at `s = 2`, so `χ(s) + χ(1/s) = 1` holds by construction
/// and `χ` vanishes on `[2, ∞)`.
pub fn split_weight(s: f64) -> f64 {
    let b = transition(s);
    let c = transition(1.0 / s);
    b / (b + c)
}

fn split_weight_jet(s: &Jet) -> std::result::Result<Jet, EvalError> {
    let b = smooth_step_jet(&s.neg().add_constant(Complex64::new(2.0, 0.0)).scale(Complex64::new(1.0 / 1.5, 0.0)))?;
    let inv = s.recip()?;
    let c = smooth_step_jet(&inv.neg().add_constant(Complex64::new(2.0, 0.0)).scale(Complex64::new(1.0 / 1.5, 0.0)))?;
    b.div(&b.add(&c))
}

fn bracket_sq(v: &[f64]) -> f64 {
    1.0 + v.iter().map(|t| t * t).sum::<f64>()
}

fn bracket_sq_jet(v: &[Jet]) -> Jet {
    let mut acc = Jet::real(v[0].layout(), 1.0);
    for t in v {
        acc = acc.add(&t.mul(t));
    }
    acc
}

/// Splits a bilinear amplitude into `a₁ = a·χ(⟨ξ⟩²/⟨η⟩²)`, living where `ξ`
/// is not much larger than `η`, and `a₂ = a·χ(⟨η⟩²/⟨ξ⟩²)`.
pub fn frequency_split(a: &AmplitudeDescriptor) -> Result<(AmplitudeDescriptor, AmplitudeDescriptor)> {
    if a.arity() != 2 {
        return Err(FioError::invalid("frequency splitting needs a bilinear amplitude"));
    }
    let dim = a.dim();
    let make = |first: bool| {
        let inner = a.clone();
        let mut out = AmplitudeDescriptor::from_fn(dim, 2, a.class.clone(), move |x, xi| {
            let (u, v) = xi.split_at(dim);
            let s = if first {
                bracket_sq(u) / bracket_sq(v)
            } else {
                bracket_sq(v) / bracket_sq(u)
            };
            let w = split_weight(s);
            if w == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok(inner.eval(x, xi)? * w)
        });
        if a.has_analytic_derivatives() {
            let inner = a.clone();
            out = out.with_jet(move |x, xi| {
                let (u, v) = xi.split_at(dim);
                let (bu, bv) = (bracket_sq_jet(u), bracket_sq_jet(v));
                let s = if first { bu.div(&bv)? } else { bv.div(&bu)? };
                let w = split_weight_jet(&s)?;
                Ok(inner.jet(x, xi).expect("jet access checked")?.mul(&w))
            });
        }
        if let Some(r) = a.freq_support_radius {
            out = out.with_support_radius(r);
        }
        out.with_label(format!("{} [{} part]", a.label(), if first { "first" } else { "second" }))
    };
    Ok((make(true), make(false)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_identity() {
        for s in [1e-3, 0.3, 0.5, 0.9, 1.0, 1.7, 2.0, 5.0, 1e3] {
            assert!((split_weight(s) + split_weight(1.0 / s) - 1.0).abs() < 1e-15);
        }
        assert_eq!(split_weight(2.0), 0.0);
        assert_eq!(split_weight(1.0), 0.5);
        assert_eq!(split_weight(0.01), 1.0);
    }

    #[test]
    fn jet_matches_values() {
        let layout = crate::symbols::JetLayout::get(1, 1);
        let s = Jet::variable(&layout, 0, 1.3);
        let j = split_weight_jet(&s).unwrap();
        assert!((j.value().re - split_weight(1.3)).abs() < 1e-14);
        let h = 1e-6;
        let fd = (split_weight(1.3 + h) - split_weight(1.3 - h)) / (2.0 * h);
        assert!((j.derivative(&[1]).re - fd).abs() < 1e-7);
    }
}
