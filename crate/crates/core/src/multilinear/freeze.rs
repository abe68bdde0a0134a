use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bounds::Exponent;
use crate::numgrid::{fourier_transform, Direction, Domain, SampledField};
use crate::oscint::SPECTRAL_FLOOR;
use crate::symbols::{AmplitudeDescriptor, ClassTag, Jet, PhaseDescriptor};
use crate::{FioError, Result};

/// Nonzero spectrum of `f` as `(ξ, Δξ^n (2π)^{-n} f̂(ξ))`.
pub(crate) fn weighted_spectrum(f: &SampledField) -> Result<Vec<(Vec<f64>, Complex64)>> {
    if f.domain != Domain::Space {
        return Err(FioError::GridMismatch("operands must be space fields".into()));
    }
    let grid = f.grid;
    let dim = grid.dim();
    let hat = fourier_transform(f, Direction::Forward)?;
    let peak = hat.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let weight = grid.freq_cell_volume() / (2.0 * PI).powi(dim as i32);
    Ok(hat
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > SPECTRAL_FLOOR * peak)
        .map(|(k, v)| (grid.freq_point(k)[..dim].to_vec(), v * weight))
        .collect())
}

/// Class of the amplitude left after integrating out operand `slot` against a
/// function in `L^q`: the Lebesgue exponent combines by Hölder and the frozen
/// operand's order and type drop out.
pub fn transferred_class(class: &ClassTag, slot: usize, q: Exponent) -> Result<ClassTag> {
    match class {
        ClassTag::ProductRough { p, m, rho } => {
            if slot >= m.len() || m.len() < 2 {
                return Err(FioError::invalid("operand index out of range for the product class"));
            }
            let p = Exponent::holder(&[*p, q]);
            let m: Vec<f64> = m.iter().enumerate().filter(|(i, _)| *i != slot).map(|(_, v)| *v).collect();
            let rho: Vec<f64> = rho.iter().enumerate().filter(|(i, _)| *i != slot).map(|(_, v)| *v).collect();
            if m.len() == 1 {
                Ok(ClassTag::Rough { p, m: m[0], rho: rho[0] })
            } else {
                Ok(ClassTag::ProductRough { p, m, rho })
            }
        }
        other => Err(FioError::ClassMismatch(format!(
            "no class transfer rule for {other:?}; a product class is required"
        ))),
    }
}

/// `a_f(x, η) = (2π)^{-n} ∫ e^{iφ(x,ξ)} a(x, …, ξ, …, η) f̂(ξ) dξ` with `ξ`
/// in position `slot`.
///
/// When `q` is given the result claims the transferred class; otherwise it
/// keeps the input's class unchanged. Derivatives in the remaining
/// frequencies are taken under the integral.
pub fn freeze_operand(
    a: &AmplitudeDescriptor,
    slot: usize,
    phase: &PhaseDescriptor,
    f: &SampledField,
    q: Option<Exponent>,
) -> Result<AmplitudeDescriptor> {
    let dim = a.dim();
    let arity = a.arity();
    if arity < 2 {
        return Err(FioError::invalid("freezing needs an amplitude with at least two operands"));
    }
    if slot >= arity {
        return Err(FioError::invalid(format!("operand {slot} does not exist for arity {arity}")));
    }
    if phase.dim() != dim || f.grid.dim() != dim {
        return Err(FioError::GridMismatch("amplitude, phase and operand dimensions differ".into()));
    }
    let class = match q {
        Some(q) => transferred_class(&a.class, slot, q)?,
        None => match &a.class {
            ClassTag::ProductRough { .. } => transferred_class(&a.class, slot, Exponent::INFINITY)?,
            other => other.clone(),
        },
    };
    let spectrum = Arc::new(weighted_spectrum(f)?);
    let (inner, phase_v, spec_v) = (a.clone(), phase.clone(), spectrum.clone());
    let at = slot * dim;
    let mut frozen = AmplitudeDescriptor::from_fn(dim, arity - 1, class, move |x, rest| {
        let mut full = Vec::with_capacity(rest.len() + dim);
        full.extend_from_slice(&rest[..at]);
        full.extend_from_slice(&vec![0.0; dim]);
        full.extend_from_slice(&rest[at..]);
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, w) in spec_v.iter() {
            full[at..at + dim].copy_from_slice(xi);
            let v = inner.eval(x, &full)?;
            if v != Complex64::new(0.0, 0.0) {
                acc += v * w * Complex64::from_polar(1.0, phase_v.eval(x, xi)?);
            }
        }
        Ok(acc)
    });
    if a.has_analytic_derivatives() {
        let (inner, phase_j) = (a.clone(), phase.clone());
        frozen = frozen.with_jet(move |x, rest| {
            let layout = rest[0].layout().clone();
            let mut acc = Jet::real(&layout, 0.0);
            for (xi, w) in spectrum.iter() {
                let consts: Vec<Jet> = xi.iter().map(|&v| Jet::real(&layout, v)).collect();
                let mut full: Vec<Jet> = rest[..at].to_vec();
                full.extend(consts.iter().cloned());
                full.extend_from_slice(&rest[at..]);
                let v = inner.jet(x, &full).expect("jet access checked")?;
                let ph = phase_j.jet(x, &consts)?.scale(Complex64::new(0.0, 1.0)).exp();
                acc = acc.add(&v.mul(&ph).scale(*w));
            }
            Ok(acc)
        });
    }
    Ok(frozen.with_label(format!("{} frozen at operand {slot}", a.label())))
}

/// Freezes the first operand of a product-class amplitude against `f ∈ L^{q₁}`.
pub fn freeze_argument(a: &AmplitudeDescriptor, phase: &PhaseDescriptor, f: &SampledField, q1: Exponent) -> Result<AmplitudeDescriptor> {
    if !matches!(a.class, ClassTag::ProductRough { .. }) {
        return Err(FioError::ClassMismatch(
            "freezing an operand needs a product class; the transfer rule is unknown otherwise".into(),
        ));
    }
    freeze_operand(a, 0, phase, f, Some(q1))
}
