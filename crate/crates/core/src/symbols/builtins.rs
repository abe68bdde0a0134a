//! Built-in amplitudes, phases and the smooth bumps used as cutoffs.

use num_complex::Complex64;

use super::amplitude::{AmplitudeDescriptor, ClassTag};
use super::expr::parse_expression;
use super::jet::Jet;
use super::phase::PhaseDescriptor;
use crate::bounds::Exponent;
use crate::{EvalError, FioError, Result};

/// `exp(1 − 1/(1 − s))` for `0 ≤ s < 1`, else 0. Used as `bump(t²)`.
pub fn bump_of_square(s: f64) -> f64 {
    if s < 1.0 {
        (1.0 - 1.0 / (1.0 - s)).exp()
    } else {
        0.0
    }
}

/// The standard bump `e^{1−1/(1−t²)}` on `|t| < 1`.
pub fn standard_bump(t: f64) -> f64 {
    bump_of_square(t * t)
}

fn jet_bump_of_square(s: &Jet) -> std::result::Result<Jet, EvalError> {
    if s.value().re >= 1.0 {
        return Ok(Jet::real(s.layout(), 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(s.neg().add_constant(one).recip()?.neg().add_constant(one).exp())
}

fn squared_norm(v: &[Jet]) -> Jet {
    let mut acc = Jet::real(v[0].layout(), 0.0);
    for c in v {
        acc = acc.add(&c.mul(c));
    }
    acc
}

/// Spatial cutoff `ψ(x) = bump(|x|)`, supported in the unit ball.
pub fn spatial_cutoff(x: &[f64]) -> f64 {
    bump_of_square(x.iter().map(|v| v * v).sum())
}

pub fn spatial_cutoff_jet(x: &[Jet]) -> std::result::Result<Jet, EvalError> {
    jet_bump_of_square(&squared_norm(x))
}

/// Radial frequency bump `bump(|ξ|/radius)`.
pub fn radial_bump(xi: &[f64], radius: f64) -> f64 {
    bump_of_square(xi.iter().map(|v| v * v).sum::<f64>() / (radius * radius))
}

pub fn radial_bump_jet(xi: &[Jet], radius: f64) -> std::result::Result<Jet, EvalError> {
    let s = squared_norm(xi).scale(Complex64::new(1.0 / (radius * radius), 0.0));
    jet_bump_of_square(&s)
}

/// Frequency cutoff `η(ξ) = bump(|ξ|/radius)` as an order-zero multiplier with
/// compact support.
pub fn bump_multiplier(dim: usize, radius: f64) -> AmplitudeDescriptor {
    AmplitudeDescriptor::multiplier(dim, smooth_class(0.0), move |xi| {
        Complex64::new(radial_bump(xi, radius), 0.0)
    })
    .with_jet(move |_, xi| radial_bump_jet(xi, radius))
    .with_support_radius(radius)
    .with_label(format!("bump(|xi|/{radius})"))
}

/// `ψ(x)` as an x-only amplitude (order 0, `L^p` for every `p`).
pub fn spatial_cutoff_amplitude(dim: usize) -> AmplitudeDescriptor {
    AmplitudeDescriptor::separable(
        dim,
        smooth_class(0.0),
        |x| Complex64::new(spatial_cutoff(x), 0.0),
        |_| Complex64::new(1.0, 0.0),
    )
    .with_jet(|x, _| spatial_cutoff_jet(x))
    .with_label("psi(x)")
}

fn smooth_class(m: f64) -> ClassTag {
    ClassTag::Hormander { m, rho: 1.0, delta: 0.0 }
}

/// `a ≡ 1`.
pub fn one(dim: usize) -> AmplitudeDescriptor {
    AmplitudeDescriptor::multiplier(dim, smooth_class(0.0), |_| Complex64::new(1.0, 0.0))
        .with_jet(|_, xi| Ok(Jet::real(xi[0].layout(), 1.0)))
        .with_label("one")
}

/// `⟨ξ⟩^m`.
pub fn jb_power(dim: usize, m: f64) -> Result<AmplitudeDescriptor> {
    let args = if dim == 1 { "k1_1" } else { "k1_1,k1_2" };
    let expr = parse_expression(&format!("jb({args})^({m})"))?.compile(dim, 1)?;
    Ok(AmplitudeDescriptor::from_expression(expr, smooth_class(m))?.with_label(format!("jb_power({m})")))
}

/// `e^{iξ₁ log|x|} ψ(x)`, a member of `L^p S^0_0` for every finite `p` whose
/// ξ-derivatives are unbounded in `L^∞`. The value at `x = 0` is 0.
pub fn rough_log(dim: usize) -> AmplitudeDescriptor {
    let class = ClassTag::Rough {
        p: Exponent::new(2.0).expect("valid exponent"),
        m: 0.0,
        rho: 0.0,
    };
    AmplitudeDescriptor::from_fn(dim, 1, class, |x, xi| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 == 0.0 || r2 >= 1.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let h = 0.5 * r2.ln();
        Ok(Complex64::from_polar(bump_of_square(r2), xi[0] * h))
    })
    .with_jet(|x, xi| {
        let r2 = squared_norm(x);
        let r0 = r2.value().re;
        if r0 == 0.0 {
            if x.iter().all(Jet::is_constant) {
                return Ok(Jet::real(xi[0].layout(), 0.0));
            }
            return Err(EvalError::NonDifferentiable("log|x|"));
        }
        if r0 >= 1.0 {
            return Ok(Jet::real(xi[0].layout(), 0.0));
        }
        let h = r2.ln()?.scale(Complex64::new(0.5, 0.0));
        let phase = xi[0].mul(&h).scale(Complex64::new(0.0, 1.0)).exp();
        Ok(phase.mul(&jet_bump_of_square(&r2)?))
    })
    .with_label("rough_log")
}

/// `⟨x, ξ⟩`.
pub fn linear_phase(dim: usize) -> PhaseDescriptor {
    PhaseDescriptor::linear(dim)
}

/// `|ξ| + ⟨x, ξ⟩`, the half-wave phase.
pub fn wave_phase(dim: usize) -> Result<PhaseDescriptor> {
    let src = if dim == 1 {
        "norm(k1_1) + x1*k1_1"
    } else {
        "norm(k1_1,k1_2) + x1*k1_1 + x2*k1_2"
    };
    let expr = parse_expression(src)?.compile(dim, 1)?;
    Ok(PhaseDescriptor::from_expression(expr, true, 2)?.with_label("wave_phase"))
}

/// Resolves a built-in amplitude name such as `one`, `rough_log` or `jb_power(-1)`.
pub fn builtin_amplitude(name: &str, dim: usize) -> Result<AmplitudeDescriptor> {
    let name = name.trim();
    match name {
        "one" => return Ok(one(dim)),
        "rough_log" => return Ok(rough_log(dim)),
        _ => {}
    }
    if let Some(inner) = name.strip_prefix("jb_power(").and_then(|r| r.strip_suffix(')')) {
        let m: f64 = inner
            .trim()
            .parse()
            .map_err(|_| FioError::invalid(format!("bad order in `{name}`")))?;
        return jb_power(dim, m);
    }
    Err(FioError::invalid(format!("unknown built-in amplitude `{name}`")))
}

pub fn builtin_phase(name: &str, dim: usize) -> Result<PhaseDescriptor> {
    match name.trim() {
        "linear_phase" => Ok(linear_phase(dim)),
        "wave_phase" => wave_phase(dim),
        other => Err(FioError::invalid(format!("unknown built-in phase `{other}`"))),
    }
}

pub const AMPLITUDE_NAMES: [&str; 3] = ["one", "jb_power(m)", "rough_log"];
pub const PHASE_NAMES: [&str; 2] = ["linear_phase", "wave_phase"];

