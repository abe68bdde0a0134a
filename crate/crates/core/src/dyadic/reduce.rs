use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ConeNet;
use crate::symbols::{Jet, JetLayout, PhaseDescriptor};
use crate::{EvalError, FioError, Result};

/// `Φ(x, ξ) = φ(x, ξ) − ⟨∇_ξφ(x, c), ξ⟩` for a fixed unit direction `c`.
#[derive(Debug, Clone)]
pub struct ReducedPhase {
    base: PhaseDescriptor,
    center: Vec<f64>,
}

impl ReducedPhase {
    pub fn new(base: PhaseDescriptor, center: Vec<f64>) -> Result<Self> {
        if center.len() != base.dim() {
            return Err(FioError::invalid("center dimension differs from the phase dimension"));
        }
        Ok(ReducedPhase { base, center })
    }

    pub fn base(&self) -> &PhaseDescriptor {
        &self.base
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// The translation field `x ↦ ∇_ξφ(x, c)`.
    pub fn linear_part(&self, x: &[f64]) -> std::result::Result<Vec<f64>, EvalError> {
        self.base.grad_xi(x, &self.center)
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> std::result::Result<f64, EvalError> {
        let shift = self.linear_part(x)?;
        self.eval_with_shift(x, &shift, xi)
    }

    /// Same as [`eval`](Self::eval) with a precomputed linear part.
    pub fn eval_with_shift(&self, x: &[f64], shift: &[f64], xi: &[f64]) -> std::result::Result<f64, EvalError> {
        let lin: f64 = shift.iter().zip(xi).map(|(a, b)| a * b).sum();
        Ok(self.base.eval(x, xi)? - lin)
    }

    /// Jet in `ξ` with `x` held fixed.
    pub fn xi_jet(&self, x: &[f64], xi: &[Jet]) -> std::result::Result<Jet, EvalError> {
        let layout = xi[0].layout().clone();
        let shift = self.linear_part(x)?;
        let xs: Vec<Jet> = x.iter().map(|&v| Jet::real(&layout, v)).collect();
        let mut acc = self.base.jet(&xs, xi)?;
        for (t, v) in shift.iter().zip(xi) {
            acc = acc.sub(&v.scale(Complex64::new(*t, 0.0)));
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimates {
    pub j: u32,
    pub nu: usize,
    /// `sup |∂_{ξ₁}^N Φ| · 2^{Nj}` keyed by `N`, with `ξ₁` along the center.
    pub radial: BTreeMap<String, f64>,
    /// `sup |∂_{ξ'}^N Φ| · 2^{Nj/2}` keyed by `N`, `ξ'` orthogonal to the center.
    pub angular: BTreeMap<String, f64>,
    /// `sup_{x,t} |Φ(x, t·c)|`, zero by Euler's relation.
    pub euler_defect: f64,
    pub samples: usize,
}

fn x_lattice(dim: usize, halfwidth: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let coords: Vec<f64> = (0..per_axis)
        .map(|i| -halfwidth + 2.0 * halfwidth * i as f64 / (per_axis - 1) as f64)
        .collect();
    if dim == 1 {
        coords.iter().map(|&c| vec![c]).collect()
    } else {
        coords.iter().flat_map(|&a| coords.iter().map(move |&b| vec![a, b])).collect()
    }
}

fn directional_derivatives(
    reduced: &ReducedPhase,
    x: &[f64],
    xi: &[f64],
    dir: &[f64],
) -> std::result::Result<[f64; 4], EvalError> {
    let layout = JetLayout::get(1, 3);
    let seeds: Vec<Jet> = xi.iter().zip(dir).map(|(&p, &d)| Jet::affine(&layout, p, &[d])).collect();
    let jet = reduced.xi_jet(x, &seeds)?;
    let mut out = [0.0; 4];
    for (n, slot) in out.iter_mut().enumerate() {
        let v = jet.derivative(&[n]);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(EvalError::NonFinite);
        }
        *slot = v.norm();
    }
    Ok(out)
}

fn estimate_failure(x: &[f64], xi: &[f64], what: &str, err: impl std::fmt::Display) -> FioError {
    FioError::invalid(format!("phase estimate check failed at x={x:?}, xi={xi:?}, {what}: {err}"))
}

/// Reduces a homogeneous phase around the center `ν` of the level-`j` net and
/// measures the decay constants of `Φ` on the support of `χ_j^ν Ψ_j`.
pub fn reduce_phase(
    phase: &PhaseDescriptor,
    net: &ConeNet,
    nu: usize,
    box_halfwidth: f64,
) -> Result<(ReducedPhase, PhaseEstimates)> {
    if !phase.homogeneous_degree_1 {
        return Err(FioError::invalid("phase reduction needs a phase homogeneous of degree 1"));
    }
    if phase.claimed_phi_k > 2 {
        return Err(FioError::invalid("phase reduction needs a phase claimed in the class of order 2"));
    }
    if nu >= net.len() {
        return Err(FioError::invalid(format!("cone index {nu} out of range ({} centers)", net.len())));
    }
    let dim = phase.dim();
    if dim != net.dim {
        return Err(FioError::GridMismatch("cone net and phase dimensions differ".into()));
    }
    let center = net.centers()[nu].clone();
    let reduced = ReducedPhase::new(phase.clone(), center.clone())?;
    let j = net.j;
    let scale = 2f64.powi(j as i32);
    let normal: Vec<f64> = if dim == 2 { vec![-center[1], center[0]] } else { vec![] };
    let base_angle = if dim == 2 { center[1].atan2(center[0]) } else { 0.0 };

    let mut xi_samples = Vec::new();
    for &r in &[0.5, 0.75, 1.0, 1.5, 2.0] {
        let radius = r * scale;
        if dim == 1 {
            xi_samples.push(vec![radius * center[0]]);
        } else {
            let w = net.half_width();
            for a in 0..9 {
                let t = base_angle - w + 2.0 * w * (a as f64 + 0.5) / 9.0;
                xi_samples.push(vec![radius * t.cos(), radius * t.sin()]);
            }
        }
    }
    let xs = x_lattice(dim, box_halfwidth, 5);
    let pairs: Vec<(usize, usize)> = (0..xs.len()).flat_map(|a| (0..xi_samples.len()).map(move |b| (a, b))).collect();

    let results = crate::exec::try_map_range(pairs.len(), |idx| {
        let (a, b) = pairs[idx];
        let (x, xi) = (&xs[a], &xi_samples[b]);
        let radial = directional_derivatives(&reduced, x, xi, &center).map_err(|e| estimate_failure(x, xi, "radial", e))?;
        let angular = if dim == 2 {
            directional_derivatives(&reduced, x, xi, &normal).map_err(|e| estimate_failure(x, xi, "angular", e))?
        } else {
            [0.0; 4]
        };
        Ok::<_, FioError>((radial, angular))
    })?;

    let mut radial = BTreeMap::new();
    let mut angular = BTreeMap::new();
    for n in 2..=3usize {
        let r = results.iter().map(|(rad, _)| rad[n]).fold(0.0, f64::max) * scale.powi(n as i32);
        let s = results.iter().map(|(_, ang)| ang[n]).fold(0.0, f64::max) * scale.sqrt().powi(n as i32);
        radial.insert(n.to_string(), r);
        angular.insert(n.to_string(), s);
    }

    let mut euler_defect = 0.0f64;
    for x in &xs {
        let shift = reduced.linear_part(x)?;
        for &t in &[0.5, 1.0, scale, 2.0 * scale] {
            let xi: Vec<f64> = center.iter().map(|c| c * t).collect();
            let v = reduced.eval_with_shift(x, &shift, &xi)?;
            euler_defect = euler_defect.max(v.abs() / t);
        }
    }
    if euler_defect > 1e-9 {
        return Err(FioError::invalid(format!(
            "Euler relation fails for the reduced phase: defect {euler_defect:e}"
        )));
    }
    Ok((
        reduced,
        PhaseEstimates {
            j,
            nu,
            radial,
            angular,
            euler_defect,
            samples: pairs.len(),
        },
    ))
}

/// One cap of the low-frequency sphere covering.
#[derive(Debug, Clone)]
pub struct LowFrequencyPiece {
    pub zeta: Vec<f64>,
    pub cap_radius: f64,
    pub reduced: ReducedPhase,
    /// Sampled `sup |∇_ξψ|` over the cap, `ψ = φ − ⟨∇_ξφ(x, ζ), ξ⟩`.
    pub gradient_sup: f64,
}

/// Low-frequency reduction: the sphere is covered by `caps` caps of angular
/// radius `π/caps` (two half-lines in one dimension) and the phase is reduced
/// around each cap center.
pub fn reduce_phase_low_frequency(
    phase: &PhaseDescriptor,
    caps: usize,
    box_halfwidth: f64,
) -> Result<Vec<LowFrequencyPiece>> {
    if !phase.homogeneous_degree_1 {
        return Err(FioError::invalid("phase reduction needs a phase homogeneous of degree 1"));
    }
    let dim = phase.dim();
    let (zetas, cap_radius): (Vec<Vec<f64>>, f64) = match dim {
        1 => (vec![vec![1.0], vec![-1.0]], PI / 2.0),
        2 => {
            if caps < 3 {
                return Err(FioError::invalid("the low-frequency covering needs at least 3 caps"));
            }
            let step = 2.0 * PI / caps as f64;
            ((0..caps).map(|c| vec![(c as f64 * step).cos(), (c as f64 * step).sin()]).collect(), PI / caps as f64)
        }
        other => return Err(FioError::UnsupportedDimension(other)),
    };
    let xs = x_lattice(dim, box_halfwidth, 5);
    zetas
        .into_iter()
        .map(|zeta| {
            let reduced = ReducedPhase::new(phase.clone(), zeta.clone())?;
            let angle = if dim == 2 { zeta[1].atan2(zeta[0]) } else { 0.0 };
            let mut sup = 0.0f64;
            for x in &xs {
                let shift = reduced.linear_part(x)?;
                for &r in &[0.25, 1.0, 2.0] {
                    let dirs: Vec<Vec<f64>> = if dim == 1 {
                        vec![zeta.clone()]
                    } else {
                        (0..17)
                            .map(|k| {
                                let t = angle - cap_radius + 2.0 * cap_radius * k as f64 / 16.0;
                                vec![t.cos(), t.sin()]
                            })
                            .collect()
                    };
                    for d in dirs {
                        let xi: Vec<f64> = d.iter().map(|v| v * r).collect();
                        let g = phase.grad_xi(x, &xi)?;
                        let norm: f64 = g.iter().zip(&shift).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                        if !norm.is_finite() {
                            return Err(estimate_failure(x, &xi, "first derivative", EvalError::NonFinite));
                        }
                        sup = sup.max(norm);
                    }
                }
            }
            Ok(LowFrequencyPiece {
                zeta,
                cap_radius,
                reduced,
                gradient_sup: sup,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::build_cone_decomposition;
    use crate::symbols::builtins::{linear_phase, wave_phase};

    #[test]
    fn linear_phase_reduces_to_zero() {
        let net = build_cone_decomposition(3, 2).unwrap();
        let (reduced, est) = reduce_phase(&linear_phase(2), &net, 2, 1.0).unwrap();
        assert!(est.radial.values().chain(est.angular.values()).all(|&c| c < 1e-12));
        assert!(reduced.eval(&[0.3, -0.2], &[4.0, 1.0]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn wave_phase_reduction_is_residual_cone_phase() {
        let wave = wave_phase(2).unwrap();
        let net = build_cone_decomposition(4, 2).unwrap();
        let (reduced, _) = reduce_phase(&wave, &net, 0, 1.0).unwrap();
        let xi = [7.0, 1.5];
        let expected = (49.0f64 + 2.25).sqrt() - 7.0;
        assert!((reduced.eval(&[0.4, 0.1], &xi).unwrap() - expected).abs() < 1e-12);
        let layout = JetLayout::get(2, 1);
        let seeds: Vec<Jet> = (0..2).map(|v| Jet::variable(&layout, v, xi[v])).collect();
        let jet = reduced.xi_jet(&[0.4, 0.1], &seeds).unwrap();
        assert!((jet.value().re - expected).abs() < 1e-12);
        assert!((jet.derivative(&[1, 0]).re - (7.0 / 51.25f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn low_frequency_caps_have_small_gradients() {
        let pieces = reduce_phase_low_frequency(&wave_phase(2).unwrap(), 8, 1.0).unwrap();
        assert_eq!(pieces.len(), 8);
        for p in pieces {
            assert!(p.gradient_sup <= 2.0);
            assert!(p.gradient_sup > 0.0);
        }
    }
}
