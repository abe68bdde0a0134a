use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exec::{map_range, try_map_range};
use crate::fit::linear_fit;
use crate::symbols::{Jet, JetLayout, PhaseDescriptor};
use crate::{EvalError, FioError, Result};

/// Smooth compactly supported test function `F(ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// `bump(|ξ − center| / radius)`.
    Bump { center: Vec<f64>, radius: f64 },
    /// A radial bump living in `inner < |ξ| < outer`.
    Annulus { inner: f64, outer: f64 },
}

impl Window {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Window::Bump { center, radius } => {
                if center.len() != dim || !(*radius > 0.0) {
                    return Err(FioError::invalid("bump window needs a center of the right dimension and a positive radius"));
                }
            }
            Window::Annulus { inner, outer } => {
                if !(*inner >= 0.0 && outer > inner) {
                    return Err(FioError::invalid("annulus window needs 0 <= inner < outer"));
                }
            }
        }
        Ok(())
    }

    /// Bounding box `[lo, hi]` per axis.
    fn bounds(&self, dim: usize) -> Vec<(f64, f64)> {
        match self {
            Window::Bump { center, radius } => center.iter().map(|c| (c - radius, c + radius)).collect(),
            Window::Annulus { outer, .. } => vec![(-outer, *outer); dim],
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            Window::Bump { center, radius } => {
                let s: f64 = xi.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / (radius * radius);
                if s < 1.0 {
                    (1.0 - 1.0 / (1.0 - s)).exp()
                } else {
                    0.0
                }
            }
            Window::Annulus { inner, outer } => {
                let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                let u = (r - 0.5 * (inner + outer)) / (0.5 * (outer - inner));
                if u.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn jet(&self, xi: &[Jet]) -> std::result::Result<Jet, EvalError> {
        let layout = xi[0].layout().clone();
        match self {
            Window::Bump { center, radius } => {
                let mut s = Jet::real(&layout, 0.0);
                for (v, c) in xi.iter().zip(center) {
                    let d = v.add_constant(Complex64::new(-c, 0.0));
                    s = s.add(&d.mul(&d));
                }
                let s = s.scale(Complex64::new(1.0 / (radius * radius), 0.0));
                if s.value().re >= 1.0 {
                    return Ok(Jet::real(&layout, 0.0));
                }
                let one = Complex64::new(1.0, 0.0);
                Ok(s.neg().add_constant(one).recip()?.neg().add_constant(one).exp())
            }
            Window::Annulus { inner, outer } => {
                let r0 = xi.iter().map(|v| v.value().re.powi(2)).sum::<f64>().sqrt();
                if r0 <= *inner || r0 >= *outer {
                    return Ok(Jet::real(&layout, 0.0));
                }
                let mut s = Jet::real(&layout, 0.0);
                for v in xi {
                    s = s.add(&v.mul(v));
                }
                s.sqrt()?
                    .add_constant(Complex64::new(-0.5 * (inner + outer), 0.0))
                    .scale(Complex64::new(2.0 / (outer - inner), 0.0))
                    .bump()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NonstatOptions {
    pub order: u32,
    pub lambdas: Vec<f64>,
    /// Points per axis of the grid used for the right-hand side and the
    /// gradient bounds.
    pub coarse_points: usize,
    /// Largest phase advance `λ |∇φ| Δξ` per cell of the oscillatory grid.
    pub max_phase_per_cell: f64,
    /// Refuse oscillatory grids larger than this many points.
    pub max_points: usize,
}

impl Default for NonstatOptions {
    fn default() -> Self {
        NonstatOptions {
            order: 2,
            lambdas: (2..=10).map(|e| 2f64.powi(e)).collect(),
            coarse_points: 401,
            max_phase_per_cell: PI / 4.0,
            max_points: 1 << 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonstatReport {
    pub order: u32,
    pub lambdas: Vec<f64>,
    /// `λ^k |∫ F e^{iλφ} dξ|`.
    pub lhs: Vec<f64>,
    /// `Σ_{|α|≤k} ∫ |∂^α F| |∇φ|^{-k} dξ`.
    pub rhs: f64,
    pub ratios: Vec<f64>,
    /// `max ratio / min ratio`.
    pub spread: f64,
    /// Slope of `log |∫ F e^{iλφ}|` against `log λ`; at most `-k` when the
    /// estimate is sharp, far below it for analytic-type decay.
    pub integral_decay_slope: f64,
    pub min_gradient: f64,
    pub max_gradient: f64,
    pub quadrature_points: usize,
    /// Every ratio finite and the spread at most 4.
    pub stable: bool,
}

fn axis_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

fn multi_indices(dim: usize, order: u32) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=order as usize {
        if dim == 1 {
            out.push(vec![total]);
        } else {
            for a in 0..=total {
                out.push(vec![a, total - a]);
            }
        }
    }
    out
}

/// Compares both sides of the integration-by-parts estimate for
/// `∫ F(ξ) e^{iλφ(ξ)} dξ`, where `φ(ξ) = phase(0, ξ)`.
pub fn verify_nonstationary_decay(window: &Window, phase: &PhaseDescriptor, opts: &NonstatOptions) -> Result<NonstatReport> {
    let dim = phase.dim();
    if !(1..=2).contains(&dim) {
        return Err(FioError::UnsupportedDimension(dim));
    }
    window.validate(dim)?;
    if opts.lambdas.is_empty() || opts.lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(FioError::invalid("lambdas must be positive"));
    }
    if opts.coarse_points < 3 {
        return Err(FioError::invalid("coarse grid needs at least 3 points per axis"));
    }
    let origin = vec![0.0; dim];
    let bounds = window.bounds(dim);
    let k = opts.order as usize;

    // Coarse grid: gradient bounds and the right-hand side.
    let coarse: Vec<Vec<f64>> = bounds.iter().map(|&(lo, hi)| axis_nodes(lo, hi, opts.coarse_points)).collect();
    let coarse_len = opts.coarse_points.pow(dim as u32);
    let coarse_point = |flat: usize| -> Vec<f64> {
        if dim == 1 {
            vec![coarse[0][flat]]
        } else {
            vec![coarse[0][flat / opts.coarse_points], coarse[1][flat % opts.coarse_points]]
        }
    };
    let alphas = multi_indices(dim, opts.order);
    let layout = JetLayout::get(dim, k.max(1));
    let coarse_terms = try_map_range(coarse_len, |flat| -> Result<Option<(f64, f64)>> {
        let xi = coarse_point(flat);
        if window.eval(&xi) == 0.0 {
            return Ok(None);
        }
        let grad = phase.grad_xi(&origin, &xi)?;
        let g = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        let seeds: Vec<Jet> = xi.iter().enumerate().map(|(v, &val)| Jet::variable(&layout, v, val)).collect();
        let fj = window.jet(&seeds)?;
        let derivs: f64 = alphas.iter().map(|a| fj.derivative(a).norm()).sum();
        Ok(Some((g, derivs)))
    })?;
    let cell: f64 = bounds.iter().map(|&(lo, hi)| (hi - lo) / (opts.coarse_points - 1) as f64).product();
    let mut min_gradient = f64::INFINITY;
    let mut max_gradient = 0.0f64;
    let mut rhs = 0.0;
    for (g, d) in coarse_terms.iter().flatten() {
        min_gradient = min_gradient.min(*g);
        max_gradient = max_gradient.max(*g);
        rhs += d * g.powi(-(k as i32)) * cell;
    }
    if !min_gradient.is_finite() {
        return Err(FioError::invalid("window vanishes on the sampling grid"));
    }
    if min_gradient <= 1e-6 {
        return Err(FioError::StationaryPoint(min_gradient));
    }

    // Fine grid resolving the fastest oscillation.
    let lambda_max = opts.lambdas.iter().cloned().fold(0.0, f64::max);
    let width = bounds.iter().map(|&(lo, hi)| hi - lo).fold(0.0, f64::max);
    let step = (opts.max_phase_per_cell / (lambda_max * max_gradient)).min(width / 64.0);
    let per_axis = (width / step).ceil() as usize + 1;
    let total = per_axis.saturating_pow(dim as u32);
    if total > opts.max_points {
        return Err(FioError::Underresolved {
            required: per_axis,
            detail: format!("{total} oscillatory quadrature points exceed the limit {}", opts.max_points),
        });
    }
    let fine: Vec<Vec<f64>> = bounds.iter().map(|&(lo, hi)| axis_nodes(lo, hi, per_axis)).collect();
    let fine_cell: f64 = bounds.iter().map(|&(lo, hi)| (hi - lo) / (per_axis - 1) as f64).product();
    let samples = try_map_range(total, |flat| -> Result<Option<(f64, f64)>> {
        let xi: Vec<f64> = if dim == 1 {
            vec![fine[0][flat]]
        } else {
            vec![fine[0][flat / per_axis], fine[1][flat % per_axis]]
        };
        let f = window.eval(&xi);
        if f == 0.0 {
            return Ok(None);
        }
        Ok(Some((f, phase.eval(&origin, &xi)?)))
    })?;
    let support: Vec<(f64, f64)> = samples.into_iter().flatten().collect();
    let integrals = map_range(opts.lambdas.len(), |i| {
        let lambda = opts.lambdas[i];
        support
            .iter()
            .map(|&(f, ph)| Complex64::from_polar(f, lambda * ph))
            .sum::<Complex64>()
            .norm()
            * fine_cell
    });
    let lhs: Vec<f64> = opts
        .lambdas
        .iter()
        .zip(&integrals)
        .map(|(l, v)| l.powi(k as i32) * v)
        .collect();
    let ratios: Vec<f64> = lhs.iter().map(|v| v / rhs).collect();
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = if min > 0.0 { max / min } else { f64::INFINITY };
    let finite = ratios.iter().all(|r| r.is_finite());
    let xs: Vec<f64> = opts.lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = integrals.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let integral_decay_slope = linear_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope);
    Ok(NonstatReport {
        order: opts.order,
        lambdas: opts.lambdas.clone(),
        lhs,
        rhs,
        ratios,
        spread,
        integral_decay_slope,
        min_gradient,
        max_gradient,
        quadrature_points: total,
        stable: finite && spread <= 4.0,
    })
}

/// `φ(x, ξ) = ⟨direction, ξ⟩`, independent of `x`.
pub fn frequency_linear_phase(direction: Vec<f64>) -> PhaseDescriptor {
    let d2 = direction.clone();
    PhaseDescriptor::from_fns(
        direction.len(),
        move |_, xi| Ok(xi.iter().zip(&direction).map(|(a, b)| a * b).sum()),
        move |_, xi| {
            let mut acc = Jet::real(xi[0].layout(), 0.0);
            for (v, c) in xi.iter().zip(&d2) {
                acc = acc.add(&v.scale(Complex64::new(*c, 0.0)));
            }
            Ok(acc)
        },
        false,
        2,
    )
    .with_label("linear_in_xi")
}

/// `φ(x, ξ) = |ξ|²/2`.
pub fn frequency_quadratic_phase(dim: usize) -> PhaseDescriptor {
    PhaseDescriptor::from_fns(
        dim,
        |_, xi| Ok(0.5 * xi.iter().map(|v| v * v).sum::<f64>()),
        |_, xi| {
            let mut acc = Jet::real(xi[0].layout(), 0.0);
            for v in xi {
                acc = acc.add(&v.mul(v));
            }
            Ok(acc.scale(Complex64::new(0.5, 0.0)))
        },
        false,
        2,
    )
    .with_label("half_square")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_point_is_rejected() {
        let w = Window::Bump {
            center: vec![0.0],
            radius: 1.0,
        };
        let err = verify_nonstationary_decay(&w, &frequency_quadratic_phase(1), &NonstatOptions::default()).unwrap_err();
        assert!(matches!(err, FioError::StationaryPoint(_)));
    }

    #[test]
    fn one_dimensional_linear_phase_decays_fast() {
        let w = Window::Bump {
            center: vec![0.0],
            radius: 1.0,
        };
        let r = verify_nonstationary_decay(&w, &frequency_linear_phase(vec![1.0]), &NonstatOptions::default()).unwrap();
        assert!((r.min_gradient - 1.0).abs() < 1e-12);
        assert!(r.ratios.iter().all(|v| v.is_finite()));
        assert!(r.integral_decay_slope < -2.0);
    }

    #[test]
    fn window_jet_matches_values() {
        let w = Window::Annulus { inner: 0.5, outer: 1.0 };
        let layout = JetLayout::get(2, 1);
        let p = [0.6, 0.3];
        let seeds: Vec<Jet> = p.iter().enumerate().map(|(v, &x)| Jet::variable(&layout, v, x)).collect();
        let j = w.jet(&seeds).unwrap();
        assert!((j.value().re - w.eval(&p)).abs() < 1e-14);
        let h = 1e-6;
        let fd = (w.eval(&[p[0] + h, p[1]]) - w.eval(&[p[0] - h, p[1]])) / (2.0 * h);
        assert!((j.derivative(&[1, 0]).re - fd).abs() < 1e-6);
    }
}
