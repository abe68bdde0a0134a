use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exec::{map_range, try_map_range};
use crate::fit::linear_fit;
use crate::numgrid::{Domain, SampledField, UniformGrid};
use crate::{EvalError, FioError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelOptions {
    /// Frequency quadrature step.
    pub freq_step: f64,
    /// Radii `|z|` at which the kernel maximum is sampled.
    pub radii: Vec<f64>,
    /// Directions sampled on each sphere (ignored in one dimension).
    pub directions: usize,
    /// Decay exponent surplus used for the reported constant.
    pub alpha: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            freq_step: 0.005,
            radii: (0..13).map(|k| 4.0 * 2f64.powf(k as f64 / 3.0)).collect(),
            directions: 32,
            alpha: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub radius: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub fitted_slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// `c = max_R max_{|z|=R} |K| (1+R)^{n+α}`.
    pub constant: f64,
    pub alpha: f64,
    pub freq_step: f64,
    pub quadrature_points: usize,
    pub samples: Vec<KernelSample>,
}

/// `η(ξ) e^{iψ(ξ)} Δξ^n` on the square grid covering the ball of radius
/// `support`, with the largest phase jump between neighbouring cells.
struct Integrand {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<Complex64>,
    max_phase_jump: f64,
}

impl Integrand {
    fn build<P, E>(dim: usize, psi: &P, eta: &E, support: f64, step: f64) -> Result<Self>
    where
        P: Fn(&[f64]) -> std::result::Result<f64, EvalError> + Sync,
        E: Fn(&[f64]) -> f64 + Sync,
    {
        if !(step > 0.0 && support > 0.0) {
            return Err(FioError::invalid("frequency step and support radius must be positive"));
        }
        let half = (support / step).ceil() as usize;
        let nodes: Vec<f64> = (0..=2 * half).map(|m| (m as f64 - half as f64) * step).collect();
        let side = nodes.len();
        let count = side.pow(dim as u32);
        let point = |flat: usize| -> [f64; 2] {
            if dim == 1 {
                [nodes[flat], 0.0]
            } else {
                [nodes[flat / side], nodes[flat % side]]
            }
        };
        let phases: Vec<Option<f64>> = try_map_range(count, |flat| -> Result<Option<f64>> {
            let p = point(flat);
            if eta(&p[..dim]) == 0.0 {
                return Ok(None);
            }
            Ok(Some(psi(&p[..dim])?))
        })?;
        let cell = step.powi(dim as i32);
        let weights: Vec<Complex64> = map_range(count, |flat| match phases[flat] {
            Some(ph) => Complex64::from_polar(eta(&point(flat)[..dim]) * cell, ph),
            None => Complex64::new(0.0, 0.0),
        });
        let mut jump = 0.0f64;
        for flat in 0..count {
            let Some(here) = phases[flat] else { continue };
            let neighbours: &[usize] = if dim == 1 { &[1] } else { &[side, 1] };
            for &stride in neighbours {
                if flat + stride < count && (stride != 1 || dim == 1 || (flat + 1) % side != 0) {
                    if let Some(there) = phases[flat + stride] {
                        jump = jump.max((there - here).abs());
                    }
                }
            }
        }
        Ok(Integrand {
            dim,
            nodes,
            weights,
            max_phase_jump: jump,
        })
    }

    fn check_resolution(&self, z_max: f64, support: f64) -> Result<()> {
        let step = self.nodes[1] - self.nodes[0];
        let per_cell = self.max_phase_jump + z_max * step;
        if per_cell > PI {
            let gradient = self.max_phase_jump / step;
            let needed = PI / (gradient + z_max);
            let required = (2.0 * support / needed).ceil() as usize + 1;
            return Err(FioError::Underresolved {
                required,
                detail: format!("phase advances {per_cell:.3} per frequency cell at |z| = {z_max}"),
            });
        }
        Ok(())
    }

    fn eval(&self, z: &[f64]) -> Complex64 {
        let side = self.nodes.len();
        if self.dim == 1 {
            return self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(xi, w)| w * Complex64::from_polar(1.0, z[0] * xi))
                .sum();
        }
        let inner: Vec<Complex64> = self.nodes.iter().map(|xi| Complex64::from_polar(1.0, z[1] * xi)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, xi0) in self.nodes.iter().enumerate() {
            let row = &self.weights[r * side..(r + 1) * side];
            let s: Complex64 = row.iter().zip(&inner).map(|(w, e)| w * e).sum();
            acc += s * Complex64::from_polar(1.0, z[0] * xi0);
        }
        acc
    }
}

/// Samples `K(z) = ∫ η(ξ) e^{i(ψ(ξ) + ⟨z,ξ⟩)} dξ` on spheres `|z| = R` and fits
/// `log max|K|` against `log R`.
///
/// `eta` must vanish outside the ball of radius `support`.
pub fn low_frequency_kernel<P, E>(dim: usize, psi: P, eta: E, support: f64, opts: &KernelOptions) -> Result<KernelReport>
where
    P: Fn(&[f64]) -> std::result::Result<f64, EvalError> + Sync,
    E: Fn(&[f64]) -> f64 + Sync,
{
    if !(1..=2).contains(&dim) {
        return Err(FioError::UnsupportedDimension(dim));
    }
    if opts.radii.len() < 2 {
        return Err(FioError::invalid("need at least two sampling radii"));
    }
    let integrand = Integrand::build(dim, &psi, &eta, support, opts.freq_step)?;
    let z_max = opts.radii.iter().cloned().fold(0.0, f64::max);
    integrand.check_resolution(z_max, support)?;
    let dirs: Vec<[f64; 2]> = if dim == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        let m = opts.directions.max(1);
        (0..m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                [t.cos(), t.sin()]
            })
            .collect()
    };
    let nd = dirs.len();
    let values = map_range(opts.radii.len() * nd, |idx| {
        let r = opts.radii[idx / nd];
        let d = dirs[idx % nd];
        integrand.eval(&[r * d[0], r * d[1]][..dim]).norm()
    });
    let samples: Vec<KernelSample> = opts
        .radii
        .iter()
        .enumerate()
        .map(|(i, &radius)| KernelSample {
            radius,
            max_abs: values[i * nd..(i + 1) * nd].iter().cloned().fold(0.0, f64::max),
        })
        .collect();
    let xs: Vec<f64> = samples.iter().map(|s| s.radius.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.max_abs.max(f64::MIN_POSITIVE).ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or_else(|| FioError::invalid("degenerate kernel fit"))?;
    let expo = dim as f64 + opts.alpha;
    let constant = samples
        .iter()
        .map(|s| s.max_abs * (1.0 + s.radius).powf(expo))
        .fold(0.0, f64::max);
    Ok(KernelReport {
        fitted_slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        constant,
        alpha: opts.alpha,
        freq_step: opts.freq_step,
        quadrature_points: integrand.weights.len(),
        samples,
    })
}

/// The same kernel evaluated at every space point of `grid`, for export.
pub fn kernel_field<P, E>(grid: &UniformGrid, psi: P, eta: E, support: f64, freq_step: f64) -> Result<SampledField>
where
    P: Fn(&[f64]) -> std::result::Result<f64, EvalError> + Sync,
    E: Fn(&[f64]) -> f64 + Sync,
{
    let dim = grid.dim();
    let integrand = Integrand::build(dim, &psi, &eta, support, freq_step)?;
    let z_max = grid.space_halfwidth() * (dim as f64).sqrt();
    integrand.check_resolution(z_max, support)?;
    let values = map_range(grid.len(), |i| integrand.eval(&grid.point(i)[..dim]));
    SampledField::new(*grid, values, Domain::Space)
}
