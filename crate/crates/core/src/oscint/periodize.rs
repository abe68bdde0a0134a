use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{apply_fio, OperatorSpec, QuadratureMode};
use crate::dyadic::smooth_step;
use crate::exec::try_map_range;
use crate::fit::{linear_fit, LineFit};
use crate::numgrid::{fourier_transform, lp_norm, Direction, Domain, SampledField, UniformGrid};
use crate::symbols::{AmplitudeDescriptor, ClassTag, PhaseDescriptor};
use crate::{FioError, Result};

/// `exp(β − β/(1 − t²))` on `|t| < 1`: the standard bump for `β = 1`, flatter
/// and wider for larger `β`.
pub fn sharp_bump(t: f64, sharpness: f64) -> f64 {
    let s = t * t;
    if s < 1.0 {
        (sharpness - sharpness / (1.0 - s)).exp()
    } else {
        0.0
    }
}

/// `sharp_bump(|ξ|/radius, β)` as a compactly supported multiplier.
pub fn sharp_bump_multiplier(dim: usize, radius: f64, sharpness: f64) -> AmplitudeDescriptor {
    AmplitudeDescriptor::multiplier(dim, ClassTag::Hormander { m: 0.0, rho: 1.0, delta: 0.0 }, move |xi| {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        Complex64::new(sharp_bump(r / radius, sharpness), 0.0)
    })
    .with_support_radius(radius)
    .with_label(format!("sharp_bump(|xi|/{radius}, {sharpness})"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeriodizeOptions {
    /// Largest `|k|_∞` kept.
    pub modes: usize,
    /// Expected coefficient decay; defaults to `⌊max(n, n/p)⌋ + 1`.
    pub decay_order: Option<u32>,
    /// Exponent `p` of the coefficient norms.
    pub norm_exponent: f64,
    /// Side of the periodicity cube; defaults to `2(R + 1)`.
    pub cube_side: Option<f64>,
    /// Quadrature points per axis on the cube.
    pub cube_points: Option<usize>,
}

impl Default for PeriodizeOptions {
    fn default() -> Self {
        PeriodizeOptions {
            modes: 8,
            decay_order: None,
            norm_exponent: 2.0,
            cube_side: None,
            cube_points: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModeCoefficient {
    pub index: Vec<i64>,
    pub field: SampledField,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct PeriodizationResult {
    pub cube_side: f64,
    pub support_radius: f64,
    pub modes: Vec<ModeCoefficient>,
    pub decay_order: u32,
    pub norm_exponent: f64,
    /// Fit of `log max_{|k|_∞ = s} ‖a_k‖` against `log(1 + s)`.
    pub decay_fit: LineFit,
    /// Smallest `C` with `‖a_k‖ ≤ C (1 + |k|_∞)^{-N}` over the kept modes.
    pub decay_constant: f64,
    /// Relative sup error of the truncated series on the cube samples.
    pub reconstruction_error: f64,
}

/// Serializable digest of a [`PeriodizationResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodizationSummary {
    pub cube_side: f64,
    pub support_radius: f64,
    pub modes: usize,
    pub decay_order: u32,
    pub norm_exponent: f64,
    pub fitted_slope: f64,
    pub decay_constant: f64,
    pub reconstruction_error: f64,
    pub shell_norms: Vec<f64>,
}

impl PeriodizationResult {
    /// The cutoff: 1 on the support ball, 0 outside the inscribed ball of the cube.
    pub fn eta(&self, xi: &[f64]) -> f64 {
        cube_cutoff(xi, self.support_radius, self.cube_side)
    }

    pub fn eta_amplitude(&self, dim: usize) -> AmplitudeDescriptor {
        let (r, l) = (self.support_radius, self.cube_side);
        AmplitudeDescriptor::multiplier(dim, ClassTag::Hormander { m: 0.0, rho: 1.0, delta: 0.0 }, move |xi| {
            Complex64::new(cube_cutoff(xi, r, l), 0.0)
        })
        .with_support_radius(l / 2.0)
        .with_label("periodization cutoff")
    }

    pub fn coefficient(&self, index: &[i64]) -> Option<&ModeCoefficient> {
        self.modes.iter().find(|m| m.index == index)
    }

    /// Largest coefficient norm on each shell `|k|_∞ = s`.
    pub fn shell_norms(&self) -> Vec<f64> {
        let k = self.modes.iter().map(|m| shell(&m.index)).max().unwrap_or(0);
        let mut out = vec![0.0f64; k + 1];
        for m in &self.modes {
            let s = shell(&m.index);
            out[s] = out[s].max(m.norm);
        }
        out
    }

    pub fn summary(&self) -> PeriodizationSummary {
        PeriodizationSummary {
            cube_side: self.cube_side,
            support_radius: self.support_radius,
            modes: self.shell_norms().len() - 1,
            decay_order: self.decay_order,
            norm_exponent: self.norm_exponent,
            fitted_slope: self.decay_fit.slope,
            decay_constant: self.decay_constant,
            reconstruction_error: self.reconstruction_error,
            shell_norms: self.shell_norms(),
        }
    }
}

fn shell(index: &[i64]) -> usize {
    index.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0)
}

fn cube_cutoff(xi: &[f64], support: f64, side: f64) -> f64 {
    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    smooth_step((side / 2.0 - r) / (side / 2.0 - support))
}

/// Expands `a(x, ·)` in a Fourier series on the cube `[-L/2, L/2]^n` at every
/// space grid point.
pub fn periodize_amplitude(a: &AmplitudeDescriptor, grid: &UniformGrid, opts: &PeriodizeOptions) -> Result<PeriodizationResult> {
    let dim = grid.dim();
    if a.dim() != dim || a.arity() != 1 {
        return Err(FioError::GridMismatch("amplitude must be arity 1 on the grid's dimension".into()));
    }
    let radius = a
        .freq_support_radius
        .ok_or_else(|| FioError::invalid("periodization needs a compact frequency support"))?;
    let side = opts.cube_side.unwrap_or(2.0 * (radius + 1.0));
    if radius >= side / 2.0 {
        return Err(FioError::invalid(format!(
            "support radius {radius} exceeds half the cube side {side}"
        )));
    }
    if !(opts.norm_exponent > 0.0) {
        return Err(FioError::invalid("norm exponent must be positive"));
    }
    let n = dim as f64;
    let decay_order = opts
        .decay_order
        .unwrap_or_else(|| n.max(n / opts.norm_exponent).floor() as u32 + 1);
    let kmax = opts.modes as i64;
    let width = 2 * opts.modes + 1;
    let points = opts.cube_points.unwrap_or(if dim == 1 { 1024 } else { 128 });
    let nodes: Vec<f64> = (0..points).map(|m| -side / 2.0 + side * m as f64 / points as f64).collect();
    let basis: Vec<Complex64> = (-kmax..=kmax)
        .flat_map(|k| nodes.iter().map(move |xi| Complex64::from_polar(1.0, -2.0 * PI * k as f64 * xi / side)))
        .collect();
    let eta: Vec<f64> = if dim == 1 {
        nodes.iter().map(|&v| cube_cutoff(&[v], radius, side)).collect()
    } else {
        (0..points * points)
            .map(|f| cube_cutoff(&[nodes[f / points], nodes[f % points]], radius, side))
            .collect()
    };
    let check_stride = if dim == 1 { 1 } else { (grid.len() / 256).max(1) };

    struct PerPoint {
        coeffs: Vec<Complex64>,
        err: f64,
        peak: f64,
    }
    let per_point = try_map_range(grid.len(), |i| -> Result<PerPoint> {
        let x = grid.point(i);
        let x = &x[..dim];
        let m = points as f64;
        let (coeffs, vals) = if dim == 1 {
            let vals: Vec<Complex64> = nodes.iter().map(|&v| a.eval(x, &[v])).collect::<std::result::Result<_, _>>()?;
            let coeffs = (0..width)
                .map(|k| basis[k * points..(k + 1) * points].iter().zip(&vals).map(|(e, v)| e * v).sum::<Complex64>() / m)
                .collect();
            (coeffs, vals)
        } else {
            let mut vals = Vec::with_capacity(points * points);
            for &u in &nodes {
                for &v in &nodes {
                    vals.push(a.eval(x, &[u, v])?);
                }
            }
            let mut partial = vec![Complex64::new(0.0, 0.0); points * width];
            for r in 0..points {
                let row = &vals[r * points..(r + 1) * points];
                for k2 in 0..width {
                    partial[r * width + k2] =
                        basis[k2 * points..(k2 + 1) * points].iter().zip(row).map(|(e, v)| e * v).sum::<Complex64>() / m;
                }
            }
            let mut coeffs = vec![Complex64::new(0.0, 0.0); width * width];
            for k1 in 0..width {
                for k2 in 0..width {
                    coeffs[k1 * width + k2] = (0..points)
                        .map(|r| basis[k1 * points + r] * partial[r * width + k2])
                        .sum::<Complex64>()
                        / m;
                }
            }
            (coeffs, vals)
        };
        let peak = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let err = if i % check_stride == 0 {
            reconstruction_gap(dim, &coeffs, &basis, &eta, &vals, points, width)
        } else {
            0.0
        };
        Ok(PerPoint { coeffs, err, peak })
    })?;

    let total_modes = width.pow(dim as u32);
    let mut modes = Vec::with_capacity(total_modes);
    for slot in 0..total_modes {
        let index: Vec<i64> = if dim == 1 {
            vec![slot as i64 - kmax]
        } else {
            vec![(slot / width) as i64 - kmax, (slot % width) as i64 - kmax]
        };
        let values = per_point.iter().map(|p| p.coeffs[slot]).collect();
        let field = SampledField::new(*grid, values, Domain::Space)?;
        let norm = lp_norm(&field, opts.norm_exponent)?;
        modes.push(ModeCoefficient { index, field, norm });
    }
    let peak = per_point.iter().map(|p| p.peak).fold(0.0, f64::max);
    let gap = per_point.iter().map(|p| p.err).fold(0.0, f64::max);
    let mut result = PeriodizationResult {
        cube_side: side,
        support_radius: radius,
        modes,
        decay_order,
        norm_exponent: opts.norm_exponent,
        decay_fit: LineFit {
            slope: 0.0,
            intercept: 0.0,
            residual: 0.0,
        },
        decay_constant: 0.0,
        reconstruction_error: if peak > 0.0 { gap / peak } else { gap },
    };
    let shells = result.shell_norms();
    let xs: Vec<f64> = (0..shells.len()).map(|s| (1.0 + s as f64).ln()).collect();
    let ys: Vec<f64> = shells.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    result.decay_fit = linear_fit(&xs, &ys).ok_or_else(|| FioError::invalid("need at least one nonzero mode"))?;
    result.decay_constant = shells
        .iter()
        .enumerate()
        .map(|(s, v)| v * (1.0 + s as f64).powi(decay_order as i32))
        .fold(0.0, f64::max);
    Ok(result)
}

/// `max_ξ |Σ_k c_k e^{i(2π/L)⟨k,ξ⟩} η(ξ) − a(x, ξ)|` over the cube samples.
fn reconstruction_gap(
    dim: usize,
    coeffs: &[Complex64],
    basis: &[Complex64],
    eta: &[f64],
    vals: &[Complex64],
    points: usize,
    width: usize,
) -> f64 {
    if dim == 1 {
        return (0..points)
            .map(|m| {
                let s: Complex64 = (0..width).map(|k| coeffs[k] * basis[k * points + m].conj()).sum();
                (s * eta[m] - vals[m]).norm()
            })
            .fold(0.0, f64::max);
    }
    // Sum over k2 first for every ξ₂ node, then over k1.
    let mut inner = vec![Complex64::new(0.0, 0.0); width * points];
    for k1 in 0..width {
        for c in 0..points {
            inner[k1 * points + c] = (0..width)
                .map(|k2| coeffs[k1 * width + k2] * basis[k2 * points + c].conj())
                .sum();
        }
    }
    let mut worst = 0.0f64;
    for r in 0..points {
        for c in 0..points {
            let s: Complex64 = (0..width).map(|k1| inner[k1 * points + c] * basis[k1 * points + r].conj()).sum();
            let f = r * points + c;
            worst = worst.max((s * eta[f] - vals[f]).norm());
        }
    }
    worst
}

/// `f(· + shift)` for a band-limited sample, computed spectrally.
pub fn translate(f: &SampledField, shift: &[f64]) -> Result<SampledField> {
    let grid = f.grid;
    let dim = grid.dim();
    if shift.len() != dim {
        return Err(FioError::invalid("shift dimension differs from the grid"));
    }
    let mut hat = fourier_transform(f, Direction::Forward)?;
    for (k, v) in hat.values.iter_mut().enumerate() {
        let xi = grid.freq_point(k);
        let arg: f64 = (0..dim).map(|d| xi[d] * shift[d]).sum();
        *v *= Complex64::from_polar(1.0, arg);
    }
    fourier_transform(&hat, Direction::Inverse)
}

/// `Σ_k a_k(x) T_η(f_k)(x)` with `f_k = f(· + 2πk/L)`.
pub fn periodized_apply(result: &PeriodizationResult, phase: &PhaseDescriptor, f: &SampledField) -> Result<SampledField> {
    let grid = f.grid;
    let dim = grid.dim();
    let mode = if phase.is_linear() {
        QuadratureMode::FastLinearPhase
    } else {
        QuadratureMode::Direct
    };
    let spec = OperatorSpec::new(result.eta_amplitude(dim), phase.clone(), grid).with_mode(mode);
    let mut out = SampledField::zeros(grid, Domain::Space);
    for m in &result.modes {
        let shift: Vec<f64> = m.index.iter().map(|&k| 2.0 * PI * k as f64 / result.cube_side).collect();
        let piece = apply_fio(&spec, &translate(f, &shift)?)?;
        for ((o, c), p) in out.values.iter_mut().zip(&m.field.values).zip(&piece.values) {
            *o += c * p;
        }
    }
    Ok(out)
}
