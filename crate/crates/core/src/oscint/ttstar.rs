use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::build_lp_partition;
use crate::exec::try_map_range;
use crate::fit::linear_fit;
use crate::symbols::{verify_phase, AmplitudeDescriptor, PhaseDescriptor};
use crate::{FioError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TtStarOptions {
    /// Points on the diagonal segment.
    pub points: usize,
    /// The segment runs over `t ∈ [-half_length, half_length]` along `(1,…,1)/√n`.
    pub half_length: f64,
    /// Largest phase advance per frequency cell.
    pub max_phase_per_cell: f64,
    /// Refuse frequency grids with more points than this.
    pub max_points: usize,
    /// Allowed excess of the fitted slope over `-M`.
    pub tolerance: f64,
}

impl Default for TtStarOptions {
    fn default() -> Self {
        TtStarOptions {
            points: 16,
            half_length: 3.0,
            max_phase_per_cell: PI / 4.0,
            max_points: 1 << 18,
            tolerance: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtStarPair {
    pub distance: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtStarReport {
    pub level: u32,
    /// Slope of `log |K_j(x,y)|` against `log(1 + 2^j |x − y|)`.
    pub fitted_decay: f64,
    pub predicted: f64,
    pub kernel_hermitian_error: f64,
    pub snd_min_det: f64,
    pub freq_step: f64,
    pub quadrature_points: usize,
    pub pairs: Vec<TtStarPair>,
    pub passes: bool,
}

/// Kernel of `T_j T_j^*` on a diagonal slice, where `T_j` has amplitude
/// `a Ψ_j`, together with a decay fit and a symmetry check.
pub fn ttstar_decay_check(
    a: &AmplitudeDescriptor,
    phase: &PhaseDescriptor,
    level: u32,
    decay: f64,
    opts: &TtStarOptions,
) -> Result<TtStarReport> {
    let dim = phase.dim();
    if !(1..=2).contains(&dim) {
        return Err(FioError::UnsupportedDimension(dim));
    }
    if a.dim() != dim || a.arity() != 1 {
        return Err(FioError::GridMismatch("amplitude must be arity 1 in the phase's dimension".into()));
    }
    if !(decay > dim as f64) {
        return Err(FioError::invalid(format!("decay order must exceed the dimension, got {decay}")));
    }
    if level < 1 || opts.points < 2 {
        return Err(FioError::invalid("need level >= 1 and at least two points"));
    }
    if !phase.homogeneous_degree_1 {
        return Err(FioError::ClassMismatch("phase must be homogeneous of degree 1".into()));
    }
    let snd = verify_phase(phase, 2, opts.half_length)?;
    if !snd.pass {
        return Err(FioError::ClassMismatch(format!(
            "phase fails the non-degeneracy check (min |det| = {:.3e})",
            snd.snd_constant
        )));
    }
    let lp = build_lp_partition(level + 1)?;
    let outer = 2f64.powi(level as i32 + 1);
    let unit = 1.0 / (dim as f64).sqrt();
    let xs: Vec<Vec<f64>> = (0..opts.points)
        .map(|i| {
            let t = -opts.half_length + 2.0 * opts.half_length * i as f64 / (opts.points - 1) as f64;
            vec![t * unit; dim]
        })
        .collect();

    // Gradient bound for the phase difference on the support.
    let probe: Vec<Vec<f64>> = if dim == 1 {
        vec![vec![outer * 0.5], vec![-outer * 0.5], vec![outer], vec![-outer]]
    } else {
        (0..16)
            .flat_map(|k| {
                let t = 2.0 * PI * k as f64 / 16.0;
                [0.5, 1.0].map(|s| vec![s * outer * t.cos(), s * outer * t.sin()])
            })
            .collect()
    };
    let mut spread = 0.0f64;
    for xi in &probe {
        let grads: Vec<Vec<f64>> = xs.iter().map(|x| phase.grad_xi(x, xi)).collect::<std::result::Result<_, _>>()?;
        for g in &grads {
            for h in &grads {
                let d = g.iter().zip(h).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
                spread = spread.max(d);
            }
        }
    }
    let step = (opts.max_phase_per_cell / spread.max(1e-12)).min(outer / 64.0);
    let half = (outer / step).ceil() as usize;
    let side = 2 * half + 1;
    let total = side.pow(dim as u32);
    let nodes: Vec<f64> = (0..side).map(|m| (m as f64 - half as f64) * step).collect();
    let freq: Vec<Vec<f64>> = (0..total)
        .map(|f| if dim == 1 { vec![nodes[f]] } else { vec![nodes[f / side], nodes[f % side]] })
        .filter(|xi| lp.piece(level, xi) != 0.0)
        .collect();
    if freq.len() > opts.max_points {
        return Err(FioError::Underresolved {
            required: side,
            detail: format!("{} frequency points on the annulus exceed the limit {}", freq.len(), opts.max_points),
        });
    }
    // Row `p` holds e^{iφ(x_p, ξ)} a_j(x_p, ξ) over the annulus.
    let rows = try_map_range(xs.len(), |p| -> Result<Vec<Complex64>> {
        freq.iter()
            .map(|xi| {
                let amp = a.eval(&xs[p], xi)? * lp.piece(level, xi);
                Ok(amp * Complex64::from_polar(1.0, phase.eval(&xs[p], xi)?))
            })
            .collect()
    })?;
    let weight = step.powi(dim as i32) / (2.0 * PI).powi(dim as i32);
    let np = xs.len();
    let kernel = try_map_range(np * np, |idx| -> Result<Complex64> {
        let (p, q) = (idx / np, idx % np);
        let v: Complex64 = rows[p].iter().zip(&rows[q]).map(|(u, w)| u * w.conj()).sum();
        let v = v * weight;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(FioError::NonFinite("TT* kernel".into()));
        }
        Ok(v)
    })?;
    let peak = kernel.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut herm = 0.0f64;
    let mut pairs = Vec::new();
    for p in 0..np {
        for q in 0..np {
            herm = herm.max((kernel[p * np + q] - kernel[q * np + p].conj()).norm());
            if p != q {
                let d = xs[p].iter().zip(&xs[q]).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
                pairs.push(TtStarPair {
                    distance: d,
                    modulus: kernel[p * np + q].norm(),
                });
            }
        }
    }
    let scale = 2f64.powi(level as i32);
    let used: Vec<&TtStarPair> = pairs.iter().filter(|t| t.modulus > 1e-12 * peak).collect();
    let lx: Vec<f64> = used.iter().map(|t| (1.0 + scale * t.distance).ln()).collect();
    let ly: Vec<f64> = used.iter().map(|t| t.modulus.ln()).collect();
    let fitted = match linear_fit(&lx, &ly) {
        Some(f) => f.slope,
        // Every off-diagonal entry sits at the noise floor: faster than any power.
        None => f64::NEG_INFINITY,
    };
    Ok(TtStarReport {
        level,
        fitted_decay: fitted,
        predicted: -decay,
        kernel_hermitian_error: herm / peak.max(f64::MIN_POSITIVE),
        snd_min_det: snd.snd_constant,
        freq_step: step,
        quadrature_points: freq.len(),
        pairs,
        passes: fitted <= -decay + opts.tolerance,
    })
}
