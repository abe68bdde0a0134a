use std::sync::Arc;

use num_complex::Complex64;

use super::{ConeNet, LPPartition, ReducedPhase};
use crate::numgrid::UniformGrid;
use crate::symbols::{AmplitudeDescriptor, PhaseDescriptor};
use crate::{exec, FioError, Result};

const SUPPORT_THRESHOLD: f64 = 1e-14;

/// `A_j^ν(x, ξ) = e^{iΦ(x,ξ)} a(x,ξ) χ_j^ν(ξ) Ψ_j(ξ)` together with the
/// measured frequency volume of its support.
#[derive(Debug, Clone)]
pub struct PieceAmplitude {
    pub j: u32,
    pub nu: usize,
    pub amplitude: AmplitudeDescriptor,
    pub reduced: ReducedPhase,
    /// Frequency cells where `|χ_j^ν Ψ_j| > 1e-14`.
    pub support_cells: usize,
    pub support_measure: f64,
}

impl PieceAmplitude {
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> std::result::Result<Complex64, crate::EvalError> {
        self.amplitude.eval(x, xi)
    }
}

pub(crate) fn localizer(lp: &LPPartition, net: &ConeNet, j: u32, nu: usize, xi: &[f64]) -> f64 {
    let psi = lp.piece(j, xi);
    if psi == 0.0 {
        return 0.0;
    }
    psi * net.cutoff(nu, xi)
}

pub fn make_piece_amplitude(
    a: &AmplitudeDescriptor,
    phase: &PhaseDescriptor,
    lp: &LPPartition,
    net: &ConeNet,
    j: u32,
    nu: usize,
    grid: &UniformGrid,
) -> Result<PieceAmplitude> {
    if a.arity() != 1 {
        return Err(FioError::invalid("piece amplitudes need an arity-1 amplitude"));
    }
    if a.dim() != phase.dim() || a.dim() != net.dim || grid.dim() != a.dim() {
        return Err(FioError::GridMismatch("amplitude, phase, cone net and grid dimensions differ".into()));
    }
    if net.j != j {
        return Err(FioError::invalid(format!("cone net is for level {}, not {j}", net.j)));
    }
    if nu >= net.len() {
        return Err(FioError::invalid(format!("cone index {nu} out of range ({} centers)", net.len())));
    }
    let outer = 2f64.powi(j as i32 + 1);
    if grid.freq_halfwidth() < outer {
        return Err(FioError::Underresolved {
            required: (outer / grid.freq_spacing()).ceil() as usize * 2,
            detail: format!("frequency box {} does not contain the level-{j} annulus", grid.freq_halfwidth()),
        });
    }
    let reduced = ReducedPhase::new(phase.clone(), net.centers()[nu].clone())?;

    let dim = grid.dim();
    let inside = exec::map_range(grid.len(), |k| {
        let p = grid.freq_point(k);
        localizer(lp, net, j, nu, &p[..dim]).abs() > SUPPORT_THRESHOLD
    });
    let support_cells = inside.iter().filter(|&&b| b).count();

    let (lp, net_c, amp, red) = (*lp, Arc::new(net.clone()), a.clone(), reduced.clone());
    let amplitude = AmplitudeDescriptor::from_fn(dim, 1, a.class.clone(), move |x, xi| {
        let loc = localizer(&lp, &net_c, j, nu, xi);
        if loc == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let phi = red.eval(x, xi)?;
        Ok(Complex64::from_polar(1.0, phi) * amp.eval(x, xi)? * loc)
    })
    .with_support_radius(outer)
    .with_label(format!("A_{j}^{nu}[{}]", a.label()));

    Ok(PieceAmplitude {
        j,
        nu,
        amplitude,
        reduced,
        support_cells,
        support_measure: support_cells as f64 * grid.freq_cell_volume(),
    })
}
