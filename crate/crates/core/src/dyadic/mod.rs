//! Littlewood-Paley partition, second dyadic cone decomposition, reduced
//! phases and the localized pieces `A_j^ν`.

mod cone;
mod partition;
mod piece;
mod reduce;

pub use cone::{build_cone_decomposition, ChiConstants, ConeNet};
pub use partition::{build_lp_partition, psi0_radial, smooth_step, smooth_step_jet, LPPartition};
pub use piece::{make_piece_amplitude, PieceAmplitude};
pub use reduce::{reduce_phase, reduce_phase_low_frequency, LowFrequencyPiece, PhaseEstimates, ReducedPhase};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numgrid::UniformGrid;
use crate::symbols::builtins::one;
use crate::symbols::PhaseDescriptor;
use crate::{exec, FioError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub j: u32,
    pub center_count: usize,
    pub min_separation: f64,
    pub covering_radius: f64,
    pub chi_constants: ChiConstants,
    /// Frequency volume of each piece support, indexed by `ν`.
    pub support_measures: Vec<f64>,
    /// Largest support measure divided by `2^{j(n+1)/2}`.
    pub normalized_support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub dim: usize,
    pub j_max: u32,
    /// Sampled sup of `|Ψ₀ + Σ_j Ψ_j − 1|` on the ball of radius `2^{j_max}`.
    pub lp_defect: f64,
    /// Same for the combined partition `Ψ₀ + Σ_j Σ_ν χ_j^ν Ψ_j`.
    pub combined_defect: f64,
    pub samples: usize,
    pub levels: Vec<LevelReport>,
}

/// Uniform samples in the ball `|ξ| ≤ radius`, excluding the origin.
pub fn ball_samples(dim: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..radius)).collect();
        let r2: f64 = p.iter().map(|v| v * v).sum();
        if r2 > 0.0 && r2 <= radius * radius {
            out.push(p);
        }
    }
    out
}

/// Sup deviation of both partitions of unity over the given samples.
pub fn partition_defects(lp: &LPPartition, nets: &[ConeNet], samples: &[Vec<f64>]) -> (f64, f64) {
    let pairs = exec::map_slice(samples, |xi| {
        let plain = (lp.partial_sum(xi) - 1.0).abs();
        let mut combined = lp.psi0(xi);
        for net in nets {
            let psi = lp.piece(net.j, xi);
            if psi != 0.0 {
                combined += (0..net.len()).map(|nu| net.cutoff(nu, xi)).sum::<f64>() * psi;
            }
        }
        (plain, (combined - 1.0).abs())
    });
    pairs.iter().fold((0.0, 0.0), |(a, b), (p, c)| (f64::max(a, *p), f64::max(b, *c)))
}

/// Builds every level up to `j_max` and measures the geometry, cutoff
/// derivative constants and piece support volumes on `grid`.
pub fn decomposition_report(grid: &UniformGrid, j_max: u32, samples: usize, seed: u64) -> Result<DecompositionReport> {
    let dim = grid.dim();
    let lp = build_lp_partition(j_max)?;
    let nets: Vec<ConeNet> = (1..=j_max).map(|j| build_cone_decomposition(j, dim)).collect::<Result<_>>()?;
    let points = ball_samples(dim, 2f64.powi(j_max as i32), samples, seed);
    let (lp_defect, combined_defect) = partition_defects(&lp, &nets, &points);
    let phase = PhaseDescriptor::linear(dim);
    let a = one(dim);
    let mut levels = Vec::with_capacity(nets.len());
    for net in &nets {
        let j = net.j;
        let support_measures = if grid.freq_halfwidth() >= 2f64.powi(j as i32 + 1) {
            (0..net.len())
                .map(|nu| make_piece_amplitude(&a, &phase, &lp, net, j, nu, grid).map(|p| p.support_measure))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let top = support_measures.iter().copied().fold(0.0, f64::max);
        levels.push(LevelReport {
            j,
            center_count: net.len(),
            min_separation: net.min_separation(),
            covering_radius: net.covering_radius(4096),
            chi_constants: net.derivative_constants(64)?,
            support_measures,
            normalized_support: top / 2f64.powf(j as f64 * (dim as f64 + 1.0) / 2.0),
        });
    }
    if !lp_defect.is_finite() || !combined_defect.is_finite() {
        return Err(FioError::NonFinite("partition of unity".into()));
    }
    Ok(DecompositionReport {
        dim,
        j_max,
        lp_defect,
        combined_defect,
        samples: points.len(),
        levels,
    })
}
