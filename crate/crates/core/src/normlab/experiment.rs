use serde::{Deserialize, Serialize};

use super::sweep::{dyadic_norm_sweep, NormSweepRecord, SweepSettings};
use crate::bounds::{multilinear_admissibility, Exponent, ScenarioInputs, ThresholdReport};
use crate::config::ExperimentConfig;
use crate::dyadic::{ball_samples, build_cone_decomposition, build_lp_partition, partition_defects, ConeNet, ReducedPhase};
use crate::oscint::{low_frequency_kernel, KernelOptions, KernelReport};
use crate::symbols::builtins::radial_bump;
use crate::symbols::{verify_phase, PhaseReport};
use crate::{FioError, Result};

const PARTITION_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCheck {
    pub j_max: u32,
    pub samples: usize,
    pub lp_defect: f64,
    pub combined_defect: f64,
}

/// Thresholds, the dyadic sweep and every sub-verification that ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub amplitude: String,
    pub phase: String,
    pub q: Exponent,
    pub r: Exponent,
    pub thresholds: ThresholdReport,
    pub sweep: NormSweepRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_check: Option<PhaseReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelReport>,
    pub consistent: bool,
    pub verdict: String,
}

/// Default levels: from 2 up to the finest level the grid resolves, at most 6.
fn default_levels(freq_halfwidth: f64) -> Vec<u32> {
    let top = (freq_halfwidth.log2().floor() as i64 - 1).clamp(0, 6) as u32;
    (2..=top).collect()
}

/// Runs symbols → bounds → dyadic → oscint → normlab for one configuration.
/// Errors carry the name of the stage that raised them.
pub fn boundedness_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let settings = &config.experiment;
    let grid = config.grid.grid().map_err(|e| e.at_stage("config"))?;
    let dim = grid.dim();
    let a = config.amplitude.resolve(dim, 1).map_err(|e| e.at_stage("symbols"))?;
    let phase = config.phase.resolve(dim).map_err(|e| e.at_stage("symbols"))?;

    let (p, m, rho) = a
        .class
        .lebesgue_profile()
        .ok_or_else(|| FioError::ClassMismatch("experiments need a single-operand class".into()).at_stage("symbols"))?;
    let q = settings.q;
    let inputs = settings.scenario_inputs.clone().unwrap_or(ScenarioInputs {
        n: Some(dim),
        rho: Some(rho),
        p: Some(p),
        q: Some(q),
        m: Some(m),
        ..Default::default()
    });
    let thresholds = multilinear_admissibility(&settings.scenario, &inputs).map_err(|e| e.at_stage("bounds"))?;
    let r = settings.r.unwrap_or_else(|| Exponent::holder(&[p, q]));

    let sweep_settings = SweepSettings {
        q,
        r,
        levels: settings.levels.clone().unwrap_or_else(|| default_levels(grid.freq_halfwidth())),
        bank_size: settings.bank_size,
        seed: config.seed,
        tolerance: settings.tolerance,
    };
    sweep_settings.validate(&grid).map_err(|e| e.at_stage("normlab"))?;
    let j_max = *sweep_settings.levels.iter().max().expect("validated");

    let partition = if settings.checks.partition {
        Some(partition_check(dim, j_max, config.seed).map_err(|e| e.at_stage("dyadic"))?)
    } else {
        None
    };
    let phase_check = if settings.checks.phase && phase.homogeneous_degree_1 {
        Some(verify_phase(&phase, phase.claimed_phi_k, 1.0).map_err(|e| e.at_stage("symbols"))?)
    } else {
        None
    };
    let kernel = if settings.checks.kernel {
        let mut center = vec![0.0; dim];
        center[0] = 1.0;
        let reduced = ReducedPhase::new(phase.clone(), center).map_err(|e| e.at_stage("dyadic"))?;
        let x = vec![0.0; dim];
        let report = low_frequency_kernel(
            dim,
            |xi: &[f64]| reduced.eval(&x, xi),
            |xi: &[f64]| radial_bump(xi, 1.0),
            1.0,
            &KernelOptions::default(),
        )
        .map_err(|e| e.at_stage("oscint"))?;
        Some(report)
    } else {
        None
    };

    let sweep = dyadic_norm_sweep(&a, &phase, grid, &sweep_settings).map_err(|e| e.at_stage("normlab"))?;
    let consistent = sweep.within_prediction;
    let verdict = if consistent {
        format!("consistent with Theorem {}", settings.scenario)
    } else {
        "scaling exceeds prediction".to_string()
    };
    Ok(ExperimentReport {
        scenario: settings.scenario.clone(),
        amplitude: a.label().to_string(),
        phase: phase.label().to_string(),
        q,
        r,
        thresholds,
        sweep,
        partition,
        phase_check,
        kernel,
        consistent,
        verdict,
    })
}

fn partition_check(dim: usize, j_max: u32, seed: u64) -> Result<PartitionCheck> {
    let lp = build_lp_partition(j_max)?;
    let nets: Vec<ConeNet> = (1..=j_max).map(|j| build_cone_decomposition(j, dim)).collect::<Result<_>>()?;
    let samples = ball_samples(dim, 2f64.powi(j_max as i32), PARTITION_SAMPLES, seed);
    let (lp_defect, combined_defect) = partition_defects(&lp, &nets, &samples);
    Ok(PartitionCheck {
        j_max,
        samples: PARTITION_SAMPLES,
        lp_defect,
        combined_defect,
    })
}
