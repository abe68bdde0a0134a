//! Self-describing run configuration.
//!
//! One JSON document names the grid, the amplitude and phase (built-in names
//! or expressions) and a block per command. Everything is validated before any
//! computation starts.

use serde::{Deserialize, Serialize};

use crate::bounds::{Exponent, ScenarioInputs};
use crate::multilinear::{builtin_multilinear_amplitude, MultilinearMode};
use crate::normlab::SweepSettings;
use crate::numgrid::UniformGrid;
use crate::oscint::{KernelOptions, NonstatOptions, PeriodizeOptions, QuadratureMode, Window};
use crate::symbols::builtins::{builtin_amplitude, builtin_phase};
use crate::symbols::{parse_expression, AmplitudeDescriptor, ClassTag, PhaseDescriptor};
use crate::{FioError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub dim: usize,
    /// Points per dimension, a power of two.
    pub points: usize,
    /// Half-width `X` of the box `[-X, X)^n`.
    pub halfwidth: f64,
}

impl GridBlock {
    pub fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(self.dim, self.points, self.halfwidth)
    }
}

/// An amplitude given by name (`"rough_log"`, `"jb_power(-1)"`, …) or by
/// expression with its declared class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AmplitudeBlock {
    Builtin(String),
    Defined(AmplitudeDefinition),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeDefinition {
    #[serde(default = "one_operand")]
    pub arity: usize,
    pub expr: String,
    pub class: ClassTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_support_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn one_operand() -> usize {
    1
}

impl AmplitudeBlock {
    pub fn arity(&self) -> Option<usize> {
        match self {
            AmplitudeBlock::Builtin(_) => None,
            AmplitudeBlock::Defined(d) => Some(d.arity),
        }
    }

    /// Builds the descriptor; built-in names take the requested arity.
    pub fn resolve(&self, dim: usize, arity: usize) -> Result<AmplitudeDescriptor> {
        match self {
            AmplitudeBlock::Builtin(name) if arity == 1 => builtin_amplitude(name, dim),
            AmplitudeBlock::Builtin(name) => builtin_multilinear_amplitude(name, dim, arity),
            AmplitudeBlock::Defined(d) => {
                if d.arity != arity {
                    return Err(FioError::invalid(format!(
                        "amplitude declares {} operands but {arity} are needed",
                        d.arity
                    )));
                }
                let expr = parse_expression(&d.expr)?.compile(dim, d.arity)?;
                let mut a = AmplitudeDescriptor::from_expression(expr, d.class.clone())?;
                if let Some(r) = d.freq_support_radius {
                    if !(r.is_finite() && r > 0.0) {
                        return Err(FioError::invalid("freq_support_radius must be positive"));
                    }
                    a = a.with_support_radius(r);
                }
                Ok(a.with_label(d.label.clone().unwrap_or_else(|| d.expr.clone())))
            }
        }
    }
}

/// A phase given by name or by expression in `x1.., k1_1..`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseBlock {
    Builtin(String),
    Defined(PhaseDefinition),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDefinition {
    pub expr: String,
    #[serde(default)]
    pub homogeneous: bool,
    /// Claimed class `Φ^k`, 1 or 2.
    #[serde(default = "second_class")]
    pub phi_k: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn second_class() -> u8 {
    2
}

impl PhaseBlock {
    pub fn resolve(&self, dim: usize) -> Result<PhaseDescriptor> {
        match self {
            PhaseBlock::Builtin(name) => builtin_phase(name, dim),
            PhaseBlock::Defined(d) => {
                let expr = parse_expression(&d.expr)?.compile(dim, 1)?;
                Ok(PhaseDescriptor::from_expression(expr, d.homogeneous, d.phi_k)?
                    .with_label(d.label.clone().unwrap_or_else(|| d.expr.clone())))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckClassBlock {
    /// Highest derivative order in the seminorm.
    #[serde(default = "default_order")]
    pub s: usize,
    #[serde(default = "default_sample_level")]
    pub j_max: u32,
}

fn default_order() -> usize {
    2
}

fn default_sample_level() -> u32 {
    6
}

impl Default for CheckClassBlock {
    fn default() -> Self {
        CheckClassBlock {
            s: default_order(),
            j_max: default_sample_level(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyPhaseBlock {
    #[serde(default = "second_class")]
    pub k: u8,
    #[serde(default = "unit")]
    pub box_halfwidth: f64,
    /// Dyadic levels at which to repeat the check.
    #[serde(default)]
    pub levels: Vec<u32>,
}

fn unit() -> f64 {
    1.0
}

impl Default for VerifyPhaseBlock {
    fn default() -> Self {
        VerifyPhaseBlock {
            k: 2,
            box_halfwidth: 1.0,
            levels: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeBlock {
    pub j_max: u32,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ApplyBlock {
    #[serde(default)]
    pub mode: QuadratureMode,
    #[serde(default)]
    pub acknowledge_truncation: bool,
}

/// Operand count, per-operand phases and quadrature of a multilinear operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultilinearBlock {
    pub operands: usize,
    /// One phase per operand; empty means the top-level `phase` for all.
    #[serde(default)]
    pub phases: Vec<PhaseBlock>,
    #[serde(default)]
    pub mode: MultilinearMode,
}

/// Low-frequency kernel of the phase reduced at `center`, frozen at `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub center: Vec<f64>,
    pub x: Vec<f64>,
    /// Radius of the radial bump cutting the frequency integral.
    #[serde(default = "unit")]
    pub support: f64,
    #[serde(default)]
    pub options: KernelOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PeriodizeBlock {
    #[serde(default)]
    pub options: PeriodizeOptions,
    /// Also compare the periodized operator with direct quadrature on a Gaussian.
    #[serde(default)]
    pub verify: bool,
}

/// Frequency phase of the non-stationary phase check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonstatPhase {
    /// `⟨direction, ξ⟩`.
    Linear { direction: Vec<f64> },
    /// `|ξ|²/2`.
    Quadratic,
    /// The configured phase at `x = 0`.
    Configured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonstatBlock {
    pub window: Window,
    pub phase: NonstatPhase,
    #[serde(default)]
    pub options: NonstatOptions,
}

/// Optional sub-verifications bundled into an experiment report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentChecks {
    #[serde(default = "yes")]
    pub partition: bool,
    #[serde(default = "yes")]
    pub phase: bool,
    #[serde(default)]
    pub kernel: bool,
}

fn yes() -> bool {
    true
}

impl Default for ExperimentChecks {
    fn default() -> Self {
        ExperimentChecks {
            partition: true,
            phase: true,
            kernel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    #[serde(default = "linear_scenario")]
    pub scenario: String,
    /// Source exponent; the target follows from Hölder with the class's `p`
    /// unless `r` is given.
    #[serde(default = "two")]
    pub q: Exponent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<u32>>,
    #[serde(default = "default_bank")]
    pub bank_size: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Replaces the scenario inputs derived from the amplitude's class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_inputs: Option<ScenarioInputs>,
    #[serde(default)]
    pub checks: ExperimentChecks,
}

fn linear_scenario() -> String {
    "linear".into()
}

fn two() -> Exponent {
    Exponent::new(2.0).expect("valid exponent")
}

fn default_bank() -> usize {
    SweepSettings::default().bank_size
}

fn default_tolerance() -> f64 {
    SweepSettings::default().tolerance
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        ExperimentBlock {
            scenario: linear_scenario(),
            q: two(),
            r: None,
            levels: None,
            bank_size: default_bank(),
            tolerance: default_tolerance(),
            scenario_inputs: None,
            checks: ExperimentChecks::default(),
        }
    }
}

/// Everything a boundedness experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: GridBlock,
    pub amplitude: AmplitudeBlock,
    pub phase: PhaseBlock,
    #[serde(default)]
    pub experiment: ExperimentBlock,
    #[serde(default)]
    pub seed: u64,
}

/// Top-level configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<AmplitudeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multilinear: Option<MultilinearBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_class: Option<CheckClassBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_phase: Option<VerifyPhaseBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decompose: Option<DecomposeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apply: Option<ApplyBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodize: Option<PeriodizeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonstat: Option<NonstatBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

fn missing(field: &str) -> FioError {
    FioError::invalid(format!("config is missing `{field}`"))
}

impl RunConfig {
    pub fn grid(&self) -> Result<UniformGrid> {
        self.grid.ok_or_else(|| missing("grid"))?.grid()
    }

    pub fn amplitude(&self, arity: usize) -> Result<AmplitudeDescriptor> {
        let dim = self.grid()?.dim();
        self.amplitude.as_ref().ok_or_else(|| missing("amplitude"))?.resolve(dim, arity)
    }

    /// Number of operands: the `multilinear` block's count, the amplitude's
    /// declared arity, or 1.
    pub fn arity(&self) -> usize {
        self.multilinear
            .as_ref()
            .map(|m| m.operands)
            .or_else(|| self.amplitude.as_ref().and_then(AmplitudeBlock::arity))
            .unwrap_or(1)
    }

    pub fn multilinear_mode(&self) -> MultilinearMode {
        self.multilinear.as_ref().map(|m| m.mode).unwrap_or_default()
    }

    pub fn phase(&self) -> Result<PhaseDescriptor> {
        let dim = self.grid()?.dim();
        self.phase.as_ref().ok_or_else(|| missing("phase"))?.resolve(dim)
    }

    /// Operand phases, falling back to `phase` repeated.
    pub fn phases(&self, arity: usize) -> Result<Vec<PhaseDescriptor>> {
        let dim = self.grid()?.dim();
        match self.multilinear.as_ref().map(|m| &m.phases) {
            Some(list) if !list.is_empty() => {
                if list.len() != arity {
                    return Err(FioError::invalid(format!(
                        "`multilinear.phases` lists {} entries for {arity} operands",
                        list.len()
                    )));
                }
                list.iter().map(|p| p.resolve(dim)).collect()
            }
            _ => Ok(vec![self.phase()?; arity]),
        }
    }

    pub fn sweep_settings(&self) -> Result<SweepSettings> {
        let mut s = self.sweep.clone().ok_or_else(|| missing("sweep"))?;
        s.seed = self.seed;
        Ok(s)
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            grid: self.grid.ok_or_else(|| missing("grid"))?,
            amplitude: self.amplitude.clone().ok_or_else(|| missing("amplitude"))?,
            phase: self.phase.clone().ok_or_else(|| missing("phase"))?,
            experiment: self.experiment.clone().ok_or_else(|| missing("experiment"))?,
            seed: self.seed,
        })
    }

    pub fn threads(&self) -> Result<Option<usize>> {
        match self.threads {
            Some(0) => Err(FioError::invalid("threads must be positive")),
            t => Ok(t),
        }
    }
}
