mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fiolab_core::bounds::Exponent;
use fiolab_core::FioError;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "fiolab", version, about = "Numerical lab for rough Fourier integral operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sampled class seminorms of the configured amplitude.
    CheckClass(ConfigArgs),
    /// Phase-class constants, homogeneity and non-degeneracy of the phase.
    VerifyPhase(ConfigArgs),
    /// Littlewood-Paley and cone decomposition diagnostics.
    Decompose(ConfigArgs),
    /// Applies the configured operator to sampled input fields.
    Apply(ApplyArgs),
    /// Low-frequency kernel decay of a reduced phase.
    Kernel(ConfigArgs),
    /// Fourier-series expansion of a compactly supported amplitude in x.
    Periodize(ConfigArgs),
    /// Non-stationary phase decay check.
    Nonstat(ConfigArgs),
    /// Order thresholds and admissibility for a scenario.
    Thresholds(ThresholdArgs),
    /// Per-level operator norms and their growth rate.
    Sweep(SweepArgs),
    /// Thresholds, sub-verifications and sweep in one report.
    Experiment(ConfigArgs),
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Report path; overrides the config's `output`. Defaults to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ApplyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Input field (CSV); repeat once per operand.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    /// Output field (CSV).
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-level norms as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct ThresholdArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    rho1: Option<f64>,
    #[arg(long)]
    rho2: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    p: Option<Exponent>,
    #[arg(long)]
    q: Option<Exponent>,
    #[arg(long)]
    q1: Option<Exponent>,
    #[arg(long)]
    q2: Option<Exponent>,
    #[arg(long)]
    r: Option<Exponent>,
    /// Comma-separated per-operand exponents.
    #[arg(long, value_delimiter = ',')]
    qs: Option<Vec<Exponent>>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    m1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    m2: Option<f64>,
    /// Comma-separated per-operand orders.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ms: Option<Vec<f64>>,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A failure with its exit status: 2 for invalid input, 1 for compute errors.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    kind: &'static str,
    message: String,
    field: Option<String>,
    stage: Option<String>,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            kind: "usage",
            message: message.into(),
            field: None,
            stage: None,
        }
    }

    pub fn config(message: impl Into<String>, field: Option<String>) -> Self {
        CliError {
            code: 2,
            kind: "config",
            message: message.into(),
            field,
            stage: None,
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            kind: "io",
            message: message.into(),
            field: None,
            stage: None,
        }
    }

    /// Rejected inputs exit with 2; failures of the numerics exit with 1.
    pub fn validation(e: FioError) -> Self {
        Self::from_fio(e, 2)
    }

    pub fn compute(e: FioError) -> Self {
        let code = if rejects_input(&e) { 2 } else { 1 };
        Self::from_fio(e, code)
    }

    fn from_fio(e: FioError, code: u8) -> Self {
        let stage = match &e {
            FioError::Stage { stage, .. } => Some(stage.clone()),
            _ => None,
        };
        CliError {
            code,
            kind: if code == 2 { "validation" } else { "compute" },
            message: e.to_string(),
            field: None,
            stage,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "status": "error",
            "exit_code": self.code,
            "kind": self.kind,
            "message": self.message,
        });
        if let Some(f) = &self.field {
            v["field"] = json!(f);
        }
        if let Some(s) = &self.stage {
            v["stage"] = json!(s);
        }
        v
    }
}

/// Errors that describe bad inputs rather than a failed computation.
fn rejects_input(e: &FioError) -> bool {
    match e {
        FioError::Stage { source, .. } => rejects_input(source),
        FioError::UnsupportedDimension(_)
        | FioError::NotPowerOfTwo(_)
        | FioError::InvalidArgument(_)
        | FioError::GridMismatch(_)
        | FioError::Parse { .. }
        | FioError::ClassMismatch(_)
        | FioError::UnacknowledgedTruncation { .. }
        | FioError::Unsupported(_)
        | FioError::UnknownScenario(_)
        | FioError::InconsistentHolder(_)
        | FioError::TooFewLevels(_) => true,
        _ => false,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::CheckClass(a) => commands::check_class(&a.config, a.output),
        Command::VerifyPhase(a) => commands::verify_phase(&a.config, a.output),
        Command::Decompose(a) => commands::decompose(&a.config, a.output),
        Command::Apply(a) => commands::apply(&a.config, &a.inputs, &a.output),
        Command::Kernel(a) => commands::kernel(&a.config, a.output),
        Command::Periodize(a) => commands::periodize(&a.config, a.output),
        Command::Nonstat(a) => commands::nonstat(&a.config, a.output),
        Command::Thresholds(a) => commands::thresholds(&a),
        Command::Sweep(a) => commands::sweep(&a.config, a.output, a.csv),
        Command::Experiment(a) => commands::experiment(&a.config, a.output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    return ExitCode::SUCCESS;
                }
                ErrorKind::InvalidSubcommand => {
                    let name = std::env::args().nth(1).unwrap_or_default();
                    return report(CliError::usage(format!("unknown command `{name}`")));
                }
                _ => {
                    let text = e.render().to_string();
                    let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
                    return report(CliError::usage(first.to_string()));
                }
            }
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.code)
}
