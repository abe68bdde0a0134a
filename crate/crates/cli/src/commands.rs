use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use fiolab_core::bounds::{multilinear_admissibility, ScenarioInputs};
use fiolab_core::config::{NonstatPhase, RunConfig};
use fiolab_core::dyadic::{decomposition_report, ReducedPhase};
use fiolab_core::exec::{available_workers, with_threads};
use fiolab_core::multilinear::{apply_multilinear, MultilinearSpec};
use fiolab_core::normlab::{boundedness_experiment, dyadic_norm_sweep, predicted_slope, sweep_report};
use fiolab_core::numgrid::{lp_norm, read_csv, write_csv, Domain, SampledField};
use fiolab_core::oscint::{
    apply_fio, frequency_linear_phase, frequency_quadratic_phase, low_frequency_kernel, periodize_amplitude,
    periodized_apply, verify_nonstationary_decay, OperatorSpec, Window,
};
use fiolab_core::symbols::builtins::radial_bump;
use fiolab_core::symbols::{self, estimate_seminorm, verify_phase_at_level, XiSampling};
use fiolab_core::{Complex64, FioError};
use serde::Serialize;
use serde_json::json;

use crate::{CliError, ThresholdArgs};

type CliResult<T> = Result<T, CliError>;

fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display()), None))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        CliError::config(e.inner().to_string(), Some(field))
    })?;
    cfg.threads().map_err(CliError::validation)?;
    Ok(cfg)
}

/// Worker count: `FIOLAB_THREADS`, then the config, then every core.
fn thread_count(cfg: Option<&RunConfig>) -> CliResult<Option<usize>> {
    if let Ok(raw) = std::env::var("FIOLAB_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("FIOLAB_THREADS must be a positive integer, got `{raw}`")))?;
        if n == 0 {
            return Err(CliError::usage("FIOLAB_THREADS must be positive"));
        }
        return Ok(Some(n));
    }
    Ok(cfg.and_then(|c| c.threads))
}

fn compute<T: Send>(threads: Option<usize>, work: impl FnOnce() -> Result<T, FioError> + Send) -> CliResult<T> {
    with_threads(threads, work)
        .map_err(CliError::validation)?
        .map_err(CliError::compute)
}

fn valid<T>(r: Result<T, FioError>) -> CliResult<T> {
    r.map_err(CliError::validation)
}

fn meta_path(output: &Path) -> PathBuf {
    output.with_extension("meta.json")
}

fn write_meta(output: &Path, command: &str, threads: Option<usize>) -> CliResult<()> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = json!({
        "command": command,
        "created_unix": stamp,
        "threads": threads.unwrap_or_else(available_workers),
        "version": env!("CARGO_PKG_VERSION"),
    });
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(meta_path(output), text + "\n").map_err(|e| CliError::io(e.to_string()))
}

/// Writes the JSON report to `output` (with a metadata file beside it) or to stdout.
fn emit<T: Serialize>(report: &T, output: Option<PathBuf>, command: &str, threads: Option<usize>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::io(e.to_string()))? + "\n";
    match output {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            write_meta(&path, command, threads)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn output_path(flag: Option<PathBuf>, cfg: &RunConfig) -> Option<PathBuf> {
    flag.or_else(|| cfg.output.as_ref().map(PathBuf::from))
}

fn require<T: Clone>(block: &Option<T>, name: &str) -> CliResult<T> {
    block
        .clone()
        .ok_or_else(|| CliError::config(format!("missing `{name}` block"), Some(name.to_string())))
}

pub fn check_class(path: &Path, output: Option<PathBuf>) -> CliResult<()> {
    let cfg = load_config(path)?;
    let threads = thread_count(Some(&cfg))?;
    let grid = valid(cfg.grid())?;
    let a = valid(cfg.amplitude(1))?;
    let block = cfg.check_class.clone().unwrap_or_default();
    let sampling = XiSampling::dyadic(block.j_max, grid.dim());
    let report = compute(threads, || estimate_seminorm(&a, block.s, &grid, &sampling))?;
    emit(&report, output_path(output, &cfg), "check-class", threads)
}

pub fn verify_phase(path: &Path, output: Option<PathBuf>) -> CliResult<()> {
    let cfg = load_config(path)?;
    let threads = thread_count(Some(&cfg))?;
    let phase = valid(cfg.phase())?;
    let block = cfg.verify_phase.clone().unwrap_or_default();
    if !(1..=2).contains(&block.k) || !(block.box_halfwidth > 0.0) {
        return Err(CliError::config("verify_phase needs k in {1, 2} and a positive box_halfwidth", Some("verify_phase".into())));
    }
    let (base, levels) = compute(threads, || {
        let base = symbols::verify_phase(&phase, block.k, block.box_halfwidth)?;
        let levels = block
            .levels
            .iter()
            .map(|&j| Ok(json!({ "j": j, "report": verify_phase_at_level(&phase, block.k, block.box_halfwidth, j)? })))
            .collect::<Result<Vec<_>, FioError>>()?;
        Ok((base, levels))
    })?;
    let report = json!({ "phase": phase.label(), "report": base, "levels": levels });
    emit(&report, output_path(output, &cfg), "verify-phase", threads)
}

pub fn decompose(path: &Path, output: Option<PathBuf>) -> CliResult<()> {
    let cfg = load_config(path)?;
    let threads = thread_count(Some(&cfg))?;
    let grid = valid(cfg.grid())?;
    let block = require(&cfg.decompose, "decompose")?;
    if block.j_max == 0 || block.samples == 0 {
        return Err(CliError::config("decompose needs j_max >= 1 and samples >= 1", Some("decompose".into())));
    }
    let report = compute(threads, || decomposition_report(&grid, block.j_max, block.samples, cfg.seed))?;
    emit(&report, output_path(output, &cfg), "decompose", threads)
}

fn read_field(path: &Path, grid: fiolab_core::numgrid::UniformGrid) -> CliResult<SampledField> {
    let file = File::open(path).map_err(|e| CliError::usage(format!("cannot open {}: {e}", path.display())))?;
    read_csv(grid, Domain::Space, BufReader::new(file)).map_err(CliError::validation)
}

pub fn apply(path: &Path, inputs: &[PathBuf], output: &Path) -> CliResult<()> {
    let cfg = load_config(path)?;
    let threads = thread_count(Some(&cfg))?;
    let grid = valid(cfg.grid())?;
    let arity = cfg.arity();
    if inputs.len() != arity {
        return Err(CliError::usage(format!("the operator takes {arity} inputs but {} were given", inputs.len())));
    }
    let block = cfg.apply.clone().unwrap_or_default();
    let a = valid(cfg.amplitude(arity))?;
    let fields = inputs.iter().map(|p| read_field(p, grid)).collect::<CliResult<Vec<_>>>()?;
    let result = if arity == 1 {
        let mut spec = OperatorSpec::new(a, valid(cfg.phase())?, grid).with_mode(block.mode);
        if block.acknowledge_truncation {
            spec = spec.acknowledging_truncation();
        }
        valid(spec.validate())?;
        compute(threads, || apply_fio(&spec, &fields[0]))?
    } else {
        let mut spec = valid(MultilinearSpec::new(a, valid(cfg.phases(arity))?, grid))?;
        if block.acknowledge_truncation {
            spec = spec.acknowledging_truncation();
        }
        compute(threads, || apply_multilinear(&spec, &fields, cfg.multilinear_mode()))?
    };
    let file = File::create(output).map_err(|e| CliError::io(format!("{}: {e}", output.display())))?;
    let mut w = BufWriter::new(file);
    write_csv(&result, &mut w).map_err(CliError::compute)?;
    w.flush().map_err(|e| CliError::io(e.to_string()))?;
    write_meta(output, "apply", threads)?;
    let summary = json!({
        "output": output.display().to_string(),
        "points": result.len(),
        "l2_norm": lp_norm(&result, 2.0).map_err(CliError::compute)?,
    });
    emit(&summary, None, "apply", threads)
}

pub fn kernel(path: &Path, output: Option<PathBuf>) -> CliResult<()> {
    let cfg = load_config(path)?;
    let threads = thread_count(Some(&cfg))?;
    let phase = valid(cfg.phase())?;
    let block = require(&cfg.kernel, "kernel")?;
    let dim = phase.dim();
    if block.x.len() != dim {
        return Err(CliError::config(format!("kernel.x must have {dim} entries"), Some("kernel.x".into())));
    }
    if !(block.support > 0.0) {
        return Err(CliError::config("kernel.support must be positive", Some("kernel.support".into())));
    }
    let reduced = valid(ReducedPhase::new(phase, block.center.clone()))?;
    let report = compute(threads, || {
        low_frequency_kernel(
            dim,
            |xi: &[f64]| reduced.eval(&block.x, xi),
            |xi: &[f64]| radial_bump(xi, block.support),
            block.support,
            &block.options,
        )
    })?;
    emit(&report, output_path(output, &cfg), "kernel", threads)
}

pub fn periodize(path: &Path, output: Option<PathBuf>) -> CliResult<()> {
    let cfg = load_config(path)?;
    let threads = thread_count(Some(&cfg))?;
    let grid = valid(cfg.grid())?;
    let a = valid(cfg.amplitude(1))?;
    let block = cfg.periodize.clone().unwrap_or_default();
    let phase = if block.verify { Some(valid(cfg.phase())?) } else { None };
    let (summary, error) = compute(threads, || {
        let result = periodize_amplitude(&a, &grid, &block.options)?;
        let error = match &phase {
            Some(phase) => {
                let f = SampledField::from_fn(grid, |x| {
                    Complex64::new((-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
                });
                let direct = apply_fio(&OperatorSpec::new(a.clone(), phase.clone(), grid).acknowledging_truncation(), &f)?;
                Some(periodized_apply(&result, phase, &f)?.relative_l2_error(&direct)?)
            }
            None => None,
        };
        Ok((result.summary(), error))
    })?;
    let report = json!({ "summary": summary, "operator_error": error });
    emit(&report, output_path(output, &cfg), "periodize", threads)
}

pub fn nonstat(path: &Path, output: Option<PathBuf>) -> CliResult<()> {
    let cfg = load_config(path)?;
    let threads = thread_count(Some(&cfg))?;
    let block = require(&cfg.nonstat, "nonstat")?;
    let phase = match &block.phase {
        NonstatPhase::Linear { direction } => frequency_linear_phase(direction.clone()),
        NonstatPhase::Quadratic => {
            let dim = match &block.window {
                Window::Bump { center, .. } => center.len(),
                Window::Annulus { .. } => valid(cfg.grid())?.dim(),
            };
            frequency_quadratic_phase(dim)
        }
        NonstatPhase::Configured => valid(cfg.phase())?,
    };
    valid(block.window.validate(phase.dim()))?;
    let report = compute(threads, || verify_nonstationary_decay(&block.window, &phase, &block.options))?;
    emit(&report, output_path(output, &cfg), "nonstat", threads)
}

pub fn thresholds(args: &ThresholdArgs) -> CliResult<()> {
    let inputs = ScenarioInputs {
        n: args.n,
        rho: args.rho,
        rho1: args.rho1,
        rho2: args.rho2,
        delta: args.delta,
        p: args.p,
        q: args.q,
        q1: args.q1,
        q2: args.q2,
        r: args.r,
        qs: args.qs.clone(),
        m: args.m,
        m1: args.m1,
        m2: args.m2,
        ms: args.ms.clone(),
    };
    let report = valid(multilinear_admissibility(&args.scenario, &inputs))?;
    emit(&report, args.output.clone(), "thresholds", None)
}

pub fn sweep(path: &Path, output: Option<PathBuf>, csv: Option<PathBuf>) -> CliResult<()> {
    let cfg = load_config(path)?;
    let threads = thread_count(Some(&cfg))?;
    let grid = valid(cfg.grid())?;
    let a = valid(cfg.amplitude(1))?;
    let phase = valid(cfg.phase())?;
    let settings = valid(cfg.sweep_settings())?;
    valid(settings.validate(&grid))?;
    valid(predicted_slope(&a))?;
    let record = compute(threads, || dyadic_norm_sweep(&a, &phase, grid, &settings))?;
    let report = valid(sweep_report(&a, &grid, &record))?;
    if let Some(csv) = csv {
        std::fs::write(&csv, record.to_csv()).map_err(|e| CliError::io(format!("{}: {e}", csv.display())))?;
    }
    emit(&report, output_path(output, &cfg), "sweep", threads)
}

pub fn experiment(path: &Path, output: Option<PathBuf>) -> CliResult<()> {
    let cfg = load_config(path)?;
    let threads = thread_count(Some(&cfg))?;
    let exp = valid(cfg.experiment_config())?;
    let report = compute(threads, || boundedness_experiment(&exp))?;
    emit(&report, output_path(output, &cfg), "experiment", threads)
}
