use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use fiolab_core::numgrid::{make_grid, read_csv, write_csv, Domain, SampledField};
use fiolab_core::Complex64;
use serde_json::Value;

fn fiolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiolab"))
        .args(args)
        .env_remove("FIOLAB_THREADS")
        .output()
        .expect("binary runs")
}

/// A fresh scratch directory per test.
fn scratch(name: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "fiolab-cli-{}-{}-{name}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&out.stderr)))
}

fn gaussian_csv(dir: &Path, name: &str, points: usize, center: f64) -> String {
    let g = make_grid(1, points, 4.0).unwrap();
    let f = SampledField::from_fn(g, |x| Complex64::new((-(x[0] - center).powi(2)).exp(), 0.0));
    let mut text = Vec::new();
    write_csv(&f, &mut text).unwrap();
    write(dir, name, std::str::from_utf8(&text).unwrap())
}

#[test]
fn thresholds_example() {
    let out = fiolab(&[
        "thresholds", "--scenario", "bilinear_Linfty", "--n", "2", "--rho", "1", "--q1", "2", "--q2", "2", "--m", "-0.1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["values"]["threshold"].as_f64(), Some(0.0));
    assert_eq!(report["verdicts"]["bilinear"]["admissible"], Value::Bool(true));
}

#[test]
fn unknown_command_exits_with_two() {
    let out = fiolab(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert!(err["message"].as_str().unwrap().contains("unknown command"));
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn unknown_scenario_is_a_validation_error() {
    let out = fiolab(&["thresholds", "--scenario", "nope", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("unknown scenario"));
}

#[test]
fn apply_writes_the_output_field() {
    let dir = scratch("apply");
    let input = gaussian_csv(&dir, "f.csv", 64, 0.0);
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{"grid": {"dim": 1, "points": 64, "halfwidth": 4},
            "amplitude": "jb_power(-2)", "phase": "wave_phase"}"#,
    );
    let output = dir.join("g.csv");
    let out = fiolab(&["apply", "--config", &cfg, "--input", &input, "--output", output.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let g = make_grid(1, 64, 4.0).unwrap();
    let field = read_csv(g, Domain::Space, fs::File::open(&output).unwrap()).unwrap();
    assert_eq!(field.len(), 64);
    assert!(dir.join("g.meta.json").exists());
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["l2_norm"].as_f64().unwrap() > 0.0);
}

#[test]
fn bilinear_apply_uses_the_multilinear_block() {
    let dir = scratch("bilinear");
    let f = gaussian_csv(&dir, "f.csv", 64, 0.3);
    let h = gaussian_csv(&dir, "h.csv", 64, -0.4);
    let mut outputs = Vec::new();
    for mode in ["direct", "iterated"] {
        let cfg = write(
            &dir,
            &format!("{mode}.json"),
            &format!(
                r#"{{"grid": {{"dim": 1, "points": 64, "halfwidth": 4}},
                    "amplitude": "coupled_bilinear", "phase": "linear_phase",
                    "multilinear": {{"operands": 2, "phases": ["linear_phase", "wave_phase"], "mode": "{mode}"}}}}"#
            ),
        );
        let output = dir.join(format!("{mode}.csv"));
        let out = fiolab(&["apply", "--config", &cfg, "--input", &f, "--input", &h, "--output", output.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let g = make_grid(1, 64, 4.0).unwrap();
        outputs.push(read_csv(g, Domain::Space, fs::File::open(&output).unwrap()).unwrap());
    }
    assert!(outputs[0].relative_l2_error(&outputs[1]).unwrap() <= 1e-6);

    let cfg = write(
        &dir,
        "one_input.json",
        r#"{"grid": {"dim": 1, "points": 64, "halfwidth": 4}, "amplitude": "coupled_bilinear",
            "phase": "linear_phase", "multilinear": {"operands": 2}}"#,
    );
    let out = fiolab(&["apply", "--config", &cfg, "--input", &f, "--output", dir.join("x.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.join("x.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch("idempotent");
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{"grid": {"dim": 1, "points": 256, "halfwidth": 8},
            "amplitude": "jb_power(-1)", "phase": "linear_phase",
            "sweep": {"q": 2, "r": 4, "levels": [1, 2, 3, 4], "bank_size": 4},
            "decompose": {"j_max": 3, "samples": 500},
            "seed": 42}"#,
    );
    for command in ["sweep", "decompose"] {
        let mut reports = Vec::new();
        for (run, threads) in [(0, "1"), (1, "3")] {
            let path = dir.join(format!("{command}-{run}.json"));
            let out = Command::new(env!("CARGO_BIN_EXE_fiolab"))
                .args([command, "--config", &cfg, "--output", path.to_str().unwrap()])
                .env("FIOLAB_THREADS", threads)
                .output()
                .unwrap();
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            assert!(path.with_extension("meta.json").exists());
            reports.push(fs::read(&path).unwrap());
        }
        assert_eq!(reports[0], reports[1], "{command}");
    }
}

#[test]
fn validation_failures_leave_no_artifacts() {
    let dir = scratch("invalid");
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{"grid": {"dim": 1, "points": 100, "halfwidth": 4},
            "amplitude": "jb_power(-1)", "phase": "linear_phase",
            "sweep": {"levels": [1, 2, 3, 4]}}"#,
    );
    let report = dir.join("report.json");
    let csv = dir.join("levels.csv");
    let out = fiolab(&["sweep", "--config", &cfg, "--output", report.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("power of two"));
    let left: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left, vec![std::ffi::OsString::from("cfg.json")]);
}

#[test]
fn schema_violations_name_the_field() {
    let dir = scratch("schema");
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{"grid": {"dim": 1, "pointz": 64, "halfwidth": 4}, "amplitude": "one", "phase": "linear_phase"}"#,
    );
    let out = fiolab(&["check-class", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["kind"], "config");
    assert!(err["field"].as_str().unwrap().starts_with("grid"), "{err}");
}

#[test]
fn compute_failures_exit_with_one() {
    let dir = scratch("compute");
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{"nonstat": {"window": {"kind": "bump", "center": [0.0, 0.0], "radius": 0.5},
                        "phase": {"kind": "quadratic"}}}"#,
    );
    let report = dir.join("out.json");
    let out = fiolab(&["nonstat", "--config", &cfg, "--output", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("stationary point detected"));
    assert!(!report.exists());
}
