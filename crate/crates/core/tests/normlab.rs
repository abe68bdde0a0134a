use std::f64::consts::PI;

use fiolab_core::bounds::Exponent;
use fiolab_core::config::ExperimentConfig;
use fiolab_core::normlab::{boundedness_experiment, dyadic_norm_sweep, estimate_operator_norm, SweepSettings};
use fiolab_core::numgrid::{make_grid, UniformGrid};
use fiolab_core::oscint::OperatorSpec;
use fiolab_core::symbols::builtins::{jb_power, linear_phase, one, radial_bump, spatial_cutoff, wave_phase};
use fiolab_core::symbols::{AmplitudeDescriptor, ClassTag};
use fiolab_core::Complex64;

fn e(p: f64) -> Exponent {
    Exponent::new(p).unwrap()
}

fn cutoff_times_bump(radius: f64) -> AmplitudeDescriptor {
    AmplitudeDescriptor::from_fn(1, 1, ClassTag::Hormander { m: 0.0, rho: 1.0, delta: 0.0 }, move |x, xi| {
        Ok(Complex64::new(spatial_cutoff(x) * radial_bump(xi, radius), 0.0))
    })
    .with_support_radius(radius)
}

/// Largest singular value of an explicit square matrix, by power iteration
/// on `M*M` written out entry by entry.
fn dense_spectral_norm(m: &[Vec<Complex64>]) -> f64 {
    let n = m.len();
    let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + (i % 7) as f64, (i % 3) as f64)).collect();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let mv: Vec<Complex64> = m.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let w: Vec<Complex64> = (0..n).map(|j| (0..n).map(|i| m[i][j].conj() * mv[i]).sum()).collect();
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = w.into_iter().map(|z| z / norm).collect();
        if (norm - lambda).abs() < 1e-13 * norm {
            lambda = norm;
            break;
        }
        lambda = norm;
    }
    lambda.sqrt()
}

/// The operator `f ↦ ψ(x) Σ_ξ η(ξ) e^{ixξ} f̂(ξ) Δξ/2π` with the Riemann-sum
/// transform `f̂(ξ) = h Σ_x f(x) e^{−ixξ}`, as an explicit matrix.
fn cutoff_bump_matrix(g: &UniformGrid, radius: f64) -> Vec<Vec<Complex64>> {
    let n = g.points_per_dim();
    let scale = g.spacing() * g.freq_spacing() / (2.0 * PI);
    (0..n)
        .map(|l| {
            let xl = g.coordinate(l);
            (0..n)
                .map(|i| {
                    let xi_pt = g.coordinate(i);
                    let s: Complex64 = (0..n)
                        .map(|k| {
                            let xi = g.frequency(k);
                            Complex64::from_polar(radial_bump(&[xi], radius), (xl - xi_pt) * xi)
                        })
                        .sum();
                    s * spatial_cutoff(&[xl]) * scale
                })
                .collect()
        })
        .collect()
}

#[test]
fn identity_has_unit_norm() {
    let g = make_grid(1, 128, 8.0).unwrap();
    let spec = OperatorSpec::new(one(1), linear_phase(1), g).acknowledging_truncation();
    for q in [e(2.0), e(1.5), e(4.0), Exponent::INFINITY] {
        let v = estimate_operator_norm(&spec, q, q, 4, 7).unwrap();
        assert!((v - 1.0).abs() <= 0.02, "q = {q}: {v}");
    }
}

#[test]
fn power_iteration_matches_dense_matrix() {
    let g = make_grid(1, 128, 8.0).unwrap();
    let radius = 6.0;
    let spec = OperatorSpec::new(cutoff_times_bump(radius), linear_phase(1), g);
    let estimate = estimate_operator_norm(&spec, e(2.0), e(2.0), 0, 3).unwrap();
    let oracle = dense_spectral_norm(&cutoff_bump_matrix(&g, radius));
    assert!(oracle > 0.5 && oracle <= 1.0 + 1e-9, "{oracle}");
    assert!((estimate / oracle - 1.0).abs() <= 0.03, "{estimate} vs {oracle}");
}

#[test]
fn larger_banks_never_lower_the_estimate() {
    let g = make_grid(1, 128, 8.0).unwrap();
    let spec = OperatorSpec::new(cutoff_times_bump(10.0), wave_phase(1).unwrap(), g);
    let mut last = 0.0;
    for bank in [0, 2, 5, 9] {
        let v = estimate_operator_norm(&spec, e(2.0), e(4.0), bank, 11).unwrap();
        assert!(v >= last, "bank {bank}: {v} < {last}");
        last = v;
    }
}

fn small_sweep(seed: u64) -> SweepSettings {
    SweepSettings {
        levels: vec![1, 2, 3, 4],
        seed,
        ..SweepSettings::default()
    }
}

#[test]
fn bracket_multiplier_scales_like_its_order() {
    let g = make_grid(1, 256, 8.0).unwrap();
    let rec = dyadic_norm_sweep(&jb_power(1, -1.0).unwrap(), &linear_phase(1), g, &small_sweep(1)).unwrap();
    assert!(rec.per_level_norm.iter().all(|&v| v > 0.0));
    assert!((rec.fitted_slope + 1.0).abs() <= 0.1, "{}", rec.fitted_slope);
    assert!(rec.within_prediction);
}

#[test]
fn scaling_the_amplitude_scales_every_norm() {
    let g = make_grid(1, 256, 8.0).unwrap();
    let a = jb_power(1, -0.5).unwrap();
    let c = Complex64::new(-1.5, 2.0);
    let scaled = AmplitudeDescriptor::from_fn(1, 1, a.class.clone(), {
        let a = a.clone();
        move |x, xi| Ok(c * a.eval(x, xi)?)
    });
    let phase = wave_phase(1).unwrap();
    for settings in [small_sweep(5), SweepSettings { r: e(4.0), ..small_sweep(5) }] {
        let base = dyadic_norm_sweep(&a, &phase, g, &settings).unwrap();
        let other = dyadic_norm_sweep(&scaled, &phase, g, &settings).unwrap();
        for (x, y) in base.per_level_norm.iter().zip(&other.per_level_norm) {
            assert!((y / x - c.norm()).abs() <= 1e-9 * c.norm());
        }
        assert!((base.fitted_slope - other.fitted_slope).abs() <= 1e-9);
    }
}

fn experiment(json: &str) -> ExperimentConfig {
    serde_json::from_str(json).unwrap()
}

#[test]
fn rough_symbol_experiment_reports_the_psido_threshold() {
    let cfg = experiment(
        r#"{"grid": {"dim": 1, "points": 256, "halfwidth": 4},
            "amplitude": "rough_log", "phase": "linear_phase",
            "experiment": {"scenario": "psido", "q": 2, "levels": [1, 2, 3, 4]},
            "seed": 3}"#,
    );
    let rep = boundedness_experiment(&cfg).unwrap();
    assert_eq!(rep.thresholds.value("psido_threshold"), Some(-0.5));
    assert_eq!(rep.r, e(1.0));
    assert!(rep.sweep.per_level_norm.iter().all(|v| v.is_finite() && *v > 0.0));
    assert!(rep.partition.as_ref().is_some_and(|p| p.lp_defect <= 1e-10));
    assert!(!rep.verdict.is_empty());
}

#[test]
fn unit_propagator_has_flat_scaling() {
    let cfg = experiment(
        r#"{"grid": {"dim": 1, "points": 256, "halfwidth": 4},
            "amplitude": "one", "phase": "wave_phase",
            "experiment": {"q": 2, "r": 2, "levels": [1, 2, 3, 4, 5]}}"#,
    );
    let rep = boundedness_experiment(&cfg).unwrap();
    assert!(rep.sweep.fitted_slope.abs() <= 0.05, "{}", rep.sweep.fitted_slope);
    assert!(rep.consistent);
    assert!(rep.verdict.starts_with("consistent with"));
    assert_eq!(rep.phase_check.as_ref().map(|p| p.snd_constant), Some(1.0));
}

#[test]
fn bad_scenario_is_tagged_with_its_stage() {
    let cfg = experiment(
        r#"{"grid": {"dim": 1, "points": 64, "halfwidth": 4},
            "amplitude": "one", "phase": "linear_phase",
            "experiment": {"scenario": "nonsense"}}"#,
    );
    let err = boundedness_experiment(&cfg).unwrap_err();
    assert!(err.to_string().starts_with("bounds: unknown scenario"), "{err}");
}
