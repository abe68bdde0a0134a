use std::f64::consts::PI;

use fiolab_core::dyadic::{
    ball_samples, build_cone_decomposition, build_lp_partition, decomposition_report, make_piece_amplitude,
    partition_defects, reduce_phase, reduce_phase_low_frequency, ConeNet, ReducedPhase,
};
use fiolab_core::numgrid::make_grid;
use fiolab_core::symbols::builtins::{linear_phase, one, wave_phase};
use fiolab_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn lp_partition_sums_to_one() {
    let lp = build_lp_partition(6).unwrap();
    let samples = ball_samples(2, 64.0, 10_000, 1);
    let worst = samples.iter().map(|xi| (lp.partial_sum(xi) - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn lp_pieces_live_on_annuli() {
    let lp = build_lp_partition(6).unwrap();
    assert_eq!(lp.piece(3, &[1.0, 0.0]), 0.0);
    assert_eq!(lp.piece(3, &[0.0, 3.9]), 0.0);
    assert_eq!(lp.piece(3, &[16.1, 0.0]), 0.0);
    assert_eq!(lp.psi0(&[2.01, 0.0]), 0.0);
    let reference = lp.piece(1, &[2.0, 0.0]);
    assert!(reference > 0.0);
    for j in 1..=6 {
        let v = lp.piece(j, &[2f64.powi(j as i32), 0.0]);
        assert!((v - reference).abs() < 1e-15, "level {j}");
    }
}

#[test]
fn level_four_net_geometry() {
    let net = build_cone_decomposition(4, 2).unwrap();
    assert!((12..=50).contains(&net.len()));
    // Equal spacing with Δθ ≥ 1/4 leaves room for floor(8π) = 25 centers.
    assert_eq!(net.len(), 25);
    assert!(net.min_separation() >= 0.25);
    assert!(net.covering_radius(1000) < 0.25);
}

fn random_nonzero(rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let p = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
        if p[0] != 0.0 || p[1] != 0.0 {
            return p;
        }
    }
}

#[test]
fn cone_cutoffs_partition_and_are_homogeneous() {
    let net = build_cone_decomposition(4, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let xi = random_nonzero(&mut rng);
        let sum: f64 = (0..net.len()).map(|nu| net.cutoff(nu, &xi)).sum();
        assert!((sum - 1.0).abs() <= 1e-10);
        for lambda in [2.0, 10.0] {
            let scaled = [lambda * xi[0], lambda * xi[1]];
            // Scaling by 2 is exact in floating point; by 10 it rounds λξ.
            for nu in 0..net.len() {
                let (a, b) = (net.cutoff(nu, &scaled), net.cutoff(nu, &xi));
                if lambda == 2.0 {
                    assert_eq!(a, b);
                } else {
                    assert!((a - b).abs() <= 1e-14);
                }
            }
        }
    }
}

#[test]
fn cutoffs_vanish_outside_their_cones() {
    let net = build_cone_decomposition(5, 2).unwrap();
    let limit = 2.0 * 2f64.powf(-2.5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let t: f64 = rng.gen_range(-PI..PI);
        let u = [t.cos(), t.sin()];
        for (nu, c) in net.centers().iter().enumerate() {
            let dist = ((u[0] - c[0]).powi(2) + (u[1] - c[1]).powi(2)).sqrt();
            if dist > limit {
                assert_eq!(net.cutoff(nu, &u), 0.0);
            }
        }
    }
}

#[test]
fn separation_and_covering_at_every_level() {
    for j in 1..=8 {
        let net = build_cone_decomposition(j, 2).unwrap();
        let step = 2f64.powf(-(j as f64) / 2.0);
        assert!(net.min_separation() >= step, "level {j}");
        assert!(net.covering_radius(1000) < step, "level {j}");
    }
}

#[test]
fn one_dimensional_net_is_two_half_lines() {
    let net = build_cone_decomposition(3, 1).unwrap();
    assert_eq!(net.len(), 2);
    for xi in [-5.0, -0.1, 0.2, 7.0] {
        let s: f64 = (0..2).map(|nu| net.cutoff(nu, &[xi])).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }
}

#[test]
fn combined_partition_reconstructs_unity() {
    let j_max = 5;
    let lp = build_lp_partition(j_max).unwrap();
    let nets: Vec<ConeNet> = (1..=j_max).map(|j| build_cone_decomposition(j, 2).unwrap()).collect();
    let samples = ball_samples(2, 32.0, 10_000, 2);
    let (plain, combined) = partition_defects(&lp, &nets, &samples);
    assert!(plain <= 1e-10);
    assert!(combined <= 1e-10);
}

#[test]
fn cutoff_derivative_constants_are_level_uniform() {
    for j in [3, 4, 5, 6] {
        let lo = build_cone_decomposition(j, 2).unwrap().derivative_constants(64).unwrap();
        let hi = build_cone_decomposition(j + 2, 2).unwrap().derivative_constants(64).unwrap();
        for (order, a) in &lo.by_order {
            let b = hi.by_order[order];
            assert!(a.is_finite() && b.is_finite());
            let ratio = a.max(b) / a.min(b);
            assert!(ratio <= 2.0, "order {order} at levels {j},{}: {a} vs {b}", j + 2);
        }
        assert!(lo.directional.values().all(|v| v.is_finite()));
    }
}

#[test]
fn linear_phase_reduces_to_zero() {
    let net = build_cone_decomposition(3, 2).unwrap();
    let (reduced, est) = reduce_phase(&linear_phase(2), &net, 2, 1.0).unwrap();
    assert!(est.radial.values().chain(est.angular.values()).all(|&v| v == 0.0));
    assert_eq!(reduced.eval(&[0.3, -0.2], &[5.0, 7.0]).unwrap(), 0.0);
}

#[test]
fn wave_phase_reduction_is_level_stable() {
    let phase = wave_phase(2).unwrap();
    let mut angular = Vec::new();
    for j in [3, 4, 5] {
        let net = build_cone_decomposition(j, 2).unwrap();
        let (reduced, est) = reduce_phase(&phase, &net, 0, 1.0).unwrap();
        assert!(est.euler_defect <= 1e-9);
        // Center e₁ gives Φ(x, ξ) = |ξ| − ξ₁ for every x.
        let xi = [2f64.powi(j as i32), 1.5];
        let want = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt() - xi[0];
        assert!((reduced.eval(&[0.4, -0.1], &xi).unwrap() - want).abs() < 1e-12);
        angular.push(est.angular["2"]);
        assert!(est.radial.values().all(|v| v.is_finite()));
    }
    let (lo, hi) = angular.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo <= 2.0, "{angular:?}");
}

#[test]
fn low_frequency_caps_have_small_gradients() {
    let pieces = reduce_phase_low_frequency(&wave_phase(2).unwrap(), 8, 1.0).unwrap();
    assert_eq!(pieces.len(), 8);
    for piece in &pieces {
        assert!(piece.gradient_sup <= 2.0, "{}", piece.gradient_sup);
        let centre_grad = piece.reduced.eval(&[0.1, 0.2], &piece.zeta).unwrap();
        assert!(centre_grad.abs() < 1e-12);
    }
}

#[test]
fn euler_relation_on_center_rays() {
    let net = build_cone_decomposition(4, 2).unwrap();
    let phase = wave_phase(2).unwrap();
    for nu in [0, 7, 19] {
        let reduced = ReducedPhase::new(phase.clone(), net.centers()[nu].clone()).unwrap();
        for t in [0.5, 3.0, 40.0] {
            let xi: Vec<f64> = net.centers()[nu].iter().map(|c| c * t).collect();
            assert!(reduced.eval(&[0.7, -0.3], &xi).unwrap().abs() <= 1e-9 * t);
        }
    }
}

#[test]
fn piece_amplitudes() {
    let grid = make_grid(2, 512, 16.0).unwrap();
    let lp = build_lp_partition(5).unwrap();
    let net = build_cone_decomposition(4, 2).unwrap();
    let phase = wave_phase(2).unwrap();
    let a = one(2);
    let target = 2f64.powf(4.0 * 1.5);
    let pieces: Vec<_> = (0..net.len())
        .map(|nu| make_piece_amplitude(&a, &phase, &lp, &net, 4, nu, &grid).unwrap())
        .collect();
    for p in &pieces {
        let ratio = p.support_measure / target;
        assert!((0.25..=4.0).contains(&ratio), "ν = {}: {ratio}", p.nu);
    }
    // Outside the cone around center 0 the piece vanishes.
    let c = &net.centers()[0];
    let outside = [-16.0 * c[0], -16.0 * c[1]];
    assert_eq!(pieces[0].eval(&[0.0, 0.0], &outside).unwrap(), Complex64::new(0.0, 0.0));

    let x = [0.25, -0.5];
    for xi in [[12.0, 5.0], [-3.0, -15.0], [9.0, -9.0]] {
        let total: Complex64 = pieces
            .iter()
            .map(|p| p.eval(&x, &xi).unwrap() * Complex64::from_polar(1.0, -p.reduced.eval(&x, &xi).unwrap()))
            .sum();
        assert!((total - Complex64::new(lp.piece(4, &xi), 0.0)).norm() <= 1e-10);
    }
}

#[test]
fn report_collects_every_level() {
    let grid = make_grid(2, 128, 8.0).unwrap();
    let r = decomposition_report(&grid, 4, 2000, 3).unwrap();
    assert_eq!(r.levels.len(), 4);
    assert!(r.lp_defect <= 1e-10 && r.combined_defect <= 1e-10);
    for level in &r.levels {
        let step = 2f64.powf(-(level.j as f64) / 2.0);
        assert!(level.min_separation >= step && level.covering_radius < step);
    }
}
