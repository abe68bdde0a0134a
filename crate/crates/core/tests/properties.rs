use std::f64::consts::PI;

use fiolab_core::bounds::{m_bar, Exponent};
use fiolab_core::dyadic::{build_cone_decomposition, build_lp_partition, partition_defects, ConeNet};
use fiolab_core::multilinear::{apply_multilinear, frequency_split, MultilinearMode, MultilinearSpec};
use fiolab_core::normlab::random_band_limited;
use fiolab_core::numgrid::{fourier_transform, lorentz_norm, lp_norm, make_grid, Direction, SampledField};
use fiolab_core::oscint::{apply_fio, OperatorSpec, QuadratureMode};
use fiolab_core::symbols::builtins::{jb_power, linear_phase, radial_bump, spatial_cutoff, wave_phase};
use fiolab_core::symbols::{AmplitudeDescriptor, ClassTag};
use fiolab_core::Complex64;
use proptest::prelude::*;

fn bracket(xi: &[f64]) -> f64 {
    (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

fn combine(a: &SampledField, ca: Complex64, b: &SampledField, cb: Complex64) -> SampledField {
    let values = a.values.iter().zip(&b.values).map(|(u, v)| ca * u + cb * v).collect();
    SampledField::new(a.grid, values, a.domain).unwrap()
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

/// A smooth rough-class symbol whose shape is set by `(c, w)`.
fn drawn_amplitude(c: f64, w: f64) -> AmplitudeDescriptor {
    AmplitudeDescriptor::from_fn(1, 1, ClassTag::Hormander { m: -1.0, rho: 1.0, delta: 0.0 }, move |x, xi| {
        let envelope = spatial_cutoff(&[x[0] / 3.0]) * (1.0 + c * x[0]);
        Ok(Complex64::from_polar(envelope / bracket(xi), w * xi[0] / bracket(xi)))
    })
}

fn product_class(arity: usize) -> ClassTag {
    ClassTag::ProductRough {
        p: Exponent::INFINITY,
        m: vec![-1.0; arity],
        rho: vec![1.0; arity],
    }
}

/// A coupled bilinear amplitude on `R^dim` with drawn coupling `c` and tilt `t`.
fn drawn_bilinear(dim: usize, c: f64, t: f64) -> AmplitudeDescriptor {
    AmplitudeDescriptor::from_fn(dim, 2, product_class(2), move |x, xi| {
        let (u, v) = xi.split_at(dim);
        let b = bracket(u) * bracket(v);
        let dot: f64 = u.iter().zip(v).map(|(p, q)| p * q).sum();
        let scaled: Vec<f64> = x.iter().map(|v| v / 4.0).collect();
        Ok(Complex64::from_polar(spatial_cutoff(&scaled) * (1.0 + t * x[0]) / b, c * dot / b))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn plancherel(seed in any::<u64>(), band in 1.0..20.0f64, dim in 1usize..=2) {
        let g = make_grid(dim, if dim == 1 { 256 } else { 32 }, 4.0).unwrap();
        let f = random_band_limited(g, band, seed, 0, 0).unwrap();
        let hat = fourier_transform(&f, Direction::Forward).unwrap();
        let space: f64 = f.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.spacing().powi(dim as i32);
        let freq: f64 = hat.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
            * (g.freq_spacing() / (2.0 * PI)).powi(dim as i32);
        prop_assert!((space - freq).abs() <= 1e-10 * space);
    }

    #[test]
    fn lorentz_diagonal_is_lebesgue(seed in any::<u64>(), r in 1.0..4.0f64) {
        let g = make_grid(1, 128, 4.0).unwrap();
        let f = random_band_limited(g, 6.0, seed, 1, 0).unwrap();
        let (lorentz, lebesgue) = (lorentz_norm(&f, r, r).unwrap(), lp_norm(&f, r).unwrap());
        prop_assert!((lorentz / lebesgue - 1.0).abs() <= 0.02);
    }

    #[test]
    fn lorentz_norm_is_absolutely_homogeneous(seed in any::<u64>(), c in complex(), r in 0.5..4.0f64, q in 0.5..8.0f64) {
        prop_assume!(c.norm() > 1e-3);
        let g = make_grid(1, 64, 4.0).unwrap();
        let f = random_band_limited(g, 8.0, seed, 2, 0).unwrap();
        let base = lorentz_norm(&f, r, q).unwrap();
        let scaled = lorentz_norm(&f.scaled(c), r, q).unwrap();
        prop_assert!((scaled - c.norm() * base).abs() <= 1e-12 * scaled);
    }

    #[test]
    fn phases_are_homogeneous(x in prop::array::uniform2(-3.0..3.0f64), xi in prop::array::uniform2(-20.0..20.0f64), lambda in 1.0..8.0f64) {
        let norm = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        prop_assume!(norm > 1e-6);
        let scaled = [lambda * xi[0], lambda * xi[1]];
        for phase in [linear_phase(2), wave_phase(2).unwrap()] {
            let defect = (phase.eval(&x, &scaled).unwrap() - lambda * phase.eval(&x, &xi).unwrap()).abs();
            prop_assert!(defect <= 1e-9 * lambda * norm);
        }
    }

    #[test]
    fn partitions_of_unity(radius in 0.0..32.0f64, angle in -PI..PI) {
        let xi = [radius * angle.cos(), radius * angle.sin()];
        let lp = build_lp_partition(5).unwrap();
        let nets: Vec<ConeNet> = (1..=5).map(|j| build_cone_decomposition(j, 2).unwrap()).collect();
        let (plain, combined) = partition_defects(&lp, &nets, &[xi.to_vec()]);
        prop_assert!(plain <= 1e-10 && combined <= 1e-10);
    }

    #[test]
    fn cone_cutoffs_are_scale_invariant(j in 1u32..=7, radius in 0.1..50.0f64, angle in -PI..PI, lambda in 1.0..8.0f64) {
        let net = build_cone_decomposition(j, 2).unwrap();
        let xi = [radius * angle.cos(), radius * angle.sin()];
        for nu in 0..net.len() {
            let (a, b) = (net.cutoff(nu, &xi), net.cutoff(nu, &[lambda * xi[0], lambda * xi[1]]));
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn operators_are_linear(seed in any::<u64>(), alpha in complex(), beta in complex(), c in -0.5..0.5f64, w in -1.0..1.0f64) {
        let g = make_grid(1, 64, 4.0).unwrap();
        let (f, h) = (random_band_limited(g, 5.0, seed, 0, 0).unwrap(), random_band_limited(g, 5.0, seed, 0, 1).unwrap());
        let spec = OperatorSpec::new(drawn_amplitude(c, w), wave_phase(1).unwrap(), g).acknowledging_truncation();
        let lhs = apply_fio(&spec, &combine(&f, alpha, &h, beta)).unwrap();
        let rhs = combine(&apply_fio(&spec, &f).unwrap(), alpha, &apply_fio(&spec, &h).unwrap(), beta);
        prop_assert!(lhs.relative_l2_error(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn multipliers_commute_with_translations(seed in any::<u64>(), shift in -31isize..32, m in -2.0..0.0f64) {
        let g = make_grid(1, 64, 4.0).unwrap();
        let f = random_band_limited(g, 6.0, seed, 0, 0).unwrap();
        let spec = OperatorSpec::new(jb_power(1, m).unwrap(), linear_phase(1), g).acknowledging_truncation();
        let moved_first = apply_fio(&spec, &f.shifted([shift, 0])).unwrap();
        let moved_after = apply_fio(&spec, &f).unwrap().shifted([shift, 0]);
        prop_assert!(moved_first.relative_l2_error(&moved_after).unwrap() <= 1e-12);
    }

    #[test]
    fn split_pieces_sum_to_the_amplitude(c in -1.0..1.0f64, x in -2.0..2.0f64, u in -40.0..40.0f64, v in -40.0..40.0f64) {
        let a = drawn_bilinear(1, c, 0.1);
        let (first, second) = frequency_split(&a).unwrap();
        let xi = [u, v];
        let whole = a.eval(&[x], &xi).unwrap();
        let parts = first.eval(&[x], &xi).unwrap() + second.eval(&[x], &xi).unwrap();
        prop_assert!((whole - parts).norm() <= 1e-12 * (1.0 + whole.norm()));
    }
}

fn two() -> Exponent {
    Exponent::new(2.0).unwrap()
}

/// The first two closed forms of the order threshold, transcribed for the oracle.
fn low_branch(n: f64, rho: f64, a: f64, b: f64) -> f64 {
    let inv_min = a.max(b);
    n * (rho - 1.0) * inv_min - (n - 1.0) / 2.0 * (a + inv_min)
}

fn intermediate_branch(n: f64, rho: f64, a: f64, b: f64) -> f64 {
    n * (rho - 1.0) * b - (n - 1.0) / (1.0 - 2.0 * a) * (b - 0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn order_branches_meet_at_the_conjugate(n in 1usize..=4, rho in 0.0..=1.0f64, p in 2.05..50.0f64) {
        let pe = Exponent::new(p).unwrap();
        let q = pe.conjugate();
        let (nf, a, b) = (n as f64, pe.recip(), q.recip());
        let (v, _) = m_bar(n, rho, pe, q).unwrap();
        prop_assert!((low_branch(nf, rho, a, b) - intermediate_branch(nf, rho, a, b)).abs() <= 1e-12);
        prop_assert!((v - low_branch(nf, rho, a, b)).abs() <= 1e-12);
    }

    #[test]
    fn order_threshold_grows_with_rho(n in 1usize..=4, r1 in 0.0..=1.0f64, r2 in 0.0..=1.0f64, a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let (p, q) = (Exponent::from_recip(a).unwrap(), Exponent::from_recip(b).unwrap());
        prop_assume!((a - 0.5).abs() > 1e-6);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let (x, _) = m_bar(n, lo, p, q).unwrap();
        let (y, _) = m_bar(n, hi, p, q).unwrap();
        prop_assert!(x <= y + 1e-12);
    }

    #[test]
    fn endpoint_sum_matches_closed_form(n in 1usize..=4, a in 0.0..=1.0f64) {
        let p = Exponent::from_recip(a).unwrap();
        let (x, _) = m_bar(n, 1.0, Exponent::INFINITY, Exponent::INFINITY).unwrap();
        let (y, _) = m_bar(n, 1.0, Exponent::INFINITY, p).unwrap();
        let want = -((n - 1) as f64) * (0.5 + (a - 0.5).abs());
        prop_assert!((x + y - want).abs() <= 1e-12);
    }

    #[test]
    fn calculus_case_is_zero(n in 1usize..=6) {
        prop_assert_eq!(m_bar(n, 1.0, two(), two()).unwrap().0, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn fast_mode_agrees_with_quadrature(seed in any::<u64>(), m in -2.0..0.0f64, band in 2.0..12.0f64) {
        let g = make_grid(1, 128, 8.0).unwrap();
        let f = random_band_limited(g, band, seed, 0, 0).unwrap();
        let a = jb_power(1, m).unwrap();
        let direct = apply_fio(&OperatorSpec::new(a.clone(), linear_phase(1), g).acknowledging_truncation(), &f).unwrap();
        let fast = OperatorSpec::new(a, linear_phase(1), g)
            .with_mode(QuadratureMode::FastLinearPhase)
            .acknowledging_truncation();
        prop_assert!(apply_fio(&fast, &f).unwrap().relative_l2_error(&direct).unwrap() <= 1e-8);
    }

    #[test]
    fn bilinear_operators_are_linear_in_each_slot(seed in any::<u64>(), alpha in complex(), beta in complex(), slot in 0usize..2) {
        let g = make_grid(1, 64, 8.0).unwrap();
        let spec = MultilinearSpec::new(drawn_bilinear(1, 0.7, 0.2), vec![linear_phase(1), wave_phase(1).unwrap()], g).unwrap();
        let draw = |s: u32| random_band_limited(g, 3.0, seed, 0, s).unwrap();
        let (f, h, other) = (draw(0), draw(1), draw(2));
        let apply = |x: &SampledField| {
            let inputs = if slot == 0 { [x.clone(), other.clone()] } else { [other.clone(), x.clone()] };
            apply_multilinear(&spec, &inputs, MultilinearMode::Direct).unwrap()
        };
        let lhs = apply(&combine(&f, alpha, &h, beta));
        let rhs = combine(&apply(&f), alpha, &apply(&h), beta);
        prop_assert!(lhs.relative_l2_error(&rhs).unwrap() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn bilinear_modes_agree_in_one_dimension(seed in any::<u64>(), c in -1.0..1.0f64, t in -0.3..0.3f64) {
        let g = make_grid(1, 256, 16.0).unwrap();
        let spec = MultilinearSpec::new(drawn_bilinear(1, c, t), vec![linear_phase(1), wave_phase(1).unwrap()], g).unwrap();
        let inputs = [random_band_limited(g, 4.0, seed, 0, 0).unwrap(), random_band_limited(g, 4.0, seed, 0, 1).unwrap()];
        let direct = apply_multilinear(&spec, &inputs, MultilinearMode::Direct).unwrap();
        let iterated = apply_multilinear(&spec, &inputs, MultilinearMode::Iterated).unwrap();
        prop_assert!(iterated.relative_l2_error(&direct).unwrap() <= 1e-6);
    }

    #[test]
    fn bilinear_modes_agree_in_two_dimensions(seed in any::<u64>(), c in -1.0..1.0f64, t in -0.3..0.3f64) {
        let g = make_grid(2, 64, 8.0).unwrap();
        let spec = MultilinearSpec::new(drawn_bilinear(2, c, t), vec![linear_phase(2), wave_phase(2).unwrap()], g).unwrap();
        let inputs = [random_band_limited(g, 1.2, seed, 0, 0).unwrap(), random_band_limited(g, 1.2, seed, 0, 1).unwrap()];
        let direct = apply_multilinear(&spec, &inputs, MultilinearMode::Direct).unwrap();
        let iterated = apply_multilinear(&spec, &inputs, MultilinearMode::Iterated).unwrap();
        prop_assert!(iterated.relative_l2_error(&direct).unwrap() <= 1e-6);
    }

    #[test]
    fn periodic_envelopes_do_not_break_radial_bumps(r in 1.0..10.0f64, x in -5.0..5.0f64) {
        // A bump is supported in its ball and maximal at the origin.
        prop_assert!(radial_bump(&[x], r) <= radial_bump(&[0.0], r));
        prop_assert_eq!(radial_bump(&[r + 1e-9], r), 0.0);
    }
}
