use std::time::Instant;

use fiolab_core::bounds::Exponent;
use fiolab_core::multilinear::{
    apply_multilinear, coupled_bilinear_amplitude, freeze_argument, freeze_operand, frequency_split, unit_amplitude,
    MultilinearMode, MultilinearSpec,
};
use fiolab_core::numgrid::{fourier_transform, lp_norm, make_grid, Direction, SampledField, UniformGrid};
use fiolab_core::oscint::{apply_fio, apply_multiplier, OperatorSpec};
use fiolab_core::symbols::builtins::{linear_phase, radial_bump, rough_log, spatial_cutoff, wave_phase};
use fiolab_core::symbols::{estimate_seminorm, AmplitudeDescriptor, ClassTag, XiSampling};
use fiolab_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bump_at(g: UniformGrid, center: f64, width: f64) -> SampledField {
    SampledField::from_fn(g, |x| {
        let r2: f64 = x.iter().map(|v| (v - center) * (v - center)).sum();
        Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
    })
}

/// A translate of the inverse transform of a frequency bump of the given radius.
fn band_limited(g: UniformGrid, center: f64, radius: f64) -> SampledField {
    let hat = SampledField::from_freq_fn(g, |xi| {
        Complex64::from_polar(radial_bump(xi, radius), -center * xi.iter().sum::<f64>())
    });
    fourier_transform(&hat, Direction::Inverse).unwrap()
}

fn bracket(xi: &[f64]) -> f64 {
    (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

fn product_class(m: [f64; 2], rho: [f64; 2]) -> ClassTag {
    ClassTag::ProductRough {
        p: Exponent::INFINITY,
        m: m.to_vec(),
        rho: rho.to_vec(),
    }
}

fn pointwise(a: &SampledField, b: &SampledField) -> SampledField {
    SampledField::new(a.grid, a.values.iter().zip(&b.values).map(|(u, v)| u * v).collect(), a.domain).unwrap()
}

#[test]
fn separable_amplitude_factors_into_multipliers() {
    let g = make_grid(1, 128, 8.0).unwrap();
    let (f, h) = (bump_at(g, 0.5, 0.8), bump_at(g, -1.0, 1.2));
    let a = AmplitudeDescriptor::from_fn(1, 2, product_class([-1.0, 0.0], [1.0, 1.0]), |_, xi| {
        Ok(Complex64::new(radial_bump(&xi[1..], 6.0) / bracket(&xi[..1]), 0.0))
    })
    .with_support_radius(6.0);
    let spec = MultilinearSpec::new(a, vec![linear_phase(1); 2], g).unwrap();
    let left = apply_multiplier(&|xi: &[f64]| Complex64::new(1.0 / bracket(xi), 0.0), &f).unwrap();
    let right = apply_multiplier(&|xi: &[f64]| Complex64::new(radial_bump(xi, 6.0), 0.0), &h).unwrap();
    let expected = pointwise(&left, &right);
    for mode in [MultilinearMode::Direct, MultilinearMode::Iterated] {
        let out = apply_multilinear(&spec, &[f.clone(), h.clone()], mode).unwrap();
        assert!(out.relative_l2_error(&expected).unwrap() <= 1e-9, "{mode:?}");
    }
}

#[test]
fn unit_amplitude_multiplies_inputs() {
    let g = make_grid(1, 64, 8.0).unwrap();
    let (f, h) = (bump_at(g, 0.3, 1.0), bump_at(g, -0.2, 0.7));
    let spec = MultilinearSpec::new(unit_amplitude(1, 2), vec![linear_phase(1); 2], g)
        .unwrap()
        .acknowledging_truncation();
    let out = apply_multilinear(&spec, &[f.clone(), h.clone()], MultilinearMode::Direct).unwrap();
    assert!(out.relative_l2_error(&pointwise(&f, &h)).unwrap() <= 1e-10);
}

#[test]
fn coupled_amplitude_direct_matches_iterated() {
    let g = make_grid(1, 256, 16.0).unwrap();
    let f = SampledField::from_fn(g, |x| {
        Complex64::new((-(x[0] - 0.5).powi(2)).exp(), 0.3 * (-2.0 * x[0] * x[0]).exp())
    });
    let h = bump_at(g, -0.7, 1.0);
    let spec = MultilinearSpec::new(coupled_bilinear_amplitude(), vec![linear_phase(1); 2], g).unwrap();
    let start = Instant::now();
    let direct = apply_multilinear(&spec, &[f.clone(), h.clone()], MultilinearMode::Direct).unwrap();
    let iterated = apply_multilinear(&spec, &[f, h], MultilinearMode::Iterated).unwrap();
    assert!(iterated.relative_l2_error(&direct).unwrap() <= 1e-6);
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn two_dimensional_bilinear_modes_agree() {
    let g = make_grid(2, 32, 8.0).unwrap();
    let a = AmplitudeDescriptor::from_fn(2, 2, product_class([-1.0, -1.0], [1.0, 1.0]), |x, xi| {
        let (u, v) = (&xi[..2], &xi[2..]);
        let (bu, bv) = (bracket(u), bracket(v));
        let dot = u[0] * v[0] + u[1] * v[1];
        Ok(Complex64::from_polar(spatial_cutoff(&[x[0] / 4.0, x[1] / 4.0]) / (bu * bv), dot / (bu * bv)))
    });
    // Band-limited inputs keep the spectra, and so the direct double sum, small.
    let (f, h) = (band_limited(g, 0.5, 1.5), band_limited(g, -0.5, 1.2));
    let spec = MultilinearSpec::new(a, vec![linear_phase(2), wave_phase(2).unwrap()], g).unwrap();
    let direct = apply_multilinear(&spec, &[f.clone(), h.clone()], MultilinearMode::Direct).unwrap();
    let iterated = apply_multilinear(&spec, &[f, h], MultilinearMode::Iterated).unwrap();
    assert!(iterated.relative_l2_error(&direct).unwrap() <= 1e-6);
}

#[test]
fn freezing_a_factorized_amplitude() {
    let g = make_grid(1, 128, 8.0).unwrap();
    let f = bump_at(g, 0.4, 0.9);
    let a = AmplitudeDescriptor::from_fn(1, 2, product_class([-1.0, 0.0], [1.0, 1.0]), |x, xi| {
        Ok(Complex64::new(spatial_cutoff(x) / bracket(&xi[..1]) * radial_bump(&xi[1..], 5.0), 0.0))
    });
    let frozen = freeze_argument(&a, &wave_phase(1).unwrap(), &f, Exponent::new(2.0).unwrap()).unwrap();
    let first = AmplitudeDescriptor::from_fn(1, 1, ClassTag::Hormander { m: -1.0, rho: 1.0, delta: 0.0 }, |x, xi| {
        Ok(Complex64::new(spatial_cutoff(x) / bracket(xi), 0.0))
    });
    let tf = apply_fio(&OperatorSpec::new(first, wave_phase(1).unwrap(), g), &f).unwrap();
    for i in (0..g.len()).step_by(5) {
        let x = g.coordinate(i);
        for eta in [-4.0, 0.0, 1.3, 3.7] {
            let want = tf.values[i] * radial_bump(&[eta], 5.0);
            let got = frozen.eval(&[x], &[eta]).unwrap();
            assert!((got - want).norm() <= 1e-12 * (1.0 + want.norm()), "x = {x}, η = {eta}");
        }
    }
}

#[test]
fn freezing_against_zero_gives_zero() {
    let g = make_grid(1, 64, 4.0).unwrap();
    let zero = SampledField::from_fn(g, |_| Complex64::new(0.0, 0.0));
    let frozen = freeze_argument(&coupled_bilinear_amplitude(), &linear_phase(1), &zero, Exponent::new(2.0).unwrap()).unwrap();
    for x in [-1.0, 0.0, 0.5] {
        for eta in [-3.0, 0.0, 2.0] {
            assert_eq!(frozen.eval(&[x], &[eta]).unwrap(), Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn frozen_rough_amplitude_transfers_its_class() {
    let g = make_grid(1, 128, 4.0).unwrap();
    let rough = rough_log(1);
    let a = AmplitudeDescriptor::from_fn(
        1,
        2,
        ClassTag::ProductRough {
            p: Exponent::new(2.0).unwrap(),
            m: vec![0.0, -1.0],
            rho: vec![0.0, 1.0],
        },
        move |x, xi| Ok(rough.eval(x, &xi[..1])? / bracket(&xi[1..])),
    );
    let q1 = Exponent::new(2.0).unwrap();
    let sampling = XiSampling::dyadic(4, 1);
    let mut ratios = Vec::new();
    for f in [bump_at(g, 0.0, 0.5), bump_at(g, 0.3, 0.25)] {
        let frozen = freeze_argument(&a, &linear_phase(1), &f, q1).unwrap();
        match &frozen.class {
            ClassTag::Rough { p, m, rho } => {
                assert_eq!(*p, Exponent::new(1.0).unwrap());
                assert_eq!((*m, *rho), (-1.0, 1.0));
            }
            other => panic!("unexpected class {other:?}"),
        }
        let est = estimate_seminorm(&frozen, 1, &g, &sampling).unwrap();
        assert!(est.total.is_finite() && !est.class_violation);
        ratios.push(est.total / lp_norm(&f, 2.0).unwrap());
    }
    // The constant in |a_f| ≲ ‖f‖ does not depend on f.
    let spread = ratios[0].max(ratios[1]) / ratios[0].min(ratios[1]);
    assert!(spread < 10.0, "{ratios:?}");

    let smooth = AmplitudeDescriptor::from_fn(1, 2, ClassTag::Hormander { m: 0.0, rho: 1.0, delta: 0.0 }, |_, _| {
        Ok(Complex64::new(1.0, 0.0))
    });
    assert!(freeze_argument(&smooth, &linear_phase(1), &bump_at(g, 0.0, 1.0), q1).is_err());
}

#[test]
fn frequency_split_examples() {
    let a = coupled_bilinear_amplitude();
    let (low, high) = frequency_split(&a).unwrap();
    let x = [0.2];
    let full = a.eval(&x, &[0.0, 10.0]).unwrap();
    assert_eq!(low.eval(&x, &[0.0, 10.0]).unwrap(), full);
    assert_eq!(high.eval(&x, &[0.0, 10.0]).unwrap(), Complex64::new(0.0, 0.0));
    for t in [-3.0, 0.0, 0.7, 12.0] {
        let whole = a.eval(&x, &[t, t]).unwrap();
        assert!((low.eval(&x, &[t, t]).unwrap() - whole * 0.5).norm() <= 1e-15);
        assert!((high.eval(&x, &[t, t]).unwrap() - whole * 0.5).norm() <= 1e-15);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10_000 {
        let p = [rng.gen_range(-0.9..0.9), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
        let sum = low.eval(&p[..1], &p[1..]).unwrap() + high.eval(&p[..1], &p[1..]).unwrap();
        assert!((sum - a.eval(&p[..1], &p[1..]).unwrap()).norm() <= 1e-12);
    }
}

#[test]
fn trilinear_freezing_order_does_not_matter() {
    let g = make_grid(1, 64, 8.0).unwrap();
    let a = AmplitudeDescriptor::from_fn(
        1,
        3,
        ClassTag::ProductRough {
            p: Exponent::INFINITY,
            m: vec![-1.0; 3],
            rho: vec![1.0; 3],
        },
        |x, xi| {
            let b = bracket(&xi[..1]) * bracket(&xi[1..2]) * bracket(&xi[2..]);
            Ok(Complex64::from_polar(spatial_cutoff(&[x[0] / 4.0]) / b, (xi[0] * xi[1] + xi[1] * xi[2]) / b))
        },
    );
    let inputs = [bump_at(g, 0.5, 1.5), bump_at(g, -0.5, 1.0), bump_at(g, 0.0, 2.0)];
    let phase = linear_phase(1);
    let spec = MultilinearSpec::new(a.clone(), vec![phase.clone(); 3], g).unwrap();
    let direct = apply_multilinear(&spec, &inputs, MultilinearMode::Direct).unwrap();

    let first_then_second = {
        let once = freeze_operand(&a, 0, &phase, &inputs[0], None).unwrap();
        freeze_operand(&once, 0, &phase, &inputs[1], None).unwrap()
    };
    let second_then_first = {
        let once = freeze_operand(&a, 1, &phase, &inputs[1], None).unwrap();
        freeze_operand(&once, 0, &phase, &inputs[0], None).unwrap()
    };
    for frozen in [first_then_second, second_then_first] {
        let out = apply_fio(&OperatorSpec::new(frozen, phase.clone(), g).acknowledging_truncation(), &inputs[2]).unwrap();
        assert!(out.relative_l2_error(&direct).unwrap() <= 1e-5);
    }
}
