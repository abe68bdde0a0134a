use fiolab_core::bounds::{
    linear_thresholds, m_bar, m_script, multilinear_admissibility, Exponent, OrderBranch, ScenarioInputs, VerdictStatus,
    SCENARIO_TAGS,
};
use fiolab_core::FioError;

const EXACT: f64 = 1e-12;

fn e(p: f64) -> Exponent {
    Exponent::new(p).unwrap()
}

fn all_exponents() -> [Exponent; 5] {
    [e(1.0), e(4.0 / 3.0), e(2.0), e(4.0), Exponent::INFINITY]
}

/// `|1/q − 1/2|`, written out by hand as the oracle.
fn gap(q: Exponent) -> f64 {
    (q.recip() - 0.5).abs()
}

#[test]
fn endpoint_order_threshold() {
    for n in 1..=4 {
        for q in all_exponents() {
            let (v, _) = m_bar(n, 1.0, Exponent::INFINITY, q).unwrap();
            let want = -((n - 1) as f64) * gap(q);
            assert!((v - want).abs() <= EXACT, "n = {n}, q = {q}: {v} vs {want}");
        }
    }
}

#[test]
fn hand_evaluated_second_branch() {
    let (v, branch) = m_bar(2, 0.5, e(2.0), e(2.0)).unwrap();
    assert_eq!(branch, OrderBranch::BothAboveTwo);
    assert!((v + 0.5).abs() <= EXACT);
}

#[test]
fn l2_calculus_case_is_zero_order() {
    for n in 1..=3 {
        let rep = linear_thresholds(n, 1.0, e(2.0), e(2.0)).unwrap();
        for key in ["m_bar", "L2_threshold", "psido_threshold"] {
            assert_eq!(rep.value(key), Some(0.0), "n = {n}, {key}");
        }
        // The general order condition keeps its −(n−1)/2 loss at s = 2.
        let general = rep.value("eq_m1").unwrap();
        assert!((general + (n as f64 - 1.0) / 2.0).abs() <= EXACT);
        // ℳ is only defined for 1 < q < 2.
        assert_eq!(rep.value("m_script"), None);
    }
}

#[test]
fn lorentz_upper_end_lies_above_lebesgue_threshold() {
    for p in [e(1.0), e(3.0), Exponent::INFINITY] {
        let q = e(1.5);
        let (bar, _) = m_bar(2, 0.7, p, q).unwrap();
        let script = m_script(2, 0.7, p, q).unwrap().unwrap();
        assert!(script >= bar - EXACT, "p = {p}: {script} < {bar}");
    }
    assert_eq!(m_script(2, 0.7, e(2.0), e(2.0)).unwrap(), None);
}

#[test]
fn remark_identity_for_l_infinity_operand() {
    for n in 1..=3 {
        for p in [e(1.0), e(2.0), e(4.0), Exponent::INFINITY] {
            let (a, _) = m_bar(n, 1.0, Exponent::INFINITY, Exponent::INFINITY).unwrap();
            let (b, _) = m_bar(n, 1.0, Exponent::INFINITY, p).unwrap();
            let want = -((n - 1) as f64) * (0.5 + gap(p));
            assert!((a + b - want).abs() <= EXACT);
        }
    }
}

fn linfty_inputs(n: usize, q1: Exponent, q2: Exponent, m: Option<f64>) -> ScenarioInputs {
    ScenarioInputs {
        n: Some(n),
        rho: Some(1.0),
        q1: Some(q1),
        q2: Some(q2),
        m,
        ..Default::default()
    }
}

#[test]
fn bilinear_l2_times_l2_is_zeroth_order() {
    let rep = multilinear_admissibility("bilinear_Linfty", &linfty_inputs(2, e(2.0), e(2.0), Some(-0.1))).unwrap();
    assert!(rep.value("threshold").unwrap().abs() <= EXACT);
    assert_eq!(rep.target_exponent, Some(e(1.0)));
    let v = rep.verdict("bilinear").unwrap();
    assert!(v.admissible);
    assert_eq!(v.target_space, "L^1");

    let rep = multilinear_admissibility("bilinear_Linfty", &linfty_inputs(2, e(2.0), e(2.0), Some(0.0))).unwrap();
    assert_eq!(rep.verdict("bilinear").unwrap().status, VerdictStatus::Borderline);
    let rep = multilinear_admissibility("bilinear_Linfty", &linfty_inputs(2, e(2.0), e(2.0), Some(0.3))).unwrap();
    assert_eq!(rep.verdict("bilinear").unwrap().status, VerdictStatus::Inadmissible);
}

#[test]
fn bilinear_with_bounded_operand() {
    for n in 1..=3 {
        for p in [e(1.0), e(1.5), e(2.0), e(6.0)] {
            let rep = multilinear_admissibility("bilinear_Linfty", &linfty_inputs(n, p, Exponent::INFINITY, None)).unwrap();
            let want = -((n - 1) as f64) * (0.5 + gap(p));
            assert!((rep.value("threshold").unwrap() - want).abs() <= EXACT, "n = {n}, p = {p}");
            assert_eq!(rep.verdict("bilinear").unwrap().status, VerdictStatus::Unevaluated);
        }
    }
}

#[test]
fn multilinear_aggregate_reproduces_the_sum_of_gaps() {
    let index_sets = [
        vec![e(2.0), e(4.0)],
        vec![e(4.0 / 3.0), Exponent::INFINITY],
        vec![e(1.0), e(2.0), e(3.0)],
    ];
    for n in [2, 3] {
        for qs in &index_sets {
            let m = -4.0;
            let ms = vec![m / qs.len() as f64; qs.len()];
            let inputs = ScenarioInputs {
                n: Some(n),
                p: Some(Exponent::INFINITY),
                qs: Some(qs.clone()),
                ms: Some(ms),
                ..Default::default()
            };
            let rep = multilinear_admissibility("general_multilinear", &inputs).unwrap();
            let want = -((n - 1) as f64) * qs.iter().map(|&q| gap(q)).sum::<f64>();
            assert!((rep.value("aggregate_threshold").unwrap() - want).abs() <= EXACT);
            for (j, &q) in qs.iter().enumerate() {
                let per = rep.value(&format!("m{}_threshold", j + 1)).unwrap();
                assert!((per + (n - 1) as f64 * gap(q)).abs() <= EXACT);
            }
        }
    }
}

#[test]
fn multilinear_side_conditions() {
    let base = ScenarioInputs {
        n: Some(2),
        p: Some(e(2.0)),
        qs: Some(vec![e(2.0), e(2.0)]),
        ..Default::default()
    };
    let positive = ScenarioInputs {
        ms: Some(vec![-1.0, 0.5]),
        ..base.clone()
    };
    let rep = multilinear_admissibility("general_multilinear", &positive).unwrap();
    assert_eq!(rep.verdict("multilinear").unwrap().status, VerdictStatus::HypothesisViolated);

    let ok = ScenarioInputs {
        ms: Some(vec![-1.0, -1.0]),
        ..base
    };
    let rep = multilinear_admissibility("general_multilinear", &ok).unwrap();
    assert_ne!(rep.verdict("multilinear").unwrap().status, VerdictStatus::HypothesisViolated);
    assert_eq!(rep.derived_exponents["p1"], e(4.0));
}

#[test]
fn product_needs_the_conjugate_exponent() {
    // p = 4 gives p' = 4/3, so q₁ = 6/5 < p' breaks the hypothesis.
    let inputs = ScenarioInputs {
        n: Some(2),
        rho: Some(1.0),
        p: Some(e(4.0)),
        q1: Some(e(1.2)),
        q2: Some(e(1.0)),
        m1: Some(-10.0),
        m2: Some(-10.0),
        ..Default::default()
    };
    let rep = multilinear_admissibility("bilinear_product", &inputs).unwrap();
    let v = rep.verdict("product").unwrap();
    assert_eq!(v.status, VerdictStatus::HypothesisViolated);
    assert!(!v.admissible);

    let fine = ScenarioInputs {
        q1: Some(e(2.0)),
        q2: Some(e(2.0)),
        ..inputs
    };
    let rep = multilinear_admissibility("bilinear_product", &fine).unwrap();
    assert_eq!(rep.derived_exponents["r2"], e(4.0 / 3.0));
    assert!(rep.verdict("product").unwrap().admissible);
}

#[test]
fn every_tag_is_recognised_and_others_are_not() {
    let inputs = ScenarioInputs {
        n: Some(2),
        rho: Some(0.5),
        p: Some(e(2.0)),
        q: Some(e(2.0)),
        q1: Some(e(2.0)),
        q2: Some(e(2.0)),
        qs: Some(vec![e(2.0), e(2.0)]),
        ms: Some(vec![-1.0, -1.0]),
        ..Default::default()
    };
    for tag in SCENARIO_TAGS {
        let rep = multilinear_admissibility(tag, &inputs).unwrap();
        assert_eq!(rep.scenario, *tag);
        assert!(!rep.verdicts.is_empty(), "{tag}");
    }
    assert!(matches!(
        multilinear_admissibility("trilinear_magic", &inputs),
        Err(FioError::UnknownScenario(_))
    ));
}

#[test]
fn reports_serialize_infinity_as_a_token() {
    let rep = multilinear_admissibility("bilinear_Linfty", &linfty_inputs(2, e(2.0), Exponent::INFINITY, None)).unwrap();
    let text = serde_json::to_string(&rep).unwrap();
    assert!(text.contains("\"inf\""), "{text}");
    let back: fiolab_core::bounds::ThresholdReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep);
}
