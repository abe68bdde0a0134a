use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::amplitude::JetFn;
use super::expr::{parse_expression, CompiledExpr};
use super::jet::{Jet, JetLayout};
use crate::{exec, EvalError, FioError, Result};

type RealFn = dyn Fn(&[f64], &[f64]) -> std::result::Result<f64, EvalError> + Send + Sync;

/// Real phase `φ(x, ξ)` with jet access for all derivatives.
#[derive(Clone)]
pub struct PhaseDescriptor {
    dim: usize,
    value: Arc<RealFn>,
    jet: Arc<JetFn>,
    pub homogeneous_degree_1: bool,
    pub claimed_phi_k: u8,
    pub snd_constant: Option<f64>,
    linear: bool,
    label: String,
}

impl fmt::Debug for PhaseDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseDescriptor")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("homogeneous_degree_1", &self.homogeneous_degree_1)
            .field("claimed_phi_k", &self.claimed_phi_k)
            .field("snd_constant", &self.snd_constant)
            .finish()
    }
}

fn real_part(v: Complex64) -> std::result::Result<f64, EvalError> {
    if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
        return Err(EvalError::Domain("phase function must be real valued".into()));
    }
    Ok(v.re)
}

impl PhaseDescriptor {
    pub fn from_expression(expr: CompiledExpr, homogeneous: bool, phi_k: u8) -> Result<Self> {
        if expr.arity() != 1 {
            return Err(FioError::invalid("a phase takes one frequency operand"));
        }
        if !(1..=2).contains(&phi_k) {
            return Err(FioError::invalid("claimed phase class must be 1 or 2"));
        }
        let expr = Arc::new(expr);
        let (e1, e2) = (expr.clone(), expr.clone());
        Ok(PhaseDescriptor {
            dim: expr.dim(),
            value: Arc::new(move |x, xi| real_part(e1.eval(x, xi)?)),
            jet: Arc::new(move |x, xi| e2.eval_jet(x, xi)),
            homogeneous_degree_1: homogeneous,
            claimed_phi_k: phi_k,
            snd_constant: None,
            linear: false,
            label: expr.source().to_string(),
        })
    }

    /// General phase from closures; the jet closure provides derivatives.
    pub fn from_fns<V, J>(dim: usize, value: V, jet: J, homogeneous: bool, phi_k: u8) -> Self
    where
        V: Fn(&[f64], &[f64]) -> std::result::Result<f64, EvalError> + Send + Sync + 'static,
        J: Fn(&[Jet], &[Jet]) -> std::result::Result<Jet, EvalError> + Send + Sync + 'static,
    {
        PhaseDescriptor {
            dim,
            value: Arc::new(value),
            jet: Arc::new(jet),
            homogeneous_degree_1: homogeneous,
            claimed_phi_k: phi_k,
            snd_constant: None,
            linear: false,
            label: "custom".into(),
        }
    }

    /// `⟨x, ξ⟩`, the phase of pseudodifferential operators.
    pub fn linear(dim: usize) -> Self {
        let mut p = PhaseDescriptor::from_fns(
            dim,
            |x, xi| Ok(x.iter().zip(xi).map(|(a, b)| a * b).sum()),
            |x, xi| {
                let mut acc = x[0].mul(&xi[0]);
                for (a, b) in x.iter().zip(xi).skip(1) {
                    acc = acc.add(&a.mul(b));
                }
                Ok(acc)
            },
            true,
            2,
        );
        p.linear = true;
        p.label = "linear_phase".into();
        p
    }

    /// `⟨x, Aξ⟩` for a real `dim × dim` matrix.
    pub fn bilinear_form(matrix: &[Vec<f64>]) -> Result<Self> {
        let dim = matrix.len();
        if !(1..=2).contains(&dim) || matrix.iter().any(|r| r.len() != dim) {
            return Err(FioError::invalid("matrix must be square of size 1 or 2"));
        }
        let mut terms = Vec::new();
        for (i, row) in matrix.iter().enumerate() {
            for (k, a) in row.iter().enumerate() {
                terms.push(format!("({a})*x{}*k1_{}", i + 1, k + 1));
            }
        }
        let expr = parse_expression(&terms.join(" + "))?.compile(dim, 1)?;
        Ok(PhaseDescriptor::from_expression(expr, true, 2)?.with_label("bilinear_form"))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_snd_constant(mut self, c: f64) -> Self {
        self.snd_constant = Some(c);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True only for the exact linear phase `⟨x, ξ⟩`.
    pub fn is_linear(&self) -> bool {
        self.linear
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> std::result::Result<f64, EvalError> {
        (self.value)(x, xi)
    }

    pub fn jet(&self, x: &[Jet], xi: &[Jet]) -> std::result::Result<Jet, EvalError> {
        (self.jet)(x, xi)
    }

    /// Jet in the frequency variables only, up to `order`.
    pub fn xi_jet(&self, x: &[f64], xi: &[f64], order: usize) -> std::result::Result<Jet, EvalError> {
        let layout = JetLayout::get(self.dim, order);
        let xs: Vec<Jet> = x.iter().map(|&v| Jet::real(&layout, v)).collect();
        let xis: Vec<Jet> = xi
            .iter()
            .enumerate()
            .map(|(v, &val)| Jet::variable(&layout, v, val))
            .collect();
        self.jet(&xs, &xis)
    }

    /// Jet in `(x, ξ)` jointly; variables `0..n` are `x`, `n..2n` are `ξ`.
    pub fn joint_jet(&self, x: &[f64], xi: &[f64], order: usize) -> std::result::Result<Jet, EvalError> {
        let n = self.dim;
        let layout = JetLayout::get(2 * n, order);
        let xs: Vec<Jet> = (0..n).map(|v| Jet::variable(&layout, v, x[v])).collect();
        let xis: Vec<Jet> = (0..n).map(|v| Jet::variable(&layout, n + v, xi[v])).collect();
        self.jet(&xs, &xis)
    }

    pub fn grad_xi(&self, x: &[f64], xi: &[f64]) -> std::result::Result<Vec<f64>, EvalError> {
        let j = self.xi_jet(x, xi, 1)?;
        Ok((0..self.dim)
            .map(|v| {
                let mut a = vec![0; self.dim];
                a[v] = 1;
                j.derivative(&a).re
            })
            .collect())
    }

    /// `∂²φ/∂x_j∂ξ_k` as rows `j`.
    pub fn mixed_hessian(&self, x: &[f64], xi: &[f64]) -> std::result::Result<Vec<Vec<f64>>, EvalError> {
        let n = self.dim;
        let j = self.joint_jet(x, xi, 2)?;
        Ok((0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        let mut a = vec![0; 2 * n];
                        a[r] += 1;
                        a[n + c] += 1;
                        j.derivative(&a).re
                    })
                    .collect()
            })
            .collect())
    }
}

fn determinant(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        1 => m[0][0],
        _ => m[0][0] * m[1][1] - m[0][1] * m[1][0],
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PhaseReport {
    pub k: u8,
    /// Keyed by `a[α]b[β]`; value is the sampled sup of `|ξ|^{|α|-1}|∂_ξ^α∂_x^β φ|`.
    pub phi_k_constants: BTreeMap<String, f64>,
    pub snd_constant: f64,
    pub homogeneity_defect: Option<f64>,
    pub samples: usize,
    pub pass: bool,
}

pub fn constant_key(alpha: &[usize], beta: &[usize]) -> String {
    format!("a{alpha:?}b{beta:?}")
}

/// Sample points used by phase verification: an `x` lattice in the box and
/// frequencies on dyadic radii `2^{-1}..2^4` (never `|ξ| < 0.5`).
pub fn phase_samples(dim: usize, box_halfwidth: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let radii: Vec<f64> = (-1..=4).map(|e| 2f64.powi(e)).collect();
    phase_samples_on_radii(dim, box_halfwidth, &radii)
}

/// Same lattice and directions as [`phase_samples`] on caller-chosen radii.
pub fn phase_samples_on_radii(dim: usize, box_halfwidth: f64, radii: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let xs: Vec<f64> = (0..5).map(|i| -box_halfwidth + i as f64 * box_halfwidth / 2.0).collect();
    let dirs: Vec<Vec<f64>> = if dim == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        (0..16)
            .map(|a| {
                let t = 2.0 * std::f64::consts::PI * (a as f64 + 0.25) / 16.0;
                vec![t.cos(), t.sin()]
            })
            .collect()
    };
    let mut out = Vec::new();
    let x_points: Vec<Vec<f64>> = if dim == 1 {
        xs.iter().map(|&a| vec![a]).collect()
    } else {
        xs.iter()
            .flat_map(|&a| xs.iter().map(move |&b| vec![a, b]))
            .collect()
    };
    for x in &x_points {
        for r in radii {
            for d in &dirs {
                out.push((x.clone(), d.iter().map(|c| c * r).collect()));
            }
        }
    }
    out
}

/// Measures the `Φ^k` constants for `k ≤ |α|+|β| ≤ k+3`, the SND constant and
/// (for homogeneous phases) the homogeneity defect on 100 seeded triples.
pub fn verify_phase(phase: &PhaseDescriptor, k: u8, box_halfwidth: f64) -> Result<PhaseReport> {
    let samples = phase_samples(phase.dim(), box_halfwidth);
    verify_phase_on(phase, k, box_halfwidth, &samples)
}

/// [`verify_phase`] restricted to the dyadic shell `2^{j-1} ≤ |ξ| ≤ 2^{j+1}`.
pub fn verify_phase_at_level(phase: &PhaseDescriptor, k: u8, box_halfwidth: f64, j: u32) -> Result<PhaseReport> {
    let base = 2f64.powi(j as i32);
    let radii = [0.5 * base, 0.75 * base, base, 1.5 * base, 2.0 * base];
    let samples = phase_samples_on_radii(phase.dim(), box_halfwidth, &radii);
    verify_phase_on(phase, k, box_halfwidth, &samples)
}

fn verify_phase_on(
    phase: &PhaseDescriptor,
    k: u8,
    box_halfwidth: f64,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<PhaseReport> {
    if !(1..=2).contains(&k) {
        return Err(FioError::invalid("phase class index must be 1 or 2"));
    }
    let n = phase.dim();
    let top = k as usize + 3;
    let layout = JetLayout::get(2 * n, top);
    let wanted: Vec<(Vec<usize>, Vec<usize>, usize)> = layout
        .multi_indices()
        .iter()
        .filter_map(|mi| {
            let total: usize = mi.iter().map(|&v| v as usize).sum();
            if total < k as usize {
                return None;
            }
            let beta: Vec<usize> = mi[..n].iter().map(|&v| v as usize).collect();
            let alpha: Vec<usize> = mi[n..].iter().map(|&v| v as usize).collect();
            let alen = alpha.iter().sum();
            Some((alpha, beta, alen))
        })
        .collect();
    let per_sample = exec::try_map_range(samples.len(), |s| {
        let (x, xi) = &samples[s];
        let radius = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let jet = phase.joint_jet(x, xi, top)?;
        let values: Vec<f64> = wanted
            .iter()
            .map(|(alpha, beta, alen)| {
                let mut mi = beta.clone();
                mi.extend_from_slice(alpha);
                radius.powi(*alen as i32 - 1) * jet.derivative(&mi).norm()
            })
            .collect();
        let det = determinant(&phase.mixed_hessian(x, xi)?).abs();
        Ok::<_, EvalError>((values, det))
    })?;
    let mut constants = vec![0.0f64; wanted.len()];
    let mut snd = f64::INFINITY;
    for (values, det) in &per_sample {
        for (c, v) in constants.iter_mut().zip(values) {
            *c = c.max(*v);
        }
        snd = snd.min(*det);
    }
    let phi_k_constants: BTreeMap<String, f64> = wanted
        .iter()
        .zip(&constants)
        .map(|((a, b, _), c)| (constant_key(a, b), *c))
        .collect();
    let homogeneity_defect = if phase.homogeneous_degree_1 {
        Some(homogeneity_defect(phase, box_halfwidth, 100, 0x5eed)?)
    } else {
        None
    };
    let finite = constants.iter().all(|c| c.is_finite()) && snd.is_finite();
    let pass = finite && snd > 1e-12 && homogeneity_defect.map_or(true, |d| d <= 1e-9);
    Ok(PhaseReport {
        k,
        phi_k_constants,
        snd_constant: snd,
        homogeneity_defect,
        samples: samples.len(),
        pass,
    })
}

/// Max of `|φ(x,λξ) − λφ(x,ξ)| / (λ|ξ|)` over seeded random triples with
/// `λ ∈ [1, 8]`.
pub fn homogeneity_defect(phase: &PhaseDescriptor, box_halfwidth: f64, count: usize, seed: u64) -> Result<f64> {
    let n = phase.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-box_halfwidth..=box_halfwidth)).collect();
        let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-16.0..16.0)).collect();
        let lambda: f64 = rng.gen_range(1.0..=8.0);
        let radius = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if radius < 1e-3 {
            continue;
        }
        let scaled: Vec<f64> = xi.iter().map(|v| v * lambda).collect();
        let d = (phase.eval(&x, &scaled)? - lambda * phase.eval(&x, &xi)?).abs() / (lambda * radius);
        worst = worst.max(d);
    }
    Ok(worst)
}
