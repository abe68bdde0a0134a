use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::amplitude::AmplitudeDescriptor;
use super::jet::{Jet, JetLayout};
use crate::numgrid::{lp_norm, Domain, SampledField, UniformGrid};
use crate::{exec, EvalError, FioError, Result};

/// Frequency sample set: dyadic radii `2^0..2^{j_max}` times a direction net
/// (`±e₁` in one dimension, 16 equally spaced angles in two).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct XiSampling {
    pub j_max: u32,
    pub directions: usize,
}

impl XiSampling {
    pub fn dyadic(j_max: u32, dim: usize) -> Self {
        XiSampling {
            j_max,
            directions: if dim == 1 { 2 } else { 16 },
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..=self.j_max).map(|j| 2f64.powi(j as i32)).collect()
    }

    pub fn direction_vectors(&self, dim: usize) -> Vec<Vec<f64>> {
        if dim == 1 {
            vec![vec![1.0], vec![-1.0]]
        } else {
            (0..self.directions)
                .map(|a| {
                    let t = 2.0 * std::f64::consts::PI * a as f64 / self.directions as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SampleMeta {
    pub radii: Vec<f64>,
    pub directions: usize,
    pub grid_points: usize,
    pub label: String,
}

/// Sampled seminorm `|a|_{p,m,s}`, reported as a lower bound of the true sup.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SeminormEstimate {
    pub s: usize,
    pub p: crate::bounds::Exponent,
    pub m: f64,
    pub rho: f64,
    /// Keyed by the multi-index, e.g. `[1, 0]`.
    pub per_alpha: BTreeMap<String, f64>,
    /// Weighted norm per radius (max over directions), same keys.
    pub radial_profiles: BTreeMap<String, Vec<f64>>,
    pub total: f64,
    pub class_violation: bool,
    pub violations: Vec<String>,
    pub sample_meta: SampleMeta,
}

fn multi_indices(dim: usize, s: usize) -> Vec<Vec<usize>> {
    let layout = JetLayout::get(dim, s);
    layout
        .multi_indices()
        .iter()
        .map(|m| m.iter().map(|&v| v as usize).collect())
        .collect()
}

pub fn estimate_seminorm(
    a: &AmplitudeDescriptor,
    s: usize,
    grid: &UniformGrid,
    sampling: &XiSampling,
) -> Result<SeminormEstimate> {
    if a.arity() != 1 {
        return Err(FioError::invalid("seminorm estimation expects an arity-1 amplitude"));
    }
    if a.dim() != grid.dim() {
        return Err(FioError::GridMismatch("amplitude and grid dimensions differ".into()));
    }
    let (p, m, rho) = a
        .class
        .lebesgue_profile()
        .ok_or_else(|| FioError::ClassMismatch("seminorms need a single-order class".into()))?;
    let dim = grid.dim();
    let alphas = multi_indices(dim, s);
    let radii = sampling.radii();
    let dirs = sampling.direction_vectors(dim);
    let samples: Vec<(usize, Vec<f64>)> = radii
        .iter()
        .enumerate()
        .flat_map(|(ri, r)| dirs.iter().map(move |d| (ri, d.iter().map(|c| c * r).collect())))
        .collect();
    let points = grid.points();
    let p_value = p.value();

    let rows = exec::try_map_range(samples.len(), |si| {
        let xi = &samples[si].1;
        let bracket = (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let mut fields = vec![vec![Complex64::new(0.0, 0.0); points.len()]; alphas.len()];
        if a.has_analytic_derivatives() {
            let layout = JetLayout::get(dim, s);
            let seeds: Vec<Jet> = (0..dim).map(|v| Jet::variable(&layout, v, xi[v])).collect();
            for (pi, pt) in points.iter().enumerate() {
                let xs: Vec<Jet> = pt[..dim].iter().map(|&v| Jet::real(&layout, v)).collect();
                let jet = a.jet(&xs, &seeds).expect("analytic derivatives present")?;
                for (ai, alpha) in alphas.iter().enumerate() {
                    fields[ai][pi] = jet.derivative(alpha);
                }
            }
        } else {
            for (pi, pt) in points.iter().enumerate() {
                for (ai, alpha) in alphas.iter().enumerate() {
                    fields[ai][pi] = a.derivative(alpha, &pt[..dim], xi)?;
                }
            }
        }
        let mut weighted = Vec::with_capacity(alphas.len());
        for (alpha, values) in alphas.iter().zip(fields) {
            let order: usize = alpha.iter().sum();
            let f = SampledField {
                grid: *grid,
                values,
                domain: Domain::Space,
            };
            let norm = lp_norm(&f, p_value).map_err(|_| EvalError::NonFinite)?;
            weighted.push(bracket.powf(rho * order as f64 - m) * norm);
        }
        Ok::<_, EvalError>(weighted)
    })
    .map_err(FioError::from)?;

    let mut per_alpha = BTreeMap::new();
    let mut radial_profiles = BTreeMap::new();
    let mut violations = Vec::new();
    let mut total = 0.0;
    for (ai, alpha) in alphas.iter().enumerate() {
        let mut profile = vec![0.0f64; radii.len()];
        for (si, (ri, _)) in samples.iter().enumerate() {
            profile[*ri] = profile[*ri].max(rows[si][ai]);
        }
        let sup = profile.iter().cloned().fold(0.0, f64::max);
        if !sup.is_finite() {
            return Err(FioError::NonFinite(format!("seminorm for alpha {alpha:?}")));
        }
        let key = format!("{alpha:?}");
        if profile.len() >= 3 {
            let t = &profile[profile.len() - 3..];
            if t[0] < t[1] && t[1] < t[2] && t[2] > 10.0 * t[0] {
                violations.push(key.clone());
            }
        }
        total += sup;
        per_alpha.insert(key.clone(), sup);
        radial_profiles.insert(key, profile);
    }
    Ok(SeminormEstimate {
        s,
        p,
        m,
        rho,
        per_alpha,
        radial_profiles,
        total,
        class_violation: !violations.is_empty(),
        violations,
        sample_meta: SampleMeta {
            radii,
            directions: dirs.len(),
            grid_points: grid.len(),
            label: "sampled sup".into(),
        },
    })
}
