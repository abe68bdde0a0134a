use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::symbols::{Jet, JetLayout};
use crate::{EvalError, FioError, Result};

const MAX_CENTERS: usize = 1 << 16;

/// Angular net of one dyadic level with quotient cutoffs `χ_ν = b_ν / Σ b_μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeNet {
    pub j: u32,
    pub dim: usize,
    centers: Vec<Vec<f64>>,
    /// Angle of each center (two dimensions only).
    angles: Vec<f64>,
    /// Angular spacing between neighbouring centers.
    pub spacing: f64,
}

/// Builds the level-`j` net. In two dimensions the centers are `M` equally
/// spaced unit vectors with `M = ⌊π / asin(2^{-j/2}/2)⌋`, the largest count
/// whose neighbouring chord is still at least `2^{-j/2}`. In one dimension the
/// net is `{+1, −1}` with sign cutoffs.
pub fn build_cone_decomposition(j: u32, dim: usize) -> Result<ConeNet> {
    match dim {
        1 => Ok(ConeNet {
            j,
            dim,
            centers: vec![vec![1.0], vec![-1.0]],
            angles: vec![0.0, PI],
            spacing: PI,
        }),
        2 => {
            if j < 1 {
                return Err(FioError::invalid("cone decomposition needs j >= 1"));
            }
            let sep = 2f64.powf(-(j as f64) / 2.0);
            let count = (PI / (sep / 2.0).asin()).floor() as usize;
            if count > MAX_CENTERS {
                return Err(FioError::invalid(format!(
                    "level {j} needs {count} cone centers, above the cap {MAX_CENTERS}"
                )));
            }
            let spacing = 2.0 * PI / count as f64;
            let angles: Vec<f64> = (0..count).map(|v| v as f64 * spacing).collect();
            let centers = angles.iter().map(|t| vec![t.cos(), t.sin()]).collect();
            Ok(ConeNet {
                j,
                dim,
                centers,
                angles,
                spacing,
            })
        }
        other => Err(FioError::UnsupportedDimension(other)),
    }
}

fn wrap(t: f64) -> f64 {
    let mut u = (t + PI).rem_euclid(2.0 * PI) - PI;
    if u <= -PI {
        u += 2.0 * PI;
    }
    u
}

impl ConeNet {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// Half-width of each angular bump (equal to the spacing).
    pub fn half_width(&self) -> f64 {
        self.spacing
    }

    fn bump(&self, u: f64) -> f64 {
        crate::symbols::builtins::standard_bump(u / self.half_width())
    }

    pub fn cutoff(&self, nu: usize, xi: &[f64]) -> f64 {
        if self.dim == 1 {
            let s = xi[0];
            return match (nu, s > 0.0, s < 0.0) {
                (0, true, _) | (1, _, true) => 1.0,
                _ => 0.0,
            };
        }
        if xi[0] == 0.0 && xi[1] == 0.0 {
            return 0.0;
        }
        let theta = xi[1].atan2(xi[0]);
        let own = self.bump(wrap(theta - self.angles[nu]));
        if own == 0.0 {
            return 0.0;
        }
        let total: f64 = self.neighbours(theta).map(|mu| self.bump(wrap(theta - self.angles[mu]))).sum();
        own / total
    }

    /// Indices of centers whose bump can be nonzero at angle `theta`.
    fn neighbours(&self, theta: f64) -> impl Iterator<Item = usize> + '_ {
        let m = self.len() as isize;
        let base = (theta.rem_euclid(2.0 * PI) / self.spacing).floor() as isize;
        (-1..=2).map(move |d| (base + d).rem_euclid(m) as usize).filter({
            let mut seen = Vec::new();
            move |v| {
                if seen.contains(v) {
                    false
                } else {
                    seen.push(*v);
                    true
                }
            }
        })
    }

    pub fn cutoff_jet(&self, nu: usize, xi: &[Jet]) -> std::result::Result<Jet, EvalError> {
        let layout = xi[0].layout().clone();
        if self.dim == 1 {
            let s = xi[0].value().re;
            if s == 0.0 {
                return Err(EvalError::NonDifferentiable("sign cutoff"));
            }
            return Ok(Jet::real(&layout, self.cutoff(nu, &[s])));
        }
        let (x0, y0) = (xi[0].value().re, xi[1].value().re);
        if x0 == 0.0 && y0 == 0.0 {
            return Err(EvalError::NonDifferentiable("angular cutoff"));
        }
        let theta = y0.atan2(x0);
        let own_u = wrap(theta - self.angles[nu]);
        if own_u.abs() >= self.half_width() {
            return Ok(Jet::real(&layout, 0.0));
        }
        let rel = |mu: usize| -> std::result::Result<Jet, EvalError> {
            let (c, s) = (self.angles[mu].cos(), self.angles[mu].sin());
            let dot = xi[0].scale(Complex64::new(c, 0.0)).add(&xi[1].scale(Complex64::new(s, 0.0)));
            let cross = xi[1].scale(Complex64::new(c, 0.0)).sub(&xi[0].scale(Complex64::new(s, 0.0)));
            let u = Jet::atan2(&cross, &dot)?;
            u.scale(Complex64::new(1.0 / self.half_width(), 0.0)).bump()
        };
        let own = rel(nu)?;
        let mut total = Jet::real(&layout, 0.0);
        for mu in self.neighbours(theta) {
            if wrap(theta - self.angles[mu]).abs() < self.half_width() {
                total = total.add(&rel(mu)?);
            }
        }
        own.div(&total)
    }

    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                let d: f64 = self.centers[a]
                    .iter()
                    .zip(&self.centers[b])
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(d);
            }
        }
        best
    }

    pub fn distance_to_nearest(&self, unit: &[f64]) -> f64 {
        self.centers
            .iter()
            .map(|c| c.iter().zip(unit).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// Covering radius sampled on `samples` equally spaced unit vectors
    /// (offset so that they never coincide with centers).
    pub fn covering_radius(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / samples as f64;
                let u = if self.dim == 1 { vec![t.cos().signum()] } else { vec![t.cos(), t.sin()] };
                self.distance_to_nearest(&u)
            })
            .fold(0.0, f64::max)
    }

    /// Sampled constants of `|∂^α χ_ν(ξ)| ≤ C_α 2^{|α|j/2} |ξ|^{-|α|}` for
    /// `1 ≤ |α| ≤ 2` and of the directional bound `|∂_{ξ₁}^N χ_ν| ≤ C_N |ξ|^{-N}`
    /// along the center, `N ≤ 3`.
    pub fn derivative_constants(&self, angular_samples: usize) -> Result<ChiConstants> {
        if self.dim != 2 {
            return Ok(ChiConstants::default());
        }
        let radius = 2f64.powi(self.j as i32);
        let scale = 2f64.powf(self.j as f64 / 2.0);
        let layout = JetLayout::get(2, 2);
        let dir_layout = JetLayout::get(1, 3);
        let mut full = BTreeMap::new();
        let mut directional = BTreeMap::new();
        let nu = 0;
        let w = self.half_width();
        let (cx, cy) = (self.centers[nu][0], self.centers[nu][1]);
        for k in 0..angular_samples {
            let t = self.angles[nu] - w + 2.0 * w * (k as f64 + 0.5) / angular_samples as f64;
            let pt = [radius * t.cos(), radius * t.sin()];
            let seeds: Vec<Jet> = (0..2).map(|v| Jet::variable(&layout, v, pt[v])).collect();
            let jet = self.cutoff_jet(nu, &seeds)?;
            for alpha in [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2]] {
                let order = (alpha[0] + alpha[1]) as i32;
                let v = jet.derivative(&alpha).norm() * radius.powi(order) / scale.powi(order);
                let e = full.entry(format!("{alpha:?}")).or_insert(0.0f64);
                *e = e.max(v);
            }
            let dseeds = vec![
                Jet::affine(&dir_layout, pt[0], &[cx]),
                Jet::affine(&dir_layout, pt[1], &[cy]),
            ];
            let djet = self.cutoff_jet(nu, &dseeds)?;
            for n in 1..=3usize {
                let v = djet.derivative(&[n]).norm() * radius.powi(n as i32);
                let e = directional.entry(n.to_string()).or_insert(0.0f64);
                *e = e.max(v);
            }
        }
        let mut by_order = BTreeMap::new();
        for (key, v) in &full {
            let order: usize = key
                .trim_matches(|c| c == '[' || c == ']')
                .split(',')
                .map(|t| t.trim().parse::<usize>().unwrap_or(0))
                .sum();
            let e = by_order.entry(order.to_string()).or_insert(0.0f64);
            *e = e.max(*v);
        }
        Ok(ChiConstants {
            full,
            by_order,
            directional,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChiConstants {
    /// `C_α` keyed by multi-index.
    pub full: BTreeMap<String, f64>,
    /// `max_{|α|=k} C_α` keyed by `k`; the quantity that stays level-uniform.
    pub by_order: BTreeMap<String, f64>,
    /// Directional `C_N` keyed by `N`.
    pub directional: BTreeMap<String, f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_four_net() {
        let net = build_cone_decomposition(4, 2).unwrap();
        assert_eq!(net.len(), 25);
        assert!(net.min_separation() >= 0.25);
        assert!(net.covering_radius(4096) < 0.25);
        assert!(net.spacing >= 0.25 && net.spacing < 0.5);
    }

    #[test]
    fn cutoff_jets_match_values() {
        let net = build_cone_decomposition(3, 2).unwrap();
        let layout = JetLayout::get(2, 1);
        let pt = [5.0f64, 1.2];
        let theta = pt[1].atan2(pt[0]);
        for nu in 0..net.len() {
            let seeds: Vec<Jet> = (0..2).map(|v| Jet::variable(&layout, v, pt[v])).collect();
            let jet = net.cutoff_jet(nu, &seeds).unwrap();
            assert!((jet.value().re - net.cutoff(nu, &pt)).abs() < 1e-14, "{nu} {theta}");
            let h = 1e-6;
            let fd = (net.cutoff(nu, &[pt[0], pt[1] + h]) - net.cutoff(nu, &[pt[0], pt[1] - h])) / (2.0 * h);
            assert!((jet.derivative(&[0, 1]).re - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn one_dimensional_net_is_sign_split() {
        let net = build_cone_decomposition(5, 1).unwrap();
        assert_eq!(net.cutoff(0, &[3.0]) + net.cutoff(1, &[3.0]), 1.0);
        assert_eq!(net.cutoff(1, &[-0.1]), 1.0);
        assert!(build_cone_decomposition(2, 3).is_err());
    }
}
