use num_complex::Complex64;

use crate::symbols::{AmplitudeDescriptor, ClassTag, Jet};
use crate::EvalError;

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, built from `e^{-1/t}`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

pub fn smooth_step_jet(t: &Jet) -> Result<Jet, EvalError> {
    let t0 = t.value().re;
    if t0 <= 0.0 {
        return Ok(Jet::real(t.layout(), 0.0));
    }
    if t0 >= 1.0 {
        return Ok(Jet::real(t.layout(), 1.0));
    }
    let one = Complex64::new(1.0, 0.0);
    let a = t.recip()?.neg().exp();
    let b = t.neg().add_constant(one).recip()?.neg().exp();
    a.div(&a.add(&b))
}

/// `ψ₀(r) = step(2 − r)`: 1 on `r ≤ 1`, 0 on `r ≥ 2`.
pub fn psi0_radial(r: f64) -> f64 {
    smooth_step(2.0 - r)
}

fn radius(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Littlewood-Paley partition `Ψ₀ + Σ_{j≥1} Ψ_j = 1` with
/// `Ψ(ξ) = ψ₀(ξ) − ψ₀(2ξ)` and `Ψ_j(ξ) = Ψ(2^{-j}ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LPPartition {
    pub j_max: u32,
}

pub fn build_lp_partition(j_max: u32) -> crate::Result<LPPartition> {
    if j_max < 1 {
        return Err(crate::FioError::invalid("j_max must be at least 1"));
    }
    Ok(LPPartition { j_max })
}

impl LPPartition {
    pub fn psi0(&self, xi: &[f64]) -> f64 {
        psi0_radial(radius(xi))
    }

    /// `Ψ_j` for `j ≥ 1`; `j = 0` returns `Ψ₀`.
    pub fn piece(&self, j: u32, xi: &[f64]) -> f64 {
        let r = radius(xi);
        if j == 0 {
            return psi0_radial(r);
        }
        let s = r / 2f64.powi(j as i32);
        psi0_radial(s) - psi0_radial(2.0 * s)
    }

    pub fn piece_jet(&self, j: u32, xi: &[Jet]) -> Result<Jet, EvalError> {
        let layout = xi[0].layout().clone();
        let scale = 2f64.powi(-(j as i32));
        let r2 = xi.iter().fold(Jet::real(&layout, 0.0), |acc, c| acc.add(&c.mul(c)));
        let r0 = r2.value().re.sqrt();
        let inner = if j == 0 { 0.0 } else { 0.5 / scale };
        if r0 * scale >= 2.0 || (j > 0 && r0 <= inner) {
            return Ok(Jet::real(&layout, 0.0));
        }
        if r0 * scale <= 1.0 && j == 0 {
            return Ok(Jet::real(&layout, 1.0));
        }
        let r = r2.sqrt()?;
        let two = Complex64::new(2.0, 0.0);
        let outer = smooth_step_jet(&r.scale(Complex64::new(-scale, 0.0)).add_constant(two))?;
        if j == 0 {
            return Ok(outer);
        }
        let inner = smooth_step_jet(&r.scale(Complex64::new(-2.0 * scale, 0.0)).add_constant(two))?;
        Ok(outer.sub(&inner))
    }

    /// Partial sum `Ψ₀ + Σ_{1≤j≤J} Ψ_j`.
    pub fn partial_sum(&self, xi: &[f64]) -> f64 {
        (0..=self.j_max).map(|j| self.piece(j, xi)).sum()
    }

    /// `Ψ_j` as an order-zero multiplier with compact support.
    pub fn multiplier(&self, j: u32, dim: usize) -> AmplitudeDescriptor {
        let lp = *self;
        AmplitudeDescriptor::multiplier(dim, ClassTag::Hormander { m: 0.0, rho: 1.0, delta: 0.0 }, move |xi| {
            Complex64::new(lp.piece(j, xi), 0.0)
        })
        .with_jet(move |_, xi| lp.piece_jet(j, xi))
        .with_support_radius(2f64.powi(j as i32 + 1))
        .with_label(format!("Psi_{j}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::JetLayout;

    #[test]
    fn annulus_support_and_dilation() {
        let lp = build_lp_partition(6).unwrap();
        assert_eq!(lp.piece(3, &[1.0]), 0.0);
        assert_eq!(lp.piece(3, &[16.0, 0.0]), 0.0);
        let base = lp.piece(1, &[2.0]);
        for j in 1..=6 {
            assert_eq!(lp.piece(j, &[2f64.powi(j as i32), 0.0]), base);
        }
        assert_eq!(lp.psi0(&[0.5]), 1.0);
        assert_eq!(lp.psi0(&[2.0]), 0.0);
    }

    #[test]
    fn jets_agree_with_values_and_differences() {
        let lp = build_lp_partition(4).unwrap();
        let layout = JetLayout::get(2, 1);
        for (j, pt) in [(2u32, [3.1, 1.7]), (0, [1.3, 0.4]), (3, [-6.0, 5.5])] {
            let seeds: Vec<Jet> = (0..2).map(|v| Jet::variable(&layout, v, pt[v])).collect();
            let jet = lp.piece_jet(j, &seeds).unwrap();
            assert!((jet.value().re - lp.piece(j, &pt)).abs() < 1e-14);
            let h = 1e-6;
            let fd = (lp.piece(j, &[pt[0] + h, pt[1]]) - lp.piece(j, &[pt[0] - h, pt[1]])) / (2.0 * h);
            assert!((jet.derivative(&[1, 0]).re - fd).abs() < 1e-7);
        }
    }
}
