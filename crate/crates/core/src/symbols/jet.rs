//! Truncated multivariate Taylor series ("jets") with complex coefficients.
//!
//! A jet stores `∂^α f / α!` for every multi-index `|α| ≤ order`, so exact
//! derivatives of compositions follow from arithmetic on the coefficients.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::EvalError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Graded enumeration of multi-indices plus the product table.
#[derive(Debug)]
pub struct JetLayout {
    nvars: usize,
    order: usize,
    indices: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    products: Vec<(u32, u32, u32)>,
}

impl JetLayout {
    /// Shared layout for `nvars` variables truncated at total degree `order`.
    pub fn get(nvars: usize, order: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetLayout::build(nvars, order)))
            .clone()
    }

    fn build(nvars: usize, order: usize) -> JetLayout {
        let mut indices: Vec<Vec<u8>> = Vec::new();
        for degree in 0..=order {
            let mut current = vec![0u8; nvars];
            push_with_degree(&mut indices, &mut current, 0, degree);
        }
        let lookup: HashMap<Vec<u8>, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let degree = |a: &Vec<u8>| a.iter().map(|&v| v as usize).sum::<usize>();
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if degree(a) + degree(b) <= order {
                    let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    products.push((i as u32, j as u32, lookup[&sum] as u32));
                }
            }
        }
        JetLayout {
            nvars,
            order,
            indices,
            lookup,
            products,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_indices(&self) -> &[Vec<u8>] {
        &self.indices
    }

    pub fn position(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.nvars {
            return None;
        }
        let key: Vec<u8> = alpha.iter().map(|&a| a as u8).collect();
        self.lookup.get(&key).copied()
    }
}

fn push_with_degree(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, var: usize, remaining: usize) {
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=remaining).rev() {
        current[var] = k as u8;
        push_with_degree(out, current, var + 1, remaining - k);
    }
    current[var] = 0;
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

#[derive(Debug, Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn constant(layout: &Arc<JetLayout>, value: Complex64) -> Jet {
        let mut coeffs = vec![ZERO; layout.len()];
        coeffs[0] = value;
        Jet {
            layout: layout.clone(),
            coeffs,
        }
    }

    pub fn real(layout: &Arc<JetLayout>, value: f64) -> Jet {
        Jet::constant(layout, Complex64::new(value, 0.0))
    }

    /// The coordinate function `value + t_var`.
    pub fn variable(layout: &Arc<JetLayout>, var: usize, value: f64) -> Jet {
        let mut j = Jet::real(layout, value);
        if layout.order >= 1 {
            let mut alpha = vec![0usize; layout.nvars];
            alpha[var] = 1;
            let pos = layout.position(&alpha).expect("variable index within layout");
            j.coeffs[pos] = ONE;
        }
        j
    }

    /// The affine function `value + Σ_v direction[v] t_v`.
    pub fn affine(layout: &Arc<JetLayout>, value: f64, direction: &[f64]) -> Jet {
        let mut j = Jet::real(layout, value);
        if layout.order >= 1 {
            for (v, &d) in direction.iter().enumerate() {
                if d != 0.0 {
                    let mut alpha = vec![0usize; layout.nvars];
                    alpha[v] = 1;
                    j.coeffs[layout.position(&alpha).unwrap()] = Complex64::new(d, 0.0);
                }
            }
        }
        j
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn coefficient(&self, alpha: &[usize]) -> Complex64 {
        self.layout
            .position(alpha)
            .map(|p| self.coeffs[p])
            .unwrap_or(ZERO)
    }

    /// Partial derivative `∂^α f`.
    pub fn derivative(&self, alpha: &[usize]) -> Complex64 {
        let fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
        self.coefficient(alpha) * fact
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| *c == ZERO)
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    fn zip(&self, other: &Jet, f: impl Fn(Complex64, Complex64) -> Complex64) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.layout, &other.layout));
        Jet {
            layout: self.layout.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Jet {
        self.map(|a| -a)
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        self.map(|a| a * c)
    }

    pub fn add_constant(&self, c: Complex64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let mut coeffs = vec![ZERO; self.coeffs.len()];
        for &(i, j, k) in &self.layout.products {
            let a = self.coeffs[i as usize];
            if a != ZERO {
                coeffs[k as usize] += a * other.coeffs[j as usize];
            }
        }
        Jet {
            layout: self.layout.clone(),
            coeffs,
        }
    }

    /// Coefficient-wise real part; valid because the jet variables are real.
    pub fn re(&self) -> Jet {
        self.map(|a| Complex64::new(a.re, 0.0))
    }

    pub fn im(&self) -> Jet {
        self.map(|a| Complex64::new(a.im, 0.0))
    }

    /// `Σ_k series[k] (f − f(0))^k`, i.e. `g ∘ f` for `g` with Taylor
    /// coefficients `series` at `f(0)`.
    pub fn compose(&self, series: &[Complex64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = ZERO;
        let top = series.len().min(self.layout.order + 1);
        let mut acc = Jet::constant(&self.layout, series[top - 1]);
        for k in (0..top - 1).rev() {
            acc = acc.mul(&h);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    fn order(&self) -> usize {
        self.layout.order
    }

    pub fn recip(&self) -> Result<Jet, EvalError> {
        let a0 = self.value();
        if a0 == ZERO {
            return Err(EvalError::DivisionByZero);
        }
        let inv = ONE / a0;
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut term = inv;
        for _ in 0..=self.order() {
            series.push(term);
            term = -term * inv;
        }
        Ok(self.compose(&series))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, EvalError> {
        if other.is_constant() {
            let b0 = other.value();
            if b0 == ZERO {
                return Err(EvalError::DivisionByZero);
            }
            return Ok(self.scale(ONE / b0));
        }
        Ok(self.mul(&other.recip()?))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let series: Vec<Complex64> = (0..=self.order()).map(|k| e / factorial(k)).collect();
        self.compose(&series)
    }

    pub fn ln(&self) -> Result<Jet, EvalError> {
        let a0 = self.value();
        if a0 == ZERO {
            return Err(EvalError::LogOfZero);
        }
        let mut series = vec![ln_complex(a0)];
        let inv = ONE / a0;
        let mut p = inv;
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(p * (sign / k as f64));
            p *= inv;
        }
        Ok(self.compose(&series))
    }

    /// `f^e` for a constant exponent, through the binomial series at `f(0)`.
    pub fn powc(&self, e: Complex64, what: &'static str) -> Result<Jet, EvalError> {
        let a0 = self.value();
        if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= 64.0 {
            return self.powi(e.re as i32);
        }
        if a0 == ZERO {
            if self.order() == 0 || self.is_constant() {
                return Ok(Jet::constant(&self.layout, pow_scalar(a0, e)?));
            }
            return Err(EvalError::NonDifferentiable(what));
        }
        let inv = ONE / a0;
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut c = pow_scalar(a0, e)?;
        for k in 0..=self.order() {
            series.push(c);
            c = c * (e - k as f64) * inv / (k + 1) as f64;
        }
        Ok(self.compose(&series))
    }

    pub fn powi(&self, k: i32) -> Result<Jet, EvalError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut n = k.unsigned_abs();
        let mut acc = Jet::real(&self.layout, 1.0);
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    pub fn sqrt(&self) -> Result<Jet, EvalError> {
        self.powc(Complex64::new(0.5, 0.0), "sqrt")
    }

    pub fn sin(&self) -> Jet {
        let a0 = self.value();
        let (s, c) = (a0.sin(), a0.cos());
        let cycle = [s, c, -s, -c];
        let series: Vec<Complex64> = (0..=self.order())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&series)
    }

    pub fn cos(&self) -> Jet {
        let a0 = self.value();
        let (s, c) = (a0.sin(), a0.cos());
        let cycle = [c, -s, -c, s];
        let series: Vec<Complex64> = (0..=self.order())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&series)
    }

    pub fn atan(&self) -> Jet {
        let a0 = self.value();
        let order = self.order();
        // 1/(1+(a0+s)^2) = 1/(d0 + d1 s + s^2), expanded by recurrence.
        let d0 = ONE + a0 * a0;
        let d1 = a0 * 2.0;
        let mut g = Vec::with_capacity(order);
        for m in 0..order {
            let prev1 = if m >= 1 { g[m - 1] } else { ZERO };
            let prev2 = if m >= 2 { g[m - 2] } else { ZERO };
            let rhs = if m == 0 { ONE } else { ZERO };
            g.push((rhs - d1 * prev1 - prev2) / d0);
        }
        let mut series = vec![a0.atan()];
        for m in 1..=order {
            series.push(g[m - 1] / m as f64);
        }
        self.compose(&series)
    }

    /// `atan2(y, x)` with derivatives of the smooth angle function.
    pub fn atan2(y: &Jet, x: &Jet) -> Result<Jet, EvalError> {
        let (y0, x0) = (y.value().re, x.value().re);
        if x0 == 0.0 && y0 == 0.0 {
            return Err(EvalError::NonDifferentiable("atan2"));
        }
        let mut out = if x0.abs() >= y0.abs() {
            y.div(x)?.atan()
        } else {
            x.div(y)?.atan().neg()
        };
        out.coeffs[0] = Complex64::new(y0.atan2(x0), 0.0);
        Ok(out)
    }

    /// Modulus of a jet; real jets use the sign rule, complex ones `sqrt(re²+im²)`.
    pub fn abs(&self) -> Result<Jet, EvalError> {
        let a0 = self.value();
        if self.is_constant() {
            return Ok(Jet::real(&self.layout, a0.norm()));
        }
        if a0 == ZERO {
            return Err(EvalError::NonDifferentiable("abs"));
        }
        if self.coeffs.iter().all(|c| c.im == 0.0) {
            return Ok(if a0.re < 0.0 { self.neg() } else { self.clone() });
        }
        let re = self.re();
        let im = self.im();
        re.mul(&re).add(&im.mul(&im)).sqrt()
    }

    /// `Σ (re² + im²)` over the arguments.
    pub fn modulus_squared_sum(args: &[Jet]) -> Jet {
        let mut acc = Jet::real(&args[0].layout, 0.0);
        for a in args {
            let re = a.re();
            let im = a.im();
            acc = acc.add(&re.mul(&re)).add(&im.mul(&im));
        }
        acc
    }

    /// Smooth bump `exp(1 − 1/(1 − u²))` for `|u| < 1`, zero (with all
    /// derivatives) outside.
    pub fn bump(&self) -> Result<Jet, EvalError> {
        let u0 = self.value().re;
        if u0.abs() >= 1.0 {
            return Ok(Jet::real(&self.layout, 0.0));
        }
        let one_minus = self.mul(self).neg().add_constant(ONE);
        Ok(one_minus.recip()?.neg().add_constant(ONE).exp())
    }
}

pub(crate) fn ln_complex(a: Complex64) -> Complex64 {
    if a.im == 0.0 && a.re > 0.0 {
        Complex64::new(a.re.ln(), 0.0)
    } else {
        a.ln()
    }
}

/// Scalar power with exact real branches and a tagged error for `0^e`, `e ≤ 0`.
pub(crate) fn pow_scalar(a: Complex64, e: Complex64) -> Result<Complex64, EvalError> {
    if a == ZERO {
        return if e.re > 0.0 {
            Ok(ZERO)
        } else if e == ZERO {
            Ok(ONE)
        } else {
            Err(EvalError::DivisionByZero)
        };
    }
    if e.im == 0.0 {
        if e.re.fract() == 0.0 && e.re.abs() <= 64.0 {
            return Ok(a.powi(e.re as i32));
        }
        if a.im == 0.0 && a.re > 0.0 {
            return Ok(Complex64::new(a.re.powf(e.re), 0.0));
        }
    }
    Ok(a.powc(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn layout_is_graded() {
        let l = JetLayout::get(2, 2);
        assert_eq!(l.len(), 6);
        assert_eq!(l.multi_indices()[0], vec![0, 0]);
        assert_eq!(l.position(&[1, 1]), Some(4));
    }

    #[test]
    fn univariate_derivatives_of_elementary_functions() {
        let l = JetLayout::get(1, 4);
        let x = Jet::variable(&l, 0, 0.7);
        let e = x.exp();
        for k in 0..=4 {
            assert!(close(e.derivative(&[k]), 0.7f64.exp(), 1e-14));
        }
        let s = x.sin();
        assert!(close(s.derivative(&[3]), -(0.7f64.cos()), 1e-14));
        let lg = x.ln().unwrap();
        assert!(close(lg.derivative(&[2]), -1.0 / 0.49, 1e-13));
        let at = x.atan();
        // d^2/dx^2 atan = -2x/(1+x^2)^2
        assert!(close(at.derivative(&[2]), -1.4 / (1.49f64 * 1.49), 1e-13));
        let sq = x.sqrt().unwrap();
        assert!(close(sq.derivative(&[1]), 0.5 / 0.7f64.sqrt(), 1e-14));
    }

    #[test]
    fn mixed_partials() {
        let l = JetLayout::get(2, 3);
        let x = Jet::variable(&l, 0, 1.2);
        let y = Jet::variable(&l, 1, -0.4);
        let f = x.mul(&y).mul(&y).add(&x.mul(&x).mul(&x));
        assert!(close(f.derivative(&[1, 2]), 2.0, 1e-14));
        assert!(close(f.derivative(&[3, 0]), 6.0, 1e-14));
        assert!(close(f.derivative(&[2, 1]), 0.0, 1e-14));
    }

    #[test]
    fn singular_points_are_tagged() {
        let l = JetLayout::get(1, 2);
        let z = Jet::variable(&l, 0, 0.0);
        assert_eq!(z.recip().unwrap_err(), EvalError::DivisionByZero);
        assert_eq!(z.ln().unwrap_err(), EvalError::LogOfZero);
        assert!(matches!(z.abs(), Err(EvalError::NonDifferentiable(_))));
        assert!(z.powi(3).is_ok());
    }
}
