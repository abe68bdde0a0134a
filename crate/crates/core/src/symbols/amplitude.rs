use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expr::CompiledExpr;
use super::jet::{Jet, JetLayout};
use crate::bounds::Exponent;
use crate::{EvalError, FioError, Result};

/// Claimed class membership of an amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassTag {
    Hormander {
        m: f64,
        rho: f64,
        #[serde(default)]
        delta: f64,
    },
    Rough {
        p: Exponent,
        m: f64,
        rho: f64,
    },
    ProductRough {
        p: Exponent,
        m: Vec<f64>,
        rho: Vec<f64>,
    },
    JointRough {
        p: Exponent,
        m: f64,
        rho: f64,
    },
}

impl ClassTag {
    pub fn validate(&self, arity: usize) -> Result<()> {
        let unit = |v: f64, name: &str| -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(FioError::invalid(format!("{name} must lie in [0,1], got {v}")))
            }
        };
        match self {
            ClassTag::Hormander { m, rho, delta } => {
                finite(*m, "m")?;
                unit(*rho, "rho")?;
                unit(*delta, "delta")
            }
            ClassTag::Rough { p, m, rho } | ClassTag::JointRough { p, m, rho } => {
                p.require_at_least_one()?;
                finite(*m, "m")?;
                unit(*rho, "rho")
            }
            ClassTag::ProductRough { p, m, rho } => {
                p.require_at_least_one()?;
                if m.len() != arity || rho.len() != arity {
                    return Err(FioError::invalid(format!(
                        "product class needs {arity} orders and types, got {} and {}",
                        m.len(),
                        rho.len()
                    )));
                }
                for v in m {
                    finite(*v, "m")?;
                }
                for v in rho {
                    unit(*v, "rho")?;
                }
                Ok(())
            }
        }
    }

    /// `(p, m, ρ)` for single-order classes; smooth classes have `p = ∞`.
    pub fn lebesgue_profile(&self) -> Option<(Exponent, f64, f64)> {
        match self {
            ClassTag::Hormander { m, rho, .. } => Some((Exponent::INFINITY, *m, *rho)),
            ClassTag::Rough { p, m, rho } | ClassTag::JointRough { p, m, rho } => Some((*p, *m, *rho)),
            ClassTag::ProductRough { .. } => None,
        }
    }

    /// Total order (sum over operands for product classes).
    pub fn order(&self) -> f64 {
        match self {
            ClassTag::ProductRough { m, .. } => m.iter().sum(),
            other => other.lebesgue_profile().map(|t| t.1).unwrap_or(0.0),
        }
    }
}

fn finite(v: f64, name: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(FioError::invalid(format!("{name} must be finite")))
    }
}

pub type ValueFn = dyn Fn(&[f64], &[f64]) -> std::result::Result<Complex64, EvalError> + Send + Sync;
pub type JetFn = dyn Fn(&[Jet], &[Jet]) -> std::result::Result<Jet, EvalError> + Send + Sync;
pub type PointFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// One term `b(x) σ(ξ)` of a separable amplitude; `space = None` means `b ≡ 1`.
#[derive(Clone)]
pub struct SeparableTerm {
    pub space: Option<Arc<PointFn>>,
    pub freq: Arc<PointFn>,
}

/// Evaluator for `a(x, ξ_1, …, ξ_N)` with optional analytic derivatives.
///
/// Frequency arguments are one flat slice of length `arity * dim`.
#[derive(Clone)]
pub struct AmplitudeDescriptor {
    dim: usize,
    arity: usize,
    value: Arc<ValueFn>,
    jet: Option<Arc<JetFn>>,
    pub class: ClassTag,
    pub freq_support_radius: Option<f64>,
    separable: Option<Vec<SeparableTerm>>,
    label: String,
}

impl fmt::Debug for AmplitudeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AmplitudeDescriptor")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("arity", &self.arity)
            .field("class", &self.class)
            .field("freq_support_radius", &self.freq_support_radius)
            .field("analytic_derivatives", &self.jet.is_some())
            .field("separable_terms", &self.separable.as_ref().map(Vec::len))
            .finish()
    }
}

impl AmplitudeDescriptor {
    pub fn from_fn<F>(dim: usize, arity: usize, class: ClassTag, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> std::result::Result<Complex64, EvalError> + Send + Sync + 'static,
    {
        AmplitudeDescriptor {
            dim,
            arity,
            value: Arc::new(f),
            jet: None,
            class,
            freq_support_radius: None,
            separable: None,
            label: "custom".into(),
        }
    }

    /// Amplitude given by a compiled expression; derivatives come from jets.
    pub fn from_expression(expr: CompiledExpr, class: ClassTag) -> Result<Self> {
        class.validate(expr.arity())?;
        let expr = Arc::new(expr);
        let (e1, e2) = (expr.clone(), expr.clone());
        let mut a = AmplitudeDescriptor {
            dim: expr.dim(),
            arity: expr.arity(),
            value: Arc::new(move |x, xi| e1.eval(x, xi)),
            jet: Some(Arc::new(move |x, xi| e2.eval_jet(x, xi))),
            class,
            freq_support_radius: None,
            separable: None,
            label: expr.source().to_string(),
        };
        if !expr.uses_space() && expr.arity() == 1 {
            let e3 = expr.clone();
            let zero = vec![0.0; expr.dim()];
            a.separable = Some(vec![SeparableTerm {
                space: None,
                freq: Arc::new(move |xi| e3.eval(&zero, xi).unwrap_or(Complex64::new(f64::NAN, f64::NAN))),
            }]);
        }
        Ok(a)
    }

    /// x-independent symbol `σ(ξ)` (a Fourier multiplier when the phase is linear).
    pub fn multiplier<F>(dim: usize, class: ClassTag, sigma: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        let sigma: Arc<PointFn> = Arc::new(sigma);
        let s = sigma.clone();
        let mut a = AmplitudeDescriptor::from_fn(dim, 1, class, move |_, xi| Ok(s(xi)));
        a.separable = Some(vec![SeparableTerm {
            space: None,
            freq: sigma,
        }]);
        a.label = "multiplier".into();
        a
    }

    /// `b(x) σ(ξ)`.
    pub fn separable<B, S>(dim: usize, class: ClassTag, b: B, sigma: S) -> Self
    where
        B: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
        S: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        let b: Arc<PointFn> = Arc::new(b);
        let sigma: Arc<PointFn> = Arc::new(sigma);
        let (b1, s1) = (b.clone(), sigma.clone());
        let mut a = AmplitudeDescriptor::from_fn(dim, 1, class, move |x, xi| Ok(b1(x) * s1(xi)));
        a.separable = Some(vec![SeparableTerm {
            space: Some(b),
            freq: sigma,
        }]);
        a.label = "separable".into();
        a
    }

    pub fn with_jet<J>(mut self, jet: J) -> Self
    where
        J: Fn(&[Jet], &[Jet]) -> std::result::Result<Jet, EvalError> + Send + Sync + 'static,
    {
        self.jet = Some(Arc::new(jet));
        self
    }

    pub fn with_support_radius(mut self, radius: f64) -> Self {
        self.freq_support_radius = Some(radius);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_class(mut self, class: ClassTag) -> Self {
        self.class = class;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.jet.is_some()
    }

    pub fn separable_terms(&self) -> Option<&[SeparableTerm]> {
        self.separable.as_deref()
    }

    pub fn is_x_independent(&self) -> bool {
        matches!(&self.separable, Some(t) if t.len() == 1 && t[0].space.is_none())
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> std::result::Result<Complex64, EvalError> {
        (self.value)(x, xi)
    }

    /// Jet of the amplitude for the given seeds, when analytic access exists.
    pub fn jet(&self, x: &[Jet], xi: &[Jet]) -> Option<std::result::Result<Jet, EvalError>> {
        self.jet.as_ref().map(|j| j(x, xi))
    }

    /// `∂_ξ^α a(x, ξ)` with `α` indexed like the flat frequency slice.
    pub fn derivative(&self, alpha: &[usize], x: &[f64], xi: &[f64]) -> std::result::Result<Complex64, EvalError> {
        if alpha.iter().all(|&a| a == 0) {
            return self.eval(x, xi);
        }
        match &self.jet {
            Some(j) => {
                let order: usize = alpha.iter().sum();
                let layout = JetLayout::get(xi.len(), order);
                let xs: Vec<Jet> = x.iter().map(|&v| Jet::real(&layout, v)).collect();
                let xis: Vec<Jet> = xi
                    .iter()
                    .enumerate()
                    .map(|(v, &val)| Jet::variable(&layout, v, val))
                    .collect();
                Ok(j(&xs, &xis)?.derivative(alpha))
            }
            None => self.finite_difference(alpha, x, xi),
        }
    }

    /// Central differences with step `1e-3·max(1,|ξ|)` and one Richardson
    /// level, applied one coordinate at a time.
    pub fn finite_difference(
        &self,
        alpha: &[usize],
        x: &[f64],
        xi: &[f64],
    ) -> std::result::Result<Complex64, EvalError> {
        let Some(var) = alpha.iter().position(|&a| a > 0) else {
            return self.eval(x, xi);
        };
        let operand = var / self.dim;
        let block = &xi[operand * self.dim..(operand + 1) * self.dim];
        let radius = block.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = 1e-3 * radius.max(1.0);
        let mut lower = alpha.to_vec();
        lower[var] -= 1;
        let mut shifted = xi.to_vec();
        let mut at = |t: f64| -> std::result::Result<Complex64, EvalError> {
            shifted[var] = xi[var] + t;
            self.finite_difference(&lower, x, &shifted)
        };
        let d = |fp: Complex64, fm: Complex64, step: f64| (fp - fm) / (2.0 * step);
        let coarse = d(at(h)?, at(-h)?, h);
        let fine = d(at(h / 2.0)?, at(-h / 2.0)?, h / 2.0);
        let v = (fine * 4.0 - coarse) / 3.0;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// `c · a`, keeping class and structure.
    pub fn scaled(&self, c: Complex64) -> Self {
        let v = self.value.clone();
        let mut out = self.clone();
        out.value = Arc::new(move |x, xi| Ok(v(x, xi)? * c));
        if let Some(j) = self.jet.clone() {
            out.jet = Some(Arc::new(move |x, xi| Ok(j(x, xi)?.scale(c))));
        }
        if let Some(terms) = &self.separable {
            out.separable = Some(
                terms
                    .iter()
                    .map(|t| {
                        let f = t.freq.clone();
                        SeparableTerm {
                            space: t.space.clone(),
                            freq: Arc::new(move |xi: &[f64]| f(xi) * c) as Arc<PointFn>,
                        }
                    })
                    .collect(),
            );
        }
        out
    }

    /// Pointwise product carrying the supplied class. Derivatives follow the
    /// Leibniz rule through jet multiplication.
    pub fn times(&self, other: &AmplitudeDescriptor, class: ClassTag) -> Result<Self> {
        if self.dim != other.dim || self.arity != other.arity {
            return Err(FioError::invalid("amplitude product needs equal dimension and arity"));
        }
        let (va, vb) = (self.value.clone(), other.value.clone());
        let jet: Option<Arc<JetFn>> = match (&self.jet, &other.jet) {
            (Some(ja), Some(jb)) => {
                let (ja, jb) = (ja.clone(), jb.clone());
                Some(Arc::new(move |x: &[Jet], xi: &[Jet]| Ok(ja(x, xi)?.mul(&jb(x, xi)?))))
            }
            _ => None,
        };
        let separable = match (&self.separable, &other.separable) {
            (Some(ta), Some(tb)) => {
                let mut terms = Vec::with_capacity(ta.len() * tb.len());
                for s in ta {
                    for t in tb {
                        let space: Option<Arc<PointFn>> = match (&s.space, &t.space) {
                            (None, None) => None,
                            (Some(b), None) | (None, Some(b)) => Some(b.clone()),
                            (Some(b1), Some(b2)) => {
                                let (b1, b2) = (b1.clone(), b2.clone());
                                Some(Arc::new(move |x: &[f64]| b1(x) * b2(x)))
                            }
                        };
                        let (f1, f2) = (s.freq.clone(), t.freq.clone());
                        terms.push(SeparableTerm {
                            space,
                            freq: Arc::new(move |xi: &[f64]| f1(xi) * f2(xi)),
                        });
                    }
                }
                Some(terms)
            }
            _ => None,
        };
        let radius = match (self.freq_support_radius, other.freq_support_radius) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Ok(AmplitudeDescriptor {
            dim: self.dim,
            arity: self.arity,
            value: Arc::new(move |x, xi| Ok(va(x, xi)? * vb(x, xi)?)),
            jet,
            class,
            freq_support_radius: radius,
            separable,
            label: format!("({})*({})", self.label, other.label),
        })
    }

    /// `a(x,ξ)·m(ξ)` for a smooth order-zero cutoff `m`; the class is unchanged.
    pub fn cut_off(&self, cutoff: &AmplitudeDescriptor) -> Result<Self> {
        let mut out = self.times(cutoff, self.class.clone())?;
        out.label = format!("{}*{}", self.label, cutoff.label);
        Ok(out)
    }
}

/// Product of two linear amplitudes with class `L^r S^{m₁+m₂}_ρ`, `1/r = 1/p + 1/q`.
///
/// Smooth (Hörmander) factors embed into any smaller `ρ`; two rough factors
/// must share `ρ`.
pub fn product_amplitude(a: &AmplitudeDescriptor, b: &AmplitudeDescriptor) -> Result<AmplitudeDescriptor> {
    if a.arity != 1 || b.arity != 1 {
        return Err(FioError::invalid("product_amplitude expects arity-1 amplitudes"));
    }
    let class = match (&a.class, &b.class) {
        (
            ClassTag::Hormander { m: m1, rho: r1, delta: d1 },
            ClassTag::Hormander { m: m2, rho: r2, delta: d2 },
        ) => ClassTag::Hormander {
            m: m1 + m2,
            rho: r1.min(*r2),
            delta: d1.max(*d2),
        },
        (ca, cb) => {
            let (pa, ma, ra) = ca
                .lebesgue_profile()
                .ok_or_else(|| FioError::ClassMismatch("product classes are not supported".into()))?;
            let (pb, mb, rb) = cb
                .lebesgue_profile()
                .ok_or_else(|| FioError::ClassMismatch("product classes are not supported".into()))?;
            let a_smooth = matches!(ca, ClassTag::Hormander { .. });
            let b_smooth = matches!(cb, ClassTag::Hormander { .. });
            let rho = if (ra - rb).abs() <= 1e-12 {
                ra
            } else if a_smooth && ra > rb {
                rb
            } else if b_smooth && rb > ra {
                ra
            } else {
                return Err(FioError::ClassMismatch(format!("mismatched rho: {ra} vs {rb}")));
            };
            ClassTag::Rough {
                p: Exponent::holder(&[pa, pb]),
                m: ma + mb,
                rho,
            }
        }
    };
    a.times(b, class)
}
