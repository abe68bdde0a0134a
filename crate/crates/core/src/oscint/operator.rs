use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exec::{map_range, try_map_range};
use crate::numgrid::{fourier_transform, truncation_tail_estimate, Direction, Domain, SampledField, UniformGrid};
use crate::symbols::{AmplitudeDescriptor, PhaseDescriptor};
use crate::{FioError, Result};

/// Input frequencies below this fraction of the spectral peak are skipped by
/// direct quadrature; band-limited inputs carry only rounding noise there.
pub const SPECTRAL_FLOOR: f64 = 1e-15;

/// Largest dense kernel cached by [`FioOperator`], in complex entries.
pub const DENSE_CACHE_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMode {
    #[default]
    Direct,
    FastLinearPhase,
}

/// A linear operator `T_a f(x) = (2π)^{-n} ∫ e^{iφ(x,ξ)} a(x,ξ) f̂(ξ) dξ`
/// discretised on a grid.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub amplitude: AmplitudeDescriptor,
    pub phase: PhaseDescriptor,
    pub grid: UniformGrid,
    pub mode: QuadratureMode,
    /// Accept a non-decaying amplitude whose frequency tail is cut at the grid edge.
    pub acknowledge_truncation: bool,
}

/// What happens to the amplitude beyond the grid's frequency box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub order: f64,
    pub freq_halfwidth: f64,
    pub compact_support: bool,
    /// `Ξ^{m+n}` when the tail integral converges.
    pub tail_estimate: Option<f64>,
    pub acknowledged: bool,
}

impl TruncationReport {
    pub fn is_safe(&self) -> bool {
        self.compact_support || self.order < 0.0
    }
}

impl OperatorSpec {
    pub fn new(amplitude: AmplitudeDescriptor, phase: PhaseDescriptor, grid: UniformGrid) -> Self {
        OperatorSpec {
            amplitude,
            phase,
            grid,
            mode: QuadratureMode::Direct,
            acknowledge_truncation: false,
        }
    }

    pub fn with_mode(mut self, mode: QuadratureMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn acknowledging_truncation(mut self) -> Self {
        self.acknowledge_truncation = true;
        self
    }

    pub fn truncation_report(&self) -> TruncationReport {
        let xi_max = self.grid.freq_halfwidth();
        let order = self.amplitude.class.order();
        let compact = matches!(self.amplitude.freq_support_radius, Some(r) if r <= xi_max);
        TruncationReport {
            order,
            freq_halfwidth: xi_max,
            compact_support: compact,
            tail_estimate: if compact {
                Some(0.0)
            } else {
                truncation_tail_estimate(order, xi_max, self.grid.dim())
            },
            acknowledged: self.acknowledge_truncation,
        }
    }

    /// Checks dimensions, the fast-mode contract and the truncation rule.
    pub fn validate(&self) -> Result<TruncationReport> {
        let dim = self.grid.dim();
        if self.amplitude.dim() != dim || self.phase.dim() != dim {
            return Err(FioError::GridMismatch(format!(
                "amplitude (n={}) and phase (n={}) must match the grid (n={dim})",
                self.amplitude.dim(),
                self.phase.dim()
            )));
        }
        if self.amplitude.arity() != 1 {
            return Err(FioError::invalid("linear operators need an arity-1 amplitude"));
        }
        if self.mode == QuadratureMode::FastLinearPhase {
            if !self.phase.is_linear() {
                return Err(FioError::Unsupported("fast mode requires the phase <x, xi>".into()));
            }
            if self.amplitude.separable_terms().is_none() {
                return Err(FioError::Unsupported("fast mode requires a separable amplitude".into()));
            }
        }
        let report = self.truncation_report();
        if !report.is_safe() && !report.acknowledged {
            let n = dim as f64;
            return Err(FioError::UnacknowledgedTruncation {
                tail: report.freq_halfwidth.powf(report.order + n),
            });
        }
        Ok(report)
    }

    /// Flat indices of the frequency grid points inside the amplitude's support.
    pub fn frequency_support(&self) -> Vec<usize> {
        let g = &self.grid;
        match self.amplitude.freq_support_radius {
            Some(r) => (0..g.len())
                .filter(|&k| {
                    let p = g.freq_point(k);
                    p[..g.dim()].iter().map(|v| v * v).sum::<f64>() < r * r
                })
                .collect(),
            None => (0..g.len()).collect(),
        }
    }

    /// `e^{iφ(x,ξ)} a(x,ξ)` at one space and one frequency grid index.
    pub fn kernel_entry(&self, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        let a = self.amplitude.eval(x, xi)?;
        if a == Complex64::new(0.0, 0.0) {
            return Ok(a);
        }
        let phi = self.phase.eval(x, xi)?;
        let v = a * Complex64::from_polar(1.0, phi);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(FioError::NonFinite(format!("kernel at x={x:?}, xi={xi:?}")));
        }
        Ok(v)
    }
}

/// `Δξ^n / (2π)^n`.
fn frequency_weight(grid: &UniformGrid) -> f64 {
    grid.freq_cell_volume() / (2.0 * PI).powi(grid.dim() as i32)
}

fn require_grid(spec: &OperatorSpec, f: &SampledField) -> Result<()> {
    if f.grid != spec.grid || f.domain != Domain::Space {
        return Err(FioError::GridMismatch("input must be a space field on the operator's grid".into()));
    }
    Ok(())
}

/// Applies the operator to `f` using the spec's quadrature mode.
pub fn apply_fio(spec: &OperatorSpec, f: &SampledField) -> Result<SampledField> {
    require_grid(spec, f)?;
    spec.validate()?;
    match spec.mode {
        QuadratureMode::Direct => apply_direct(spec, f),
        QuadratureMode::FastLinearPhase => apply_fast(spec, f),
    }
}

fn apply_direct(spec: &OperatorSpec, f: &SampledField) -> Result<SampledField> {
    let grid = spec.grid;
    let dim = grid.dim();
    let f_hat = fourier_transform(f, Direction::Forward)?;
    let peak = f_hat.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let active: Vec<usize> = spec
        .frequency_support()
        .into_iter()
        .filter(|&k| f_hat.values[k].norm() > SPECTRAL_FLOOR * peak)
        .collect();
    let weight = frequency_weight(&grid);
    let values = try_map_range(grid.len(), |i| -> Result<Complex64> {
        let x = grid.point(i);
        let mut acc = Complex64::new(0.0, 0.0);
        for &k in &active {
            let xi = grid.freq_point(k);
            acc += spec.kernel_entry(&x[..dim], &xi[..dim])? * f_hat.values[k];
        }
        Ok(acc * weight)
    })?;
    SampledField::new(grid, values, Domain::Space)
}

/// Applies `σ(D)` by two transforms.
pub fn apply_multiplier(sigma: &(dyn Fn(&[f64]) -> Complex64 + Sync), f: &SampledField) -> Result<SampledField> {
    let mut f_hat = fourier_transform(f, Direction::Forward)?;
    let grid = f.grid;
    let dim = grid.dim();
    let factors = map_range(grid.len(), |k| sigma(&grid.freq_point(k)[..dim]));
    for (v, s) in f_hat.values.iter_mut().zip(factors) {
        *v *= s;
    }
    fourier_transform(&f_hat, Direction::Inverse)
}

fn apply_fast(spec: &OperatorSpec, f: &SampledField) -> Result<SampledField> {
    let grid = spec.grid;
    let dim = grid.dim();
    let terms = spec
        .amplitude
        .separable_terms()
        .ok_or_else(|| FioError::Unsupported("fast mode requires a separable amplitude".into()))?;
    let mut out = SampledField::zeros(grid, Domain::Space);
    for term in terms {
        let g = apply_multiplier(term.freq.as_ref(), f)?;
        for (i, (o, v)) in out.values.iter_mut().zip(&g.values).enumerate() {
            let b = match &term.space {
                Some(b) => b(&grid.point(i)[..dim]),
                None => Complex64::new(1.0, 0.0),
            };
            *o += b * v;
        }
    }
    check_finite(&out)?;
    Ok(out)
}

fn check_finite(f: &SampledField) -> Result<()> {
    if f.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(FioError::NonFinite("operator output".into()))
    }
}

/// A finite matrix acting on grid samples together with its exact adjoint
/// for the plain inner product `Σ u_i conj(v_i)`.
pub trait DiscreteOperator: Sync {
    fn grid(&self) -> &UniformGrid;
    fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>>;
    fn apply_adjoint(&self, g: &[Complex64]) -> Result<Vec<Complex64>>;
}

/// The quadrature operator of an [`OperatorSpec`] as an explicit matrix
/// `x_i ← Σ_k w K(x_i, ξ_k) (F f)_k`, with the kernel cached when small.
pub struct FioOperator {
    spec: OperatorSpec,
    support: Vec<usize>,
    dense: Option<Vec<Complex64>>,
}

impl FioOperator {
    pub fn new(spec: OperatorSpec) -> Result<Self> {
        spec.validate()?;
        let support = spec.frequency_support();
        let mut op = FioOperator {
            spec,
            support,
            dense: None,
        };
        if op.spec.mode == QuadratureMode::Direct && op.spec.grid.len() * op.support.len() <= DENSE_CACHE_LIMIT {
            op.dense = Some(op.assemble()?);
        }
        Ok(op)
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn is_cached(&self) -> bool {
        self.dense.is_some()
    }

    fn assemble(&self) -> Result<Vec<Complex64>> {
        let grid = self.spec.grid;
        let dim = grid.dim();
        let rows = try_map_range(grid.len(), |i| -> Result<Vec<Complex64>> {
            let x = grid.point(i);
            self.support
                .iter()
                .map(|&k| self.spec.kernel_entry(&x[..dim], &grid.freq_point(k)[..dim]))
                .collect()
        })?;
        Ok(rows.concat())
    }

    fn entry(&self, i: usize, s: usize) -> Result<Complex64> {
        match &self.dense {
            Some(d) => Ok(d[i * self.support.len() + s]),
            None => {
                let grid = self.spec.grid;
                let dim = grid.dim();
                self.spec
                    .kernel_entry(&grid.point(i)[..dim], &grid.freq_point(self.support[s])[..dim])
            }
        }
    }

    fn to_field(&self, values: &[Complex64], domain: Domain) -> Result<SampledField> {
        SampledField::new(self.spec.grid, values.to_vec(), domain)
    }

    fn apply_fast_adjoint(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        let grid = self.spec.grid;
        let dim = grid.dim();
        let terms = self.spec.amplitude.separable_terms().expect("validated separable");
        let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
        for term in terms {
            let weighted: Vec<Complex64> = g
                .iter()
                .enumerate()
                .map(|(i, v)| match &term.space {
                    Some(b) => b(&grid.point(i)[..dim]).conj() * v,
                    None => *v,
                })
                .collect();
            let field = self.to_field(&weighted, Domain::Space)?;
            let freq = term.freq.clone();
            let h = apply_multiplier(&move |xi: &[f64]| freq(xi).conj(), &field)?;
            for (o, v) in out.iter_mut().zip(&h.values) {
                *o += v;
            }
        }
        Ok(out)
    }
}

impl DiscreteOperator for FioOperator {
    fn grid(&self) -> &UniformGrid {
        &self.spec.grid
    }

    fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let field = self.to_field(f, Domain::Space)?;
        if self.spec.mode == QuadratureMode::FastLinearPhase {
            return Ok(apply_fast(&self.spec, &field)?.values);
        }
        let f_hat = fourier_transform(&field, Direction::Forward)?;
        let weight = frequency_weight(&self.spec.grid);
        let out = try_map_range(self.spec.grid.len(), |i| -> Result<Complex64> {
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, &k) in self.support.iter().enumerate() {
                acc += self.entry(i, s)? * f_hat.values[k];
            }
            Ok(acc * weight)
        })?;
        if out.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(FioError::NonFinite("operator output".into()));
        }
        Ok(out)
    }

    fn apply_adjoint(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        if g.len() != self.spec.grid.len() {
            return Err(FioError::GridMismatch("adjoint input has the wrong length".into()));
        }
        if self.spec.mode == QuadratureMode::FastLinearPhase {
            return self.apply_fast_adjoint(g);
        }
        let grid = self.spec.grid;
        let weight = frequency_weight(&grid);
        let partial = try_map_range(self.support.len(), |s| -> Result<Complex64> {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, v) in g.iter().enumerate() {
                acc += self.entry(i, s)?.conj() * v;
            }
            Ok(acc * weight)
        })?;
        let mut z = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (s, &k) in self.support.iter().enumerate() {
            z[k] = partial[s];
        }
        // The adjoint of the forward transform is (4X²/N)^n times its inverse.
        let scale = (4.0 * grid.space_halfwidth().powi(2) / grid.points_per_dim() as f64).powi(grid.dim() as i32);
        let back = fourier_transform(&self.to_field(&z, Domain::Frequency)?, Direction::Inverse)?;
        Ok(back.values.iter().map(|v| v * scale).collect())
    }
}
