//! Bilinear and trilinear operators: direct quadrature, evaluation by freezing
//! one operand at a time, and the frequency splitting of bilinear amplitudes.

mod freeze;
mod split;

pub use freeze::{freeze_argument, freeze_operand, transferred_class};
pub use split::{frequency_split, split_weight};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::Exponent;
use crate::exec::try_map_range;
use crate::numgrid::{Domain, SampledField, UniformGrid};
use crate::oscint::{apply_fio, OperatorSpec};
use crate::symbols::builtins::{spatial_cutoff, spatial_cutoff_jet};
use crate::symbols::{AmplitudeDescriptor, ClassTag, Jet, PhaseDescriptor};
use crate::{FioError, Result};

use freeze::weighted_spectrum;

/// Evaluation budget of direct quadrature, per output point.
pub const DIRECT_BUDGET: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MultilinearMode {
    Direct,
    #[default]
    Iterated,
}

/// `T_a(f₁,…,f_N)(x) = (2π)^{-nN} ∫ a(x,ξ₁,…,ξ_N) e^{iΣφ_j(x,ξ_j)} Π f̂_j(ξ_j) dξ`.
#[derive(Debug, Clone)]
pub struct MultilinearSpec {
    pub amplitude: AmplitudeDescriptor,
    pub phases: Vec<PhaseDescriptor>,
    pub grid: UniformGrid,
    pub acknowledge_truncation: bool,
}

impl MultilinearSpec {
    pub fn new(amplitude: AmplitudeDescriptor, phases: Vec<PhaseDescriptor>, grid: UniformGrid) -> Result<Self> {
        let spec = MultilinearSpec {
            amplitude,
            phases,
            grid,
            acknowledge_truncation: false,
        };
        spec.check_shape()?;
        Ok(spec)
    }

    pub fn acknowledging_truncation(mut self) -> Self {
        self.acknowledge_truncation = true;
        self
    }

    pub fn arity(&self) -> usize {
        self.amplitude.arity()
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.grid.dim();
        let arity = self.amplitude.arity();
        if self.phases.len() != arity {
            return Err(FioError::invalid(format!(
                "{} phases given for an amplitude with {arity} operands",
                self.phases.len()
            )));
        }
        if self.amplitude.dim() != n || self.phases.iter().any(|p| p.dim() != n) {
            return Err(FioError::GridMismatch("amplitude and phases must match the grid dimension".into()));
        }
        match (arity, n) {
            (2, 1) | (2, 2) | (3, 1) => Ok(()),
            _ => Err(FioError::Unsupported(format!("{arity} operands in dimension {n}"))),
        }
    }

    /// Every operand must see a decaying or compactly supported amplitude
    /// unless truncation was acknowledged.
    fn check_truncation(&self) -> Result<()> {
        if self.acknowledge_truncation || self.amplitude.freq_support_radius.is_some() {
            return Ok(());
        }
        let decays = match &self.amplitude.class {
            ClassTag::ProductRough { m, .. } => m.iter().all(|v| *v < 0.0),
            other => other.order() < 0.0,
        };
        if decays {
            return Ok(());
        }
        let n = (self.grid.dim() * self.arity()) as f64;
        Err(FioError::UnacknowledgedTruncation {
            tail: self.grid.freq_halfwidth().powf(self.amplitude.class.order() + n),
        })
    }
}

/// Applies a multilinear operator to `inputs`, one per operand.
pub fn apply_multilinear(spec: &MultilinearSpec, inputs: &[SampledField], mode: MultilinearMode) -> Result<SampledField> {
    spec.check_shape()?;
    if inputs.len() != spec.arity() {
        return Err(FioError::invalid(format!("expected {} inputs, got {}", spec.arity(), inputs.len())));
    }
    for f in inputs {
        if f.grid != spec.grid || f.domain != Domain::Space {
            return Err(FioError::GridMismatch("every input must be a space field on the spec's grid".into()));
        }
    }
    spec.check_truncation()?;
    match mode {
        MultilinearMode::Direct => apply_direct(spec, inputs),
        MultilinearMode::Iterated => apply_iterated(spec, inputs),
    }
}

fn apply_iterated(spec: &MultilinearSpec, inputs: &[SampledField]) -> Result<SampledField> {
    let frozen = freeze_operand(&spec.amplitude, 0, &spec.phases[0], &inputs[0], None)?;
    if spec.arity() == 2 {
        let linear = OperatorSpec::new(frozen, spec.phases[1].clone(), spec.grid).acknowledging_truncation();
        return apply_fio(&linear, &inputs[1]);
    }
    let rest = MultilinearSpec {
        amplitude: frozen,
        phases: spec.phases[1..].to_vec(),
        grid: spec.grid,
        acknowledge_truncation: true,
    };
    apply_iterated(&rest, &inputs[1..])
}

fn apply_direct(spec: &MultilinearSpec, inputs: &[SampledField]) -> Result<SampledField> {
    let grid = spec.grid;
    let dim = grid.dim();
    let spectra: Vec<Vec<(Vec<f64>, Complex64)>> = inputs.iter().map(weighted_spectrum).collect::<Result<_>>()?;
    let work = spectra.iter().map(Vec::len).try_fold(1usize, |acc, l| acc.checked_mul(l));
    match work {
        Some(w) if w <= DIRECT_BUDGET => {}
        _ => {
            return Err(FioError::Unsupported(format!(
                "direct quadrature needs more than {DIRECT_BUDGET} evaluations per point; use iterated mode"
            )))
        }
    }
    let arity = spec.arity();
    let values = try_map_range(grid.len(), |i| -> Result<Complex64> {
        let x = &grid.point(i)[..dim];
        // Phase factors times weighted spectra, per operand.
        let factors: Vec<Vec<Complex64>> = spectra
            .iter()
            .zip(&spec.phases)
            .map(|(s, phase)| {
                s.iter()
                    .map(|(xi, w)| Ok(w * Complex64::from_polar(1.0, phase.eval(x, xi)?)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut flat = vec![0.0; arity * dim];
        let mut idx = vec![0usize; arity];
        let mut acc = Complex64::new(0.0, 0.0);
        'outer: loop {
            let mut weight = Complex64::new(1.0, 0.0);
            for (op, &k) in idx.iter().enumerate() {
                flat[op * dim..(op + 1) * dim].copy_from_slice(&spectra[op][k].0);
                weight *= factors[op][k];
            }
            acc += spec.amplitude.eval(x, &flat)? * weight;
            for op in (0..arity).rev() {
                idx[op] += 1;
                if idx[op] < spectra[op].len() {
                    continue 'outer;
                }
                idx[op] = 0;
            }
            break;
        }
        if !(acc.re.is_finite() && acc.im.is_finite()) {
            return Err(FioError::NonFinite("multilinear output".into()));
        }
        Ok(acc)
    })?;
    SampledField::new(grid, values, Domain::Space)
}

/// `ψ(x) ⟨ξ⟩^{-1} ⟨η⟩^{-1} e^{iξη/(⟨ξ⟩⟨η⟩)}` in one dimension: a bilinear
/// amplitude that does not factor into operand pieces.
pub fn coupled_bilinear_amplitude() -> AmplitudeDescriptor {
    let class = ClassTag::ProductRough {
        p: Exponent::INFINITY,
        m: vec![-1.0, -1.0],
        rho: vec![1.0, 1.0],
    };
    AmplitudeDescriptor::from_fn(1, 2, class, |x, xi| {
        let (u, v) = (xi[0], xi[1]);
        let (bu, bv) = ((1.0 + u * u).sqrt(), (1.0 + v * v).sqrt());
        Ok(Complex64::from_polar(spatial_cutoff(x) / (bu * bv), u * v / (bu * bv)))
    })
    .with_jet(|x, xi| {
        let one = Complex64::new(1.0, 0.0);
        let bu = xi[0].mul(&xi[0]).add_constant(one).sqrt()?;
        let bv = xi[1].mul(&xi[1]).add_constant(one).sqrt()?;
        let inv = bu.mul(&bv).recip()?;
        let phase = xi[0].mul(&xi[1]).mul(&inv).scale(Complex64::new(0.0, 1.0)).exp();
        Ok(spatial_cutoff_jet(x)?.mul(&inv).mul(&phase))
    })
    .with_label("coupled_bilinear")
}

/// `a ≡ 1` with `arity` operands.
pub fn unit_amplitude(dim: usize, arity: usize) -> AmplitudeDescriptor {
    AmplitudeDescriptor::from_fn(dim, arity, ClassTag::Hormander { m: 0.0, rho: 1.0, delta: 0.0 }, |_, _| {
        Ok(Complex64::new(1.0, 0.0))
    })
    .with_jet(|_, xi| Ok(Jet::real(xi[0].layout(), 1.0)))
    .with_label("one")
}

pub const MULTILINEAR_AMPLITUDE_NAMES: [&str; 2] = ["one", "coupled_bilinear"];

pub fn builtin_multilinear_amplitude(name: &str, dim: usize, arity: usize) -> Result<AmplitudeDescriptor> {
    match name.trim() {
        "one" => Ok(unit_amplitude(dim, arity)),
        "coupled_bilinear" if dim == 1 && arity == 2 => Ok(coupled_bilinear_amplitude()),
        "coupled_bilinear" => Err(FioError::Unsupported("coupled_bilinear is defined for n=1 with two operands".into())),
        other => Err(FioError::invalid(format!("unknown multilinear amplitude `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numgrid::make_grid;

    fn gaussian(grid: UniformGrid, c: f64, w: f64) -> SampledField {
        SampledField::from_fn(grid, |x| Complex64::new((-(x[0] - c).powi(2) * w).exp(), 0.0))
    }

    #[test]
    fn unit_amplitude_gives_products() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let (f, h) = (gaussian(g, 0.5, 1.0), gaussian(g, -0.3, 2.0));
        let spec = MultilinearSpec::new(unit_amplitude(1, 2), vec![PhaseDescriptor::linear(1); 2], g)
            .unwrap()
            .acknowledging_truncation();
        let expected = SampledField::new(g, f.values.iter().zip(&h.values).map(|(a, b)| a * b).collect(), Domain::Space).unwrap();
        for mode in [MultilinearMode::Direct, MultilinearMode::Iterated] {
            let out = apply_multilinear(&spec, &[f.clone(), h.clone()], mode).unwrap();
            assert!(out.relative_l2_error(&expected).unwrap() < 1e-10, "{mode:?}");
        }
    }

    #[test]
    fn unsupported_table_entries() {
        let g = make_grid(2, 16, 4.0).unwrap();
        let err = MultilinearSpec::new(unit_amplitude(2, 3), vec![PhaseDescriptor::linear(2); 3], g).unwrap_err();
        assert!(matches!(err, FioError::Unsupported(_)));
    }

    #[test]
    fn non_decaying_needs_acknowledgement() {
        let g = make_grid(1, 32, 4.0).unwrap();
        let spec = MultilinearSpec::new(unit_amplitude(1, 2), vec![PhaseDescriptor::linear(1); 2], g).unwrap();
        let f = gaussian(g, 0.0, 1.0);
        assert!(matches!(
            apply_multilinear(&spec, &[f.clone(), f], MultilinearMode::Direct),
            Err(FioError::UnacknowledgedTruncation { .. })
        ));
    }
}
