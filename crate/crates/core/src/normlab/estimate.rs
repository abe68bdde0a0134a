use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::Exponent;
use crate::exec::map_slice;
use crate::numgrid::{fourier_transform, lp_norm, Direction, Domain, SampledField, UniformGrid};
use crate::oscint::{DiscreteOperator, FioOperator, OperatorSpec};
use crate::{FioError, Result};

pub const POWER_ITERATIONS: usize = 50;
pub const POWER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    PowerIteration,
    TestBank,
}

impl NormMethod {
    pub fn for_exponents(q: Exponent, r: Exponent) -> Self {
        if q.recip() == 0.5 && r.recip() == 0.5 {
            NormMethod::PowerIteration
        } else {
            NormMethod::TestBank
        }
    }
}

/// A lower estimate of `‖T‖_{L^q → L^r}` and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    /// Power iterations used, or test functions tried.
    pub work: usize,
    /// Name of the probe attaining the maximum (test bank only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_probe: Option<String>,
}

/// Deterministic stream for `(seed, level, slot)`, independent of how the
/// draws are scheduled.
fn stream(seed: u64, level: u32, slot: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((level as u64) << 32) | slot as u64);
    rng
}

/// Random field whose spectrum fills the ball `|ξ| ≤ band`.
pub fn random_band_limited(grid: UniformGrid, band: f64, seed: u64, level: u32, slot: u32) -> Result<SampledField> {
    let dim = grid.dim();
    let mut rng = stream(seed, level, slot);
    let mut values = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        let xi = grid.freq_point(k);
        let r2: f64 = xi[..dim].iter().map(|v| v * v).sum();
        values.push(if r2 <= band * band { Complex64::new(re, im) } else { Complex64::new(0.0, 0.0) });
    }
    let hat = SampledField::new(grid, values, Domain::Frequency)?;
    fourier_transform(&hat, Direction::Inverse)
}

fn gaussian(grid: UniformGrid, width: f64, freq: f64) -> SampledField {
    SampledField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::from_polar((-0.5 * r2 / (width * width)).exp(), freq * x[0])
    })
}

/// Named test functions: Gaussians at three widths, unit-width Gaussians
/// modulated to each dyadic frequency, wave packets of width `2^{-j/2}` at
/// frequency `2^j`, and `bank_size` random fields limited to `|ξ| ≤ band`.
pub fn test_bank(grid: UniformGrid, band: f64, bank_size: usize, seed: u64, level: u32) -> Result<Vec<(String, SampledField)>> {
    let finest = 2.0 * grid.spacing();
    let nyquist = grid.freq_halfwidth();
    let mut bank = Vec::new();
    for w in [1.0, 0.25, 0.0625] {
        if w >= finest {
            bank.push((format!("gaussian(width={w})"), gaussian(grid, w, 0.0)));
        }
    }
    let mut j = 0;
    while 2f64.powi(j) <= nyquist {
        let freq = 2f64.powi(j);
        bank.push((format!("modulated_gaussian(freq={freq})"), gaussian(grid, 1.0, freq)));
        let w = 2f64.powf(-0.5 * j as f64);
        if w >= finest {
            bank.push((format!("wave_packet(level={j})"), gaussian(grid, w, freq)));
        }
        j += 1;
    }
    for slot in 0..bank_size {
        let f = random_band_limited(grid, band.min(nyquist), seed, level, slot as u32)?;
        bank.push((format!("random(slot={slot})"), f));
    }
    Ok(bank)
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `sqrt` of the top eigenvalue of `T*T`, by power iteration from a seeded
/// random start.
pub fn power_iteration(op: &dyn DiscreteOperator, seed: u64, level: u32) -> Result<NormEstimate> {
    let grid = *op.grid();
    let start = random_band_limited(grid, f64::INFINITY, seed, level, 0)?;
    let mut v = start.values;
    let n0 = l2(&v);
    v.iter_mut().for_each(|z| *z /= n0);
    let mut lambda = 0.0;
    let mut used = 0;
    for it in 1..=POWER_ITERATIONS {
        used = it;
        let w = op.apply_adjoint(&op.apply(&v)?)?;
        let next = l2(&w);
        if !next.is_finite() {
            return Err(FioError::NonFinite("power iteration".into()));
        }
        if next == 0.0 {
            lambda = 0.0;
            break;
        }
        let done = it > 1 && (next - lambda).abs() <= POWER_TOLERANCE * next;
        lambda = next;
        v = w.into_iter().map(|z| z / next).collect();
        if done {
            break;
        }
    }
    Ok(NormEstimate {
        value: lambda.sqrt(),
        method: NormMethod::PowerIteration,
        work: used,
        best_probe: None,
    })
}

/// Largest ratio `‖Tf‖_r / ‖f‖_q` over the test bank.
pub fn bank_estimate(
    op: &dyn DiscreteOperator,
    q: Exponent,
    r: Exponent,
    band: f64,
    bank_size: usize,
    seed: u64,
    level: u32,
) -> Result<NormEstimate> {
    let grid = *op.grid();
    let bank = test_bank(grid, band, bank_size, seed, level)?;
    let ratios = map_slice(&bank, |(_, f)| -> Result<f64> {
        let tf = SampledField::new(grid, op.apply(&f.values)?, Domain::Space)?;
        let num = lp_norm(&tf, r.value())?;
        let den = lp_norm(f, q.value())?;
        if !num.is_finite() {
            return Err(FioError::NonFinite("operator output".into()));
        }
        Ok(if den > 0.0 { num / den } else { 0.0 })
    });
    let mut best = (0.0, None);
    for ((name, _), ratio) in bank.iter().zip(ratios) {
        let ratio = ratio?;
        if ratio > best.0 || best.1.is_none() {
            best = (ratio, Some(name.clone()));
        }
    }
    Ok(NormEstimate {
        value: best.0,
        method: NormMethod::TestBank,
        work: bank.len(),
        best_probe: best.1,
    })
}

/// Lower estimate of `‖T‖_{L^q → L^r}` for the operator described by `spec`.
///
/// `(q, r) = (2, 2)` uses power iteration on `T*T` with the exact discrete
/// adjoint; any other pair takes the maximum over the test bank.
pub fn estimate_operator_norm(spec: &OperatorSpec, q: Exponent, r: Exponent, bank_size: usize, seed: u64) -> Result<f64> {
    let op = FioOperator::new(spec.clone())?;
    estimate_with(&op, q, r, bank_size, seed, 0).map(|e| e.value)
}

pub(crate) fn estimate_with(op: &FioOperator, q: Exponent, r: Exponent, bank_size: usize, seed: u64, level: u32) -> Result<NormEstimate> {
    match NormMethod::for_exponents(q, r) {
        NormMethod::PowerIteration => power_iteration(op, seed, level),
        NormMethod::TestBank => {
            let band = op.spec().amplitude.freq_support_radius.unwrap_or(f64::INFINITY);
            bank_estimate(op, q, r, band, bank_size, seed, level)
        }
    }
}
