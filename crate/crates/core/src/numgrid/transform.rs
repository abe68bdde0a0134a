use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Domain, SampledField};
use crate::{FioError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies the continuous-convention transform on the grid.
///
/// With `x_i = -X + i h` and `ξ_k = -Ξ + k Δξ`, the kernel `e^{-i x_i ξ_k}`
/// factors as `(-1)^{i+k} e^{-2πi ik/N}` (the remaining `e^{-iπN/2}` is 1 for
/// the admissible `N`), so both directions reduce to one FFT per axis.
pub fn fourier_transform(field: &SampledField, direction: Direction) -> Result<SampledField> {
    let expected = match direction {
        Direction::Forward => Domain::Space,
        Direction::Inverse => Domain::Frequency,
    };
    if field.domain != expected {
        return Err(FioError::GridMismatch(format!(
            "{direction:?} transform expects a {expected:?} field"
        )));
    }
    let grid = field.grid;
    let n = grid.points_per_dim();
    let dim = grid.dim();
    let mut data = field.values.clone();
    for (flat, v) in data.iter_mut().enumerate() {
        let idx = grid.split_index(flat);
        *v *= sign(idx[0] + if dim == 2 { idx[1] } else { 0 });
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = match direction {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    };
    if dim == 1 {
        fft.process(&mut data);
    } else {
        fft.process(&mut data);
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                column[r] = data[r * n + c];
            }
            fft.process(&mut column);
            for r in 0..n {
                data[r * n + c] = column[r];
            }
        }
    }
    let scale = match direction {
        Direction::Forward => grid.cell_volume(),
        Direction::Inverse => (1.0 / (grid.spacing() * n as f64)).powi(dim as i32),
    };
    for (flat, v) in data.iter_mut().enumerate() {
        let idx = grid.split_index(flat);
        *v *= scale * sign(idx[0] + if dim == 2 { idx[1] } else { 0 });
    }
    Ok(SampledField {
        grid,
        values: data,
        domain: match direction {
            Direction::Forward => Domain::Frequency,
            Direction::Inverse => Domain::Space,
        },
    })
}
