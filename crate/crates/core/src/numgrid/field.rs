use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::UniformGrid;
use crate::{FioError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Space,
    Frequency,
}

/// Complex samples on a grid in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: UniformGrid,
    pub values: Vec<Complex64>,
    pub domain: Domain,
}

impl SampledField {
    pub fn new(grid: UniformGrid, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FioError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            domain,
        })
    }

    pub fn zeros(grid: UniformGrid, domain: Domain) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            domain,
        }
    }

    /// Samples `f` at the space grid points.
    pub fn from_fn(grid: UniformGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.point(i)[..dim])).collect();
        Self {
            grid,
            values,
            domain: Domain::Space,
        }
    }

    /// Samples `f` at the frequency grid points.
    pub fn from_freq_fn(grid: UniformGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|i| f(&grid.freq_point(i)[..dim]))
            .collect();
        Self {
            grid,
            values,
            domain: Domain::Frequency,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            domain: self.domain,
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &SampledField) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
            domain: self.domain,
        })
    }

    pub fn sub(&self, other: &SampledField) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn check_compatible(&self, other: &SampledField) -> Result<()> {
        if self.grid != other.grid || self.domain != other.domain {
            return Err(FioError::GridMismatch(
                "fields live on different grids or representations".into(),
            ));
        }
        Ok(())
    }

    /// Quadrature weight of one cell in this field's representation.
    pub fn cell_weight(&self) -> f64 {
        match self.domain {
            Domain::Space => self.grid.cell_volume(),
            Domain::Frequency => self.grid.freq_cell_volume(),
        }
    }

    /// Relative L² distance `‖self − other‖ / ‖other‖`.
    pub fn relative_l2_error(&self, reference: &SampledField) -> Result<f64> {
        self.check_compatible(reference)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.values.iter().zip(&reference.values) {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
        Ok(if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        })
    }

    /// Cyclic shift by whole grid cells along each axis.
    pub fn shifted(&self, shift: [isize; 2]) -> Self {
        let n = self.grid.points_per_dim() as isize;
        let dim = self.grid.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for (flat, v) in self.values.iter().enumerate() {
            let idx = self.grid.split_index(flat);
            let mut target = [0usize; 2];
            for d in 0..dim {
                target[d] = (idx[d] as isize + shift[d]).rem_euclid(n) as usize;
            }
            out[self.grid.join_index(target)] = *v;
        }
        Self {
            grid: self.grid,
            values: out,
            domain: self.domain,
        }
    }
}
