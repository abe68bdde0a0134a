use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{FioError, Result};

/// Uniform periodic grid on `[-X, X)^n` with its Nyquist-consistent dual grid
/// on `[-Ξ, Ξ)^n`, `Ξ = π N / (2X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    dim: usize,
    points_per_dim: usize,
    space_halfwidth: f64,
}

pub fn make_grid(dim: usize, points_per_dim: usize, space_halfwidth: f64) -> Result<UniformGrid> {
    UniformGrid::new(dim, points_per_dim, space_halfwidth)
}

impl UniformGrid {
    pub fn new(dim: usize, points_per_dim: usize, space_halfwidth: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(FioError::UnsupportedDimension(dim));
        }
        if points_per_dim < 8 || !points_per_dim.is_power_of_two() {
            return Err(FioError::NotPowerOfTwo(points_per_dim));
        }
        if !(space_halfwidth.is_finite() && space_halfwidth > 0.0) {
            return Err(FioError::invalid("space halfwidth must be positive and finite"));
        }
        Ok(Self {
            dim,
            points_per_dim,
            space_halfwidth,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn space_halfwidth(&self) -> f64 {
        self.space_halfwidth
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.space_halfwidth / self.points_per_dim as f64
    }

    pub fn freq_spacing(&self) -> f64 {
        PI / self.space_halfwidth
    }

    pub fn freq_halfwidth(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^n`, the quadrature weight of one space cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `Δξ^n`, the quadrature weight of one frequency cell.
    pub fn freq_cell_volume(&self) -> f64 {
        self.freq_spacing().powi(self.dim as i32)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.space_halfwidth + i as f64 * self.spacing()
    }

    pub fn frequency(&self, k: usize) -> f64 {
        -self.freq_halfwidth() + k as f64 * self.freq_spacing()
    }

    /// Splits a row-major flat index into per-axis indices.
    pub fn split_index(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.points_per_dim, flat % self.points_per_dim]
        }
    }

    pub fn join_index(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.points_per_dim + idx[1]
        }
    }

    /// Space coordinates of a flat index; unused trailing entries are zero.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let idx = self.split_index(flat);
        let mut p = [0.0; 2];
        for (d, slot) in p.iter_mut().enumerate().take(self.dim) {
            *slot = self.coordinate(idx[d]);
        }
        p
    }

    pub fn freq_point(&self, flat: usize) -> [f64; 2] {
        let idx = self.split_index(flat);
        let mut p = [0.0; 2];
        for (d, slot) in p.iter_mut().enumerate().take(self.dim) {
            *slot = self.frequency(idx[d]);
        }
        p
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn freq_points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.freq_point(i)).collect()
    }

    /// Volume of the space box `(2X)^n`.
    pub fn volume(&self) -> f64 {
        (2.0 * self.space_halfwidth).powi(self.dim as i32)
    }
}
