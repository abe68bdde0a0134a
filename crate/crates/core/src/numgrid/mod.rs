//! Grids, sampled fields, Lebesgue and Lorentz norms, and the discrete Fourier
//! transform convention shared by every other module.
//!
//! Forward transform: `f̂(ξ) = ∫ f(x) e^{-i⟨x,ξ⟩} dx`. Inverse:
//! `f(x) = (2π)^{-n} ∫ f̂(ξ) e^{i⟨x,ξ⟩} dξ`. Both are realised exactly on the
//! periodic grid, so the discrete pair is a true inverse.

mod field;
mod grid;
mod io;
mod norms;
mod transform;

pub use field::{Domain, SampledField};
pub use grid::{make_grid, UniformGrid};
pub use io::{read_binary, read_csv, write_binary, write_csv};
pub use norms::{lorentz_norm, lp_norm, truncation_tail_estimate};
pub use transform::{fourier_transform, Direction};
