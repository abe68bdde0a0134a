use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex64;

use super::{Domain, SampledField, UniformGrid};
use crate::{FioError, Result};

/// Writes `i[,j],re,im` rows with a header line.
pub fn write_csv<W: Write>(field: &SampledField, mut out: W) -> Result<()> {
    let dim = field.grid.dim();
    if dim == 1 {
        writeln!(out, "i,re,im")?;
    } else {
        writeln!(out, "i,j,re,im")?;
    }
    for (flat, v) in field.values.iter().enumerate() {
        let idx = field.grid.split_index(flat);
        if dim == 1 {
            writeln!(out, "{},{:e},{:e}", idx[0], v.re, v.im)?;
        } else {
            writeln!(out, "{},{},{:e},{:e}", idx[0], idx[1], v.re, v.im)?;
        }
    }
    Ok(())
}

/// Reads the CSV layout of [`write_csv`]; every grid point must appear once.
pub fn read_csv<R: Read>(grid: UniformGrid, domain: Domain, input: R) -> Result<SampledField> {
    let dim = grid.dim();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut seen = vec![false; grid.len()];
    let reader = BufReader::new(input);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('i')) {
            continue;
        }
        let bad = |what: &str| FioError::invalid(format!("csv line {}: {what}", lineno + 1));
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != dim + 2 {
            return Err(bad(&format!("expected {} columns", dim + 2)));
        }
        let mut idx = [0usize; 2];
        for d in 0..dim {
            idx[d] = cols[d].parse().map_err(|_| bad("bad index"))?;
            if idx[d] >= grid.points_per_dim() {
                return Err(bad("index out of range"));
            }
        }
        let re: f64 = cols[dim].parse().map_err(|_| bad("bad real part"))?;
        let im: f64 = cols[dim + 1].parse().map_err(|_| bad("bad imaginary part"))?;
        let flat = grid.join_index(idx);
        if seen[flat] {
            return Err(bad("duplicate index"));
        }
        seen[flat] = true;
        values[flat] = Complex64::new(re, im);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(FioError::GridMismatch(format!(
            "csv is missing grid point {missing} of {}",
            grid.len()
        )));
    }
    SampledField::new(grid, values, domain)
}

/// Raw little-endian layout: `dim: u64, N: u64, X: f64`, then `re, im` pairs.
pub fn write_binary<W: Write>(field: &SampledField, mut out: W) -> Result<()> {
    let g = field.grid;
    out.write_all(&(g.dim() as u64).to_le_bytes())?;
    out.write_all(&(g.points_per_dim() as u64).to_le_bytes())?;
    out.write_all(&g.space_halfwidth().to_le_bytes())?;
    for v in &field.values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(domain: Domain, mut input: R) -> Result<SampledField> {
    let mut word = [0u8; 8];
    let mut next = |input: &mut R| -> Result<[u8; 8]> {
        input.read_exact(&mut word)?;
        Ok(word)
    };
    let dim = u64::from_le_bytes(next(&mut input)?) as usize;
    let n = u64::from_le_bytes(next(&mut input)?) as usize;
    let x = f64::from_le_bytes(next(&mut input)?);
    let grid = UniformGrid::new(dim, n, x)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = f64::from_le_bytes(next(&mut input)?);
        let im = f64::from_le_bytes(next(&mut input)?);
        values.push(Complex64::new(re, im));
    }
    SampledField::new(grid, values, domain)
}
