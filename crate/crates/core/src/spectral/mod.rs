//! Periodic velocity-space representation: grids, transforms, projection, norms.

mod field;
mod grid;
mod shape;

pub use field::SpectralField;
pub use grid::VelocityGrid;
pub use shape::Shape;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Norms available for spectral fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    /// Continuum L2 norm via Parseval.
    L2,
    /// Sobolev `H^r` norm with weight `(1 + |k|^2)^r`.
    Sobolev(f64),
    /// Trapezoid approximation of the L1 norm on the companion grid.
    L1Grid,
    /// Maximum of `|f|` over the companion grid nodes.
    LinfGrid,
}

fn parity_sign(k: &[i64]) -> f64 {
    if k.iter().sum::<i64>().rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn wrap_index(shape: Shape, flat: usize, n: usize) -> (usize, f64) {
    let k = shape.mode(flat);
    let k = &k[..shape.dim()];
    let mut idx = 0usize;
    for &kj in k {
        idx = idx * n + kj.rem_euclid(n as i64) as usize;
    }
    (idx, parity_sign(k))
}

/// Trigonometric interpolation of grid samples, truncated to `|k_j| <= order`.
pub fn project(samples: &[f64], grid: &VelocityGrid, order: usize) -> Result<SpectralField> {
    let shape = Shape::new(grid.dim(), order)?;
    grid.check_order(order)?;
    if samples.len() != grid.len() {
        return Err(Error::Config(format!(
            "{} samples do not match a grid of {} nodes",
            samples.len(),
            grid.len()
        )));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::Argument("non-finite sample".into()));
    }
    let mut data: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    grid.transform(&mut data, false);
    let scale = 1.0 / grid.len() as f64;
    let n = grid.points_per_axis();
    let coeffs = (0..shape.len())
        .map(|i| {
            let (j, sign) = wrap_index(shape, i, n);
            data[j] * (sign * scale)
        })
        .collect();
    Ok(SpectralField::from_raw(shape, coeffs))
}

/// Values of the trigonometric polynomial at the grid nodes (real part).
pub fn evaluate(field: &SpectralField, grid: &VelocityGrid) -> Result<Vec<f64>> {
    if field.dim() != grid.dim() {
        return Err(Error::Config("field and grid dimensions differ".into()));
    }
    grid.check_order(field.order())?;
    if !field.is_finite() {
        return Err(Error::Argument("non-finite spectral coefficient".into()));
    }
    let shape = field.shape();
    let n = grid.points_per_axis();
    let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (i, c) in field.coeffs().iter().enumerate() {
        let (j, sign) = wrap_index(shape, i, n);
        data[j] = c * sign;
    }
    grid.transform(&mut data, true);
    Ok(data.into_iter().map(|z| z.re).collect())
}

/// `norm` using the default companion grid for the grid-based kinds.
pub fn norm(field: &SpectralField, kind: Norm) -> f64 {
    match kind {
        Norm::L2 | Norm::Sobolev(_) => coefficient_norm(field, kind),
        Norm::L1Grid | Norm::LinfGrid => {
            let grid = VelocityGrid::for_order(field.dim(), field.order())
                .expect("field shapes are always valid grid dimensions");
            norm_on_grid(field, kind, &grid).expect("companion grid supports the field order")
        }
    }
}

/// `norm` with an explicit grid for the grid-based kinds.
pub fn norm_on_grid(field: &SpectralField, kind: Norm, grid: &VelocityGrid) -> Result<f64> {
    match kind {
        Norm::L2 | Norm::Sobolev(_) => Ok(coefficient_norm(field, kind)),
        Norm::L1Grid => Ok(grid_l1(&evaluate(field, grid)?, grid)),
        Norm::LinfGrid => Ok(grid_linf(&evaluate(field, grid)?)),
    }
}

fn coefficient_norm(field: &SpectralField, kind: Norm) -> f64 {
    let shape = field.shape();
    let volume = (2.0 * PI).powi(field.dim() as i32);
    let sum: f64 = match kind {
        Norm::L2 => field.coeffs().iter().map(|c| c.norm_sqr()).sum(),
        Norm::Sobolev(r) => field
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = shape.mode(i);
                let k2: i64 = k.iter().map(|x| x * x).sum();
                (1.0 + k2 as f64).powf(r) * c.norm_sqr()
            })
            .sum(),
        _ => unreachable!(),
    };
    (volume * sum).sqrt()
}

/// Trapezoid quadrature of `|f|` over the periodic box.
pub fn grid_l1(values: &[f64], grid: &VelocityGrid) -> f64 {
    values.iter().map(|v| v.abs()).sum::<f64>() * grid.cell_volume()
}

pub fn grid_linf(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).fold(0.0, f64::max)
}
