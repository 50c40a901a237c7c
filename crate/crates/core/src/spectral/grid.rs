use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform tensor grid on the periodic box `[-pi, pi)^d`.
///
/// Nodes along each axis are `-pi + j h`, `h = 2 pi / n`, `j = 0..n`.
/// Samples are stored row-major, first axis slowest.
#[derive(Clone)]
pub struct VelocityGrid {
    dim: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for VelocityGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VelocityGrid")
            .field("dim", &self.dim)
            .field("points_per_axis", &self.n)
            .finish()
    }
}

impl VelocityGrid {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Config(format!("dimension must be 2 or 3, got {dim}")));
        }
        if points_per_axis < 2 {
            return Err(Error::Config("grid needs at least 2 points per axis".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            n: points_per_axis,
            forward: planner.plan_fft_forward(points_per_axis),
            inverse: planner.plan_fft_inverse(points_per_axis),
        })
    }

    /// Smallest power-of-two grid with at least `2N + 2` points per axis.
    pub fn for_order(dim: usize, order: usize) -> Result<Self> {
        Self::new(dim, (2 * order + 2).next_power_of_two())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis_nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|j| -PI + j as f64 * h).collect()
    }

    /// Whether this grid interpolates `P^order` exactly.
    pub fn supports(&self, order: usize) -> bool {
        self.n >= 2 * order + 2
    }

    pub fn check_order(&self, order: usize) -> Result<()> {
        if self.supports(order) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "grid with {} points per axis cannot represent order {order} (needs >= {})",
                self.n,
                2 * order + 2
            )))
        }
    }

    /// Coordinates of the node stored at `flat`. Entries past `dim` are zero.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let h = self.spacing();
        let mut v = [0.0; 3];
        let mut rest = flat;
        for j in (0..self.dim).rev() {
            v[j] = -PI + (rest % self.n) as f64 * h;
            rest /= self.n;
        }
        v
    }

    /// Evaluates `f` at every node.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let v = self.point(i);
                f(&v[..self.dim])
            })
            .collect()
    }

    /// In-place unnormalized d-dimensional DFT.
    pub(crate) fn transform(&self, data: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(data.len(), self.len());
        let fft = if inverse { &self.inverse } else { &self.forward };
        let n = self.n;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, value) in line.iter().enumerate() {
                        data[base + j * stride] = *value;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_of_two_sizing() {
        assert_eq!(VelocityGrid::for_order(2, 4).unwrap().points_per_axis(), 16);
        assert_eq!(VelocityGrid::for_order(2, 8).unwrap().points_per_axis(), 32);
        assert_eq!(VelocityGrid::for_order(2, 16).unwrap().points_per_axis(), 64);
        assert_eq!(VelocityGrid::for_order(3, 32).unwrap().points_per_axis(), 128);
    }

    #[test]
    fn spacing_is_exact() {
        let g = VelocityGrid::new(2, 64).unwrap();
        let nodes = g.axis_nodes();
        assert_eq!(g.spacing(), 2.0 * PI / 64.0);
        assert_eq!(nodes[0], -PI);
        for w in nodes.windows(2) {
            assert!((w[1] - w[0] - g.spacing()).abs() < 1e-15);
        }
    }

    #[test]
    fn order_check() {
        let g = VelocityGrid::new(2, 17).unwrap();
        assert!(g.check_order(7).is_ok());
        assert!(matches!(g.check_order(8), Err(Error::Config(_))));
    }
}
