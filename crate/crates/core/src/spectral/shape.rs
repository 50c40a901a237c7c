use crate::error::{Error, Result};

/// Dimension and truncation order of a spectral representation.
///
/// Modes `k` range over `{-N, ..., N}^d`. Storage is row-major over the
/// shifted index `k + N`, first axis slowest; kernel tables use the same
/// layout for both of their indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    dim: usize,
    order: usize,
}

impl Shape {
    pub fn new(dim: usize, order: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Config(format!("dimension must be 2 or 3, got {dim}")));
        }
        if order == 0 {
            return Err(Error::Config("spectral order must be at least 1".into()));
        }
        Ok(Self { dim, order })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// Modes per axis, `2N + 1`.
    #[inline]
    pub fn side(&self) -> usize {
        2 * self.order + 1
    }

    /// Total number of modes, `(2N + 1)^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat storage position of mode `k`, or `None` when `k` lies outside the box.
    pub fn flat(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let n = self.order as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &kj in k {
            if kj < -n || kj > n {
                return None;
            }
            idx = idx * side + (kj + n) as usize;
        }
        Some(idx)
    }

    /// Mode of a flat storage position. Entries past `dim` are zero.
    pub fn mode(&self, flat: usize) -> [i64; 3] {
        let side = self.side();
        let n = self.order as i64;
        let mut k = [0i64; 3];
        let mut rest = flat;
        for j in (0..self.dim).rev() {
            k[j] = (rest % side) as i64 - n;
            rest /= side;
        }
        k
    }

    /// Flat position of `-k` for the mode stored at `flat`.
    #[inline]
    pub fn mirror(&self, flat: usize) -> usize {
        self.len() - 1 - flat
    }
}
