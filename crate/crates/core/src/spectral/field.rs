use std::ops::{Add, Sub};

use num_complex::Complex64;

use super::shape::Shape;
use crate::error::{Error, Result};

/// Fourier coefficients of a periodic velocity distribution on `[-pi, pi)^d`.
///
/// `f(v) = sum_k c_k exp(i k.v)` over `k in {-N..N}^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    shape: Shape,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(shape: Shape) -> Self {
        Self {
            shape,
            coeffs: vec![Complex64::new(0.0, 0.0); shape.len()],
        }
    }

    pub fn from_coeffs(shape: Shape, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != shape.len() {
            return Err(Error::Argument(format!(
                "expected {} coefficients for {:?}, got {}",
                shape.len(),
                shape,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("non-finite spectral coefficient".into()));
        }
        Ok(Self { shape, coeffs })
    }

    /// Builds a field without the finiteness check; callers inspect the result.
    pub(crate) fn from_raw(shape: Shape, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), shape.len());
        Self { shape, coeffs }
    }

    #[inline]
    pub fn shape(&self) -> Shape {
        self.shape
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.shape.order()
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of mode `k`; zero outside the truncation box.
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.shape
            .flat(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, k: &[i64], value: Complex64) -> Result<()> {
        let i = self
            .shape
            .flat(k)
            .ok_or_else(|| Error::Argument(format!("mode {k:?} outside {:?}", self.shape)))?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// The `k = 0` coefficient; `(2 pi)^d` times the mass.
    pub fn mean_coeff(&self) -> Complex64 {
        self.coeffs[self.shape.len() / 2]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Embeds the field into `P^{new_order}` with zero high modes.
    pub fn pad(&self, new_order: usize) -> Result<Self> {
        if new_order <= self.order() {
            return Err(Error::Argument(format!(
                "pad order {new_order} must exceed current order {}",
                self.order()
            )));
        }
        Ok(self.resize(Shape::new(self.dim(), new_order)?))
    }

    /// Drops all modes with `|k_j| > new_order`.
    pub fn truncate(&self, new_order: usize) -> Result<Self> {
        if new_order > self.order() {
            return Err(Error::Argument(format!(
                "truncation order {new_order} exceeds current order {}",
                self.order()
            )));
        }
        Ok(self.resize(Shape::new(self.dim(), new_order)?))
    }

    fn resize(&self, target: Shape) -> Self {
        let mut out = SpectralField::zeros(target);
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.shape.mode(i);
            if let Some(j) = target.flat(&k[..self.dim()]) {
                out.coeffs[j] = *c;
            }
        }
        out
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self::from_raw(self.shape, self.coeffs.iter().map(|c| c * alpha).collect())
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &SpectralField) -> Self {
        self.assert_same_shape(other);
        Self::from_raw(
            self.shape,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * alpha)
                .collect(),
        )
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise distance to `other`.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.assert_same_shape(other);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max_k |c(-k) - conj(c(k))|`; zero for fields representing real functions.
    pub fn conjugate_asymmetry(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.shape.mirror(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    fn assert_same_shape(&self, other: &SpectralField) {
        assert_eq!(
            self.shape, other.shape,
            "spectral fields must share dimension and order"
        );
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.assert_same_shape(rhs);
        SpectralField::from_raw(
            self.shape,
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.assert_same_shape(rhs);
        SpectralField::from_raw(
            self.shape,
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        )
    }
}
