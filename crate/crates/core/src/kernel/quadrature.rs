//! Quadrature rules for the kernel-mode integrals.
//!
//! The relative velocity is written `q = rho e` with `rho` on `[0, R_q]`
//! (Gauss-Legendre) and `e` on the unit sphere. Circle rules are uniform
//! trapezoid; sphere rules are Gauss-Legendre in `cos(theta)` times trapezoid
//! in azimuth. Every rule is centrally symmetric, so the complex exponential
//! sums collapse exactly onto their cosine parts.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("at least one node"));
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Radial nodes on `[0, R]` with weights carrying the `rho^{d-1+lambda}` factor.
#[derive(Clone, Debug)]
pub(crate) struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    pub fn new(n: usize, radius: f64, dim: usize, vhs_exponent: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let power = (dim - 1) as f64 + vhs_exponent;
        let half = 0.5 * radius;
        let nodes: Vec<f64> = x.iter().map(|xi| half * (xi + 1.0)).collect();
        let weights = nodes
            .iter()
            .zip(&w)
            .map(|(rho, wi)| half * wi * rho.powf(power))
            .collect();
        Self { nodes, weights }
    }
}

/// Unit directions with weights summing to the sphere measure `|S^{d-1}|`.
#[derive(Clone, Debug)]
pub(crate) struct SphereRule {
    pub dirs: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Node set invariant under axis sign flips and the `x <-> y` swap.
    pub octant_symmetric: bool,
}

impl SphereRule {
    /// `n` trapezoid points on the circle (d = 2), or `n` azimuthal times
    /// `n / 2` polar points (d = 3). `n` must be even.
    pub fn new(dim: usize, n: usize) -> Self {
        debug_assert!(n >= 2 && n % 2 == 0);
        let dphi = 2.0 * PI / n as f64;
        let mut dirs = Vec::new();
        let mut weights = Vec::new();
        if dim == 2 {
            for k in 0..n {
                let phi = k as f64 * dphi;
                dirs.push([phi.cos(), phi.sin(), 0.0]);
                weights.push(dphi);
            }
        } else {
            let (mu, wmu) = gauss_legendre((n / 2).max(2));
            for (z, wz) in mu.iter().zip(&wmu) {
                let s = (1.0 - z * z).sqrt();
                for k in 0..n {
                    let phi = k as f64 * dphi;
                    dirs.push([s * phi.cos(), s * phi.sin(), *z]);
                    weights.push(wz * dphi);
                }
            }
        }
        Self {
            dirs,
            weights,
            octant_symmetric: n % 4 == 0,
        }
    }
}

#[inline]
pub(crate) fn dot(v: &[i64; 3], e: &[f64; 3]) -> f64 {
    v[0] as f64 * e[0] + v[1] as f64 * e[1] + v[2] as f64 * e[2]
}

/// `sum_e w_e cos(rho_j (v.e) / 2)` for each radial node `rho_j`.
pub(crate) fn angular_factor(sphere: &SphereRule, radial: &RadialRule, v: &[i64; 3]) -> Vec<f64> {
    let half_dots: Vec<f64> = sphere.dirs.iter().map(|e| 0.5 * dot(v, e)).collect();
    radial
        .nodes
        .iter()
        .map(|rho| {
            half_dots
                .iter()
                .zip(&sphere.weights)
                .map(|(hd, w)| w * (rho * hd).cos())
                .sum()
        })
        .collect()
}

/// `b0 * sum_j W_j A_j T_j` for an isotropic angular kernel.
#[inline]
pub(crate) fn assemble(radial_weights: &[f64], a: &[f64], t: &[f64], b0: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..radial_weights.len() {
        acc += radial_weights[j] * (a[j] * t[j]);
    }
    b0 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(8);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_measures() {
        let c = SphereRule::new(2, 32);
        assert!((c.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-13);
        let s = SphereRule::new(3, 16);
        assert!((s.weights.iter().sum::<f64>() - 4.0 * PI).abs() < 1e-13);
        for e in &s.dirs {
            assert!((dot(&[1, 0, 0], e).powi(2) + e[1] * e[1] + e[2] * e[2] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn circle_factor_matches_bessel_series() {
        // 2 pi J0(z) via its power series for moderate z.
        let z: f64 = 3.7;
        let mut j0 = 0.0;
        let mut term = 1.0;
        for k in 0..40 {
            if k > 0 {
                term *= -(z * z / 4.0) / ((k * k) as f64);
            }
            j0 += term;
        }
        let radial = RadialRule {
            nodes: vec![2.0 * z / 5.0],
            weights: vec![1.0],
        };
        let a = angular_factor(&SphereRule::new(2, 64), &radial, &[3, 4, 0]);
        assert!((a[0] - 2.0 * PI * j0).abs() < 1e-13);
    }
}
