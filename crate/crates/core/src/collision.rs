//! Projected collision operator from precomputed kernel modes.
//!
//! `Q_N(f, g)_k = 1/2 sum_{l+m=k} beta(l, m) (f_l g_m + f_m g_l)`, summed over
//! `|l_j|, |m_j|, |k_j| <= N`. The symmetrized form makes the bilinear
//! operator symmetric, so `Q(f+M, f-M) = Q(f,f) - Q(M,M)`; on the diagonal it
//! reduces bit for bit to `sum beta(l, m) f_l f_m`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kernel::KernelTable;
use crate::spectral::{norm, Norm, Shape, SpectralField};

fn check_shapes(table: &KernelTable, fields: &[&SpectralField]) -> Result<Shape> {
    let shape = table.shape();
    for f in fields {
        if f.shape() != shape {
            return Err(Error::Argument(format!(
                "field {:?} does not match kernel table {:?}",
                f.shape(),
                shape
            )));
        }
    }
    Ok(shape)
}

/// Accumulates `term(beta, l, m)` into `out[k]` for every `k = l + m` whose
/// first coordinate is `k0`, with `out` the slab of those `k`.
///
/// Rows of the table are read in contiguous runs over the last coordinate of
/// `m`. Each `out[k]` receives its terms in increasing `l`, the same order a
/// per-`k` gather would use.
#[inline]
fn accumulate_slab(
    shape: Shape,
    table: &KernelTable,
    k0: i64,
    out: &mut [Complex64],
    term: impl Fn(Complex64, usize, usize) -> Complex64,
) {
    let n = shape.order() as i64;
    let side = shape.side();
    let range = |kj: i64| (kj - n).max(-n)..=(kj + n).min(n);
    // Admissible m_j for a given l_j so that l_j + m_j stays in the box.
    let partner = |lj: i64| (-n).max(-n - lj)..=n.min(n - lj);
    match shape.dim() {
        2 => {
            for l0 in range(k0) {
                let mb = (k0 - l0 + n) as usize * side;
                for l1 in -n..=n {
                    let li = (l0 + n) as usize * side + (l1 + n) as usize;
                    let row = table.row(li);
                    for m1 in partner(l1) {
                        let mi = mb + (m1 + n) as usize;
                        out[(l1 + m1 + n) as usize] += term(row[mi], li, mi);
                    }
                }
            }
        }
        _ => {
            for l0 in range(k0) {
                let mb = (k0 - l0 + n) as usize * side;
                for l1 in -n..=n {
                    for l2 in -n..=n {
                        let li = ((l0 + n) as usize * side + (l1 + n) as usize) * side + (l2 + n) as usize;
                        let row = table.row(li);
                        for m1 in partner(l1) {
                            let mb1 = (mb + (m1 + n) as usize) * side;
                            let ob = (l1 + m1 + n) as usize * side;
                            for m2 in partner(l2) {
                                let mi = mb1 + (m2 + n) as usize;
                                out[ob + (l2 + m2 + n) as usize] += term(row[mi], li, mi);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn finish(shape: Shape, coeffs: Vec<Complex64>) -> Result<SpectralField> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(SpectralField::from_raw(shape, coeffs))
}

/// Bilinear collision operator `Q_N(f, g)`.
pub fn q_quadratic(f: &SpectralField, g: &SpectralField, table: &KernelTable) -> Result<SpectralField> {
    q_quadratic_with(f, g, table, Execution::default())
}

pub fn q_quadratic_with(
    f: &SpectralField,
    g: &SpectralField,
    table: &KernelTable,
    exec: Execution,
) -> Result<SpectralField> {
    let shape = check_shapes(table, &[f, g])?;
    let (fc, gc) = (f.coeffs(), g.coeffs());
    let diagonal = std::ptr::eq(f, g) || fc == gc;
    let n = shape.order() as i64;
    let slab = shape.len() / shape.side();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.len()];
    exec.fill_chunks(&mut coeffs, slab, |i, out| {
        let k0 = i as i64 - n;
        if diagonal {
            accumulate_slab(shape, table, k0, out, |b, li, mi| b * (fc[li] * fc[mi]));
        } else {
            accumulate_slab(shape, table, k0, out, |b, li, mi| {
                b * (fc[li] * gc[mi] + fc[mi] * gc[li])
            });
            out.iter_mut().for_each(|c| *c *= 0.5);
        }
    });
    finish(shape, coeffs)
}

/// `L(M, g) = Q(g, M) + Q(M, g)`.
pub fn linearized(
    maxwellian: &SpectralField,
    g: &SpectralField,
    table: &KernelTable,
) -> Result<SpectralField> {
    let a = q_quadratic(g, maxwellian, table)?;
    let b = q_quadratic(maxwellian, g, table)?;
    Ok(&a + &b)
}

/// Equilibrium-preserving right-hand side `Q_N(f + M_N, f - M_N)`.
///
/// Exactly zero at `f = M_N`, since the second argument is then the zero field.
pub fn ep_rhs(f: &SpectralField, maxwellian: &SpectralField, table: &KernelTable) -> Result<SpectralField> {
    ep_rhs_with(f, maxwellian, table, Execution::default())
}

pub fn ep_rhs_with(
    f: &SpectralField,
    maxwellian: &SpectralField,
    table: &KernelTable,
    exec: Execution,
) -> Result<SpectralField> {
    check_shapes(table, &[f, maxwellian])?;
    q_quadratic_with(&(f + maxwellian), &(f - maxwellian), table, exec)
}

/// `H^r` norm of `P_N Q(f+M, f-M) - Q(f, f) + Q(M, M)`, with the unprojected
/// operator represented by a table of order `N_ref >= 2N`.
///
/// Products of two degree-`N` polynomials have degree `2N`, so the
/// reference evaluation is the exact Galerkin image of `f` and `M`.
pub fn perturbation_norm(
    f: &SpectralField,
    maxwellian: &SpectralField,
    table_n: &KernelTable,
    table_ref: &KernelTable,
    r: f64,
) -> Result<f64> {
    let shape = check_shapes(table_n, &[f, maxwellian])?;
    let n_ref = table_ref.shape().order();
    if table_ref.shape().dim() != shape.dim() || n_ref < 2 * shape.order() {
        return Err(Error::Argument(format!(
            "reference order {n_ref} must be at least twice {}",
            shape.order()
        )));
    }
    if !(r >= 0.0) {
        return Err(Error::Argument(format!(
            "Sobolev index must be non-negative, got {r}"
        )));
    }
    let ep = ep_rhs(f, maxwellian, table_n)?.pad(n_ref)?;
    let f_ref = f.pad(n_ref)?;
    let m_ref = maxwellian.pad(n_ref)?;
    let qf = q_quadratic(&f_ref, &f_ref, table_ref)?;
    let qm = q_quadratic(&m_ref, &m_ref, table_ref)?;
    let residual = &(&ep - &qf) + &qm;
    Ok(norm(&residual, Norm::Sobolev(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_table, KernelConfig};

    fn small_table() -> KernelTable {
        build_table(&KernelConfig::maxwell_molecules(2, 3)).unwrap()
    }

    fn field(shape: Shape, seed: u64) -> SpectralField {
        // Deterministic pseudo-random conjugate-symmetric coefficients.
        let mut x = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = || {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut c = vec![Complex64::new(0.0, 0.0); shape.len()];
        for i in 0..shape.len() {
            let j = shape.mirror(i);
            if i < j {
                c[i] = Complex64::new(next(), next());
                c[j] = c[i].conj();
            } else if i == j {
                c[i] = Complex64::new(next(), 0.0);
            }
        }
        SpectralField::from_coeffs(shape, c).unwrap()
    }

    fn brute_force(f: &SpectralField, g: &SpectralField, t: &KernelTable) -> Vec<Complex64> {
        let shape = t.shape();
        let d = shape.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); shape.len()];
        for li in 0..shape.len() {
            for mi in 0..shape.len() {
                let (l, m) = (shape.mode(li), shape.mode(mi));
                let k: Vec<i64> = (0..d).map(|j| l[j] + m[j]).collect();
                if let Some(ki) = shape.flat(&k) {
                    let b = t.mode(&l[..d], &m[..d]).unwrap();
                    out[ki] += b * (f.coeffs()[li] * g.coeffs()[mi] + f.coeffs()[mi] * g.coeffs()[li]) * 0.5;
                }
            }
        }
        out
    }

    #[test]
    fn matches_brute_force_pair_sum() {
        for t in [
            small_table(),
            build_table(&KernelConfig::maxwell_molecules(3, 2)).unwrap(),
        ] {
            let (f, g) = (field(t.shape(), 3), field(t.shape(), 4));
            for (a, b) in [(&f, &g), (&f, &f)] {
                let fast = q_quadratic(a, b, &t).unwrap();
                let slow = brute_force(a, b, &t);
                for (x, y) in fast.coeffs().iter().zip(&slow) {
                    assert!((x - y).norm() < 1e-13, "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn zero_inputs_give_zero() {
        let t = small_table();
        let z = SpectralField::zeros(t.shape());
        assert_eq!(q_quadratic(&z, &z, &t).unwrap(), z);
        assert_eq!(linearized(&field(t.shape(), 1), &z, &t).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn diagonal_fast_path_matches_general_sum() {
        let t = small_table();
        let f = field(t.shape(), 7);
        let copy = f.clone();
        let fast = q_quadratic(&f, &f, &t).unwrap();
        let general = q_quadratic(&f, &copy.axpy(1.0, &SpectralField::zeros(t.shape())), &t).unwrap();
        assert_eq!(fast, general);
    }

    #[test]
    fn symmetric_in_its_arguments() {
        let t = small_table();
        let (f, g) = (field(t.shape(), 2), field(t.shape(), 3));
        let a = q_quadratic(&f, &g, &t).unwrap();
        let b = q_quadratic(&g, &f, &t).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn ep_rhs_vanishes_at_equilibrium() {
        let t = small_table();
        let m = field(t.shape(), 5);
        let out = ep_rhs(&m, &m, &t).unwrap();
        assert!(out.coeffs().iter().all(|c| c.re == 0.0 && c.im == 0.0));
    }

    #[test]
    fn shape_mismatch_is_an_argument_error() {
        let t = small_table();
        let f = SpectralField::zeros(Shape::new(2, 2).unwrap());
        assert!(matches!(q_quadratic(&f, &f, &t), Err(Error::Argument(_))));
    }

    #[test]
    fn perturbation_norm_needs_twice_the_order() {
        let t = small_table();
        let t_ref = build_table(&KernelConfig::maxwell_molecules(2, 5)).unwrap();
        let f = field(t.shape(), 1);
        assert!(matches!(
            perturbation_norm(&f, &f, &t, &t_ref, 0.0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let t = small_table();
        let (f, g) = (field(t.shape(), 11), field(t.shape(), 12));
        let a = q_quadratic_with(&f, &g, &t, Execution::Sequential).unwrap();
        let b = q_quadratic_with(&f, &g, &t, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
