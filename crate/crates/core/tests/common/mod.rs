#![allow(dead_code)]

use std::sync::OnceLock;

use ep_spectral::kernel::{build_table, KernelConfig, KernelTable};
use ep_spectral::spectral::{Shape, SpectralField};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Maxwell-molecule table for `d = 2`, built once per test binary.
pub fn table2(order: usize) -> &'static KernelTable {
    static TABLES: [OnceLock<KernelTable>; 5] = [const { OnceLock::new() }; 5];
    let slot = match order {
        2 => 0,
        4 => 1,
        8 => 2,
        16 => 3,
        32 => 4,
        _ => panic!("no cached table for order {order}"),
    };
    TABLES[slot].get_or_init(|| build_table(&KernelConfig::maxwell_molecules(2, order)).unwrap())
}

pub fn table3(order: usize) -> &'static KernelTable {
    static TABLES: [OnceLock<KernelTable>; 3] = [const { OnceLock::new() }; 3];
    assert!((1..=3).contains(&order));
    TABLES[order - 1].get_or_init(|| build_table(&KernelConfig::maxwell_molecules(3, order)).unwrap())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Conjugate-symmetric field with entries uniform in `[-a, a]` times `decay^|k|_1`.
pub fn random_real_field(shape: Shape, rng: &mut ChaCha8Rng, a: f64, decay: f64) -> SpectralField {
    let mut c = vec![Complex64::new(0.0, 0.0); shape.len()];
    for i in 0..shape.len() {
        let j = shape.mirror(i);
        let k = shape.mode(i);
        let w = a * decay.powi(k.iter().map(|x| x.abs() as i32).sum());
        if i < j {
            c[i] = Complex64::new(rng.random_range(-w..=w), rng.random_range(-w..=w));
            c[j] = c[i].conj();
        } else if i == j {
            c[i] = Complex64::new(rng.random_range(-w..=w), 0.0);
        }
    }
    SpectralField::from_coeffs(shape, c).unwrap()
}

/// Conjugate-symmetric field built from proptest-supplied values.
pub fn field_from_values(shape: Shape, values: &[f64]) -> SpectralField {
    let mut c = vec![Complex64::new(0.0, 0.0); shape.len()];
    let mut it = values.iter().copied().cycle();
    for i in 0..shape.len() {
        let j = shape.mirror(i);
        if i < j {
            c[i] = Complex64::new(it.next().unwrap(), it.next().unwrap());
            c[j] = c[i].conj();
        } else if i == j {
            c[i] = Complex64::new(it.next().unwrap(), 0.0);
        }
    }
    SpectralField::from_coeffs(shape, c).unwrap()
}

/// `e[i] / e[i+1]`.
pub fn ratios(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| w[0] / w[1]).collect()
}
