mod common;

use std::f64::consts::PI;
use std::fs;

use ep_spectral::kernel::{
    build_table, build_table_with, compute_gain_mode, compute_mode, load_table, save_table, KernelConfig,
    DEALIAS_FACTOR, HEADER_LEN, MAGIC,
};
use ep_spectral::{Error, Execution};

#[test]
fn gain_mode_at_origin_is_disk_area() {
    let config = KernelConfig::maxwell_molecules(2, 8);
    let r = config.support_radius;
    assert!((r - 2.0 * DEALIAS_FACTOR * PI).abs() < 1e-15);
    let b = compute_gain_mode(&config, &[0, 0], &[0, 0]).unwrap();
    assert!((b - PI * r * r).abs() < 1e-10, "{b}");
}

#[test]
fn diagonal_modes_vanish_exactly() {
    let table = common::table2(4);
    let shape = table.shape();
    let mut count = 0;
    for i in 0..shape.len() {
        let m = shape.mode(i);
        assert_eq!(table.mode(&m[..2], &m[..2]).unwrap().norm(), 0.0);
        count += 1;
    }
    assert_eq!(count, 81);
    let t3 = common::table3(2);
    for i in 0..t3.shape().len() {
        let m = t3.shape().mode(i);
        assert_eq!(t3.mode(&m, &m).unwrap().norm(), 0.0);
    }
}

#[test]
fn table_entries_equal_direct_computation() {
    let table = common::table2(8);
    let shape = table.shape();
    let s = shape.len();
    for flat in (0..s * s).step_by(37).chain((0..s).map(|i| i * s + s - 1 - i)) {
        let (l, m) = (shape.mode(flat / s), shape.mode(flat % s));
        let direct = compute_mode(table.config(), &l[..2], &m[..2]).unwrap();
        assert_eq!(direct, table.modes()[flat], "l={l:?} m={m:?}");
    }
}

#[test]
fn table_is_conjugation_compatible() {
    for table in [common::table2(4), common::table3(2)] {
        let shape = table.shape();
        let s = shape.len();
        let mut worst = 0.0f64;
        for li in 0..s {
            for mi in 0..s {
                let a = table.modes()[li * s + mi];
                let b = table.modes()[shape.mirror(li) * s + shape.mirror(mi)];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        assert!(worst < 1e-12, "{worst:e}");
    }
}

#[test]
fn selected_modes_stable_under_node_doubling() {
    let config = KernelConfig::maxwell_molecules(2, 8);
    let fine = config.refined();
    for (l, m) in [
        ([0, 0], [3, -2]),
        ([8, 8], [-8, 1]),
        ([-5, 2], [4, 7]),
        ([1, 0], [0, 1]),
    ] {
        let a = compute_mode(&config, &l, &m).unwrap();
        let b = compute_mode(&fine, &l, &m).unwrap();
        assert!((a - b).norm() < 1e-9, "{l:?} {m:?}: {a} vs {b}");
    }
}

#[test]
fn isotropic_modes_are_real() {
    let table = common::table2(4);
    assert!(table.modes().iter().all(|b| b.im == 0.0));
}

#[test]
fn sequential_and_parallel_builds_are_identical() {
    let config = KernelConfig::maxwell_molecules(2, 4);
    let a = build_table_with(&config, Execution::Sequential).unwrap();
    let b = build_table_with(&config, Execution::Parallel).unwrap();
    assert_eq!(a.modes(), b.modes());
    assert_eq!(a.refinement(), b.refinement());
}

#[test]
fn rebuild_has_identical_payload_hash() {
    let config = KernelConfig::maxwell_molecules(2, 4);
    assert_eq!(
        build_table(&config).unwrap().payload_hash(),
        common::table2(4).payload_hash()
    );
}

#[test]
fn invalid_exponent_is_rejected_before_work() {
    let config = KernelConfig::new(2, 8, 1.5);
    assert!(matches!(build_table(&config), Err(Error::Config(_))));
    assert!(matches!(
        compute_mode(&config, &[0, 0], &[1, 0]),
        Err(Error::Config(_))
    ));
}

#[test]
fn cache_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n8.bkmt");
    let table = common::table2(8);
    save_table(table, &path).unwrap();
    let side = 17usize;
    let len = fs::metadata(&path).unwrap().len() as usize;
    assert_eq!(len, 8 + HEADER_LEN + 16 * side.pow(4) + 32);
    assert_eq!(HEADER_LEN, 72);
    let loaded = load_table(&path, table.config()).unwrap();
    assert_eq!(loaded.modes(), table.modes());
    assert_eq!(loaded.payload_hash(), table.payload_hash());
}

#[test]
fn cache_rejects_other_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n4.bkmt");
    save_table(common::table2(4), &path).unwrap();
    let other_order = KernelConfig::maxwell_molecules(2, 8);
    assert!(matches!(
        load_table(&path, &other_order),
        Err(Error::CacheInvalid(_))
    ));
    let mut other_radius = KernelConfig::maxwell_molecules(2, 4);
    other_radius.support_radius = 2.5;
    assert!(matches!(
        load_table(&path, &other_radius),
        Err(Error::CacheInvalid(_))
    ));
}

#[test]
fn cache_rejects_damaged_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n4.bkmt");
    let table = common::table2(4);
    save_table(table, &path).unwrap();
    let bytes = fs::read(&path).unwrap();
    assert_eq!(&bytes[..8], MAGIC);

    let mut bad_magic = bytes.clone();
    bad_magic[0] ^= 0xff;
    fs::write(&path, &bad_magic).unwrap();
    assert!(matches!(load_table(&path, table.config()), Err(Error::Format(_))));

    fs::write(&path, &bytes[..bytes.len() - 40]).unwrap();
    assert!(matches!(load_table(&path, table.config()), Err(Error::Format(_))));

    let mut flipped = bytes.clone();
    flipped[8 + HEADER_LEN + 3] ^= 1;
    fs::write(&path, &flipped).unwrap();
    assert!(matches!(load_table(&path, table.config()), Err(Error::Format(_))));

    assert!(matches!(
        load_table(dir.path().join("missing"), table.config()),
        Err(Error::Io(_))
    ));
}
