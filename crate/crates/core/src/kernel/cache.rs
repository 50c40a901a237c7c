//! Binary kernel cache.
//!
//! Little-endian layout:
//!
//! | bytes | field |
//! |------:|-------|
//! | 8  | magic `BKMT0001` |
//! | 4  | d (u32) |
//! | 4  | N (u32) |
//! | 8  | VHS exponent (f64) |
//! | 8  | R_q (f64) |
//! | 4  | radial nodes (u32) |
//! | 4  | q-angle nodes (u32) |
//! | 4  | omega-angle nodes (u32) |
//! | 4  | angular kernel tag (u32, 0 = normalized isotropic, 1 = tabulated) |
//! | 32 | SHA-256 of the configuration |
//! | 16 (2N+1)^{2d} | modes as interleaved (re, im) f64, row-major over (l, m) |
//! | 32 | SHA-256 of the payload |

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use super::{KernelConfig, KernelTable};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"BKMT0001";

/// Header size after the magic bytes.
pub const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 4 + 4 + 4 + 4 + 32;

const HASH_LEN: usize = 32;

pub(crate) fn payload_hash(modes: &[Complex64]) -> [u8; 32] {
    let mut h = Sha256::new();
    for c in modes {
        h.update(c.re.to_le_bytes());
        h.update(c.im.to_le_bytes());
    }
    h.finalize().into()
}

fn header_bytes(config: &KernelConfig) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(&(config.dim as u32).to_le_bytes());
    out.extend_from_slice(&(config.order as u32).to_le_bytes());
    out.extend_from_slice(&config.vhs_exponent.to_le_bytes());
    out.extend_from_slice(&config.support_radius.to_le_bytes());
    out.extend_from_slice(&(config.radial_nodes as u32).to_le_bytes());
    out.extend_from_slice(&(config.angular_nodes_q as u32).to_le_bytes());
    out.extend_from_slice(&(config.angular_nodes_omega as u32).to_le_bytes());
    out.extend_from_slice(&config.angular_kernel.tag().to_le_bytes());
    out.extend_from_slice(&config.hash());
    out
}

pub fn save_table(table: &KernelTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("partial");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        w.write_all(MAGIC)?;
        w.write_all(&header_bytes(table.config()))?;
        for c in table.modes() {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        w.write_all(&table.payload_hash())?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn read_f64(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

/// Reads a cache file, checking it against the configuration the caller needs.
///
/// A well-formed file for another configuration yields `Error::CacheInvalid`;
/// a damaged file yields `Error::Format`.
pub fn load_table(path: impl AsRef<Path>, expected: &KernelConfig) -> Result<KernelTable> {
    expected.validate()?;
    let bytes = fs::read(path)?;
    if bytes.len() < MAGIC.len() + HEADER_LEN {
        return Err(Error::Format("file shorter than header".into()));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let h = &bytes[8..8 + HEADER_LEN];
    let found = (
        read_u32(h, 0) as usize,
        read_u32(h, 4) as usize,
        read_f64(h, 8),
        read_f64(h, 16),
        read_u32(h, 24) as usize,
        read_u32(h, 28) as usize,
        read_u32(h, 32) as usize,
        read_u32(h, 36),
    );
    let wanted = (
        expected.dim,
        expected.order,
        expected.vhs_exponent,
        expected.support_radius,
        expected.radial_nodes,
        expected.angular_nodes_q,
        expected.angular_nodes_omega,
        expected.angular_kernel.tag(),
    );
    if found != wanted {
        return Err(Error::CacheInvalid(format!(
            "header {found:?} does not match requested {wanted:?}"
        )));
    }
    if h[40..40 + HASH_LEN] != expected.hash() {
        return Err(Error::CacheInvalid("configuration hash mismatch".into()));
    }

    let side = 2 * expected.order + 1;
    let count = side.pow(2 * expected.dim as u32);
    let payload_start = 8 + HEADER_LEN;
    let expected_len = payload_start + 16 * count + HASH_LEN;
    if bytes.len() != expected_len {
        return Err(Error::Format(format!(
            "expected {expected_len} bytes, found {}",
            bytes.len()
        )));
    }
    let payload = &bytes[payload_start..payload_start + 16 * count];
    let modes: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| Complex64::new(read_f64(c, 0), read_f64(c, 8)))
        .collect();
    if payload_hash(&modes)[..] != bytes[expected_len - HASH_LEN..] {
        return Err(Error::Format("payload hash mismatch".into()));
    }
    KernelTable::from_parts(expected.clone(), modes)
}
