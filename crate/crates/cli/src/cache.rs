//! Kernel tables shared between runs through a cache directory.

use std::env;
use std::path::PathBuf;

use ep_spectral::kernel::{build_table, load_table, save_table, KernelConfig, KernelTable};
use ep_spectral::Error;

use crate::config::Config;
use crate::Failure;

/// Overrides the cache directory of every configuration.
pub const CACHE_DIR_ENV: &str = "EP_SPECTRAL_CACHE_DIR";

pub fn cache_dir(config: &Config) -> PathBuf {
    if let Some(dir) = env::var_os(CACHE_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    match &config.kernel.cache_dir {
        Some(dir) => config.resolve(dir),
        None => config.base_dir.join("kernel-cache"),
    }
}

pub fn cache_path(config: &Config, kernel: &KernelConfig) -> PathBuf {
    let hash = hex::encode(kernel.hash());
    cache_dir(config).join(format!(
        "kernel-d{}-n{}-{}.bkmt",
        kernel.dim,
        kernel.order,
        &hash[..16]
    ))
}

/// How a table was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Cache,
    Built,
}

/// Loads the table from the cache, or builds and stores it.
///
/// Stale or damaged cache files are rebuilt and overwritten.
pub fn obtain(config: &Config, kernel: &KernelConfig) -> Result<(KernelTable, Source, PathBuf), Failure> {
    let path = cache_path(config, kernel);
    match load_table(&path, kernel) {
        Ok(table) => return Ok((table, Source::Cache, path)),
        Err(Error::Io(_)) => {}
        Err(e @ (Error::CacheInvalid(_) | Error::Format(_))) => {
            eprintln!("rebuilding {}: {e}", path.display());
        }
        Err(e) => return Err(e.into()),
    }
    eprintln!("building kernel table d={} N={}", kernel.dim, kernel.order);
    let table = build_table(kernel)?;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Failure::Config(format!("{}: {e}", parent.display())))?;
    }
    save_table(&table, &path)?;
    Ok((table, Source::Built, path))
}
