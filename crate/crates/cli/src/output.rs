//! CSV and JSON writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ep_spectral::solver::DiagnosticsRecord;
use serde::Serialize;

use crate::Failure;

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("{}: {e}", path.display()))
}

/// Path of the JSON summary written next to `out`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io_failure(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_failure(path, e))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(path, e))
}

/// Streams diagnostics rows; every row is flushed so a failed run leaves a
/// readable prefix.
pub struct RecordWriter {
    writer: csv::Writer<File>,
    path: PathBuf,
}

pub fn record_header(dim: usize) -> Vec<&'static str> {
    let mut h = vec!["t", "rho", "ux", "uy"];
    if dim == 3 {
        h.push("uz");
    }
    h.extend([
        "T",
        "g_L1",
        "g_L2",
        "g_Linf",
        "f0_re",
        "f0_im",
        "entropy",
        "min_grid_value",
    ]);
    h
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

impl RecordWriter {
    pub fn create(path: &Path, dim: usize) -> Result<Self, Failure> {
        let mut writer = csv::WriterBuilder::new()
            .flexible(true)
            .from_path(path)
            .map_err(|e| io_failure(path, e))?;
        writer
            .write_record(record_header(dim))
            .map_err(|e| io_failure(path, e))?;
        Ok(Self {
            writer,
            path: path.to_path_buf(),
        })
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> Result<(), Failure> {
        let mut row = vec![num(r.t), num(r.moments.rho)];
        row.extend(r.moments.u.iter().map(|&u| num(u)));
        row.extend([
            num(r.moments.temperature),
            num(r.g_norm_l1),
            num(r.g_norm_l2),
            num(r.g_norm_linf),
            num(r.f0_coeff.re),
            num(r.f0_coeff.im),
            r.entropy.map(num).unwrap_or_default(),
            num(r.min_grid_value),
        ]);
        self.writer
            .write_record(&row)
            .map_err(|e| io_failure(&self.path, e))?;
        self.writer.flush().map_err(|e| io_failure(&self.path, e))
    }

    /// Final row marking an incomplete run.
    pub fn truncated(&mut self, t: f64, reason: &str) -> Result<(), Failure> {
        self.writer
            .write_record([format!("# truncated at t = {t:?}: {reason}")])
            .map_err(|e| io_failure(&self.path, e))?;
        self.writer.flush().map_err(|e| io_failure(&self.path, e))
    }
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_failure(path, e))?;
    w.write_record(header).map_err(|e| io_failure(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io_failure(path, e))?;
    }
    w.flush().map_err(|e| io_failure(path, e))
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn full(x: f64) -> String {
    num(x)
}
