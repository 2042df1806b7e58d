//! Byte-stable artifact writers.
//!
//! Artifacts never embed timestamps, absolute paths, or the worker count;
//! provenance lives in a per-command `meta.json` sidecar that names input
//! files (base name only) with their content hashes and records every
//! threshold, so each output directory is self-describing and reruns are
//! byte-identical.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::errors::{CliError, CliResult};

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::User(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path)
        .map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| CliError::Internal(format!("serializing {}: {e}", path.display())))?;
    out.write_all(b"\n")
        .map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))?;
    Ok(())
}

/// CSV writer over explicit string rows; floats go through [`fmt_float`]
/// so values round-trip exactly.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let file = File::create(path)
        .map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let io_err = |e: csv::Error| CliError::Internal(format!("writing {}: {e}", path.display()));
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row).map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))
}

/// Shortest representation that parses back to the same value.
pub fn fmt_float(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt_float(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|n| n.to_string()).unwrap_or_default()
}

#[derive(Debug, Serialize)]
pub struct MetaInput {
    pub role: String,
    /// Base name only; absolute paths would break byte-stability.
    pub file: String,
    pub sha256: String,
}

pub fn meta_input(role: &str, path: &Path) -> CliResult<MetaInput> {
    let file = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let sha256 = semprune::hash::sha256_hex_file(path)
        .map_err(|e| CliError::User(format!("cannot hash {}: {e}", path.display())))?;
    Ok(MetaInput { role: role.to_string(), file, sha256 })
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    command: &'a str,
    params: serde_json::Value,
    inputs: &'a [MetaInput],
}

/// Writes a metadata sidecar describing one command invocation.
pub fn write_meta(
    path: &Path,
    command: &str,
    params: serde_json::Value,
    inputs: &[MetaInput],
) -> CliResult<()> {
    write_json(path, &Meta { command, params, inputs })
}
