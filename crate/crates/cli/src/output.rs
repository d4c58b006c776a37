//! File emission: CSV traces, JSON reports, and run manifests.

use crate::config::CliError;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// All floating-point text output carries 12 significant digits.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".into();
    }
    format!("{x:.11e}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// CSV of (time_s, sx, sy, sz) rows.
pub fn write_trace_csv(
    path: &Path,
    trace: &[echocycle::simulator::TracePoint],
) -> Result<(), CliError> {
    let mut out = String::from("time_s,sx,sy,sz\n");
    for p in trace {
        out.push_str(&format!("{},{},{},{}\n", sig(p.time), sig(p.sx), sig(p.sy), sig(p.sz)));
    }
    write_text(path, &out)
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: serde_json::Value,
    outputs: Vec<String>,
}

/// Every command writes a manifest echoing the fully resolved config; the
/// manifest itself can be fed back as `--config` to reproduce the run.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    config: serde_json::Value,
    outputs: &[PathBuf],
) -> Result<PathBuf, CliError> {
    let manifest = Manifest {
        tool: "echocycle",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        outputs: outputs
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
            .collect(),
    };
    let path = dir.join("manifest.json");
    write_json(&path, &manifest)?;
    Ok(path)
}
