//! JSON report assembly and deterministic file output.

use std::path::Path;

use mesh3d_core::recon_metrics::ReconReport;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "mesh3d-bench";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the config's JSON serialization.
pub fn config_hash<C: Serialize>(config: &C) -> String {
    let bytes = serde_json::to_vec(config).expect("configs serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Common header of every report: tool, version, command and the config.
pub fn header<C: Serialize>(command: &str, config: &C) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("tool".into(), json!(TOOL));
    m.insert("version".into(), json!(VERSION));
    m.insert("command".into(), json!(command));
    m.insert("config".into(), serde_json::to_value(config).expect("configs serialize"));
    m.insert("config_hash".into(), json!(config_hash(config)));
    m
}

pub fn recon_json(r: &ReconReport) -> Value {
    json!({
        "cd": r.cd,
        "power": r.power.as_u8(),
        "precision": r.precision,
        "recall": r.recall,
        "fscore": r.fscore,
        "tau": r.tau,
        "nc": r.nc,
        "samples": r.samples,
        "seed": r.seed.0,
    })
}

/// Population mean and standard deviation; `None` for no values.
pub fn mean_std(values: &[f64]) -> Value {
    match (mesh3d_core::math::mean(values), mesh3d_core::math::std_dev(values)) {
        (Some(m), Some(s)) => json!({ "mean": m, "std": s, "count": values.len() }),
        _ => json!({ "mean": null, "std": null, "count": 0 }),
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::new(crate::error::ErrorKind::Io, e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::new(crate::error::ErrorKind::Io, e.to_string()))?;
    write_bytes(path, &bytes)
}
