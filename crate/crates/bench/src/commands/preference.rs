use std::collections::BTreeMap;
use std::path::Path;

use mesh3d_core::gen_metrics::error_decomposition;
use mesh3d_core::preference::{fit_bt, BtConfig, PreferenceError, PreferenceRecord};
use serde_json::{json, Value};

use crate::cache::OutputLock;
use crate::cli::{BtFitArgs, DecomposeArgs};
use crate::error::{compute_error, exit, CliError, CliResult, ErrorKind};
use crate::report::{header, write_json};

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::new(ErrorKind::Parse, format!("{}: {e}", path.display())).with_details(json!({ "path": path }))
}

fn open_csv(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(f))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> CliResult<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| {
        CliError::new(ErrorKind::Parse, format!("{}: missing column {name:?}", path.display()))
    })
}

fn read_records(path: &Path) -> CliResult<Vec<PreferenceRecord>> {
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let (w, l) = (column(&headers, "winner", path)?, column(&headers, "loser", path)?);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        out.push(PreferenceRecord::new(&row[w], &row[l]));
    }
    Ok(out)
}

fn preference_error(e: PreferenceError) -> CliError {
    match e {
        PreferenceError::SeparatedGraph { ref undefeated, ref winless } => {
            let details = json!({ "undefeated": undefeated, "winless": winless });
            CliError::new(ErrorKind::SeparatedGraph, e.to_string()).with_details(details)
        }
        PreferenceError::NotConnected { components } => {
            CliError::validation(e.to_string()).with_details(json!({ "components": components }))
        }
        PreferenceError::NoConvergence { .. } => compute_error(e),
        e => CliError::validation(e.to_string()),
    }
}

pub fn bt_fit(a: &BtFitArgs) -> CliResult<i32> {
    a.validate()?;
    let records = read_records(&a.input)?;
    let _lock = OutputLock::acquire(&a.out)?;
    let cfg = BtConfig { tolerance: a.tolerance, max_iter: a.max_iter, pseudo_count: a.pseudo_count };
    let fit = fit_bt(&records, &cfg).map_err(preference_error)?;
    let scores = fit.scores.scores();
    let mut probabilities = BTreeMap::new();
    for x in scores.keys() {
        let row: BTreeMap<&str, f64> =
            scores.keys().map(|y| (y.as_str(), fit.scores.predict_prob(x, y).expect("known ids"))).collect();
        probabilities.insert(x.as_str(), row);
    }
    let mut report = header("bt-fit", a);
    report.insert("comparisons".into(), json!(records.len()));
    report.insert("scores".into(), json!(scores));
    report.insert("probabilities".into(), json!(probabilities));
    report.insert("iterations".into(), json!(fit.iterations));
    report.insert("nll".into(), json!(fit.nll_trace.last()));
    write_json(&a.out.join("bt_scores.json"), &Value::Object(report))?;
    Ok(exit::OK)
}

/// `id -> value` from one CSV. Without an explicit column the first of
/// `cd`, `mmd`, then any non-`id` column is used.
fn read_series(path: &Path, col: Option<&str>) -> CliResult<(String, BTreeMap<String, f64>)> {
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let id = column(&headers, "id", path)?;
    let value = match col {
        Some(c) => column(&headers, c, path)?,
        None => ["cd", "mmd"]
            .iter()
            .find_map(|c| headers.iter().position(|h| h == *c))
            .or_else(|| (0..headers.len()).find(|&i| i != id))
            .ok_or_else(|| CliError::new(ErrorKind::Parse, format!("{}: no value column", path.display())))?,
    };
    let mut out = BTreeMap::new();
    for (k, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = k + 2;
        let v: f64 = row[value].parse().map_err(|_| {
            CliError::new(ErrorKind::Parse, format!("{}: line {line}: bad value {:?}", path.display(), &row[value]))
        })?;
        if out.insert(row[id].to_string(), v).is_some() {
            return Err(CliError::validation(format!("{}: duplicate id {:?}", path.display(), &row[id]))
                .with_details(json!({ "path": path, "id": &row[id] })));
        }
    }
    Ok((headers[value].to_string(), out))
}

pub fn decompose(a: &DecomposeArgs) -> CliResult<i32> {
    let (mmd_col, mmd) = read_series(&a.mmd, a.mmd_column.as_deref())?;
    let (recon_col, recon) = read_series(&a.recon, a.recon_column.as_deref())?;
    let (comp_col, comp) = read_series(&a.compression, a.compression_column.as_deref())?;

    let mut all: Vec<&String> = mmd.keys().chain(recon.keys()).chain(comp.keys()).collect();
    all.sort();
    all.dedup();
    let mismatches: Vec<Value> = all
        .iter()
        .filter(|id| !(mmd.contains_key(**id) && recon.contains_key(**id) && comp.contains_key(**id)))
        .map(|id| {
            json!({
                "id": id,
                "mmd": mmd.contains_key(*id),
                "recon": recon.contains_key(*id),
                "compression": comp.contains_key(*id),
            })
        })
        .collect();
    if !mismatches.is_empty() {
        return Err(CliError::new(ErrorKind::MisalignedIds, format!("{} ids are not present in all inputs", mismatches.len()))
            .with_details(json!({ "mismatches": mismatches })));
    }

    let _lock = OutputLock::acquire(&a.out)?;
    let values = |m: &BTreeMap<String, f64>| m.values().copied().collect::<Vec<_>>();
    let d = error_decomposition(&values(&mmd), &values(&recon), &values(&comp)).map_err(compute_error)?;
    let mut report = header("decompose", a);
    report.insert("columns".into(), json!({ "mmd": mmd_col, "recon": recon_col, "compression": comp_col }));
    report.insert("items".into(), json!(mmd.len()));
    report.insert(
        "decomposition".into(),
        json!({
            "recon_fraction": d.recon_fraction,
            "compression_fraction": d.compression_fraction,
            "pearson_recon_mmd": d.pearson_recon_mmd,
            "pearson_recon_compression": d.pearson_recon_compression,
        }),
    );
    write_json(&a.out.join("decomposition.json"), &Value::Object(report))?;
    Ok(exit::OK)
}
