use mesh3d_core::gen_metrics::{self_distances, subset_stability, MeanStd};
use mesh3d_core::RngSeed;
use serde_json::{json, Value};

use super::eval_gen::SetSampling;
use crate::cache::{cache_dir, MatrixCache, OutputLock};
use crate::cli::StabilityArgs;
use crate::error::{compute_error, CliError, CliResult, ErrorKind};
use crate::formats::MatrixFile;
use crate::inputs::list_objs;
use crate::manifest::Manifest;
use crate::report::{config_hash, header, write_csv, write_json};

fn too_small(size: usize, available: usize) -> CliError {
    CliError::new(
        ErrorKind::Validation,
        format!("subset size {size} needs {} items for disjoint draws, dataset has {available}", 2 * size),
    )
    .with_details(json!({ "size": size, "needed": 2 * size, "available": available }))
}

pub fn stability(a: &StabilityArgs) -> CliResult<i32> {
    a.validate()?;
    let files = list_objs(&a.dataset)?;
    let largest = *a.sizes.iter().max().expect("validated non-empty");
    if 2 * largest > files.len() {
        return Err(too_small(largest, files.len()));
    }
    let _lock = OutputLock::acquire(&a.out)?;
    let mut manifest = Manifest::new("stability", config_hash(a));
    let sampling =
        SetSampling { samples: a.samples, normalize: a.normalize, seed: RngSeed(a.seed), power: a.power.0 };
    let key = sampling.cache_key("dataset", &[("item", &files)]);
    let cache = MatrixCache::new(cache_dir(&a.out));

    let cached = manifest.stage("cache_lookup", || cache.get(&key)).filter(|m| m.n_gen == files.len() && m.n_ref == 0);
    let hit = cached.is_some();
    let (n, full) = match cached {
        Some(m) => (m.n_gen, m.gg),
        None => {
            let (kept, clouds) = sampling.load(&files, "item", &mut manifest);
            if 2 * largest > clouds.len() {
                manifest.write(&a.out.join("manifest.json"))?;
                return Err(too_small(largest, clouds.len()));
            }
            let full = manifest.stage("pairwise_distances", || self_distances(&clouds, sampling.power));
            let n = clouds.len();
            if kept.len() == files.len() {
                let m = MatrixFile { n_gen: n, n_ref: 0, power: sampling.power, gg: full, gr: vec![], rr: vec![] };
                cache.put(&key, &m)?;
                (n, m.gg)
            } else {
                (n, full)
            }
        }
    };
    manifest.set("cache", json!({ "key": key, "hit": hit }));

    let stats = manifest
        .stage("subsets", || subset_stability(&full, n, sampling.power, &a.sizes, a.trials, RngSeed(a.seed)))
        .map_err(compute_error)?;

    let mut rows = Vec::new();
    let mut table = Vec::new();
    for s in &stats {
        let metrics: [(&str, MeanStd); 3] = [("cov", s.cov), ("mmd", s.mmd), ("one_nna", s.one_nna)];
        for (name, m) in metrics {
            rows.push(vec![s.size.to_string(), name.to_string(), m.mean.to_string(), m.std.to_string()]);
            table.push(json!({ "size": s.size, "metric": name, "mean": m.mean, "std": m.std, "trials": s.trials }));
        }
    }
    write_csv(&a.out.join("stability.csv"), &["size", "metric", "mean", "std"], &rows)?;
    let mut report = header("stability", a);
    report.insert("items".into(), json!(n));
    report.insert("rows".into(), Value::Array(table));
    write_json(&a.out.join("stability.json"), &Value::Object(report))?;
    manifest.write(&a.out.join("manifest.json"))?;
    Ok(manifest.exit_code())
}
