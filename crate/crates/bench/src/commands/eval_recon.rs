use std::collections::BTreeMap;

use mesh3d_core::geometry::{sample_surface, SpatialIndex, TriangleMesh};
use mesh3d_core::recon_metrics::{compare_samples, MeshEvalConfig, ReconReport};
use mesh3d_core::reconstruct::{marching_cubes, IsoSurfaceConfig};
use mesh3d_core::signing::{compute_sdf, GridSpec};
use mesh3d_core::RngSeed;
use serde_json::{json, Value};

use crate::cache::OutputLock;
use crate::cli::EvalReconArgs;
use crate::error::{compute_error, CliResult};
use crate::inputs::{geometry_seed, list_objs, load_mesh, InputFile};
use crate::manifest::{Manifest, ObjectEntry, StageClock, Status};
use crate::report::{config_hash, header, mean_std, recon_json, write_csv, write_json};

struct Outcome {
    id: String,
    resolution: Option<usize>,
    status: Status,
    messages: Vec<String>,
    report: Option<ReconReport>,
    timings: Vec<(String, f64)>,
}

/// Samples both meshes with geometry-derived seeds and compares them.
fn compare(
    generated: &TriangleMesh,
    reference: &TriangleMesh,
    a: &EvalReconArgs,
    tau: f64,
    clock: &mut StageClock,
) -> CliResult<ReconReport> {
    let n = a.samples.resolve(generated.surface_area().max(reference.surface_area()), tau);
    let seed = RngSeed(a.seed);
    let gs = sample_surface(generated, n, geometry_seed(generated, seed)).map_err(compute_error)?;
    let rs = sample_surface(reference, n, geometry_seed(reference, seed)).map_err(compute_error)?;
    clock.lap("sample");
    let index = SpatialIndex::build(reference).map_err(compute_error)?;
    let cfg = MeshEvalConfig { power: a.power.0, samples_per_mesh: n, tau, seed };
    let r = compare_samples(&gs, &rs, &index, &cfg).map_err(compute_error)?;
    clock.lap("metrics");
    Ok(r)
}

fn pair(a: &EvalReconArgs, gen: &InputFile, reference: &InputFile) -> Outcome {
    let mut clock = StageClock::start();
    let mut messages = Vec::new();
    let result = (|| {
        let g = load_mesh(&gen.path, a.normalize)?;
        let r = load_mesh(&reference.path, a.normalize)?;
        messages.extend(g.warnings.iter().map(|w| format!("generated: {w}")));
        messages.extend(r.warnings.iter().map(|w| format!("reference: {w}")));
        clock.lap("load");
        compare(&g.mesh, &r.mesh, a, a.tau, &mut clock)
    })();
    finish(gen.id.clone(), None, result, messages, clock)
}

fn roundtrip(a: &EvalReconArgs, file: &InputFile, resolution: usize) -> Outcome {
    let mut clock = StageClock::start();
    let mut messages = Vec::new();
    let result = (|| {
        let m = load_mesh(&file.path, true)?;
        messages.extend(m.warnings.iter().cloned());
        clock.lap("load");
        let spec = GridSpec::with_default_domain(resolution).map_err(compute_error)?;
        let grid = compute_sdf(&m.mesh, &spec, a.sign.into(), a.cutoff).map_err(compute_error)?;
        clock.lap("convert");
        let recon = marching_cubes(&grid, IsoSurfaceConfig::for_kind(grid.kind())).mesh;
        clock.lap("reconstruct");
        if recon.face_count() == 0 {
            return Err(compute_error("reconstruction is empty"));
        }
        compare(&recon, &m.mesh, a, a.tau_mode().resolve(spec.voxel_size()), &mut clock)
    })();
    finish(file.id.clone(), Some(resolution), result, messages, clock)
}

fn finish(
    id: String,
    resolution: Option<usize>,
    result: CliResult<ReconReport>,
    mut messages: Vec<String>,
    clock: StageClock,
) -> Outcome {
    let (status, report) = match result {
        Ok(r) if messages.is_empty() => (Status::Ok, Some(r)),
        Ok(r) => (Status::Warning, Some(r)),
        Err(e) => {
            messages.push(e.message);
            (Status::Error, None)
        }
    };
    Outcome { id, resolution, status, messages, report, timings: clock.timings }
}

fn aggregate(outcomes: &[Outcome]) -> Vec<Value> {
    let mut groups: BTreeMap<Option<usize>, Vec<&ReconReport>> = BTreeMap::new();
    for o in outcomes {
        let entry = groups.entry(o.resolution).or_default();
        if let Some(r) = &o.report {
            entry.push(r);
        }
    }
    groups
        .into_iter()
        .map(|(resolution, rs)| {
            let col = |f: fn(&ReconReport) -> f64| mean_std(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            json!({
                "resolution": resolution,
                "cd": col(|r| r.cd),
                "precision": col(|r| r.precision),
                "recall": col(|r| r.recall),
                "fscore": col(|r| r.fscore),
                "nc": col(|r| r.nc),
            })
        })
        .collect()
}

pub fn eval_recon(a: &EvalReconArgs) -> CliResult<i32> {
    a.validate()?;
    let _lock = OutputLock::acquire(&a.out)?;
    let mut manifest = Manifest::new("eval-recon", config_hash(a));
    let mut outcomes = Vec::new();
    if a.roundtrip {
        let files = list_objs(&a.dirs[0])?;
        for f in &files {
            for &n in &a.resolutions {
                outcomes.push(roundtrip(a, f, n));
            }
        }
    } else {
        let left = list_objs(&a.dirs[0])?;
        let right = list_objs(&a.dirs[1])?;
        let by_id: BTreeMap<&str, &InputFile> = right.iter().map(|f| (f.id.as_str(), f)).collect();
        for g in &left {
            match by_id.get(g.id.as_str()) {
                Some(r) => outcomes.push(pair(a, g, r)),
                None => manifest.object(skipped(&g.id, "no reference file with this name")),
            }
        }
        let left_ids: Vec<&str> = left.iter().map(|f| f.id.as_str()).collect();
        for r in &right {
            if !left_ids.contains(&r.id.as_str()) {
                manifest.object(skipped(&r.id, "no evaluated file with this name"));
            }
        }
    }

    let mut objects = Vec::with_capacity(outcomes.len());
    let mut rows = Vec::new();
    for o in &outcomes {
        let mut v = json!({ "id": o.id, "status": o.status });
        if let Some(n) = o.resolution {
            v["resolution"] = json!(n);
        }
        if !o.messages.is_empty() {
            v["messages"] = json!(o.messages);
        }
        if let Some(r) = &o.report {
            v["report"] = recon_json(r);
            rows.push(vec![
                o.id.clone(),
                o.resolution.map(|n| n.to_string()).unwrap_or_default(),
                r.cd.to_string(),
                r.precision.to_string(),
                r.recall.to_string(),
                r.fscore.to_string(),
                r.nc.to_string(),
            ]);
        }
        objects.push(v);
        let id = match o.resolution {
            Some(n) => format!("{}@{n}", o.id),
            None => o.id.clone(),
        };
        manifest.object(ObjectEntry { id, status: o.status, messages: o.messages.clone(), timings_ms: o.timings.clone() });
    }

    let mut report = header("eval-recon", a);
    report.insert("objects".into(), Value::Array(objects));
    report.insert("aggregate".into(), Value::Array(aggregate(&outcomes)));
    write_json(&a.out.join("recon_report.json"), &Value::Object(report))?;
    write_csv(&a.out.join("recon.csv"), &["id", "resolution", "cd", "precision", "recall", "fscore", "nc"], &rows)?;
    manifest.write(&a.out.join("manifest.json"))?;
    Ok(manifest.exit_code())
}

fn skipped(id: &str, why: &str) -> ObjectEntry {
    ObjectEntry { id: id.into(), status: Status::Skipped, messages: vec![why.into()], timings_ms: vec![] }
}
