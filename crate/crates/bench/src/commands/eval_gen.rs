use mesh3d_core::gen_metrics::{gen_report, mmd, pairwise_indexed, DistanceMatrix};
use mesh3d_core::recon_metrics::{ChamferPower, IndexedCloud};
use mesh3d_core::RngSeed;
use serde_json::{json, Value};

use super::warn;
use crate::cache::{cache_dir, KeyBuilder, MatrixCache, OutputLock};
use crate::cli::EvalGenArgs;
use crate::error::{compute_error, CliError, CliResult};
use crate::formats::{encode_matrix, MatrixFile};
use crate::inputs::{list_objs, load_cloud, InputFile};
use crate::manifest::{Manifest, ObjectEntry, StageClock, Status};
use crate::report::{config_hash, header, write_bytes, write_csv, write_json, VERSION};

/// Sampling parameters shared by the set commands.
pub(crate) struct SetSampling {
    pub samples: usize,
    pub normalize: bool,
    pub seed: RngSeed,
    pub power: ChamferPower,
}

impl SetSampling {
    /// Key over everything that determines the distances: parameters and
    /// the content of each file, by role and position.
    pub fn cache_key(&self, kind: &str, sets: &[(&str, &[InputFile])]) -> String {
        let mut k = KeyBuilder::default()
            .part("tool-version", VERSION.as_bytes())
            .part("kind", kind.as_bytes())
            .part("power", &[self.power.as_u8()])
            .part("samples", &(self.samples as u64).to_le_bytes())
            .part("normalize", &[self.normalize as u8])
            .part("seed", &self.seed.0.to_le_bytes());
        for (role, files) in sets {
            for f in *files {
                k = k.part(role, &f.sha256);
            }
        }
        k.finish()
    }

    /// Loads every file in parallel, in file order. Failures are reported
    /// per object and leave the object out.
    pub fn load(&self, files: &[InputFile], role: &str, manifest: &mut Manifest) -> (Vec<usize>, Vec<IndexedCloud>) {
        let loaded = mesh3d_core::par::map_indexed(files.len(), |i| {
            let mut clock = StageClock::start();
            let r = load_cloud(&files[i].path, self.samples, self.normalize, self.seed)
                .and_then(|c| IndexedCloud::new(&c).map_err(compute_error));
            clock.lap("load_sample_index");
            (r, clock.timings)
        });
        let mut kept = Vec::new();
        let mut clouds = Vec::new();
        for (i, (r, timings)) in loaded.into_iter().enumerate() {
            let id = format!("{role}/{}", files[i].id);
            match r {
                Ok(c) => {
                    kept.push(i);
                    clouds.push(c);
                    manifest.object(ObjectEntry { id, status: Status::Ok, messages: vec![], timings_ms: timings });
                }
                Err(e) => manifest.object(ObjectEntry {
                    id,
                    status: Status::Error,
                    messages: vec![e.message],
                    timings_ms: timings,
                }),
            }
        }
        (kept, clouds)
    }
}

fn matrix_from_file(m: MatrixFile) -> CliResult<DistanceMatrix> {
    DistanceMatrix::new(m.n_gen, m.n_ref, m.gg, m.gr, m.rr, m.power).map_err(compute_error)
}

pub fn eval_gen(a: &EvalGenArgs) -> CliResult<i32> {
    a.validate()?;
    let gen_files = list_objs(&a.gen_dir)?;
    let ref_files = list_objs(&a.ref_dir)?;
    if gen_files.is_empty() || ref_files.is_empty() {
        return Err(CliError::validation("both the generated and the reference directory need .obj files"));
    }
    let _lock = OutputLock::acquire(&a.out)?;
    let mut manifest = Manifest::new("eval-gen", config_hash(a));
    let sampling =
        SetSampling { samples: a.samples, normalize: a.normalize, seed: RngSeed(a.seed), power: a.power.0 };
    let key = sampling.cache_key("pairwise", &[("generated", &gen_files), ("reference", &ref_files)]);
    let cache = MatrixCache::new(cache_dir(&a.out));

    let cached = manifest.stage("cache_lookup", || cache.get(&key));
    let hit = cached.as_ref().is_some_and(|m| m.n_gen == gen_files.len() && m.n_ref == ref_files.len());
    let (gen_ids, ref_ids, matrix) = if hit {
        let ids = |fs: &[InputFile]| fs.iter().map(|f| f.id.clone()).collect::<Vec<_>>();
        (ids(&gen_files), ids(&ref_files), matrix_from_file(cached.expect("hit implies entry"))?)
    } else {
        let (gk, gc) = sampling.load(&gen_files, "generated", &mut manifest);
        let (rk, rc) = sampling.load(&ref_files, "reference", &mut manifest);
        if gc.is_empty() || rc.is_empty() {
            manifest.write(&a.out.join("manifest.json"))?;
            return Err(CliError::validation("no loadable shapes left in one of the sets"));
        }
        let m = manifest.stage("pairwise_distances", || pairwise_indexed(&gc, &rc, sampling.power));
        let m = m.map_err(compute_error)?;
        if gk.len() == gen_files.len() && rk.len() == ref_files.len() {
            cache.put(&key, &to_file(&m))?;
        }
        let ids = |fs: &[InputFile], keep: &[usize]| keep.iter().map(|&i| fs[i].id.clone()).collect::<Vec<_>>();
        (ids(&gen_files, &gk), ids(&ref_files, &rk), m)
    };
    manifest.set("cache", json!({ "key": key, "hit": hit }));

    let r = manifest.stage("metrics", || gen_report(&matrix));
    let per_ref = mmd(&matrix).per_ref;
    let mut warnings = Vec::new();
    if r.size_mismatch {
        let w = format!("set sizes differ ({} generated, {} reference); 1-NNA is biased", r.n_gen, r.n_ref);
        warn(json!({ "warning": "size_mismatch", "message": w }));
        warnings.push(w);
    }

    let mut report = header("eval-gen", a);
    report.insert(
        "report".into(),
        json!({
            "cov": r.cov,
            "mmd": r.mmd,
            "one_nna": r.one_nna,
            "n_gen": r.n_gen,
            "n_ref": r.n_ref,
            "power": r.power.as_u8(),
            "seed": a.seed,
        }),
    );
    report.insert("generated".into(), json!(gen_ids));
    report.insert("reference".into(), json!(ref_ids));
    report.insert("warnings".into(), json!(warnings));
    write_json(&a.out.join("gen_report.json"), &Value::Object(report))?;
    write_bytes(&a.out.join("matrix.cdmx"), &encode_matrix(&to_file(&matrix)))?;
    let rows: Vec<Vec<String>> = ref_ids.iter().zip(&per_ref).map(|(id, v)| vec![id.clone(), v.to_string()]).collect();
    write_csv(&a.out.join("mmd_per_ref.csv"), &["id", "mmd"], &rows)?;
    manifest.write(&a.out.join("manifest.json"))?;
    Ok(manifest.exit_code())
}

fn to_file(m: &DistanceMatrix) -> MatrixFile {
    MatrixFile {
        n_gen: m.n_gen(),
        n_ref: m.n_ref(),
        power: m.power(),
        gg: m.gg_values().to_vec(),
        gr: m.gr_values().to_vec(),
        rr: m.rr_values().to_vec(),
    }
}
