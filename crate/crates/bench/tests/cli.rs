use std::path::{Path, PathBuf};
use std::process::Command;

use mesh3d_bench::formats::{decode_grid, decode_matrix, encode_grid};
use mesh3d_bench::obj::{parse_obj, write_obj};
use mesh3d_core::geometry::primitives::{box_mesh, icosphere};
use mesh3d_core::geometry::TriangleMesh;
use mesh3d_core::recon_metrics::ChamferPower;
use mesh3d_core::signing::{GridKind, GridSpec, ScalarGrid};
use mesh3d_core::{RngSeed, Vec3};
use rand::Rng;
use serde_json::Value;

struct Run {
    code: i32,
    stderr: String,
}

fn bench(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_mesh3d-bench"))
        .args(args.iter().map(|a| a.as_ref()))
        .env_remove("MESH3D_CACHE_DIR")
        .output()
        .expect("binary runs");
    Run { code: out.status.code().expect("exit code"), stderr: String::from_utf8_lossy(&out.stderr).into_owned() }
}

fn error_json(r: &Run) -> Value {
    let line = r.stderr.lines().last().expect("error line");
    serde_json::from_str(line).expect("error is JSON")
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn save(dir: &Path, name: &str, mesh: &TriangleMesh) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, write_obj(mesh)).unwrap();
    p
}

fn sphere() -> TriangleMesh {
    icosphere(0.4, 3)
}

fn cube() -> TriangleMesh {
    box_mesh(Vec3::splat(-0.3), Vec3::splat(0.3))
}

fn slab() -> TriangleMesh {
    box_mesh(Vec3::new(-0.35, -0.2, -0.12), Vec3::new(0.35, 0.2, 0.12))
}

/// Writes vertex-only OBJ point clouds and returns their points as parsed back.
fn save_clouds(dir: &Path, prefix: &str, count: usize, seed: u64) -> Vec<Vec<Vec3>> {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = RngSeed(seed).stream(0);
    (0..count)
        .map(|k| {
            let n = rng.random_range(20..60);
            let scale = rng.random_range(0.2..0.5);
            let mut text = String::new();
            for _ in 0..n {
                let p: [f64; 3] = [rng.random(), rng.random(), rng.random()];
                text += &format!("v {} {} {}\n", scale * p[0], scale * p[1], scale * p[2]);
            }
            let path = dir.join(format!("{prefix}{k:02}.obj"));
            std::fs::write(&path, &text).unwrap();
            parse_obj(&text).unwrap().mesh.vertices().to_vec()
        })
        .collect()
}

fn brute_cd(x: &[Vec3], y: &[Vec3], power: ChamferPower) -> f64 {
    let term = |from: &[Vec3], to: &[Vec3]| {
        from.iter()
            .map(|p| {
                let d2 = to.iter().map(|q| (*p - *q).norm_squared()).fold(f64::INFINITY, f64::min);
                if power == ChamferPower::One { d2.sqrt() } else { d2 }
            })
            .sum::<f64>()
            / from.len() as f64
    };
    term(x, y) + term(y, x)
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn convert_rejects_low_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(dir.path(), "sphere.obj", &sphere());
    let r = bench(&[&"convert", &input, &dir.path().join("g.sdfg"), &"--res", &"4"]);
    assert_eq!(r.code, 2);
    assert_eq!(error_json(&r)["error"], "validation");
}

#[test]
fn convert_sign_methods_agree_on_watertight_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(dir.path(), "sphere.obj", &sphere());
    let (a, b) = (dir.path().join("ff.sdfg"), dir.path().join("naive.sdfg"));
    assert_eq!(bench(&[&"convert", &input, &a, &"--res", &"64"]).code, 0);
    assert_eq!(bench(&[&"convert", &input, &b, &"--res", &"64", &"--sign", &"naive"]).code, 0);
    let ga = decode_grid(&std::fs::read(&a).unwrap()).unwrap();
    let gb = decode_grid(&std::fs::read(&b).unwrap()).unwrap();
    assert_eq!(ga.values().len(), 64 * 64 * 64);
    let agree = ga.values().iter().zip(gb.values()).filter(|(x, y)| (**x >= 0.0) == (**y >= 0.0)).count();
    assert!(agree as f64 >= 0.999 * ga.values().len() as f64, "{agree}");
}

#[test]
fn convert_warns_on_open_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = cube();
    let faces = m.faces()[2..].to_vec();
    m = TriangleMesh::new(m.vertices().to_vec(), faces).unwrap();
    let input = save(dir.path(), "open.obj", &m);
    let r = bench(&[&"convert", &input, &dir.path().join("g.sdfg"), &"--res", &"16"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("open_mesh"), "{}", r.stderr);
}

#[test]
fn reconstruct_pipeline_and_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    // Already in the normalized frame, so no rescaling is needed later.
    save(&src, "sphere.obj", &icosphere(0.5, 3));
    let grid = dir.path().join("sphere.sdfg");
    assert_eq!(bench(&[&"convert", &src.join("sphere.obj"), &grid, &"--res", &"64"]).code, 0);
    let rec = dir.path().join("rec");
    std::fs::create_dir_all(&rec).unwrap();
    assert_eq!(bench(&[&"reconstruct", &grid, &rec.join("sphere.obj")]).code, 0);
    let out = dir.path().join("eval");
    assert_eq!(bench(&[&"eval-recon", &rec, &src, &"--out", &out, &"--samples", &"auto"]).code, 0);
    let f = json(&out.join("recon_report.json"))["objects"][0]["report"]["fscore"].as_f64().unwrap();
    assert!(f >= 95.0, "F = {f}");

    let missing = bench(&[&"reconstruct", &dir.path().join("nope.sdfg"), &dir.path().join("x.obj")]);
    assert_eq!(missing.code, 2);
    assert_eq!(error_json(&missing)["error"], "io");

    let spec = GridSpec::with_default_domain(16).unwrap();
    let positive = ScalarGrid::new(spec, vec![0.1; 16 * 16 * 16], GridKind::TruncatedSdf { cutoff: 0.1 }).unwrap();
    let g = dir.path().join("positive.sdfg");
    std::fs::write(&g, encode_grid(&positive)).unwrap();
    let empty = dir.path().join("empty.obj");
    let r = bench(&[&"reconstruct", &g, &empty]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("empty_surface"), "{}", r.stderr);
    assert!(std::fs::read_to_string(&empty).unwrap().trim().is_empty());
}

#[test]
fn eval_recon_identical_directories() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        save(d, "sphere.obj", &sphere());
        save(d, "cube.obj", &cube());
    }
    save(&a, "only_a.obj", &slab());
    save(&b, "only_b.obj", &slab());
    let out = dir.path().join("out");
    assert_eq!(bench(&[&"eval-recon", &a, &b, &"--out", &out, &"--samples", &"3000"]).code, 0);
    let report = json(&out.join("recon_report.json"));
    let objects = report["objects"].as_array().unwrap();
    assert_eq!(objects.len(), 2);
    for o in objects {
        assert_eq!(o["report"]["fscore"], 100.0);
        assert_eq!(o["report"]["cd"], 0.0);
    }
    let manifest = json(&out.join("manifest.json"));
    let skipped: Vec<&str> = manifest["objects"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|o| o["status"] == "skipped")
        .map(|o| o["id"].as_str().unwrap())
        .collect();
    assert_eq!(skipped, ["only_a.obj", "only_b.obj"]);
    assert!(std::fs::read_to_string(out.join("recon.csv")).unwrap().starts_with("id,resolution,cd,"));
}

#[test]
fn eval_recon_roundtrip_improves_with_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let shapes = dir.path().join("shapes");
    save(&shapes, "cube.obj", &cube());
    save(&shapes, "slab.obj", &slab());
    save(&shapes, "sphere.obj", &sphere());
    let out = dir.path().join("out");
    let r = bench(&[&"eval-recon", &"--roundtrip", &shapes, &"--out", &out, &"--res", &"32,64,128", &"--tau-mode", &"voxel", &"--samples", &"auto"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report = json(&out.join("recon_report.json"));
    let objects = report["objects"].as_array().unwrap();
    assert_eq!(objects.len(), 9);
    for shape in ["cube.obj", "slab.obj", "sphere.obj"] {
        let f: Vec<f64> = objects
            .iter()
            .filter(|o| o["id"] == shape)
            .map(|o| o["report"]["fscore"].as_f64().unwrap())
            .collect();
        eprintln!("{shape}: {f:?}");
        assert!(f.iter().all(|v| v.is_finite() && *v > 50.0), "{shape}: {f:?}");
        // The axis-aligned cube is lattice-phase limited: its faces sit at a
        // different offset from the voxel centres at each N, so F is not
        // monotone for it. The acceptance target reports that case.
        if shape != "cube.obj" {
            assert!(f.windows(2).all(|w| w[1] > w[0]), "{shape}: {f:?}");
        }
    }
    assert_eq!(report["aggregate"].as_array().unwrap().len(), 3);
}

#[test]
fn eval_gen_same_directory_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let shapes = dir.path().join("shapes");
    save(&shapes, "cube.obj", &cube());
    save(&shapes, "slab.obj", &slab());
    save(&shapes, "sphere.obj", &sphere());
    let out = dir.path().join("out");
    let args: [&dyn AsRef<std::ffi::OsStr>; 6] = [&"eval-gen", &shapes, &shapes, &"--out", &out, &"--samples"];
    let mut full = args.to_vec();
    full.push(&"512");
    assert_eq!(bench(&full).code, 0);
    let first = std::fs::read(out.join("gen_report.json")).unwrap();
    let r = json(&out.join("gen_report.json"));
    assert_eq!(r["report"]["cov"], 1.0);
    assert_eq!(r["report"]["mmd"], 0.0);
    assert_eq!(json(&out.join("manifest.json"))["cache"]["hit"], false);

    assert_eq!(bench(&full).code, 0);
    assert_eq!(std::fs::read(out.join("gen_report.json")).unwrap(), first);
    assert_eq!(json(&out.join("manifest.json"))["cache"]["hit"], true);
    let stages = json(&out.join("manifest.json"))["stages_ms"].to_string();
    assert!(!stages.contains("pairwise_distances"), "{stages}");
}

#[test]
fn eval_gen_matches_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let gen = save_clouds(&dir.path().join("gen"), "g", 10, 1);
    let refs = save_clouds(&dir.path().join("ref"), "r", 10, 2);
    let out = dir.path().join("out");
    let r = bench(&[&"eval-gen", &dir.path().join("gen"), &dir.path().join("ref"), &"--out", &out, &"--power", &"2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let m = decode_matrix(&std::fs::read(out.join("matrix.cdmx")).unwrap()).unwrap();
    let all: Vec<&Vec<Vec3>> = gen.iter().chain(&refs).collect();
    let d: Vec<Vec<f64>> = all.iter().map(|a| all.iter().map(|b| brute_cd(a, b, ChamferPower::Two)).collect()).collect();
    for i in 0..10 {
        for j in 0..10 {
            assert!(rel_close(m.gr[i * 10 + j], d[i][10 + j]));
            assert!(rel_close(m.gg[i * 10 + j], d[i][j]));
            assert!(rel_close(m.rr[i * 10 + j], d[10 + i][10 + j]));
        }
    }
    let argmin = |a: usize, c: &mut dyn Iterator<Item = usize>| {
        c.map(|b| (d[a][b], b)).min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1))).unwrap().1
    };
    let covered: std::collections::BTreeSet<usize> = (0..10).map(|g| argmin(g, &mut (10..20))).collect();
    let mmd = (10..20).map(|r| (0..10).map(|g| d[g][r]).fold(f64::INFINITY, f64::min)).sum::<f64>() / 10.0;
    let nna = (0..20).filter(|&a| (a < 10) == (argmin(a, &mut (0..20).filter(|&b| b != a)) < 10)).count() as f64 / 20.0;
    let rep = &json(&out.join("gen_report.json"))["report"];
    assert_eq!(rep["cov"].as_f64().unwrap(), covered.len() as f64 / 10.0);
    assert!(rel_close(rep["mmd"].as_f64().unwrap(), mmd));
    assert_eq!(rep["one_nna"].as_f64().unwrap(), nna);
    let csv = std::fs::read_to_string(out.join("mmd_per_ref.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn eval_gen_empty_directory_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    save_clouds(&dir.path().join("gen"), "g", 2, 1);
    std::fs::create_dir_all(dir.path().join("ref")).unwrap();
    let r = bench(&[&"eval-gen", &dir.path().join("gen"), &dir.path().join("ref"), &"--out", &dir.path().join("o")]);
    assert_eq!(r.code, 2);
}

#[test]
fn stability_repeatable_and_size_checked() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    save_clouds(&data, "c", 12, 3);
    let run = |out: &Path| bench(&[&"stability", &data, &"--out", &out, &"--sizes", &"2,5", &"--trials", &"1", &"--seed", &"9"]);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&a).code, 0);
    assert_eq!(run(&b).code, 0);
    let csv = std::fs::read(a.join("stability.csv")).unwrap();
    assert_eq!(csv, std::fs::read(b.join("stability.csv")).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next(), Some("size,metric,mean,std"));
    assert_eq!(text.lines().count(), 1 + 2 * 3);

    let r = bench(&[&"stability", &data, &"--out", &dir.path().join("c"), &"--sizes", &"7"]);
    assert_eq!(r.code, 2);
    assert_eq!(error_json(&r)["details"]["available"], 12);
}

fn write_prefs(path: &Path, pairs: &[(&str, &str, usize)]) {
    let mut text = String::from("winner,loser\n");
    for (w, l, n) in pairs {
        for _ in 0..*n {
            text += &format!("{w},{l}\n");
        }
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn bt_fit_cases() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");

    write_prefs(&csv, &[("a", "b", 5), ("b", "a", 5), ("b", "c", 4), ("c", "b", 4), ("a", "c", 2), ("c", "a", 2)]);
    let out = dir.path().join("balanced");
    assert_eq!(bench(&[&"bt-fit", &csv, &"--out", &out]).code, 0);
    let s = &json(&out.join("bt_scores.json"))["scores"];
    for id in ["a", "b", "c"] {
        assert!(s[id].as_f64().unwrap().abs() < 1e-9, "{s}");
    }

    write_prefs(&csv, &[("ours", "base", 3), ("base", "ours", 1)]);
    let out = dir.path().join("three");
    assert_eq!(bench(&[&"bt-fit", &csv, &"--out", &out]).code, 0);
    let r = json(&out.join("bt_scores.json"));
    let delta = r["scores"]["ours"].as_f64().unwrap() - r["scores"]["base"].as_f64().unwrap();
    assert!((delta - 3f64.ln()).abs() <= 1e-6, "{delta}");
    assert!((r["probabilities"]["ours"]["base"].as_f64().unwrap() - 0.75).abs() < 1e-6);

    write_prefs(&csv, &[("top", "x", 3), ("x", "y", 2), ("y", "x", 1)]);
    let r = bench(&[&"bt-fit", &csv, &"--out", &dir.path().join("sep")]);
    assert_eq!(r.code, 3);
    let e = error_json(&r);
    assert_eq!(e["error"], "separated_graph");
    assert_eq!(e["details"]["undefeated"], serde_json::json!(["top"]));
}

fn write_series(path: &Path, column: &str, rows: &[(&str, f64)]) {
    let mut text = format!("id,{column}\n");
    for (id, v) in rows {
        text += &format!("{id},{v}\n");
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn decompose_cases() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let mmd = [("a", 0.2), ("b", 0.5), ("c", 0.3), ("d", 0.9)];
    write_series(&p("mmd.csv"), "mmd", &mmd);
    write_series(&p("recon.csv"), "cd", &[("d", 0.9), ("b", 0.5), ("a", 0.2), ("c", 0.3)]);
    write_series(&p("comp.csv"), "cd", &[("a", 0.1), ("b", 0.15), ("c", 0.05), ("d", 0.4)]);
    let run = |recon: &str, out: &str| {
        bench(&[&"decompose", &"--mmd", &p("mmd.csv"), &"--recon", &p(recon), &"--compression", &p("comp.csv"), &"--out", &p(out)])
    };
    assert_eq!(run("recon.csv", "o1").code, 0);
    let d = &json(&p("o1").join("decomposition.json"))["decomposition"];
    assert!((d["recon_fraction"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((d["pearson_recon_mmd"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    // Pearson against the textbook formula.
    let x = [0.2, 0.5, 0.3, 0.9];
    let y = [0.1, 0.15, 0.05, 0.4];
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&x), mean(&y));
    let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = y.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    let got = d["pearson_recon_compression"].as_f64().unwrap();
    assert!((got - cov / (sx * sy)).abs() < 1e-12, "{got}");

    write_series(&p("short.csv"), "cd", &[("a", 0.2), ("b", 0.5), ("c", 0.3)]);
    let r = run("short.csv", "o2");
    assert_eq!(r.code, 2);
    let e = error_json(&r);
    assert_eq!(e["error"], "misaligned_ids");
    assert_eq!(e["details"]["mismatches"][0]["id"], "d");
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    let refs = dir.path().join("ref");
    let (gm, rm) = (dir.path().join("gm"), dir.path().join("rm"));
    for d in [&gen, &gm] {
        save(d, "cube.obj", &cube());
        save(d, "sphere.obj", &sphere());
    }
    for d in [&refs, &rm] {
        save(d, "cube.obj", &slab());
        save(d, "sphere.obj", &icosphere(0.35, 2));
    }
    save_clouds(&gen, "z", 3, 5);
    save_clouds(&refs, "z", 3, 6);
    let out = dir.path().join("out");
    let mut seen: Vec<Vec<Vec<u8>>> = Vec::new();
    for jobs in ["1", "4"] {
        let _ = std::fs::remove_dir_all(&out);
        assert_eq!(bench(&[&"--jobs", &jobs, &"eval-gen", &gen, &refs, &"--out", &out, &"--samples", &"700"]).code, 0);
        assert_eq!(bench(&[&"--jobs", &jobs, &"eval-recon", &gm, &rm, &"--out", &out.join("r"), &"--samples", &"700"]).code, 0);
        seen.push(
            ["gen_report.json", "matrix.cdmx", "mmd_per_ref.csv", "r/recon_report.json", "r/recon.csv"]
                .iter()
                .map(|f| std::fs::read(out.join(f)).unwrap())
                .collect(),
        );
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn zero_jobs_and_bad_flags_are_json_errors() {
    let r = bench(&[&"--jobs", &"0", &"bt-fit", &"x.csv", &"--out", &"o"]);
    assert_eq!(r.code, 2);
    assert_eq!(error_json(&r)["error"], "validation");
    let r = bench(&[&"eval-gen", &"--bogus"]);
    assert_eq!(r.code, 2);
    assert_eq!(error_json(&r)["error"], "validation");
}

#[test]
fn locked_output_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    save_clouds(&dir.path().join("g"), "c", 2, 1);
    let out = dir.path().join("out");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(out.join(".mesh3d-bench.lock"), "").unwrap();
    let r = bench(&[&"eval-gen", &dir.path().join("g"), &dir.path().join("g"), &"--out", &out]);
    assert_eq!(r.code, 2);
    assert_eq!(error_json(&r)["error"], "locked");
}
