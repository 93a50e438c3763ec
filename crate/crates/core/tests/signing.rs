use mesh3d_core::geometry::primitives::{box_mesh, icosphere, open_box_mesh, BoxFace};
use mesh3d_core::geometry::TriangleMesh;
use mesh3d_core::signing::{
    compute_sdf, label_voxels, occupancy_grid, GridSpec, Label, ScalarGrid, SignMethod, VoxelLabelGrid,
};
use mesh3d_core::Vec3;

const CUTOFF: f64 = 0.2;

fn spec(n: usize) -> GridSpec {
    GridSpec::with_default_domain(n).unwrap()
}

fn neighbors6(n: usize, v: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
    (0..6).filter_map(move |k| {
        let axis = k / 2;
        let mut w = v;
        if k % 2 == 0 {
            w[axis] = w[axis].checked_sub(1)?;
        } else {
            w[axis] += 1;
            if w[axis] == n {
                return None;
            }
        }
        Some(w)
    })
}

fn check_label_invariants(labels: &VoxelLabelGrid) {
    let s = labels.spec();
    let n = s.resolution();
    let total = labels.count(Label::Surface) + labels.count(Label::Outside) + labels.count(Label::Inside);
    assert_eq!(total, s.voxel_count());
    for i in 0..s.voxel_count() {
        let v = s.coords(i);
        match labels.get(v) {
            Label::Inside => {
                for w in neighbors6(n, v) {
                    assert_ne!(labels.get(w), Label::Outside, "inside {v:?} touches outside {w:?}");
                }
            }
            Label::Surface => {
                let mut any = false;
                labels.for_each_neighbor26(v, |_, l| any |= l == Label::Outside);
                assert!(any, "surface voxel {v:?} without outside neighbor");
            }
            _ => {}
        }
    }
    // Outside is exactly the 6-connected non-surface region reached from the corners.
    let mut seen = vec![false; s.voxel_count()];
    let mut stack: Vec<[usize; 3]> = s.corners().into_iter().filter(|&c| labels.get(c) == Label::Outside).collect();
    for c in &stack {
        seen[s.index(*c)] = true;
    }
    while let Some(v) = stack.pop() {
        for w in neighbors6(n, v) {
            if !seen[s.index(w)] && labels.get(w) == Label::Outside {
                seen[s.index(w)] = true;
                stack.push(w);
            }
        }
    }
    for (i, &reached) in seen.iter().enumerate() {
        assert_eq!(reached, labels.labels()[i] == Label::Outside);
    }
}

#[test]
fn label_invariants_hold_on_fixtures() {
    let fixtures = [
        icosphere(0.4, 3),
        box_mesh(Vec3::splat(-0.5), Vec3::splat(0.5)),
        open_box_mesh(Vec3::splat(-0.3), Vec3::splat(0.3), BoxFace::PosZ),
        box_mesh(Vec3::splat(-0.5), Vec3::splat(0.5)).merged(&box_mesh(Vec3::splat(-0.2), Vec3::splat(0.2))),
    ];
    for m in &fixtures {
        for n in [16, 33] {
            check_label_invariants(&label_voxels(m, &spec(n)).unwrap());
        }
    }
}

/// Exact distance from `p` to the sphere of radius `r`, truncated and signed.
fn sphere_sdf(p: Vec3, r: f64) -> f64 {
    (p.norm() - r).clamp(-CUTOFF, CUTOFF)
}

fn max_sphere_error(grid: &ScalarGrid, r: f64) -> f64 {
    let s = grid.spec();
    (0..s.voxel_count())
        .filter_map(|i| {
            let truth = sphere_sdf(s.center(s.coords(i)), r);
            (truth.abs() < CUTOFF).then(|| (grid.values()[i] as f64 - truth).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn sphere_error_is_small_and_nonincreasing_in_resolution() {
    let sphere = icosphere(0.4, 4);
    // Past the faceting floor the error is flat, so successive maxima are
    // compared up to the rounding of f32 storage.
    let quantum = f32::EPSILON as f64 * CUTOFF;
    let mut prev = f64::INFINITY;
    for n in [32, 64, 128] {
        let g = compute_sdf(&sphere, &spec(n), SignMethod::FloodFill, CUTOFF).unwrap();
        let e = max_sphere_error(&g, 0.4);
        assert!(e <= 1.5 * g.spec().voxel_size(), "N={n}: {e}");
        assert!(e <= prev + quantum, "N={n}: {e} > {prev}");
        prev = e;
    }
}

#[test]
fn sign_flips_only_across_the_surface() {
    let sphere = icosphere(0.4, 3);
    let g = compute_sdf(&sphere, &spec(48), SignMethod::FloodFill, CUTOFF).unwrap();
    let s = g.spec();
    let h = s.voxel_size();
    let slack = 2.0 * 3f64.sqrt() * h;
    for i in 0..s.voxel_count() {
        let v = s.coords(i);
        for w in neighbors6(s.resolution(), v) {
            let (a, b) = (g.get(v) as f64, g.get(w) as f64);
            if a * b < 0.0 {
                assert!(a.abs() + b.abs() >= h - slack);
                assert!(a.abs() <= h + 1e-6 && b.abs() <= h + 1e-6);
            }
        }
    }
}

#[test]
fn cube_matches_analytic_box_distance() {
    let cube = box_mesh(Vec3::splat(-0.5), Vec3::splat(0.5));
    let g = compute_sdf(&cube, &spec(40), SignMethod::FloodFill, CUTOFF).unwrap();
    let s = g.spec();
    for i in 0..s.voxel_count() {
        let p = s.center(s.coords(i));
        let q = Vec3::new(p.x.abs() - 0.5, p.y.abs() - 0.5, p.z.abs() - 0.5);
        let outside = Vec3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0)).norm();
        let truth = (outside + q.max_element().min(0.0)).clamp(-CUTOFF, CUTOFF);
        assert!((g.values()[i] as f64 - truth).abs() <= 1e-6, "{p:?}");
    }
}

fn centers_inside(sp: &GridSpec, lo: Vec3, hi: Vec3) -> usize {
    (0..sp.voxel_count())
        .filter(|&i| {
            let c = sp.center(sp.coords(i));
            (0..3).all(|k| c[k] > lo[k] && c[k] < hi[k])
        })
        .count()
}

#[test]
fn occupancy_volume_of_solid_cube() {
    let sp = spec(64);
    let h = sp.voxel_size();
    let expected = (0.5 / h).powi(3);
    // A single placement counts 21 or 22 voxel centers per axis; averaging
    // over sub-voxel phases recovers the analytic volume.
    let phases = [0.0, 0.13, 0.29, 0.41, 0.58, 0.66, 0.79, 0.93];
    let mut total = 0.0;
    for (k, &a) in phases.iter().enumerate() {
        let shift = Vec3::new(a, phases[(k + 3) % 8], phases[(k + 5) % 8]) * h;
        let (lo, hi) = (Vec3::splat(-0.25) + shift, Vec3::splat(0.25) + shift);
        let g = occupancy_grid(&box_mesh(lo, hi), &sp).unwrap();
        let count = g.values().iter().filter(|&&v| v == 1.0).count();
        assert_eq!(count, centers_inside(&sp, lo, hi));
        total += count as f64;
    }
    let mean = total / phases.len() as f64;
    assert!((mean - expected).abs() <= 0.05 * expected, "{mean} vs {expected}");
}

#[test]
fn occupancy_of_empty_mesh_is_zero() {
    let empty = TriangleMesh::new(vec![], vec![]).unwrap();
    let g = occupancy_grid(&empty, &spec(16)).unwrap();
    assert!(g.values().iter().all(|&v| v == 0.0));
}

#[test]
fn sign_methods_agree_on_watertight_sphere() {
    let sphere = icosphere(0.4, 4);
    let sp = spec(64);
    let a = compute_sdf(&sphere, &sp, SignMethod::FloodFill, CUTOFF).unwrap();
    let b = compute_sdf(&sphere, &sp, SignMethod::RaycastParity, CUTOFF).unwrap();
    let agree = a.values().iter().zip(b.values()).filter(|(x, y)| (**x < 0.0) == (**y < 0.0)).count();
    assert!(agree as f64 >= 0.999 * sp.voxel_count() as f64, "{agree}");
}

#[test]
fn open_box_leaks_and_has_no_inside() {
    let open = open_box_mesh(Vec3::splat(-0.3), Vec3::splat(0.3), BoxFace::NegY);
    let labels = label_voxels(&open, &spec(32)).unwrap();
    assert_eq!(labels.count(Label::Inside), 0);
    assert_eq!(labels.count(Label::Unlabeled), 0);
}
