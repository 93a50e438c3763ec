use mesh3d_core::geometry::primitives::{self, box_mesh, icosphere};
use mesh3d_core::geometry::triangle::closest_point_on_triangle;
use mesh3d_core::geometry::{normalize_to_unit_cube, sample_surface, SpatialIndex, TriangleMesh};
use mesh3d_core::{RngSeed, Vec3};
use proptest::prelude::*;
use rand::Rng;

fn brute_distance(mesh: &TriangleMesh, q: Vec3) -> f64 {
    (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            closest_point_on_triangle(q, a, b, c).distance(q)
        })
        .fold(f64::INFINITY, f64::min)
}

/// About 500 triangles of random soup inside the unit cube.
fn random_soup(seed: u64, faces: usize) -> TriangleMesh {
    let mut rng = RngSeed(seed).stream(0);
    let mut v = Vec::new();
    let mut f = Vec::new();
    for i in 0..faces {
        let c = Vec3::new(rng.random(), rng.random(), rng.random()) - Vec3::splat(0.5);
        for _ in 0..3 {
            v.push(c + Vec3::new(rng.random(), rng.random(), rng.random()) * 0.1);
        }
        f.push([3 * i as u32, 3 * i as u32 + 1, 3 * i as u32 + 2]);
    }
    TriangleMesh::new(v, f).unwrap()
}

#[test]
fn closest_point_equals_brute_force() {
    let mesh = random_soup(11, 500);
    let idx = SpatialIndex::build(&mesh).unwrap();
    let mut rng = RngSeed(12).stream(0);
    for _ in 0..100 {
        let q = Vec3::new(rng.random(), rng.random(), rng.random()) * 1.6 - Vec3::splat(0.8);
        let c = idx.closest_point(q);
        assert!((c.distance - brute_distance(&mesh, q)).abs() <= 1e-9);
        assert!((c.normal - mesh.face_normal(c.face).unwrap()).norm() < 1e-12);
    }
}

#[test]
fn icosphere_center_distance() {
    let s = icosphere(0.4, 3);
    assert_eq!(s.vertices().len(), 642);
    let d = SpatialIndex::build(&s).unwrap().closest_point(Vec3::ZERO).distance;
    assert!((0.39..=0.40).contains(&d), "{d}");
    assert!((d - brute_distance(&s, Vec3::ZERO)).abs() <= 1e-12);
}

#[test]
fn exterior_rays_through_closed_sphere_have_even_parity() {
    let s = icosphere(0.4, 3);
    let idx = SpatialIndex::build(&s).unwrap();
    let mut rng = RngSeed(5).stream(0);
    for _ in 0..1000 {
        // Origin on a sphere of radius 1, aimed at a random point inside.
        let mut dir = Vec3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        dir = dir.normalized().unwrap();
        let origin = dir;
        let target = Vec3::new(rng.random(), rng.random(), rng.random()) * 0.6 - Vec3::splat(0.3);
        let d = (target - origin).normalized().unwrap();
        assert_eq!(idx.ray_intersections(origin, d).len() % 2, 0);
    }
}

#[test]
fn ray_missing_bounds_is_empty() {
    let idx = SpatialIndex::build(&box_mesh(Vec3::splat(-0.5), Vec3::splat(0.5))).unwrap();
    assert!(idx.ray_intersections(Vec3::new(0.0, 2.0, 0.0), Vec3::X).is_empty());
}

#[test]
fn per_triangle_counts_are_multinomial() {
    let cube = box_mesh(Vec3::splat(-0.5), Vec3::splat(0.5));
    let n = 60_000;
    let pc = sample_surface(&cube, n, RngSeed(3)).unwrap();
    let idx = SpatialIndex::build(&cube).unwrap();
    let mut counts = [0usize; 12];
    for p in pc.points() {
        counts[idx.closest_point(p.position).face] += 1;
    }
    let p = 1.0 / 12.0;
    let mean = n as f64 * p;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - mean).abs() <= 3.0 * sigma, "{counts:?}");
    }
}

#[test]
fn sample_mean_converges_to_area_centroid() {
    // Asymmetric mesh: a box plus a small far sphere.
    let mesh = box_mesh(Vec3::ZERO, Vec3::new(1.0, 0.5, 0.25)).merged(
        &TriangleMesh::new(
            icosphere(0.1, 2).vertices().iter().map(|&v| v + Vec3::new(2.0, 0.0, 0.0)).collect(),
            icosphere(0.1, 2).faces().to_vec(),
        )
        .unwrap(),
    );
    let area = mesh.surface_area();
    let mut centroid = Vec3::ZERO;
    let mut second = Vec3::ZERO;
    for f in 0..mesh.face_count() {
        let [a, b, c] = mesh.triangle(f);
        let w = mesh.face_area(f) / area;
        let m = (a + b + c) / 3.0;
        centroid += m * w;
        // E[x^2] over a triangle: (sum of squares + sum of pairwise products) / 6.
        let sq = |i: usize| (a[i] * a[i] + b[i] * b[i] + c[i] * c[i] + a[i] * b[i] + b[i] * c[i] + a[i] * c[i]) / 6.0;
        second += Vec3::new(sq(0), sq(1), sq(2)) * w;
    }
    let n = 4000;
    let pc = sample_surface(&mesh, n, RngSeed(8)).unwrap();
    let mean = pc.positions().iter().fold(Vec3::ZERO, |acc, &p| acc + p) / n as f64;
    for i in 0..3 {
        let var = second[i] - centroid[i] * centroid[i];
        let se = (var / n as f64).sqrt();
        assert!((mean[i] - centroid[i]).abs() <= 5.0 * se, "axis {i}: {} vs {}", mean[i], centroid[i]);
    }
}

#[test]
fn samples_lie_on_the_source_surface() {
    let s = icosphere(0.4, 2);
    let idx = SpatialIndex::build(&s).unwrap();
    for p in sample_surface(&s, 2000, RngSeed(2)).unwrap().points() {
        assert!(idx.closest_point(p.position).distance <= 1e-6);
        assert!((p.normal.norm() - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn degenerate_faces_are_skipped_by_sampling() {
    let mut v = primitives::square_sheet(0.5, 0.0, 1).vertices().to_vec();
    let mut f = primitives::square_sheet(0.5, 0.0, 1).faces().to_vec();
    v.push(Vec3::new(5.0, 5.0, 5.0));
    let k = v.len() as u32 - 1;
    f.push([k, k, k]);
    let m = TriangleMesh::new(v, f).unwrap();
    for p in sample_surface(&m, 500, RngSeed(0)).unwrap().points() {
        assert!(p.position.z.abs() < 1e-12);
    }
}

fn vec3() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closest_distance_is_1_lipschitz(a in vec3(), b in vec3()) {
        let s = icosphere(0.4, 2);
        let idx = SpatialIndex::build(&s).unwrap();
        let (da, db) = (idx.closest_point(a).distance, idx.closest_point(b).distance);
        prop_assert!((da - db).abs() <= a.distance(b) + 1e-12);
    }

    #[test]
    fn normalization_is_idempotent(pts in prop::collection::vec(vec3(), 3..20), scale in 0.1..10.0f64) {
        let v: Vec<Vec3> = pts.iter().map(|&p| p * scale + Vec3::new(3.0, -1.0, 0.5)).collect();
        let n = v.len() as u32;
        let faces = (0..n - 2).map(|i| [i, i + 1, i + 2]).collect();
        let m = TriangleMesh::new(v, faces).unwrap();
        let (once, _) = normalize_to_unit_cube(&m).unwrap();
        let (twice, t) = normalize_to_unit_cube(&once).unwrap();
        prop_assert!((t.scale - 1.0).abs() <= 1e-6);
        prop_assert!(t.translation.norm() <= 1e-6);
        for (a, b) in once.vertices().iter().zip(twice.vertices()) {
            prop_assert!(a.distance(*b) <= 1e-6);
        }
        let ext = once.aabb().unwrap().extent();
        prop_assert!((ext.max_element() - 1.0).abs() <= 1e-6);
        prop_assert!(once.aabb().unwrap().center().norm() <= 1e-6);
    }
}
