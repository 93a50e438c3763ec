use mesh3d_core::gen_metrics::{
    coverage, gen_report, mmd, one_nna, pairwise_distances, DistanceMatrix, Member, MeshSet, SetRole,
};
use mesh3d_core::geometry::primitives::{box_mesh, icosphere};
use mesh3d_core::geometry::{sample_surface, PointCloud, SpatialIndex, SurfacePoint, Transform};
use mesh3d_core::recon_metrics::{
    chamfer, fscore, normal_consistency, ChamferConfig, ChamferPower, FscoreConfig, DEFAULT_SAMPLES,
};
use mesh3d_core::{RngSeed, Vec3};
use proptest::prelude::*;
use rand::Rng;

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

fn brute_min_d2(p: Vec3, cloud: &[Vec3]) -> f64 {
    cloud.iter().map(|q| (p - *q).norm_squared()).fold(f64::INFINITY, f64::min)
}

fn brute_chamfer(x: &[Vec3], y: &[Vec3], power: ChamferPower) -> f64 {
    let term = |from: &[Vec3], to: &[Vec3]| {
        from.iter()
            .map(|p| {
                let d2 = brute_min_d2(*p, to);
                match power {
                    ChamferPower::One => d2.sqrt(),
                    ChamferPower::Two => d2,
                }
            })
            .sum::<f64>()
            / from.len() as f64
    };
    term(x, y) + term(y, x)
}

fn brute_fscore(g: &[Vec3], r: &[Vec3], tau: f64) -> f64 {
    let frac = |from: &[Vec3], to: &[Vec3]| {
        100.0 * from.iter().filter(|p| brute_min_d2(**p, to).sqrt() < tau).count() as f64 / from.len() as f64
    };
    let (p, rc) = (frac(g, r), frac(r, g));
    if p + rc > 0.0 {
        2.0 * p * rc / (p + rc)
    } else {
        0.0
    }
}

fn random_cloud(rng: &mut impl Rng, n: usize) -> Vec<Vec3> {
    (0..n).map(|_| Vec3::new(rng.random(), rng.random(), rng.random()) - Vec3::splat(0.5)).collect()
}

fn cloud(points: &[Vec3]) -> PointCloud {
    PointCloud::from_positions(points)
}

fn members(clouds: &[Vec<Vec3>], prefix: &str) -> Vec<Member> {
    clouds.iter().enumerate().map(|(i, c)| Member { id: format!("{prefix}{i}"), cloud: cloud(c) }).collect()
}

/// Exhaustive set metrics from an explicit distance function over
/// `(set, index)` labels; ties resolve by comparing `(distance, label)`.
struct BruteSets {
    d: Vec<Vec<f64>>,
    n_gen: usize,
}

impl BruteSets {
    fn new(gen: &[Vec<Vec3>], refs: &[Vec<Vec3>], power: ChamferPower) -> Self {
        let all: Vec<&Vec<Vec3>> = gen.iter().chain(refs).collect();
        let d = all.iter().map(|a| all.iter().map(|b| brute_chamfer(a, b, power)).collect()).collect();
        BruteSets { d, n_gen: gen.len() }
    }

    fn argmin(&self, a: usize, candidates: impl Iterator<Item = usize>) -> usize {
        candidates
            .map(|b| (self.d[a][b], b))
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)))
            .unwrap()
            .1
    }

    fn coverage(&self) -> f64 {
        let n = self.d.len();
        let mut covered = std::collections::BTreeSet::new();
        for g in 0..self.n_gen {
            covered.insert(self.argmin(g, self.n_gen..n));
        }
        covered.len() as f64 / (n - self.n_gen) as f64
    }

    fn mmd(&self) -> f64 {
        let n = self.d.len();
        let per: Vec<f64> = (self.n_gen..n)
            .map(|r| (0..self.n_gen).map(|g| self.d[g][r]).fold(f64::INFINITY, f64::min))
            .collect();
        per.iter().sum::<f64>() / per.len() as f64
    }

    fn one_nna(&self) -> f64 {
        let n = self.d.len();
        let correct = (0..n)
            .filter(|&a| {
                let b = self.argmin(a, (0..n).filter(|&b| b != a));
                (a < self.n_gen) == (b < self.n_gen)
            })
            .count();
        correct as f64 / n as f64
    }
}

#[test]
fn metrics_match_brute_force_on_random_instances() {
    for inst in 0..50u64 {
        let mut rng = RngSeed(1000 + inst).stream(0);
        let ng = rng.random_range(1..=10);
        let nr = rng.random_range(1..=10);
        let mut sizes = || rng.random_range(1..=100);
        let counts: Vec<usize> = (0..ng + nr).map(|_| sizes()).collect();
        let mut rng = RngSeed(2000 + inst).stream(0);
        let gen: Vec<Vec<Vec3>> = counts[..ng].iter().map(|&n| random_cloud(&mut rng, n)).collect();
        let refs: Vec<Vec<Vec3>> = counts[ng..].iter().map(|&n| random_cloud(&mut rng, n)).collect();

        for power in [ChamferPower::One, ChamferPower::Two] {
            let cfg = ChamferConfig { power, ..ChamferConfig::default() };
            let got = chamfer(&cloud(&gen[0]), &cloud(&refs[0]), &cfg).unwrap();
            assert!(rel_close(got, brute_chamfer(&gen[0], &refs[0], power)), "instance {inst}");

            let gs = MeshSet::new(members(&gen, "g"), SetRole::Generated).unwrap();
            let rs = MeshSet::new(members(&refs, "r"), SetRole::Reference).unwrap();
            let m = pairwise_distances(&gs, &rs, power).unwrap();
            let brute = BruteSets::new(&gen, &refs, power);
            for i in 0..ng {
                for j in 0..nr {
                    assert!(rel_close(m.gr(i, j), brute.d[i][ng + j]));
                }
            }
            assert_eq!(coverage(&m), brute.coverage(), "instance {inst}");
            assert!(rel_close(mmd(&m).mmd, brute.mmd()), "instance {inst}");
            assert_eq!(one_nna(&m).accuracy, brute.one_nna(), "instance {inst}");
        }

        let tau = rng.random_range(0.01..0.3);
        let cfg = FscoreConfig { tau, ..FscoreConfig::default() };
        let got = fscore(&cloud(&gen[0]), &cloud(&refs[0]), &cfg).unwrap().fscore;
        assert!(rel_close(got, brute_fscore(&gen[0], &refs[0], tau)), "instance {inst}");
    }
}

#[test]
fn normal_consistency_matches_brute_force() {
    let mesh = icosphere(0.4, 2);
    let reference = SpatialIndex::build(&mesh).unwrap();
    let mut rng = RngSeed(4).stream(0);
    let pts: Vec<SurfacePoint> = (0..100)
        .map(|_| {
            let p = Vec3::new(rng.random(), rng.random(), rng.random()) - Vec3::splat(0.5);
            let n = (Vec3::new(rng.random(), rng.random(), rng.random()) - Vec3::splat(0.5)).normalized().unwrap();
            SurfacePoint { position: p, normal: n }
        })
        .collect();
    let got = normal_consistency(&PointCloud::new(pts.clone()).unwrap(), &reference).unwrap();
    let brute: f64 = pts
        .iter()
        .map(|sp| {
            let (f, _) = (0..mesh.face_count())
                .map(|f| {
                    let [a, b, c] = mesh.triangle(f);
                    (f, point_triangle_d2(sp.position, a, b, c))
                })
                .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            sp.normal.dot(mesh.face_normal(f).unwrap())
        })
        .sum::<f64>()
        / pts.len() as f64;
    assert!(rel_close(got, brute), "{got} vs {brute}");
}

fn point_triangle_d2(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    mesh3d_core::geometry::triangle::closest_point_on_triangle(p, a, b, c).distance_squared(p)
}

#[test]
fn degenerate_set_identities() {
    let mut rng = RngSeed(9).stream(0);
    let clouds: Vec<Vec<Vec3>> = (0..6).map(|_| random_cloud(&mut rng, 64)).collect();
    let gs = MeshSet::new(members(&clouds, "a"), SetRole::Generated).unwrap();
    let rs = MeshSet::new(members(&clouds, "a"), SetRole::Reference).unwrap();
    let m = pairwise_distances(&gs, &rs, ChamferPower::One).unwrap();
    let r = gen_report(&m);
    assert_eq!(r.cov, 1.0);
    assert_eq!(r.mmd, 0.0);

    let c = cloud(&clouds[0]);
    assert_eq!(fscore(&c, &c, &FscoreConfig::default()).unwrap().fscore, 100.0);

    for mesh in [box_mesh(Vec3::splat(-0.5), Vec3::splat(0.5)), icosphere(0.4, 3)] {
        let samples = sample_surface(&mesh, DEFAULT_SAMPLES, RngSeed(1)).unwrap();
        let nc = normal_consistency(&samples, &SpatialIndex::build(&mesh).unwrap()).unwrap();
        assert!((nc - 1.0).abs() <= 1e-9, "{nc}");
    }
}

/// Rotation by `angle` about a unit `axis` (Rodrigues).
fn rotate(v: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

#[test]
fn own_mesh_beats_rotated_copies() {
    let mut rng = RngSeed(21).stream(0);
    for mesh in [box_mesh(Vec3::splat(-0.4), Vec3::new(0.4, 0.3, 0.2)), icosphere(0.4, 1)] {
        let samples = sample_surface(&mesh, 2000, RngSeed(1)).unwrap();
        let own = normal_consistency(&samples, &SpatialIndex::build(&mesh).unwrap()).unwrap();
        for _ in 0..20 {
            let axis = (Vec3::new(rng.random(), rng.random(), rng.random()) - Vec3::splat(0.5)).normalized().unwrap();
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let verts = mesh.vertices().iter().map(|&v| rotate(v, axis, angle)).collect();
            let rotated = mesh3d_core::geometry::TriangleMesh::new(verts, mesh.faces().to_vec()).unwrap();
            let other = normal_consistency(&samples, &SpatialIndex::build(&rotated).unwrap()).unwrap();
            assert!(own >= other, "{own} < {other}");
        }
    }
}

#[test]
fn scaling_a_pair_of_clouds_scales_chamfer() {
    let mut rng = RngSeed(6).stream(0);
    let (a, b) = (random_cloud(&mut rng, 50), random_cloud(&mut rng, 70));
    let t = Transform { scale: 2.5, translation: Vec3::ZERO };
    let sa: Vec<Vec3> = a.iter().map(|&p| t.apply(p)).collect();
    let sb: Vec<Vec3> = b.iter().map(|&p| t.apply(p)).collect();
    for (power, k) in [(ChamferPower::One, 2.5), (ChamferPower::Two, 6.25)] {
        let cfg = ChamferConfig { power, ..ChamferConfig::default() };
        let base = chamfer(&cloud(&a), &cloud(&b), &cfg).unwrap();
        let scaled = chamfer(&cloud(&sa), &cloud(&sb), &cfg).unwrap();
        assert!((scaled - k * base).abs() <= 1e-12 * scaled);
    }
}

fn points(max: usize) -> impl Strategy<Value = Vec<Vec3>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z)), 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chamfer_is_symmetric(a in points(60), b in points(60)) {
        for power in [ChamferPower::One, ChamferPower::Two] {
            let cfg = ChamferConfig { power, ..ChamferConfig::default() };
            let ab = chamfer(&cloud(&a), &cloud(&b), &cfg).unwrap();
            let ba = chamfer(&cloud(&b), &cloud(&a), &cfg).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1e-300));
            prop_assert!(ab >= 0.0);
        }
    }

    #[test]
    fn fscore_is_monotone_in_tau(a in points(60), b in points(60), t1 in 0.01..0.5f64, dt in 0.0..0.5f64) {
        let f = |tau| fscore(&cloud(&a), &cloud(&b), &FscoreConfig { tau, ..FscoreConfig::default() }).unwrap();
        let (lo, hi) = (f(t1), f(t1 + dt));
        prop_assert!(lo.precision <= hi.precision && lo.recall <= hi.recall && lo.fscore <= hi.fscore + 1e-12);
    }

    #[test]
    fn set_metrics_ignore_member_order(seed in 0u64..1000, rot in 0usize..8) {
        let mut rng = RngSeed(seed).stream(0);
        let gen: Vec<Vec<Vec3>> = (0..8).map(|_| random_cloud(&mut rng, 20)).collect();
        let refs: Vec<Vec<Vec3>> = (0..5).map(|_| random_cloud(&mut rng, 20)).collect();
        let mut shuffled = gen.clone();
        shuffled.rotate_left(rot);
        let report = |g: &[Vec<Vec3>]| {
            let gs = MeshSet::new(members(g, "g"), SetRole::Generated).unwrap();
            let rs = MeshSet::new(members(&refs, "r"), SetRole::Reference).unwrap();
            gen_report(&pairwise_distances(&gs, &rs, ChamferPower::Two).unwrap())
        };
        let (a, b) = (report(&gen), report(&shuffled));
        prop_assert_eq!(a.cov, b.cov);
        prop_assert!((a.mmd - b.mmd).abs() <= 1e-15);
        prop_assert_eq!(a.one_nna, b.one_nna);
    }

    #[test]
    fn distance_matrix_rejects_asymmetry(x in 0.1..1.0f64, y in 0.1..1.0f64) {
        prop_assume!(x != y);
        let r = DistanceMatrix::new(2, 1, vec![0.0, x, y, 0.0], vec![1.0, 1.0], vec![0.0], ChamferPower::One);
        prop_assert!(r.is_err());
    }
}
