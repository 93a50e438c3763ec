use mesh3d_core::gen_metrics::{
    error_decomposition, gen_report, pearson, self_distances, subset_stability, surface_to_volume, DistanceMatrix,
    GenMetricsError,
};
use mesh3d_core::geometry::primitives::{box_mesh, icosphere};
use mesh3d_core::recon_metrics::{ChamferPower, IndexedCloud};
use mesh3d_core::{RngSeed, Vec3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Random ellipsoid point clouds; item `k` uses stream `k`.
fn ellipsoids(count: usize, points: usize, seed: RngSeed) -> Vec<IndexedCloud> {
    (0..count)
        .map(|k| {
            let mut rng = seed.stream(k as u64);
            let radii = Vec3::new(rng.random_range(0.2..0.5), rng.random_range(0.2..0.5), rng.random_range(0.2..0.5));
            let pts: Vec<Vec3> = (0..points)
                .map(|_| {
                    let g = Vec3::new(
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                    );
                    let u = g.normalized().unwrap();
                    Vec3::new(u.x * radii.x, u.y * radii.y, u.z * radii.z)
                })
                .collect();
            IndexedCloud::from_positions(&pts).unwrap()
        })
        .collect()
}

#[test]
fn stability_improves_with_subset_size() {
    let n = 240;
    let clouds = ellipsoids(n, 32, RngSeed(77));
    let full = self_distances(&clouds, ChamferPower::One);
    let sizes = [10, 20, 40, 80];
    let stats = subset_stability(&full, n, ChamferPower::One, &sizes, 40, RngSeed(5)).unwrap();
    for w in stats.windows(2) {
        assert!(w[1].mmd.std < w[0].mmd.std, "{:?}", stats);
        assert!(w[1].one_nna.std < w[0].one_nna.std, "{:?}", stats);
        assert!(w[1].mmd.mean <= w[0].mmd.mean, "{:?}", stats);
    }
    // Reproducible trial by trial.
    let again = subset_stability(&full, n, ChamferPower::One, &sizes[..1], 40, RngSeed(5)).unwrap();
    assert_eq!(again[0], stats[0]);
}

#[test]
fn subsets_larger_than_half_are_rejected() {
    let full = vec![0.0; 16];
    let e = subset_stability(&full, 4, ChamferPower::One, &[3], 1, RngSeed(0)).unwrap_err();
    assert_eq!(e, GenMetricsError::DatasetTooSmall { size: 3, needed: 6, available: 4 });
}

#[test]
fn report_on_identical_halves() {
    let clouds = ellipsoids(6, 20, RngSeed(3));
    let d = self_distances(&clouds, ChamferPower::Two);
    let m = DistanceMatrix::new(6, 6, d.clone(), d.clone(), d, ChamferPower::Two).unwrap();
    let r = gen_report(&m);
    assert_eq!((r.cov, r.mmd), (1.0, 0.0));
    // Each item's nearest other is its own copy in the other set, at distance 0.
    assert_eq!(r.one_nna, 0.0);
}

#[test]
fn complexity_of_primitives() {
    let c = surface_to_volume(&box_mesh(Vec3::ZERO, Vec3::splat(1.0))).unwrap();
    assert!((c.ratio - 6.0).abs() < 1e-12 && c.closed);
    let s = surface_to_volume(&icosphere(0.4, 4)).unwrap();
    assert!((s.ratio - 3.0 / 0.4).abs() / 7.5 < 0.01);
}

#[test]
fn decomposition_agrees_with_direct_formulas() {
    let mut rng = RngSeed(8).stream(0);
    let mmd: Vec<f64> = (0..20).map(|_| rng.random_range(0.5..1.0)).collect();
    let recon: Vec<f64> = mmd.iter().map(|m| 0.3 * m + rng.random_range(0.0..0.01)).collect();
    let comp: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..0.2)).collect();
    let d = error_decomposition(&mmd, &recon, &comp).unwrap();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((d.recon_fraction - mean(&recon) / mean(&mmd)).abs() < 1e-12);
    assert!((d.compression_fraction - mean(&comp) / mean(&mmd)).abs() < 1e-12);
    assert!(d.pearson_recon_mmd.unwrap() > 0.9);
    assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
    let scaled: Vec<f64> = recon.iter().map(|r| 4.0 * r + 1.0).collect();
    assert!((pearson(&scaled, &mmd).unwrap() - d.pearson_recon_mmd.unwrap()).abs() < 1e-12);
}
