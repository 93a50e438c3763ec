//! Reconstruction metrics between two surfaces: Chamfer distance, F-score and
//! normal consistency, plus the mesh → grid → mesh round trip.

use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{sample_surface, GeometryError, PointCloud, PointIndex, SpatialIndex, TriangleMesh};
use crate::math::{sqrt, Vec3};
use crate::par;
use crate::reconstruct::{marching_cubes, IsoSurfaceConfig};
use crate::rng::RngSeed;
use crate::signing::{compute_sdf, GridSpec, SignMethod, SigningError, DEFAULT_CUTOFF};

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_TAU: f64 = 0.0125;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("chamfer power must be 1 or 2, got {0}")]
    InvalidPower(u8),
    #[error("F-score threshold must be positive and finite, got {0}")]
    InvalidTau(f64),
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error("marching cubes produced no faces")]
    EmptyReconstruction,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Signing(#[from] SigningError),
}

/// Exponent applied to each nearest-neighbor distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChamferPower {
    One,
    Two,
}

impl ChamferPower {
    pub fn as_u8(self) -> u8 {
        match self {
            ChamferPower::One => 1,
            ChamferPower::Two => 2,
        }
    }
}

impl TryFrom<u8> for ChamferPower {
    type Error = MetricsError;
    fn try_from(p: u8) -> Result<Self, MetricsError> {
        match p {
            1 => Ok(ChamferPower::One),
            2 => Ok(ChamferPower::Two),
            _ => Err(MetricsError::InvalidPower(p)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamferConfig {
    pub power: ChamferPower,
    pub samples_per_mesh: usize,
    pub seed: RngSeed,
}

impl Default for ChamferConfig {
    fn default() -> Self {
        ChamferConfig { power: ChamferPower::One, samples_per_mesh: DEFAULT_SAMPLES, seed: RngSeed(0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FscoreConfig {
    pub tau: f64,
    pub samples_per_mesh: usize,
    pub seed: RngSeed,
}

impl Default for FscoreConfig {
    fn default() -> Self {
        FscoreConfig { tau: DEFAULT_TAU, samples_per_mesh: DEFAULT_SAMPLES, seed: RngSeed(0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fscore {
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconReport {
    pub cd: f64,
    pub power: ChamferPower,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub tau: f64,
    pub nc: f64,
    pub samples: usize,
    pub seed: RngSeed,
}

/// A point cloud with its nearest-neighbor index, built once and reused
/// across many distance evaluations.
#[derive(Debug, Clone)]
pub struct IndexedCloud {
    index: PointIndex,
}

impl IndexedCloud {
    pub fn new(cloud: &PointCloud) -> Result<Self, MetricsError> {
        Self::from_positions(&cloud.positions())
    }

    pub fn from_positions(points: &[Vec3]) -> Result<Self, MetricsError> {
        if points.is_empty() {
            return Err(MetricsError::EmptyCloud);
        }
        Ok(IndexedCloud { index: PointIndex::new(points) })
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Squared distance from every point of `queries` (original order) to
    /// its nearest neighbor in `self`.
    pub fn nearest_squared(&self, queries: &IndexedCloud) -> Vec<f64> {
        self.index.nearest_squared_distances(&queries.index)
    }
}

/// Mean over `from` of the powered distance to the nearest point of `to`,
/// summed in index order.
fn directed_term(to: &IndexedCloud, from: &IndexedCloud, power: ChamferPower) -> f64 {
    let d2 = to.nearest_squared(from);
    let sum: f64 = match power {
        ChamferPower::One => d2.iter().map(|&d| sqrt(d)).sum(),
        ChamferPower::Two => d2.iter().sum(),
    };
    sum / d2.len() as f64
}

/// Symmetric Chamfer distance between two indexed clouds.
pub fn chamfer_indexed(x: &IndexedCloud, y: &IndexedCloud, power: ChamferPower) -> f64 {
    directed_term(y, x, power) + directed_term(x, y, power)
}

/// Symmetric Chamfer distance: the mean nearest-neighbor term from `x` to `y`
/// plus the one from `y` to `x`.
pub fn chamfer(x: &PointCloud, y: &PointCloud, config: &ChamferConfig) -> Result<f64, MetricsError> {
    Ok(chamfer_indexed(&IndexedCloud::new(x)?, &IndexedCloud::new(y)?, config.power))
}

fn within_percent(to: &IndexedCloud, from: &IndexedCloud, tau: f64) -> f64 {
    let d2 = to.nearest_squared(from);
    let hits = d2.iter().filter(|&&d| sqrt(d) < tau).count();
    100.0 * hits as f64 / d2.len() as f64
}

/// Precision of `g` against `r`, recall of `r` against `g` and their harmonic
/// mean, all in percent. A point counts only at distance strictly below `tau`.
pub fn fscore_indexed(g: &IndexedCloud, r: &IndexedCloud, tau: f64) -> Result<Fscore, MetricsError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(MetricsError::InvalidTau(tau));
    }
    let precision = within_percent(r, g, tau);
    let recall = within_percent(g, r, tau);
    let fscore = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Ok(Fscore { precision, recall, fscore })
}

pub fn fscore(g: &PointCloud, r: &PointCloud, config: &FscoreConfig) -> Result<Fscore, MetricsError> {
    fscore_indexed(&IndexedCloud::new(g)?, &IndexedCloud::new(r)?, config.tau)
}

/// Mean dot product of each sample normal with the face normal at its
/// closest point on the reference surface. No absolute value is taken.
pub fn normal_consistency(g: &PointCloud, reference: &SpatialIndex) -> Result<f64, MetricsError> {
    if g.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let pts = g.points();
    let dots = par::map_indexed(pts.len(), |i| pts[i].normal.dot(reference.closest_point(pts[i].position).normal));
    Ok(dots.iter().sum::<f64>() / dots.len() as f64)
}

/// Samples per surface so that, for locally flat patches sampled at uniform
/// density, a point misses every independent sample within `tau` with
/// probability at most `miss_rate` (`exp(-density * pi * tau^2)`).
///
/// With a fixed sample count the F-score saturates below 100 once `tau`
/// approaches the sample spacing, which hides reconstruction error.
pub fn samples_for_threshold(area: f64, tau: f64, miss_rate: f64) -> usize {
    let density = -crate::math::ln(miss_rate) / (core::f64::consts::PI * tau * tau);
    let n = density * area;
    if n.is_finite() && n >= 1.0 {
        n as usize + 1
    } else {
        1
    }
}

/// F-score threshold of a round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauMode {
    Absolute(f64),
    /// One eighth of the voxel edge length.
    VoxelRelative,
}

impl TauMode {
    pub fn resolve(self, voxel_size: f64) -> f64 {
        match self {
            TauMode::Absolute(t) => t,
            TauMode::VoxelRelative => voxel_size / 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshEvalConfig {
    pub power: ChamferPower,
    pub samples_per_mesh: usize,
    pub tau: f64,
    pub seed: RngSeed,
}

impl Default for MeshEvalConfig {
    fn default() -> Self {
        MeshEvalConfig { power: ChamferPower::One, samples_per_mesh: DEFAULT_SAMPLES, tau: DEFAULT_TAU, seed: RngSeed(0) }
    }
}

/// Compares a generated/reconstructed mesh against a reference mesh. The two
/// surfaces are sampled with independent seeds derived from `config.seed`.
pub fn compare_meshes(
    generated: &TriangleMesh,
    reference: &TriangleMesh,
    config: &MeshEvalConfig,
) -> Result<ReconReport, MetricsError> {
    if config.samples_per_mesh == 0 {
        return Err(MetricsError::ZeroSamples);
    }
    if !(config.tau > 0.0) || !config.tau.is_finite() {
        return Err(MetricsError::InvalidTau(config.tau));
    }
    let gs = sample_surface(generated, config.samples_per_mesh, config.seed.derive(1))?;
    let rs = sample_surface(reference, config.samples_per_mesh, config.seed.derive(2))?;
    compare_samples(&gs, &rs, &SpatialIndex::build(reference)?, config)
}

/// [`compare_meshes`] on surface samples drawn by the caller; `reference`
/// indexes the mesh `rs` was sampled from and supplies the NC normals.
pub fn compare_samples(
    gs: &PointCloud,
    rs: &PointCloud,
    reference: &SpatialIndex,
    config: &MeshEvalConfig,
) -> Result<ReconReport, MetricsError> {
    let gi = IndexedCloud::new(gs)?;
    let ri = IndexedCloud::new(rs)?;
    let cd = chamfer_indexed(&gi, &ri, config.power);
    let f = fscore_indexed(&gi, &ri, config.tau)?;
    let nc = normal_consistency(gs, reference)?;
    Ok(ReconReport {
        cd,
        power: config.power,
        precision: f.precision,
        recall: f.recall,
        fscore: f.fscore,
        tau: config.tau,
        nc,
        samples: gs.len().max(rs.len()),
        seed: config.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTripConfig {
    pub resolution: usize,
    pub method: SignMethod,
    pub cutoff: f64,
    pub tau: TauMode,
    pub power: ChamferPower,
    pub samples_per_mesh: usize,
    pub seed: RngSeed,
}

impl Default for RoundTripConfig {
    fn default() -> Self {
        RoundTripConfig {
            resolution: 64,
            method: SignMethod::FloodFill,
            cutoff: DEFAULT_CUTOFF,
            tau: TauMode::Absolute(DEFAULT_TAU),
            power: ChamferPower::One,
            samples_per_mesh: DEFAULT_SAMPLES,
            seed: RngSeed(0),
        }
    }
}

/// Converts a normalized mesh to a truncated SDF on the default domain,
/// extracts it again and compares the result with the original.
pub fn roundtrip_eval(mesh: &TriangleMesh, config: &RoundTripConfig) -> Result<ReconReport, MetricsError> {
    let spec = GridSpec::with_default_domain(config.resolution)?;
    let grid = compute_sdf(mesh, &spec, config.method, config.cutoff)?;
    let recon = marching_cubes(&grid, IsoSurfaceConfig::for_kind(grid.kind())).mesh;
    if recon.face_count() == 0 {
        return Err(MetricsError::EmptyReconstruction);
    }
    let tau = config.tau.resolve(spec.voxel_size());
    let eval = MeshEvalConfig { power: config.power, samples_per_mesh: config.samples_per_mesh, tau, seed: config.seed };
    compare_meshes(&recon, mesh, &eval)
}
