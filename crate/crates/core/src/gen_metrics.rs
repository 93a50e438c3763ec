//! Set-level generation metrics over pairwise Chamfer distances: coverage,
//! minimum matching distance and 1-nearest-neighbor accuracy, plus the
//! subset-size stability experiment, surface-to-volume complexity and the
//! reconstruction/compression error decomposition.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::geometry::{PointCloud, TriangleMesh};
use crate::math::{mean, sqrt, std_dev};
use crate::par;
use crate::recon_metrics::{chamfer_indexed, ChamferPower, IndexedCloud, MetricsError};
use crate::rng::RngSeed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenMetricsError {
    #[error("mesh set is empty")]
    EmptySet,
    #[error("duplicate id {0:?} in mesh set")]
    DuplicateId(String),
    #[error("distance matrix is invalid: {0}")]
    InvalidMatrix(&'static str),
    #[error("dataset has {available} items, disjoint subsets of size {size} need {needed}")]
    DatasetTooSmall { size: usize, needed: usize, available: usize },
    #[error("subset size must be at least 1")]
    ZeroSubsetSize,
    #[error("mesh has zero enclosed volume (surface area {area})")]
    ZeroVolume { area: f64 },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("vectors have different lengths: {0:?}")]
    LengthMismatch([usize; 3]),
    #[error("need at least 3 aligned items, got {0}")]
    TooFewItems(usize),
    #[error("mean MMD is zero; fractions are undefined")]
    ZeroMmd,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetRole {
    Generated,
    Reference,
}

#[derive(Debug, Clone)]
pub struct Member {
    pub id: String,
    pub cloud: PointCloud,
}

/// Named clouds of one side of a generation evaluation; ids are unique.
#[derive(Debug, Clone)]
pub struct MeshSet {
    members: Vec<Member>,
    role: SetRole,
}

impl MeshSet {
    pub fn new(members: Vec<Member>, role: SetRole) -> Result<Self, GenMetricsError> {
        let mut seen = BTreeSet::new();
        for m in &members {
            if !seen.insert(m.id.as_str()) {
                return Err(GenMetricsError::DuplicateId(m.id.clone()));
            }
        }
        Ok(MeshSet { members, role })
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn role(&self) -> SetRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn indexed(&self) -> Result<Vec<IndexedCloud>, GenMetricsError> {
        let out = par::map_indexed(self.members.len(), |i| IndexedCloud::new(&self.members[i].cloud));
        Ok(out.into_iter().collect::<Result<Vec<_>, _>>()?)
    }
}

/// Pairwise Chamfer distances within and across the generated (`g`) and
/// reference (`r`) sets, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n_gen: usize,
    n_ref: usize,
    gg: Vec<f64>,
    gr: Vec<f64>,
    rr: Vec<f64>,
    power: ChamferPower,
}

fn check_square(m: &[f64], n: usize) -> Result<(), GenMetricsError> {
    for i in 0..n {
        if m[i * n + i] != 0.0 {
            return Err(GenMetricsError::InvalidMatrix("non-zero diagonal"));
        }
        for j in 0..i {
            if m[i * n + j] != m[j * n + i] {
                return Err(GenMetricsError::InvalidMatrix("not symmetric"));
            }
        }
    }
    Ok(())
}

impl DistanceMatrix {
    pub fn new(
        n_gen: usize,
        n_ref: usize,
        gg: Vec<f64>,
        gr: Vec<f64>,
        rr: Vec<f64>,
        power: ChamferPower,
    ) -> Result<Self, GenMetricsError> {
        if n_gen == 0 || n_ref == 0 {
            return Err(GenMetricsError::EmptySet);
        }
        if gg.len() != n_gen * n_gen || gr.len() != n_gen * n_ref || rr.len() != n_ref * n_ref {
            return Err(GenMetricsError::InvalidMatrix("dimension mismatch"));
        }
        if gg.iter().chain(&gr).chain(&rr).any(|&d| !(d >= 0.0) || !d.is_finite()) {
            return Err(GenMetricsError::InvalidMatrix("entries must be finite and non-negative"));
        }
        check_square(&gg, n_gen)?;
        check_square(&rr, n_ref)?;
        Ok(DistanceMatrix { n_gen, n_ref, gg, gr, rr, power })
    }

    pub fn n_gen(&self) -> usize {
        self.n_gen
    }

    pub fn n_ref(&self) -> usize {
        self.n_ref
    }

    pub fn power(&self) -> ChamferPower {
        self.power
    }

    #[inline]
    pub fn gg(&self, i: usize, j: usize) -> f64 {
        self.gg[i * self.n_gen + j]
    }

    #[inline]
    pub fn gr(&self, i: usize, j: usize) -> f64 {
        self.gr[i * self.n_ref + j]
    }

    #[inline]
    pub fn rr(&self, i: usize, j: usize) -> f64 {
        self.rr[i * self.n_ref + j]
    }

    pub fn gg_values(&self) -> &[f64] {
        &self.gg
    }

    pub fn gr_values(&self) -> &[f64] {
        &self.gr
    }

    pub fn rr_values(&self) -> &[f64] {
        &self.rr
    }

    /// Distance between global items: generated first, then reference.
    #[inline]
    fn global(&self, a: usize, b: usize) -> f64 {
        match (a < self.n_gen, b < self.n_gen) {
            (true, true) => self.gg(a, b),
            (true, false) => self.gr(a, b - self.n_gen),
            (false, true) => self.gr(b, a - self.n_gen),
            (false, false) => self.rr(a - self.n_gen, b - self.n_gen),
        }
    }
}

/// Symmetric `n x n` Chamfer matrix of one collection of clouds.
pub fn self_distances(clouds: &[IndexedCloud], power: ChamferPower) -> Vec<f64> {
    let n = clouds.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let d = par::map_indexed(pairs.len(), |k| chamfer_indexed(&clouds[pairs[k].0], &clouds[pairs[k].1], power));
    let mut m = alloc::vec![0.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(&d) {
        m[i * n + j] = v;
        m[j * n + i] = v;
    }
    m
}

/// Every cross entry `chamfer(a_i, b_j)`, row-major.
pub fn cross_distances(a: &[IndexedCloud], b: &[IndexedCloud], power: ChamferPower) -> Vec<f64> {
    let nb = b.len();
    par::map_indexed(a.len() * nb, |k| chamfer_indexed(&a[k / nb], &b[k % nb], power))
}

pub fn pairwise_indexed(
    gen: &[IndexedCloud],
    reference: &[IndexedCloud],
    power: ChamferPower,
) -> Result<DistanceMatrix, GenMetricsError> {
    if gen.is_empty() || reference.is_empty() {
        return Err(GenMetricsError::EmptySet);
    }
    let gg = self_distances(gen, power);
    let gr = cross_distances(gen, reference, power);
    let rr = self_distances(reference, power);
    DistanceMatrix::new(gen.len(), reference.len(), gg, gr, rr, power)
}

/// Full distance matrix for a generation evaluation. Each entry is an
/// independent computation, so the result does not depend on scheduling.
pub fn pairwise_distances(
    gen: &MeshSet,
    reference: &MeshSet,
    power: ChamferPower,
) -> Result<DistanceMatrix, GenMetricsError> {
    if gen.is_empty() || reference.is_empty() {
        return Err(GenMetricsError::EmptySet);
    }
    pairwise_indexed(&gen.indexed()?, &reference.indexed()?, power)
}

/// Fraction of reference items that are the nearest reference of at least
/// one generated item (lowest reference index on ties).
pub fn coverage(m: &DistanceMatrix) -> f64 {
    let mut hit = alloc::vec![false; m.n_ref];
    for i in 0..m.n_gen {
        let mut best = 0;
        for j in 1..m.n_ref {
            if m.gr(i, j) < m.gr(i, best) {
                best = j;
            }
        }
        hit[best] = true;
    }
    hit.iter().filter(|&&h| h).count() as f64 / m.n_ref as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mmd {
    pub mmd: f64,
    /// For each reference item, the distance to its closest generated item.
    pub per_ref: Vec<f64>,
}

pub fn mmd(m: &DistanceMatrix) -> Mmd {
    let per_ref: Vec<f64> = (0..m.n_ref)
        .map(|j| (1..m.n_gen).fold(m.gr(0, j), |acc, i| acc.min(m.gr(i, j))))
        .collect();
    Mmd { mmd: per_ref.iter().sum::<f64>() / m.n_ref as f64, per_ref }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneNna {
    pub accuracy: f64,
    /// The sets differ in size; the value is still computed.
    pub size_mismatch: bool,
}

/// Leave-one-out 1-NN classification accuracy over the union of both sets.
/// Nearest-neighbor ties go to the lowest global index, generated items
/// numbered before reference items.
pub fn one_nna(m: &DistanceMatrix) -> OneNna {
    let total = m.n_gen + m.n_ref;
    let mut correct = 0usize;
    for a in 0..total {
        let mut best: Option<(usize, f64)> = None;
        for b in 0..total {
            if a == b {
                continue;
            }
            let d = m.global(a, b);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((b, d));
            }
        }
        if let Some((b, _)) = best {
            if (a < m.n_gen) == (b < m.n_gen) {
                correct += 1;
            }
        }
    }
    OneNna { accuracy: correct as f64 / total as f64, size_mismatch: m.n_gen != m.n_ref }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenReport {
    pub cov: f64,
    pub mmd: f64,
    pub one_nna: f64,
    pub n_gen: usize,
    pub n_ref: usize,
    pub power: ChamferPower,
    pub size_mismatch: bool,
}

pub fn gen_report(m: &DistanceMatrix) -> GenReport {
    let nna = one_nna(m);
    GenReport {
        cov: coverage(m),
        mmd: mmd(m).mmd,
        one_nna: nna.accuracy,
        n_gen: m.n_gen,
        n_ref: m.n_ref,
        power: m.power,
        size_mismatch: nna.size_mismatch,
    }
}

/// Picks rows/columns of a symmetric `n x n` dataset matrix.
fn gather(full: &[f64], n: usize, rows: &[usize], cols: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for &i in rows {
        for &j in cols {
            out.push(full[i * n + j]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation over trials.
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeStability {
    pub size: usize,
    pub trials: usize,
    pub cov: MeanStd,
    pub mmd: MeanStd,
    pub one_nna: MeanStd,
}

/// Draws `trials` pairs of disjoint subsets per size (generated and
/// reference, uniformly without replacement) from a dataset whose full
/// pairwise matrix is `full` and aggregates COV/MMD/1-NNA over trials.
///
/// Trial `t` at size `s` shuffles with stream `t` of `seed.derive(s)`, so
/// each trial is reproducible on its own.
pub fn subset_stability(
    full: &[f64],
    n: usize,
    power: ChamferPower,
    sizes: &[usize],
    trials: usize,
    seed: RngSeed,
) -> Result<Vec<SizeStability>, GenMetricsError> {
    if full.len() != n * n {
        return Err(GenMetricsError::InvalidMatrix("dimension mismatch"));
    }
    for &size in sizes {
        if size == 0 {
            return Err(GenMetricsError::ZeroSubsetSize);
        }
        if 2 * size > n {
            return Err(GenMetricsError::DatasetTooSmall { size, needed: 2 * size, available: n });
        }
    }
    let mut out = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let reports = par::map_indexed(trials, |t| {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = seed.derive(size as u64).stream(t as u64);
            order.shuffle(&mut rng);
            let (g, r) = (&order[..size], &order[size..2 * size]);
            let m = DistanceMatrix {
                n_gen: size,
                n_ref: size,
                gg: gather(full, n, g, g),
                gr: gather(full, n, g, r),
                rr: gather(full, n, r, r),
                power,
            };
            gen_report(&m)
        });
        let stat = |f: fn(&GenReport) -> f64| {
            let v: Vec<f64> = reports.iter().map(f).collect();
            MeanStd { mean: mean(&v).unwrap_or(0.0), std: std_dev(&v).unwrap_or(0.0) }
        };
        out.push(SizeStability {
            size,
            trials,
            cov: stat(|r| r.cov),
            mmd: stat(|r| r.mmd),
            one_nna: stat(|r| r.one_nna),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complexity {
    pub area: f64,
    pub volume: f64,
    pub ratio: f64,
    /// Every edge has exactly two incident faces.
    pub closed: bool,
    pub triangles: usize,
}

/// Every undirected edge is used by exactly two faces.
pub fn is_closed(mesh: &TriangleMesh) -> bool {
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(3 * mesh.face_count());
    for f in mesh.faces() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            edges.push((a.min(b), a.max(b)));
        }
    }
    if edges.is_empty() {
        return false;
    }
    edges.sort_unstable();
    let mut i = 0;
    while i < edges.len() {
        let mut j = i;
        while j < edges.len() && edges[j] == edges[i] {
            j += 1;
        }
        if j - i != 2 {
            return false;
        }
        i = j;
    }
    true
}

/// Surface area over enclosed volume, the volume taken as the absolute sum
/// of signed tetrahedra against the origin.
pub fn surface_to_volume(mesh: &TriangleMesh) -> Result<Complexity, GenMetricsError> {
    if mesh.face_count() == 0 {
        return Err(GenMetricsError::EmptyMesh);
    }
    let area = mesh.surface_area();
    let volume = (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            a.dot(b.cross(c))
        })
        .sum::<f64>()
        .abs()
        / 6.0;
    if volume < 1e-12 {
        return Err(GenMetricsError::ZeroVolume { area });
    }
    Ok(Complexity { area, volume, ratio: area / volume, closed: is_closed(mesh), triangles: mesh.face_count() })
}

/// Mean-centered Pearson correlation; `None` when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    let ma = mean(a)?;
    let mb = mean(b)?;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (sqrt(saa) * sqrt(sbb))).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub recon_fraction: f64,
    pub compression_fraction: f64,
    /// `None` when a series has zero variance.
    pub pearson_recon_mmd: Option<f64>,
    pub pearson_recon_compression: Option<f64>,
}

/// Relates per-reference MMD to aligned reconstruction and compression CDs.
pub fn error_decomposition(
    mmd_per_ref: &[f64],
    recon_cd: &[f64],
    compression_cd: &[f64],
) -> Result<Decomposition, GenMetricsError> {
    let lens = [mmd_per_ref.len(), recon_cd.len(), compression_cd.len()];
    if lens[0] != lens[1] || lens[0] != lens[2] {
        return Err(GenMetricsError::LengthMismatch(lens));
    }
    if lens[0] < 3 {
        return Err(GenMetricsError::TooFewItems(lens[0]));
    }
    let m = mean(mmd_per_ref).unwrap_or(0.0);
    if m == 0.0 {
        return Err(GenMetricsError::ZeroMmd);
    }
    Ok(Decomposition {
        recon_fraction: mean(recon_cd).unwrap_or(0.0) / m,
        compression_fraction: mean(compression_cd).unwrap_or(0.0) / m,
        pearson_recon_mmd: pearson(recon_cd, mmd_per_ref),
        pearson_recon_compression: pearson(recon_cd, compression_cd),
    })
}
