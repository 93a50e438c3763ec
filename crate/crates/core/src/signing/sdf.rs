use alloc::vec::Vec;

use super::grid::{GridKind, GridSpec, Label, ScalarGrid, VoxelLabelGrid};
use super::labels::{label_voxels, outside_direction, plane_sign};
use super::SigningError;
use crate::geometry::{GeometryError, SpatialIndex, TriangleMesh};
use crate::math::Vec3;
use crate::par;

/// How the inside/outside sign of a voxel is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignMethod {
    /// Corner flood fill plus the per-voxel plane test.
    FloodFill,
    /// Parity of surface crossings along `+x` from the voxel center.
    RaycastParity,
}

const PARITY_RETRIES: usize = 3;
const PARITY_JITTER: f64 = 1e-7;

fn build_index(mesh: &TriangleMesh) -> Result<Option<SpatialIndex>, SigningError> {
    if mesh.is_empty() {
        return Ok(None);
    }
    match SpatialIndex::build(mesh) {
        Ok(i) => Ok(Some(i)),
        Err(GeometryError::DegenerateMesh) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Unsigned distance to the surface, truncated at `cutoff`.
#[inline]
fn truncated_distance(index: Option<&SpatialIndex>, p: Vec3, cutoff: f64) -> f64 {
    index
        .and_then(|i| i.closest_point_within(p, cutoff))
        .map_or(cutoff, |c| c.distance.min(cutoff))
}

/// Signed label-pipeline value at one voxel, before truncation.
fn flood_fill_value(labels: &VoxelLabelGrid, index: Option<&SpatialIndex>, v: [usize; 3], cutoff: f64) -> f64 {
    let c = labels.spec().center(v);
    match labels.get(v) {
        Label::Outside | Label::Unlabeled => truncated_distance(index, c, cutoff),
        Label::Inside => -truncated_distance(index, c, cutoff),
        Label::Surface => {
            let Some(index) = index else { return cutoff };
            let closest = index.closest_point(c);
            // The post-removal invariant guarantees an Outside neighbor.
            let outward = outside_direction(labels, v).unwrap_or(Vec3::ZERO);
            plane_sign(c, closest.point, outward) * closest.distance
        }
    }
}

/// Truncated signed distance grid: `clamp(sign * distance, -cutoff, cutoff)`
/// at every voxel center, distances exact via the spatial index.
pub fn compute_sdf(
    mesh: &TriangleMesh,
    spec: &GridSpec,
    method: SignMethod,
    cutoff: f64,
) -> Result<ScalarGrid, SigningError> {
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(SigningError::InvalidCutoff(cutoff));
    }
    let index = build_index(mesh)?;
    let values: Vec<f32> = match method {
        SignMethod::FloodFill => {
            let labels = label_voxels(mesh, spec)?;
            if index.is_none() && labels.count(Label::Surface) > 0 {
                return Err(SigningError::Geometry(GeometryError::DegenerateMesh));
            }
            par::map_indexed(spec.voxel_count(), |i| {
                let v = flood_fill_value(&labels, index.as_ref(), spec.coords(i), cutoff);
                v.clamp(-cutoff, cutoff) as f32
            })
        }
        SignMethod::RaycastParity => {
            let inside = parity_inside(index.as_ref(), spec);
            par::map_indexed(spec.voxel_count(), |i| {
                let c = spec.center(spec.coords(i));
                let d = truncated_distance(index.as_ref(), c, cutoff);
                (if inside[i] { -d } else { d }) as f32
            })
        }
    };
    ScalarGrid::new(*spec, values, GridKind::TruncatedSdf { cutoff })
}

/// Binary occupancy from the flood-fill labels: 1 for `Inside` voxels and for
/// `Surface` voxels whose plane test is negative.
pub fn occupancy_grid(mesh: &TriangleMesh, spec: &GridSpec) -> Result<ScalarGrid, SigningError> {
    let index = build_index(mesh)?;
    let labels = label_voxels(mesh, spec)?;
    let values = par::map_indexed(spec.voxel_count(), |i| {
        let v = spec.coords(i);
        match labels.get(v) {
            Label::Inside => 1.0,
            Label::Surface => match index.as_ref() {
                Some(index) => {
                    let c = spec.center(v);
                    let p = index.closest_point(c).point;
                    let outward = outside_direction(&labels, v).unwrap_or(Vec3::ZERO);
                    if plane_sign(c, p, outward) < 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                None => 0.0,
            },
            _ => 0.0,
        }
    });
    ScalarGrid::new(*spec, values, GridKind::Occupancy)
}

/// Crossings along `+x`, retrying with a jittered origin while a crossing
/// lands exactly on an edge.
fn crossings_along_x(index: &SpatialIndex, origin: Vec3, jitter: f64) -> (Vec<f64>, f64) {
    let mut o = origin;
    let mut attempt = 0;
    loop {
        let (hits, grazing) = index.ray_intersections_flagged(o, Vec3::X);
        if !grazing || attempt == PARITY_RETRIES {
            let xs = hits.iter().map(|h| o.x + h.t).collect();
            return (xs, o.x);
        }
        attempt += 1;
        let k = attempt as f64;
        o = origin + Vec3::new(0.0, k * jitter, 0.5 * k * jitter);
    }
}

/// `-1` when the number of crossings along `+x` from `point` is odd.
pub fn parity_sign(index: &SpatialIndex, point: Vec3, voxel_size: f64) -> f64 {
    let (xs, _) = crossings_along_x(index, point, PARITY_JITTER * voxel_size);
    if xs.len() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Inside flags for all voxels, one ray per grid row.
///
/// A `+x` ray's sheared coordinates do not depend on the origin's x, so the
/// crossings of a row ray starting left of the domain are exactly the
/// crossings seen from each voxel center of that row, and a voxel's parity
/// is the number of crossings at or beyond its center.
fn parity_inside(index: Option<&SpatialIndex>, spec: &GridSpec) -> Vec<bool> {
    let n = spec.resolution();
    let Some(index) = index else {
        return alloc::vec![false; spec.voxel_count()];
    };
    let h = spec.voxel_size();
    let start_x = spec.domain().min.x - h;
    let rows: Vec<Vec<bool>> = par::map_indexed(n * n, |row| {
        let (y, z) = (row % n, row / n);
        let c0 = spec.center([0, y, z]);
        let (xs, _) = crossings_along_x(index, Vec3::new(start_x, c0.y, c0.z), PARITY_JITTER * h);
        (0..n)
            .map(|x| {
                let cx = spec.center([x, y, z]).x;
                let ahead = xs.len() - xs.partition_point(|&hx| hx < cx);
                ahead % 2 == 1
            })
            .collect()
    });
    let mut out = alloc::vec![false; spec.voxel_count()];
    for (row, flags) in rows.into_iter().enumerate() {
        let (y, z) = (row % n, row / n);
        for (x, f) in flags.into_iter().enumerate() {
            out[spec.index([x, y, z])] = f;
        }
    }
    out
}
