use alloc::vec::Vec;

use rand::Rng;

use super::mesh::TriangleMesh;
use super::GeometryError;
use crate::math::{sqrt, Vec3};
use crate::par;
use crate::rng::RngSeed;

/// A surface sample: position plus unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub position: Vec3,
    pub normal: Vec3,
}

/// Oriented surface samples; every normal has unit length.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<SurfacePoint>,
}

const NORMAL_TOLERANCE: f64 = 1e-6;

impl PointCloud {
    pub fn new(points: Vec<SurfacePoint>) -> Result<Self, GeometryError> {
        for (index, p) in points.iter().enumerate() {
            let length = p.normal.norm();
            if (length - 1.0).abs() > NORMAL_TOLERANCE || !length.is_finite() {
                return Err(GeometryError::NonUnitNormal { index, length });
            }
        }
        Ok(PointCloud { points })
    }

    /// Cloud for distance-only use: every normal is set to `+Z`.
    pub fn from_positions(positions: &[Vec3]) -> Self {
        let normal = Vec3::new(0.0, 0.0, 1.0);
        PointCloud { points: positions.iter().map(|&position| SurfacePoint { position, normal }).collect() }
    }

    pub fn points(&self) -> &[SurfacePoint] {
        &self.points
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.points.iter().map(|p| p.position).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Uniformly scaled copy (normals unchanged for `s > 0`).
    pub fn scaled(&self, s: f64) -> PointCloud {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| SurfacePoint { position: p.position * s, normal: p.normal })
                .collect(),
        }
    }
}

/// Draws `n` points uniformly over the surface area of `mesh`.
///
/// Faces are chosen with probability proportional to area (zero-area faces
/// never), positions use the square-root barycentric map, normals are the
/// face normals. Sample `i` consumes its own random stream, so the output
/// depends only on `(mesh, n, seed)`.
pub fn sample_surface(mesh: &TriangleMesh, n: usize, seed: RngSeed) -> Result<PointCloud, GeometryError> {
    if n == 0 {
        return Err(GeometryError::ZeroSamples);
    }
    let mut faces = Vec::new();
    let mut normals = Vec::new();
    let mut cdf = Vec::new();
    let mut total = 0.0;
    for f in 0..mesh.face_count() {
        if let Some(normal) = mesh.face_normal(f) {
            total += mesh.face_area(f);
            faces.push(f);
            normals.push(normal);
            cdf.push(total);
        }
    }
    if faces.is_empty() || !(total > 0.0) {
        return Err(GeometryError::DegenerateMesh);
    }
    let points = par::map_indexed(n, |i| {
        let mut rng = seed.stream(i as u64);
        let u: f64 = rng.random();
        let target = u * total;
        let k = cdf.partition_point(|&c| c <= target).min(faces.len() - 1);
        let [a, b, c] = mesh.triangle(faces[k]);
        let r1 = sqrt(rng.random::<f64>());
        let r2: f64 = rng.random();
        let position = a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2);
        SurfacePoint { position, normal: normals[k] }
    });
    Ok(PointCloud { points })
}
