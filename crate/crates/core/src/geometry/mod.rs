//! Mesh and point-cloud data model, surface sampling and spatial queries.

mod bvh;
mod kdtree;
mod mesh;
pub mod primitives;
mod sampling;
pub mod triangle;

pub use bvh::{ClosestPoint, RayHit, SpatialIndex};
pub use kdtree::PointIndex;
pub use mesh::{normalize_to_unit_cube, Aabb, Transform, TriangleMesh};
pub use sampling::{sample_surface, PointCloud, SurfacePoint};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("face {face} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange { face: usize, index: usize, count: usize },
    #[error("all vertices coincide; the bounding box has no extent")]
    DegenerateExtent,
    #[error("mesh has no vertices")]
    NoVertices,
    #[error("mesh has zero surface area")]
    DegenerateMesh,
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error("point {index} has a normal of length {length}, expected 1")]
    NonUnitNormal { index: usize, length: f64 },
    #[error("invalid bounding box: min must not exceed max")]
    InvalidAabb,
}
