//! Mesh to voxel labels and truncated SDF / occupancy grids.
//!
//! The flood-fill pipeline:
//! 1. mark every voxel whose box overlaps a triangle as `Surface`;
//! 2. flood `Outside` from the corners through 6-connected non-surface voxels;
//! 3. relabel `Surface` voxels with no `Outside` voxel in their 26-neighborhood
//!    as `Unlabeled` (interior shells);
//! 4. label the remaining `Unlabeled` voxels `Inside`;
//! 5. sign each `Surface` voxel with the plane through its closest surface
//!    point, oriented by the offsets to its `Outside` neighbors.

mod grid;
mod labels;
mod sdf;

pub use grid::{GridKind, GridSpec, Label, ScalarGrid, VoxelLabelGrid, DEFAULT_CUTOFF, MIN_RESOLUTION};
pub use labels::{
    flood_fill_outside, label_inside, label_voxels, mark_surface_voxels, remove_interior_surface_voxels,
    sign_surface_voxel,
};
pub use sdf::{compute_sdf, occupancy_grid, parity_sign, SignMethod};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SigningError {
    #[error("grid resolution {0} is below the minimum of {MIN_RESOLUTION}")]
    ResolutionTooLow(usize),
    #[error("grid domain must be a non-empty cube")]
    NonCubicDomain,
    #[error("mesh touches the outermost voxel shell; enlarge the domain")]
    DomainTooTight,
    #[error("corner voxel (0, 0, 0) touches the surface")]
    CornerIsSurface,
    #[error("surface voxel {0:?} has no outside neighbor")]
    NoOutsideNeighbor([usize; 3]),
    #[error("voxel {0:?} is not a surface voxel")]
    NotSurface([usize; 3]),
    #[error("truncation cutoff must be positive and finite, got {0}")]
    InvalidCutoff(f64),
    #[error("grid has {got} values, expected {expected}")]
    ValueCount { expected: usize, got: usize },
    #[error("grid value {value} at index {index} violates the {kind} range")]
    ValueOutOfRange { index: usize, value: f32, kind: &'static str },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
