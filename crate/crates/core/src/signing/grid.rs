use alloc::vec;
use alloc::vec::Vec;

use super::SigningError;
use crate::geometry::Aabb;
use crate::math::Vec3;

pub const MIN_RESOLUTION: usize = 8;
/// Truncation distance of the SDF grids.
pub const DEFAULT_CUTOFF: f64 = 0.2;

/// Cubic voxel grid of `N^3` cells over a cubic domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    resolution: usize,
    min: Vec3,
    side: f64,
}

impl GridSpec {
    pub fn new(resolution: usize, domain: Aabb) -> Result<Self, SigningError> {
        if resolution < MIN_RESOLUTION {
            return Err(SigningError::ResolutionTooLow(resolution));
        }
        let e = domain.extent();
        let side = e.x;
        let tol = 1e-9 * side.abs().max(1.0);
        if !(side > 0.0) || !side.is_finite() || (e.y - side).abs() > tol || (e.z - side).abs() > tol {
            return Err(SigningError::NonCubicDomain);
        }
        Ok(GridSpec { resolution, min: domain.min, side })
    }

    /// `[-0.75, 0.75]^3`: the unit cube plus a quarter of padding per side.
    pub fn with_default_domain(resolution: usize) -> Result<Self, SigningError> {
        GridSpec::new(resolution, Aabb::cube(Vec3::ZERO, 1.5))
    }

    #[inline]
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn domain(&self) -> Aabb {
        Aabb { min: self.min, max: self.min + Vec3::splat(self.side) }
    }

    #[inline]
    pub fn voxel_size(&self) -> f64 {
        self.side / self.resolution as f64
    }

    #[inline]
    pub fn voxel_count(&self) -> usize {
        self.resolution * self.resolution * self.resolution
    }

    /// Linear index, x fastest: `x + N * (y + N * z)`.
    #[inline]
    pub fn index(&self, v: [usize; 3]) -> usize {
        v[0] + self.resolution * (v[1] + self.resolution * v[2])
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let n = self.resolution;
        [index % n, (index / n) % n, index / (n * n)]
    }

    #[inline]
    pub fn center(&self, v: [usize; 3]) -> Vec3 {
        let h = self.voxel_size();
        Vec3::new(
            self.min.x + (v[0] as f64 + 0.5) * h,
            self.min.y + (v[1] as f64 + 0.5) * h,
            self.min.z + (v[2] as f64 + 0.5) * h,
        )
    }

    /// Voxel containing `p` along one axis, clamped to the grid.
    #[inline]
    pub(crate) fn axis_cell(&self, axis: usize, p: f64) -> usize {
        let f = crate::math::floor((p - self.min[axis]) / self.voxel_size());
        if f <= 0.0 {
            0
        } else {
            (f as usize).min(self.resolution - 1)
        }
    }

    pub(crate) fn on_shell(&self, v: [usize; 3]) -> bool {
        let last = self.resolution - 1;
        v.iter().any(|&c| c == 0 || c == last)
    }

    /// The eight corner voxels.
    pub fn corners(&self) -> [[usize; 3]; 8] {
        let l = self.resolution - 1;
        let mut out = [[0; 3]; 8];
        for (i, c) in out.iter_mut().enumerate() {
            *c = [if i & 1 == 0 { 0 } else { l }, if i & 2 == 0 { 0 } else { l }, if i & 4 == 0 { 0 } else { l }];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Label {
    Unlabeled = 0,
    Surface = 1,
    Outside = 2,
    Inside = 3,
}

/// Per-voxel classification used by the flood-fill pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelLabelGrid {
    spec: GridSpec,
    labels: Vec<Label>,
}

impl VoxelLabelGrid {
    pub fn new(spec: GridSpec) -> Self {
        VoxelLabelGrid { spec, labels: vec![Label::Unlabeled; spec.voxel_count()] }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, v: [usize; 3]) -> Label {
        self.labels[self.spec.index(v)]
    }

    #[inline]
    pub fn set(&mut self, v: [usize; 3], label: Label) {
        let i = self.spec.index(v);
        self.labels[i] = label;
    }

    pub(crate) fn labels_mut(&mut self) -> &mut [Label] {
        &mut self.labels
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Calls `f` for every in-grid neighbor differing in at most one step per axis.
    #[inline]
    pub fn for_each_neighbor26(&self, v: [usize; 3], mut f: impl FnMut([usize; 3], Label)) {
        let n = self.spec.resolution() as isize;
        for dz in -1isize..=1 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dx == 0 && dy == 0 && dz == 0 {
                        continue;
                    }
                    let (x, y, z) = (v[0] as isize + dx, v[1] as isize + dy, v[2] as isize + dz);
                    if x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n {
                        continue;
                    }
                    let w = [x as usize, y as usize, z as usize];
                    f(w, self.get(w));
                }
            }
        }
    }
}

/// What a scalar grid stores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    TruncatedSdf { cutoff: f64 },
    Occupancy,
}

/// `N^3` field of `f32` values, x-fastest layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    spec: GridSpec,
    values: Vec<f32>,
    kind: GridKind,
}

impl ScalarGrid {
    /// Validates the value count and the per-kind range.
    pub fn new(spec: GridSpec, values: Vec<f32>, kind: GridKind) -> Result<Self, SigningError> {
        if values.len() != spec.voxel_count() {
            return Err(SigningError::ValueCount { expected: spec.voxel_count(), got: values.len() });
        }
        match kind {
            GridKind::TruncatedSdf { cutoff } => {
                if !(cutoff > 0.0) || !cutoff.is_finite() {
                    return Err(SigningError::InvalidCutoff(cutoff));
                }
                let c = cutoff as f32;
                if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.abs() <= c)) {
                    return Err(SigningError::ValueOutOfRange { index, value, kind: "truncated sdf" });
                }
            }
            GridKind::Occupancy => {
                if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0) {
                    return Err(SigningError::ValueOutOfRange { index, value, kind: "occupancy" });
                }
            }
        }
        Ok(ScalarGrid { spec, values, kind })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, v: [usize; 3]) -> f32 {
        self.values[self.spec.index(v)]
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }
}
