use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::grid::{GridSpec, Label, VoxelLabelGrid};
use super::SigningError;
use crate::geometry::triangle::triangle_box_overlap;
use crate::geometry::{SpatialIndex, TriangleMesh};
use crate::math::Vec3;

/// Marks every voxel whose box overlaps a triangle as `Surface`.
///
/// Surface voxels on the outermost shell mean the domain has no exterior
/// padding there, which is reported as [`SigningError::DomainTooTight`].
pub fn mark_surface_voxels(mesh: &TriangleMesh, spec: &GridSpec) -> Result<VoxelLabelGrid, SigningError> {
    let mut grid = VoxelLabelGrid::new(*spec);
    if mesh.is_empty() {
        return Ok(grid);
    }
    let domain = spec.domain();
    let bounds = mesh.aabb().expect("faces imply vertices");
    if !domain.contains(bounds.min) || !domain.contains(bounds.max) {
        return Err(SigningError::DomainTooTight);
    }
    let h = spec.voxel_size();
    let half = Vec3::splat(0.5 * h);
    for f in 0..mesh.face_count() {
        let [a, b, c] = mesh.triangle(f);
        let lo = a.min(b).min(c);
        let hi = a.max(b).max(c);
        // One extra cell each way so boxes touching the triangle bounds are tested.
        let range = |axis: usize| {
            let l = spec.axis_cell(axis, lo[axis]).saturating_sub(1);
            let u = (spec.axis_cell(axis, hi[axis]) + 1).min(spec.resolution() - 1);
            l..=u
        };
        for z in range(2) {
            for y in range(1) {
                for x in range(0) {
                    let v = [x, y, z];
                    if grid.get(v) == Label::Surface {
                        continue;
                    }
                    if triangle_box_overlap(spec.center(v), half, a, b, c) {
                        if spec.on_shell(v) {
                            return Err(SigningError::DomainTooTight);
                        }
                        grid.set(v, Label::Surface);
                    }
                }
            }
        }
    }
    Ok(grid)
}

/// Floods `Outside` from the grid corners through face-adjacent voxels that
/// are not `Surface`.
pub fn flood_fill_outside(mut labels: VoxelLabelGrid) -> Result<VoxelLabelGrid, SigningError> {
    let spec = *labels.spec();
    if labels.get([0, 0, 0]) == Label::Surface {
        return Err(SigningError::CornerIsSurface);
    }
    let n = spec.resolution();
    let mut queue = VecDeque::new();
    for c in spec.corners() {
        if labels.get(c) == Label::Unlabeled {
            labels.set(c, Label::Outside);
            queue.push_back(c);
        }
    }
    while let Some([x, y, z]) = queue.pop_front() {
        let mut visit = |w: [usize; 3], labels: &mut VoxelLabelGrid| {
            if labels.get(w) == Label::Unlabeled {
                labels.set(w, Label::Outside);
                queue.push_back(w);
            }
        };
        if x > 0 {
            visit([x - 1, y, z], &mut labels);
        }
        if x + 1 < n {
            visit([x + 1, y, z], &mut labels);
        }
        if y > 0 {
            visit([x, y - 1, z], &mut labels);
        }
        if y + 1 < n {
            visit([x, y + 1, z], &mut labels);
        }
        if z > 0 {
            visit([x, y, z - 1], &mut labels);
        }
        if z + 1 < n {
            visit([x, y, z + 1], &mut labels);
        }
    }
    Ok(labels)
}

fn has_outside_neighbor(labels: &VoxelLabelGrid, v: [usize; 3]) -> bool {
    let mut found = false;
    labels.for_each_neighbor26(v, |_, l| found |= l == Label::Outside);
    found
}

/// Relabels `Surface` voxels without an `Outside` voxel among their 26
/// neighbors as `Unlabeled`. Decisions are taken on the input state.
pub fn remove_interior_surface_voxels(mut labels: VoxelLabelGrid) -> VoxelLabelGrid {
    let spec = *labels.spec();
    let interior: Vec<usize> = (0..spec.voxel_count())
        .filter(|&i| labels.labels()[i] == Label::Surface && !has_outside_neighbor(&labels, spec.coords(i)))
        .collect();
    let l = labels.labels_mut();
    for i in interior {
        l[i] = Label::Unlabeled;
    }
    labels
}

/// Every remaining `Unlabeled` voxel becomes `Inside`.
pub fn label_inside(mut labels: VoxelLabelGrid) -> VoxelLabelGrid {
    for l in labels.labels_mut() {
        if *l == Label::Unlabeled {
            *l = Label::Inside;
        }
    }
    labels
}

/// Runs marking, outside flooding, interior-shell removal and inside labeling.
pub fn label_voxels(mesh: &TriangleMesh, spec: &GridSpec) -> Result<VoxelLabelGrid, SigningError> {
    let marked = mark_surface_voxels(mesh, spec)?;
    let flooded = flood_fill_outside(marked)?;
    Ok(label_inside(remove_interior_surface_voxels(flooded)))
}

/// Sum of offsets from the voxel center to its `Outside` 26-neighbors.
pub(crate) fn outside_direction(labels: &VoxelLabelGrid, v: [usize; 3]) -> Option<Vec3> {
    let spec = labels.spec();
    let h = spec.voxel_size();
    let mut n = Vec3::ZERO;
    let mut any = false;
    labels.for_each_neighbor26(v, |w, l| {
        if l == Label::Outside {
            any = true;
            n += Vec3::new(
                (w[0] as f64 - v[0] as f64) * h,
                (w[1] as f64 - v[1] as f64) * h,
                (w[2] as f64 - v[2] as f64) * h,
            );
        }
    });
    any.then_some(n)
}

/// Plane test for a surface voxel: `+1` if `<c - p, n> > 0`, else `-1`, where
/// `c` is the voxel center, `p` its closest surface point and `n` the summed
/// offsets to the `Outside` neighbors.
pub(crate) fn plane_sign(center: Vec3, closest: Vec3, outward: Vec3) -> f64 {
    if (center - closest).dot(outward) > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of one `Surface` voxel after the label pipeline.
pub fn sign_surface_voxel(
    labels: &VoxelLabelGrid,
    index: &SpatialIndex,
    voxel: [usize; 3],
) -> Result<f64, SigningError> {
    if labels.get(voxel) != Label::Surface {
        return Err(SigningError::NotSurface(voxel));
    }
    let outward = outside_direction(labels, voxel).ok_or(SigningError::NoOutsideNeighbor(voxel))?;
    let c = labels.spec().center(voxel);
    let p = index.closest_point(c).point;
    Ok(plane_sign(c, p, outward))
}
