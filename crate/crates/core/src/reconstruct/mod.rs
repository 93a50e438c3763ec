//! Marching-cubes extraction of a triangle mesh from a [`ScalarGrid`].
//!
//! Cells span the `(N-1)³` boxes between neighboring voxel centers. Vertices
//! are keyed by the grid edge they lie on, so a vertex shared by adjacent
//! cells is emitted once and positioned identically for all of them.

mod table;

use alloc::vec::Vec;

use crate::geometry::TriangleMesh;
use crate::math::Vec3;
use crate::par;
use crate::signing::{GridKind, ScalarGrid};
use table::TRI_TABLE;

/// Degenerate-triangle area threshold.
const MIN_AREA: f64 = 1e-14;

/// Iso level of the extracted surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoSurfaceConfig {
    pub iso_value: f64,
}

impl IsoSurfaceConfig {
    /// `0.0` for signed distances, `0.5` for occupancy.
    pub fn for_kind(kind: GridKind) -> Self {
        match kind {
            GridKind::TruncatedSdf { .. } => IsoSurfaceConfig { iso_value: 0.0 },
            GridKind::Occupancy => IsoSurfaceConfig { iso_value: 0.5 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructWarning {
    /// No cell straddles the iso level; the mesh is empty.
    EmptySurface,
}

#[derive(Debug, Clone)]
pub struct IsoSurface {
    pub mesh: TriangleMesh,
    pub warnings: Vec<ReconstructWarning>,
}

// (corner offset, axis) of each of the 12 cell edges.
const EDGES: [([usize; 3], usize); 12] = [
    ([0, 0, 0], 0),
    ([1, 0, 0], 1),
    ([0, 1, 0], 0),
    ([0, 0, 0], 1),
    ([0, 0, 1], 0),
    ([1, 0, 1], 1),
    ([0, 1, 1], 0),
    ([0, 0, 1], 1),
    ([0, 0, 0], 2),
    ([1, 0, 0], 2),
    ([1, 1, 0], 2),
    ([0, 1, 0], 2),
];

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Extracts the iso surface with outward-facing triangles: the inside is
/// `value < iso` for signed distances and `value > iso` for occupancy.
pub fn marching_cubes(grid: &ScalarGrid, config: IsoSurfaceConfig) -> IsoSurface {
    let spec = grid.spec();
    let n = spec.resolution();
    let iso = config.iso_value;
    let inside_above = matches!(grid.kind(), GridKind::Occupancy);
    let values = grid.values();
    let inside = |i: usize| {
        let v = values[i] as f64;
        if inside_above {
            v > iso
        } else {
            v < iso
        }
    };

    // Triangles as edge keys `3 * voxel_index + axis`, in cell order.
    let slabs: Vec<Vec<[u64; 3]>> = par::map_indexed(n - 1, |z| {
        let mut out = Vec::new();
        for y in 0..n - 1 {
            for x in 0..n - 1 {
                let mut case = 0usize;
                for (k, c) in CORNERS.iter().enumerate() {
                    if inside(spec.index([x + c[0], y + c[1], z + c[2]])) {
                        case |= 1 << k;
                    }
                }
                let row = &TRI_TABLE[case];
                let key = |e: i8| {
                    let (o, axis) = EDGES[e as usize];
                    (3 * spec.index([x + o[0], y + o[1], z + o[2]]) + axis) as u64
                };
                for t in row.chunks_exact(3).take_while(|t| t[0] >= 0) {
                    // The table winds toward the inside corners; reversed here.
                    out.push([key(t[0]), key(t[2]), key(t[1])]);
                }
            }
        }
        out
    });
    let tris: Vec<[u64; 3]> = slabs.into_iter().flatten().collect();
    if tris.is_empty() {
        return IsoSurface { mesh: TriangleMesh::default(), warnings: alloc::vec![ReconstructWarning::EmptySurface] };
    }

    let mut keys: Vec<u64> = tris.iter().flatten().copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let positions: Vec<Vec3> = par::map_indexed(keys.len(), |i| {
        let key = keys[i] as usize;
        let (a, axis) = (key / 3, key % 3);
        let ca = spec.coords(a);
        let mut cb = ca;
        cb[axis] += 1;
        let b = spec.index(cb);
        let (va, vb) = (values[a] as f64, values[b] as f64);
        let t = if (vb - va).abs() < 1e-12 { 0.5 } else { ((iso - va) / (vb - va)).clamp(0.0, 1.0) };
        let (pa, pb) = (spec.center(ca), spec.center(cb));
        pa + (pb - pa) * t
    });

    // Merge vertices with bit-identical positions (crossings exactly at a
    // voxel center), keeping the first occurrence in key order.
    let mut order: Vec<u32> = (0..positions.len() as u32).collect();
    let bits = |p: Vec3| (p.x.to_bits(), p.y.to_bits(), p.z.to_bits());
    order.sort_by_key(|&i| (bits(positions[i as usize]), i));
    let mut remap = alloc::vec![0u32; positions.len()];
    let mut keep = alloc::vec![false; positions.len()];
    let mut g = 0;
    while g < order.len() {
        let first = order[g];
        let mut h = g;
        while h < order.len() && bits(positions[order[h] as usize]) == bits(positions[first as usize]) {
            remap[order[h] as usize] = first;
            h += 1;
        }
        keep[first as usize] = true;
        g = h;
    }
    let mut compact = alloc::vec![u32::MAX; positions.len()];
    let mut vertices = Vec::new();
    for (i, p) in positions.iter().enumerate() {
        if keep[i] {
            compact[i] = vertices.len() as u32;
            vertices.push(*p);
        }
    }

    let lookup = |k: u64| compact[remap[keys.binary_search(&k).expect("key present") as usize] as usize];
    let mut faces = Vec::with_capacity(tris.len());
    for t in &tris {
        let f = [lookup(t[0]), lookup(t[1]), lookup(t[2])];
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            continue;
        }
        let [a, b, c] = f.map(|i| vertices[i as usize]);
        if 0.5 * (b - a).cross(c - a).norm() < MIN_AREA {
            continue;
        }
        faces.push(f);
    }
    let mut warnings = Vec::new();
    if faces.is_empty() {
        warnings.push(ReconstructWarning::EmptySurface);
    }
    let mesh = TriangleMesh::new(vertices, faces).expect("indices are in range by construction");
    IsoSurface { mesh, warnings }
}
