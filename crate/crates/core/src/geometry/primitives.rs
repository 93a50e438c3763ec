//! Analytic test shapes: boxes, open boxes, icospheres and flat sheets.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::mesh::TriangleMesh;
use crate::math::{sqrt, Vec3};

/// Face of an axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxFace {
    NegX,
    PosX,
    NegY,
    PosY,
    NegZ,
    PosZ,
}

const BOX_FACES: [(BoxFace, [usize; 4]); 6] = [
    (BoxFace::NegX, [0, 4, 6, 2]),
    (BoxFace::PosX, [1, 3, 7, 5]),
    (BoxFace::NegY, [0, 1, 5, 4]),
    (BoxFace::PosY, [2, 6, 7, 3]),
    (BoxFace::NegZ, [0, 2, 3, 1]),
    (BoxFace::PosZ, [4, 5, 7, 6]),
];

fn box_with_faces(min: Vec3, max: Vec3, skip: Option<BoxFace>) -> TriangleMesh {
    let vertices: Vec<Vec3> = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { min.x } else { max.x },
                if i & 2 == 0 { min.y } else { max.y },
                if i & 4 == 0 { min.z } else { max.z },
            )
        })
        .collect();
    let mut faces = Vec::new();
    for (face, [a, b, c, d]) in BOX_FACES {
        if Some(face) == skip {
            continue;
        }
        faces.push([a as u32, b as u32, c as u32]);
        faces.push([a as u32, c as u32, d as u32]);
    }
    TriangleMesh::new(vertices, faces).expect("static indices are valid")
}

/// Closed box with outward-facing triangles (8 vertices, 12 faces).
pub fn box_mesh(min: Vec3, max: Vec3) -> TriangleMesh {
    box_with_faces(min, max, None)
}

/// Box with one face removed: an open, non-watertight surface.
pub fn open_box_mesh(min: Vec3, max: Vec3, missing: BoxFace) -> TriangleMesh {
    box_with_faces(min, max, Some(missing))
}

/// Square `[-h, h]^2` in the plane `z = z0`, normal `+Z`, split into `2 * n^2` triangles.
pub fn square_sheet(half: f64, z0: f64, n: usize) -> TriangleMesh {
    let n = n.max(1);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let x = -half + 2.0 * half * i as f64 / n as f64;
            let y = -half + 2.0 * half * j as f64 / n as f64;
            vertices.push(Vec3::new(x, y, z0));
        }
    }
    let mut faces = Vec::with_capacity(2 * n * n);
    let id = |i: usize, j: usize| (j * (n + 1) + i) as u32;
    for j in 0..n {
        for i in 0..n {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("generated indices are valid")
}

/// Geodesic sphere centered at the origin: `10 * 4^s + 2` vertices and
/// `20 * 4^s` outward-facing triangles, all vertices at `radius`.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + sqrt(5.0)) / 2.0;
    let mut vertices: Vec<Vec3> = vec![
        Vec3::new(-1.0, t, 0.0),
        Vec3::new(1.0, t, 0.0),
        Vec3::new(-1.0, -t, 0.0),
        Vec3::new(1.0, -t, 0.0),
        Vec3::new(0.0, -1.0, t),
        Vec3::new(0.0, 1.0, t),
        Vec3::new(0.0, -1.0, -t),
        Vec3::new(0.0, 1.0, -t),
        Vec3::new(t, 0.0, -1.0),
        Vec3::new(t, 0.0, 1.0),
        Vec3::new(-t, 0.0, -1.0),
        Vec3::new(-t, 0.0, 1.0),
    ];
    for v in vertices.iter_mut() {
        *v = v.normalized().expect("non-zero") * radius;
    }
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            let key = if a < b { (a, b) } else { (b, a) };
            *midpoints.entry(key).or_insert_with(|| {
                let m = (vertices[a as usize] + vertices[b as usize]) * 0.5;
                vertices.push(m.normalized().expect("non-zero") * radius);
                (vertices.len() - 1) as u32
            })
        };
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    TriangleMesh::new(vertices, faces).expect("generated indices are valid")
}
