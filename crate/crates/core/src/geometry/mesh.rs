use alloc::vec::Vec;

use super::GeometryError;
use crate::math::Vec3;

/// Axis-aligned bounding box, `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self, GeometryError> {
        if min.x <= max.x && min.y <= max.y && min.z <= max.z {
            Ok(Aabb { min, max })
        } else {
            Err(GeometryError::InvalidAabb)
        }
    }

    /// Cube centered on `center` with the given side.
    pub fn cube(center: Vec3, side: f64) -> Self {
        let h = Vec3::splat(0.5 * side.abs());
        Aabb { min: center - h, max: center + h }
    }

    /// Inverted box that any `grow` call replaces.
    pub const fn empty() -> Self {
        Aabb {
            min: Vec3::splat(f64::INFINITY),
            max: Vec3::splat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<I: IntoIterator<Item = Vec3>>(points: I) -> Option<Self> {
        let mut b = Aabb::empty();
        let mut any = false;
        for p in points {
            b.grow(p);
            any = true;
        }
        any.then_some(b)
    }

    #[inline]
    pub fn grow(&mut self, p: Vec3) {
        self.min = self.min.min(p);
        self.max = self.max.max(p);
    }

    #[inline]
    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.min(o.min), max: self.max.max(o.max) }
    }

    #[inline]
    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    #[inline]
    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.y >= self.min.y
            && p.z >= self.min.z
            && p.x <= self.max.x
            && p.y <= self.max.y
            && p.z <= self.max.z
    }

    /// Squared distance from `p` to the box (0 inside).
    #[inline]
    pub fn distance_squared(&self, p: Vec3) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        let dz = (self.min.z - p.z).max(0.0).max(p.z - self.max.z);
        dx * dx + dy * dy + dz * dz
    }

    /// Slab test; true when the ray `origin + t * dir`, `t >= 0`, touches the box.
    pub fn hit_by_ray(&self, origin: Vec3, inv_dir: Vec3) -> bool {
        let mut t_min = 0.0f64;
        let mut t_max = f64::INFINITY;
        for axis in 0..3 {
            let o = origin[axis];
            let inv = inv_dir[axis];
            let (lo, hi) = (self.min[axis], self.max[axis]);
            if inv.is_infinite() {
                // Ray parallel to this slab.
                if o < lo || o > hi {
                    return false;
                }
                continue;
            }
            let mut t0 = (lo - o) * inv;
            let mut t1 = (hi - o) * inv;
            if t0 > t1 {
                core::mem::swap(&mut t0, &mut t1);
            }
            t_min = t_min.max(t0);
            t_max = t_max.min(t1);
            if t_min > t_max {
                return false;
            }
        }
        true
    }
}

/// Uniform scale followed by translation: `p' = scale * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub scale: f64,
    pub translation: Vec3,
}

impl Transform {
    pub const IDENTITY: Transform = Transform { scale: 1.0, translation: Vec3::ZERO };

    #[inline]
    pub fn apply(&self, p: Vec3) -> Vec3 {
        p * self.scale + self.translation
    }
}

/// Indexed triangle mesh. Face indices are validated on construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        let count = vertices.len();
        for (face, f) in faces.iter().enumerate() {
            for &i in f {
                if i as usize >= count {
                    return Err(GeometryError::IndexOutOfRange { face, index: i as usize, count });
                }
            }
        }
        Ok(TriangleMesh { vertices, faces })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// A mesh without faces. Representable; consumers decide whether to warn.
    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    #[inline]
    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * (b - a).cross(c - a).norm()
    }

    /// Unit normal from the winding order; `None` for zero-area faces.
    pub fn face_normal(&self, face: usize) -> Option<Vec3> {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(c - a).normalized()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn aabb(&self) -> Option<Aabb> {
        Aabb::from_points(self.vertices.iter().copied())
    }

    pub fn transformed(&self, t: &Transform) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|&p| t.apply(p)).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Same surface with every face winding reversed.
    pub fn flipped(&self) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.clone(),
            faces: self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect(),
        }
    }

    /// Disjoint union of two meshes.
    pub fn merged(&self, other: &TriangleMesh) -> TriangleMesh {
        let offset = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| f.map(|i| i + offset)));
        TriangleMesh { vertices, faces }
    }

    pub fn into_parts(self) -> (Vec<Vec3>, Vec<[u32; 3]>) {
        (self.vertices, self.faces)
    }
}

/// Centers the mesh bounding box on the origin and scales its longest side to 1.
///
/// Returns the normalized mesh and the transform from original to normalized
/// coordinates. All metrics in this crate are defined in these units.
pub fn normalize_to_unit_cube(mesh: &TriangleMesh) -> Result<(TriangleMesh, Transform), GeometryError> {
    let bounds = mesh.aabb().ok_or(GeometryError::NoVertices)?;
    let longest = bounds.extent().max_element();
    if !(longest > 0.0) || !longest.is_finite() {
        return Err(GeometryError::DegenerateExtent);
    }
    let scale = 1.0 / longest;
    let translation = Vec3::ZERO - bounds.center() * scale;
    let t = Transform { scale, translation };
    Ok((mesh.transformed(&t), t))
}
