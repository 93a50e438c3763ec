//! Bounding-volume hierarchy over the triangles of one mesh.

use alloc::vec::Vec;

use super::mesh::{Aabb, TriangleMesh};
use super::triangle::{closest_point_on_triangle, RayCrossing, RayFrame};
use super::GeometryError;
use crate::math::Vec3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    // Leaf when `count > 0`: triangles `[start, start + count)`.
    start: u32,
    count: u32,
    left: u32,
    right: u32,
}

impl Node {
    #[inline]
    fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

/// Result of a closest-point query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPoint {
    pub point: Vec3,
    pub distance: f64,
    /// Face index into the source mesh.
    pub face: usize,
    /// Unit face normal of `face`.
    pub normal: Vec3,
}

/// One ray/triangle crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub t: f64,
    pub face: usize,
}

/// Immutable BVH answering closest-point and ray queries; `Sync`, so many
/// threads may query one index concurrently.
///
/// Only faces with non-zero area are indexed, so every answer carries a
/// well-defined unit normal.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    tris: Vec<[Vec3; 3]>,
    normals: Vec<Vec3>,
    faces: Vec<u32>,
    nodes: Vec<Node>,
}

impl SpatialIndex {
    pub fn build(mesh: &TriangleMesh) -> Result<Self, GeometryError> {
        let mut items: Vec<(u32, [Vec3; 3], Vec3, Vec3)> = Vec::with_capacity(mesh.face_count());
        for f in 0..mesh.face_count() {
            if let Some(n) = mesh.face_normal(f) {
                let t = mesh.triangle(f);
                let centroid = (t[0] + t[1] + t[2]) / 3.0;
                items.push((f as u32, t, n, centroid));
            }
        }
        if items.is_empty() {
            return Err(GeometryError::DegenerateMesh);
        }
        let mut nodes = Vec::with_capacity(2 * items.len() / LEAF_SIZE + 1);
        build_node(&mut items, 0, &mut nodes);
        Ok(SpatialIndex {
            tris: items.iter().map(|i| i.1).collect(),
            normals: items.iter().map(|i| i.2).collect(),
            faces: items.iter().map(|i| i.0).collect(),
            nodes,
        })
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    pub fn triangle_count(&self) -> usize {
        self.tris.len()
    }

    /// Exact closest point on the mesh surface.
    pub fn closest_point(&self, query: Vec3) -> ClosestPoint {
        self.closest_within_squared(query, f64::INFINITY)
            .expect("non-empty index always has a closest point")
    }

    /// Closest point if one lies within `max_distance` (inclusive).
    pub fn closest_point_within(&self, query: Vec3, max_distance: f64) -> Option<ClosestPoint> {
        self.closest_within_squared(query, max_distance * max_distance)
    }

    fn closest_within_squared(&self, q: Vec3, limit2: f64) -> Option<ClosestPoint> {
        let mut best2 = limit2;
        let mut best: Option<(usize, Vec3)> = None;
        let mut stack: Vec<(u32, f64)> = Vec::with_capacity(64);
        let root_d = self.nodes[0].bounds.distance_squared(q);
        if root_d > best2 {
            return None;
        }
        stack.push((0, root_d));
        while let Some((ni, d2)) = stack.pop() {
            if d2 > best2 {
                continue;
            }
            let node = &self.nodes[ni as usize];
            if node.is_leaf() {
                let s = node.start as usize;
                for i in s..s + node.count as usize {
                    let [a, b, c] = self.tris[i];
                    let p = closest_point_on_triangle(q, a, b, c);
                    let dd = p.distance_squared(q);
                    // Exact ties go to the lowest face index.
                    let wins = match best {
                        None => dd <= best2,
                        Some((j, _)) => dd < best2 || (dd == best2 && self.faces[i] < self.faces[j]),
                    };
                    if wins {
                        best2 = dd;
                        best = Some((i, p));
                    }
                }
            } else {
                let l = node.left;
                let r = node.right;
                let dl = self.nodes[l as usize].bounds.distance_squared(q);
                let dr = self.nodes[r as usize].bounds.distance_squared(q);
                // Nearer child is popped first.
                if dl <= dr {
                    if dr <= best2 {
                        stack.push((r, dr));
                    }
                    if dl <= best2 {
                        stack.push((l, dl));
                    }
                } else {
                    if dl <= best2 {
                        stack.push((l, dl));
                    }
                    if dr <= best2 {
                        stack.push((r, dr));
                    }
                }
            }
        }
        best.map(|(i, point)| ClosestPoint {
            point,
            distance: crate::math::sqrt(best2),
            face: self.faces[i] as usize,
            normal: self.normals[i],
        })
    }

    /// All crossings with `t >= 0`, sorted by `t` (then face index).
    pub fn ray_intersections(&self, origin: Vec3, direction: Vec3) -> Vec<RayHit> {
        self.ray_intersections_flagged(origin, direction).0
    }

    /// Like [`ray_intersections`](Self::ray_intersections), also reporting whether
    /// any crossing landed exactly on an edge or vertex.
    pub fn ray_intersections_flagged(&self, origin: Vec3, direction: Vec3) -> (Vec<RayHit>, bool) {
        let frame = RayFrame::new(origin, direction);
        let inv = Vec3::new(1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z);
        let mut hits = Vec::new();
        let mut grazing = false;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if !node.bounds.hit_by_ray(origin, inv) {
                continue;
            }
            if node.is_leaf() {
                let s = node.start as usize;
                for i in s..s + node.count as usize {
                    let [a, b, c] = self.tris[i];
                    if let RayCrossing::Hit { t, on_edge } = frame.intersect(a, b, c) {
                        grazing |= on_edge;
                        hits.push(RayHit { t, face: self.faces[i] as usize });
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(node.left);
            }
        }
        hits.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.face.cmp(&b.face)));
        (hits, grazing)
    }
}

fn build_node(items: &mut [(u32, [Vec3; 3], Vec3, Vec3)], offset: usize, nodes: &mut Vec<Node>) -> u32 {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for it in items.iter() {
        for p in it.1 {
            bounds.grow(p);
        }
        cbounds.grow(it.3);
    }
    let index = nodes.len() as u32;
    nodes.push(Node { bounds, start: offset as u32, count: 0, left: 0, right: 0 });
    if items.len() <= LEAF_SIZE || cbounds.extent().max_element() <= 0.0 {
        nodes[index as usize].count = items.len() as u32;
        return index;
    }
    let axis = cbounds.extent().max_axis();
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| a.3[axis].total_cmp(&b.3[axis]).then(a.0.cmp(&b.0)));
    let (lo, hi) = items.split_at_mut(mid);
    let left = build_node(lo, offset, nodes);
    let right = build_node(hi, offset + mid, nodes);
    let n = &mut nodes[index as usize];
    n.left = left;
    n.right = right;
    index
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;

    #[test]
    fn vertex_query_is_exact() {
        let m = primitives::icosphere(0.4, 2);
        let idx = SpatialIndex::build(&m).unwrap();
        let v = m.vertices()[17];
        let c = idx.closest_point(v);
        assert_eq!(c.distance, 0.0);
        assert_eq!(c.point, v);
    }

    #[test]
    fn closest_point_within_limit() {
        let m = primitives::box_mesh(Vec3::splat(-0.5), Vec3::splat(0.5));
        let idx = SpatialIndex::build(&m).unwrap();
        assert!(idx.closest_point_within(Vec3::new(2.0, 0.0, 0.0), 1.0).is_none());
        let c = idx.closest_point_within(Vec3::new(2.0, 0.0, 0.0), 1.5).unwrap();
        assert!((c.distance - 1.5).abs() < 1e-12);
        assert!((c.normal - Vec3::X).norm() < 1e-12);
    }

    #[test]
    fn cube_ray_through_center_hits_twice() {
        let m = primitives::box_mesh(Vec3::splat(-0.5), Vec3::splat(0.5));
        let idx = SpatialIndex::build(&m).unwrap();
        let hits = idx.ray_intersections(Vec3::new(-2.0, 0.0, 0.0), Vec3::X);
        assert_eq!(hits.len(), 2);
        assert!((hits[0].t - 1.5).abs() < 1e-12);
        assert!((hits[1].t - 2.5).abs() < 1e-12);
        assert!(idx.ray_intersections(Vec3::new(-2.0, 3.0, 0.0), Vec3::X).is_empty());
    }

    #[test]
    fn only_degenerate_faces_is_an_error() {
        let m = TriangleMesh::new(
            alloc::vec![Vec3::ZERO, Vec3::X, Vec3::new(2.0, 0.0, 0.0)],
            alloc::vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(SpatialIndex::build(&m).unwrap_err(), GeometryError::DegenerateMesh);
    }
}
