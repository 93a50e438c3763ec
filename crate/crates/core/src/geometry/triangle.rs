//! Per-triangle geometric predicates: closest point, box overlap, ray crossing.

use crate::math::Vec3;

/// Closest point to `p` on segment `a`–`b`.
pub fn closest_point_on_segment(p: Vec3, a: Vec3, b: Vec3) -> Vec3 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Closest point to `p` on the (closed) triangle `a, b, c`.
///
/// Voronoi-region walk; zero-area triangles fall back to their edges.
pub fn closest_point_on_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    if ab.cross(ac).norm_squared() == 0.0 {
        let cands = [
            closest_point_on_segment(p, a, b),
            closest_point_on_segment(p, b, c),
            closest_point_on_segment(p, c, a),
        ];
        let mut best = cands[0];
        for &q in &cands[1..] {
            if q.distance_squared(p) < best.distance_squared(p) {
                best = q;
            }
        }
        return best;
    }

    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }

    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }

    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[inline]
fn project_separated(axis: Vec3, v0: Vec3, v1: Vec3, v2: Vec3, half: Vec3) -> bool {
    let p0 = axis.dot(v0);
    let p1 = axis.dot(v1);
    let p2 = axis.dot(v2);
    let lo = p0.min(p1).min(p2);
    let hi = p0.max(p1).max(p2);
    let r = half.x * axis.x.abs() + half.y * axis.y.abs() + half.z * axis.z.abs();
    lo > r || hi < -r
}

/// Separating-axis test between a triangle and an axis-aligned box given by
/// center and half extents. Touching counts as overlap.
pub fn triangle_box_overlap(center: Vec3, half: Vec3, a: Vec3, b: Vec3, c: Vec3) -> bool {
    let v0 = a - center;
    let v1 = b - center;
    let v2 = c - center;

    // Box face normals.
    for axis in 0..3 {
        let lo = v0[axis].min(v1[axis]).min(v2[axis]);
        let hi = v0[axis].max(v1[axis]).max(v2[axis]);
        if lo > half[axis] || hi < -half[axis] {
            return false;
        }
    }

    let e0 = v1 - v0;
    let e1 = v2 - v1;
    let e2 = v0 - v2;

    // Edge x box-axis cross products.
    let units = [Vec3::X, Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
    for u in units {
        for e in [e0, e1, e2] {
            let axis = u.cross(e);
            if project_separated(axis, v0, v1, v2, half) {
                return false;
            }
        }
    }

    // Triangle plane.
    let n = e0.cross(e1);
    !project_separated(n, v0, v1, v2, half)
}

/// Outcome of the watertight ray/triangle test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayCrossing {
    Miss,
    /// Hit at parameter `t`; `on_edge` is set when the hit lies exactly on an
    /// edge or vertex and ownership was decided by the tie rule.
    Hit { t: f64, on_edge: bool },
}

/// Precomputed shear for one ray (watertight ray/triangle intersection).
#[derive(Debug, Clone, Copy)]
pub struct RayFrame {
    origin: Vec3,
    kx: usize,
    ky: usize,
    kz: usize,
    sx: f64,
    sy: f64,
    sz: f64,
}

impl RayFrame {
    pub fn new(origin: Vec3, dir: Vec3) -> Self {
        let abs = Vec3::new(dir.x.abs(), dir.y.abs(), dir.z.abs());
        let kz = abs.max_axis();
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if dir[kz] < 0.0 {
            core::mem::swap(&mut kx, &mut ky);
        }
        RayFrame {
            origin,
            kx,
            ky,
            kz,
            sx: dir[kx] / dir[kz],
            sy: dir[ky] / dir[kz],
            sz: 1.0 / dir[kz],
        }
    }

    #[inline]
    fn shear(&self, p: Vec3) -> (f64, f64, f64) {
        let q = p - self.origin;
        (q[self.kx] - self.sx * q[self.kz], q[self.ky] - self.sy * q[self.kz], self.sz * q[self.kz])
    }

    /// Intersects the triangle `a, b, c` with the ray, counting `t >= 0`.
    ///
    /// Edge functions of a shared edge are exact negations of each other in the
    /// two incident triangles, so a fixed ownership rule on zero edge values
    /// assigns a hit on a shared edge to exactly one of them.
    pub fn intersect(&self, a: Vec3, b: Vec3, c: Vec3) -> RayCrossing {
        let (ax, ay, az) = self.shear(a);
        let (bx, by, bz) = self.shear(b);
        let (cx, cy, cz) = self.shear(c);

        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;

        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return RayCrossing::Miss;
        }
        let det = u + v + w;
        if det == 0.0 {
            return RayCrossing::Miss;
        }

        // Edge vectors in counter-clockwise order of the projected triangle.
        let flip = det < 0.0;
        let edges = [((bx, by), (cx, cy), u), ((cx, cy), (ax, ay), v), ((ax, ay), (bx, by), w)];
        let mut on_edge = false;
        for ((px, py), (qx, qy), value) in edges {
            if value == 0.0 {
                on_edge = true;
                let (mut dx, mut dy) = (qx - px, qy - py);
                if flip {
                    dx = -dx;
                    dy = -dy;
                }
                if !owns_edge(dx, dy) {
                    return RayCrossing::Miss;
                }
            }
        }

        let t_scaled = u * az + v * bz + w * cz;
        let t = t_scaled / det;
        if !(t >= 0.0) {
            return RayCrossing::Miss;
        }
        RayCrossing::Hit { t, on_edge }
    }
}

/// Ownership of a zero-valued edge. For every non-zero edge vector exactly one
/// of `d` and `-d` is owned.
#[inline]
fn owns_edge(dx: f64, dy: f64) -> bool {
    dy > 0.0 || (dy == 0.0 && dx < 0.0)
}
