//! Static kd-tree over point positions for exact nearest-neighbor queries.

use alloc::vec::Vec;

use crate::math::Vec3;

const LEAF_SIZE: usize = 16;
const NO_CHILD: u32 = u32::MAX;
const MAX_DEPTH: usize = 96;

#[derive(Debug, Clone)]
struct KdNode {
    // Internal: points with `p[axis] <= split` on the left, `>= split` right.
    split: f64,
    axis: u8,
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

/// Exact nearest-neighbor index over a fixed set of points.
#[derive(Debug, Clone)]
pub struct PointIndex {
    pts: Vec<[f64; 3]>,
    // Coordinates again, one array per axis, for vectorized leaf scans.
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<f64>,
    perm: Vec<u32>,
    nodes: Vec<KdNode>,
}

#[inline(always)]
fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

struct Query<'a> {
    q: &'a [f64; 3],
    best: usize,
    best2: f64,
}

impl PointIndex {
    pub fn new(points: &[Vec3]) -> Self {
        let mut items: Vec<([f64; 3], u32)> =
            points.iter().enumerate().map(|(i, p)| (p.to_array(), i as u32)).collect();
        let mut nodes = Vec::new();
        if !items.is_empty() {
            build(&mut items, 0, &mut nodes, 0);
        }
        PointIndex {
            xs: items.iter().map(|i| i.0[0]).collect(),
            ys: items.iter().map(|i| i.0[1]).collect(),
            zs: items.iter().map(|i| i.0[2]).collect(),
            pts: items.iter().map(|i| i.0).collect(),
            perm: items.iter().map(|i| i.1).collect(),
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Nearest point to `query`: (original index, squared distance).
    /// `None` only for an empty index.
    pub fn nearest(&self, query: Vec3) -> Option<(usize, f64)> {
        if self.pts.is_empty() {
            return None;
        }
        let q = query.to_array();
        let (k, d2) = self.search(&q, 0);
        Some((self.perm[k] as usize, d2))
    }

    /// For every point of `queries` (in its original order) the squared
    /// distance to the nearest point of `self`.
    ///
    /// Queries are visited in tree order and seeded with the previous answer,
    /// which is a valid upper bound, so results are exact.
    pub fn nearest_squared_distances(&self, queries: &PointIndex) -> Vec<f64> {
        let mut out = alloc::vec![0.0; queries.len()];
        if self.pts.is_empty() {
            out.iter_mut().for_each(|v| *v = f64::INFINITY);
            return out;
        }
        let mut hint = 0usize;
        for (k, q) in queries.pts.iter().enumerate() {
            let (best, d2) = self.search(q, hint);
            hint = best;
            out[queries.perm[k] as usize] = d2;
        }
        out
    }

    fn search(&self, q: &[f64; 3], hint: usize) -> (usize, f64) {
        let mut s = Query { q, best: hint, best2: sq_dist(q, &self.pts[hint]) };
        self.visit(0, 0.0, [0.0; 3], &mut s);
        (s.best, s.best2)
    }

    // `rd` is the squared distance from the query to the node's cell,
    // maintained incrementally from the per-axis offsets in `off`.
    fn visit(&self, ni: u32, rd: f64, mut off: [f64; 3], s: &mut Query) {
        let node = &self.nodes[ni as usize];
        if node.left == NO_CHILD {
            let (a, b) = (node.start as usize, node.end as usize);
            let (xs, ys, zs) = (&self.xs[a..b], &self.ys[a..b], &self.zs[a..b]);
            let [qx, qy, qz] = *s.q;
            let mut m = f64::INFINITY;
            for ((x, y), z) in xs.iter().zip(ys).zip(zs) {
                let (dx, dy, dz) = (x - qx, y - qy, z - qz);
                m = m.min(dx * dx + dy * dy + dz * dz);
            }
            if m < s.best2 {
                s.best2 = m;
                s.best = a + (0..xs.len()).position(|k| sq_dist(s.q, &self.pts[a + k]) == m).unwrap_or(0);
            }
            return;
        }
        let axis = node.axis as usize;
        let d = s.q[axis] - node.split;
        let (near, far) = if d < 0.0 { (node.left, node.right) } else { (node.right, node.left) };
        self.visit(near, rd, off, s);
        let far_rd = rd - off[axis] * off[axis] + d * d;
        if far_rd < s.best2 {
            off[axis] = d;
            self.visit(far, far_rd, off, s);
        }
    }
}

fn build(items: &mut [([f64; 3], u32)], offset: usize, nodes: &mut Vec<KdNode>, depth: usize) -> u32 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for (p, _) in items.iter() {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let index = nodes.len() as u32;
    nodes.push(KdNode {
        split: 0.0,
        axis: 0,
        start: offset as u32,
        end: (offset + items.len()) as u32,
        left: NO_CHILD,
        right: NO_CHILD,
    });
    let ext = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    if items.len() <= LEAF_SIZE || depth + 2 >= MAX_DEPTH || ext.iter().all(|&e| e <= 0.0) {
        return index;
    }
    let axis = if ext[0] >= ext[1] && ext[0] >= ext[2] {
        0
    } else if ext[1] >= ext[2] {
        1
    } else {
        2
    };
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| a.0[axis].total_cmp(&b.0[axis]).then(a.1.cmp(&b.1)));
    let split = items[mid].0[axis];
    let (l, r) = items.split_at_mut(mid);
    let left = build(l, offset, nodes, depth + 1);
    let right = build(r, offset + mid, nodes, depth + 1);
    let n = &mut nodes[index as usize];
    n.split = split;
    n.axis = axis as u8;
    n.left = left;
    n.right = right;
    index
}
