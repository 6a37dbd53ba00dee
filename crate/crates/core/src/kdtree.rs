//! Static 3D kd-tree for exact nearest-neighbour queries.
//!
//! The tree is an implicit median layout over a permutation of the input:
//! each range `[lo, hi)` stores its splitting point at `(lo + hi) / 2`, with
//! the left half below it on the split axis and the right half above.

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    points: &'a [[f64; 3]],
    order: Vec<u32>,
}

#[inline]
pub fn squared_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

impl<'a> KdTree<'a> {
    pub fn build(points: &'a [[f64; 3]]) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        build_range(points, &mut order, 0);
        Self { points, order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Index and squared distance of the nearest stored point, `None` when
    /// the tree is empty.
    pub fn nearest(&self, query: &[f64; 3]) -> Option<(usize, f64)> {
        if self.order.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(query, 0, self.order.len(), 0, &mut best);
        Some(best)
    }

    fn search(&self, q: &[f64; 3], lo: usize, hi: usize, depth: usize, best: &mut (usize, f64)) {
        if hi - lo <= LEAF_SIZE {
            for &idx in &self.order[lo..hi] {
                let d2 = squared_distance(q, &self.points[idx as usize]);
                if d2 < best.1 {
                    *best = (idx as usize, d2);
                }
            }
            return;
        }
        let axis = depth % 3;
        let mid = (lo + hi) / 2;
        let pivot = &self.points[self.order[mid] as usize];
        let d2 = squared_distance(q, pivot);
        if d2 < best.1 {
            *best = (self.order[mid] as usize, d2);
        }
        let delta = q[axis] - pivot[axis];
        let (near, far) = if delta < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, near.0, near.1, depth + 1, best);
        if delta * delta < best.1 {
            self.search(q, far.0, far.1, depth + 1, best);
        }
    }
}

fn build_range(points: &[[f64; 3]], order: &mut [u32], depth: usize) {
    if order.len() <= LEAF_SIZE {
        return;
    }
    let axis = depth % 3;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis].total_cmp(&points[b as usize][axis])
    });
    let (left, rest) = order.split_at_mut(mid);
    build_range(points, left, depth + 1);
    build_range(points, &mut rest[1..], depth + 1);
}
