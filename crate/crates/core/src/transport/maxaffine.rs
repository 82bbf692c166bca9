//! Max-affine functions `u(x) = max_i (x·s_i − o_i)` with a bounding-volume
//! hierarchy over the slopes.
//!
//! Each node stores the box of its slopes and an affine fit `o ≈ a + b·s` of
//! its offsets with one-sided error `e = max (a + b·s_i − o_i)`, so that for
//! every member `x·s_i − o_i <= max_{s ∈ box} (x − b)·s − a + e`. The bound is
//! convex in `x`, which lets a whole subtree be discarded against a convex
//! polygon by checking polygon vertices only.
//!
//! The same kernel builds Laguerre cells, sections `{u <= ℓ + h}`,
//! subdifferential cells of piecewise-linear functions and Voronoi cells.

use nalgebra::{Matrix3, Vector3};

use crate::geometry::polygon::TaggedPolygon;
use crate::Point;

const LEAF_SIZE: usize = 8;
const NONE: u32 = u32::MAX;

/// Traversal order for [`MaxAffine::clip_below_ordered`].
#[derive(Clone, Copy, Debug)]
pub enum ClipOrder {
    /// Most violated at this point first (use a point known to lie in the result).
    Point(Point),
    /// Slopes nearest to this one first (Laguerre cells).
    SlopeNear(Point),
}

#[derive(Clone, Debug)]
struct Node {
    lo: Point,
    hi: Point,
    a: f64,
    b: Point,
    e: f64,
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

impl Node {
    #[inline]
    fn bound(&self, x: Point) -> f64 {
        let dx = x.x - self.b.x;
        let dy = x.y - self.b.y;
        let sx = if dx > 0.0 { self.hi.x } else { self.lo.x };
        let sy = if dy > 0.0 { self.hi.y } else { self.lo.y };
        dx * sx + dy * sy - self.a + self.e
    }

    fn is_leaf(&self) -> bool {
        self.left == NONE
    }
}

/// Max-affine function with pruning hierarchy.
#[derive(Clone, Debug)]
pub struct MaxAffine {
    slopes: Vec<Point>,
    offsets: Vec<f64>,
    // hierarchy order
    order: Vec<u32>,
    s_ord: Vec<Point>,
    o_ord: Vec<f64>,
    nodes: Vec<Node>,
}

impl MaxAffine {
    /// # Panics
    /// If `slopes` is empty or the lengths differ.
    pub fn new(slopes: Vec<Point>, offsets: Vec<f64>) -> Self {
        assert!(!slopes.is_empty(), "max-affine function needs at least one piece");
        assert_eq!(slopes.len(), offsets.len());
        let n = slopes.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 2);
        build(&slopes, &mut order, 0, n, &mut nodes);
        let s_ord = order.iter().map(|&i| slopes[i as usize]).collect();
        let mut m = Self {
            slopes,
            offsets,
            order,
            s_ord,
            o_ord: Vec::new(),
            nodes,
        };
        m.refit();
        m
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn slopes(&self) -> &[Point] {
        &self.slopes
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Replace offsets, keeping the slope hierarchy.
    pub fn set_offsets(&mut self, offsets: &[f64]) {
        assert_eq!(offsets.len(), self.slopes.len());
        self.offsets.copy_from_slice(offsets);
        self.refit();
    }

    fn refit(&mut self) {
        self.o_ord = self.order.iter().map(|&i| self.offsets[i as usize]).collect();
        for node in self.nodes.iter_mut() {
            let s = &self.s_ord[node.start as usize..node.end as usize];
            let o = &self.o_ord[node.start as usize..node.end as usize];
            let (a, b) = affine_fit(s, o);
            let e = s
                .iter()
                .zip(o)
                .map(|(si, oi)| a + b.dot(si) - oi)
                .fold(f64::NEG_INFINITY, f64::max);
            node.a = a;
            node.b = b;
            node.e = e.max(0.0);
        }
    }

    /// Value of piece `i` at `x`.
    #[inline]
    pub fn piece(&self, i: usize, x: Point) -> f64 {
        x.dot(&self.slopes[i]) - self.offsets[i]
    }

    /// `(index, value)` of the maximizing piece; ties go to the lowest index.
    pub fn argmax(&self, x: Point) -> (usize, f64) {
        let mut best_val = f64::NEG_INFINITY;
        let mut best_idx = usize::MAX;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bound(x) < best_val {
                continue;
            }
            if node.is_leaf() {
                for k in node.start as usize..node.end as usize {
                    let v = x.dot(&self.s_ord[k]) - self.o_ord[k];
                    let idx = self.order[k] as usize;
                    if v > best_val || (v == best_val && idx < best_idx) {
                        best_val = v;
                        best_idx = idx;
                    }
                }
            } else {
                let (l, r) = (node.left, node.right);
                let bl = self.nodes[l as usize].bound(x);
                let br = self.nodes[r as usize].bound(x);
                if bl >= br {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        // recompute in canonical form so values agree with `piece`
        (best_idx, self.piece(best_idx, x))
    }

    pub fn value(&self, x: Point) -> f64 {
        self.argmax(x).1
    }

    /// Slope of the maximizing piece (the gradient where it is unique).
    pub fn gradient(&self, x: Point) -> Point {
        self.slopes[self.argmax(x).0]
    }

    /// Clip `poly` to `{x : x·s_i − o_i <= x·q − c for all i ≠ exclude}`.
    /// Edges created by piece `i` are tagged `i`. Returns `false` when the
    /// result is empty.
    ///
    /// Subtrees are visited nearest-first with respect to `order`; a good
    /// order shrinks the polygon early and makes later pruning effective.
    pub fn clip_below(&self, poly: &mut TaggedPolygon, q: Point, c: f64, exclude: Option<usize>) -> bool {
        let centre = if poly.is_empty() {
            Point::zeros()
        } else {
            poly.points.iter().fold(Point::zeros(), |s, p| s + p) / poly.points.len() as f64
        };
        self.clip_below_ordered(poly, q, c, exclude, ClipOrder::Point(centre))
    }

    pub fn clip_below_ordered(&self, poly: &mut TaggedPolygon, q: Point, c: f64, exclude: Option<usize>, order: ClipOrder) -> bool {
        if poly.is_empty() {
            return false;
        }
        let key = |n: &Node| -> f64 {
            match order {
                // larger is visited first
                ClipOrder::Point(x) => n.bound(x) - (x.dot(&q) - c),
                ClipOrder::SlopeNear(y) => {
                    let d = Point::new(
                        (n.lo.x - y.x).max(0.0).max(y.x - n.hi.x),
                        (n.lo.y - y.y).max(0.0).max(y.y - n.hi.y),
                    );
                    -d.norm_squared()
                }
            }
        };
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            let violated = poly
                .points
                .iter()
                .any(|v| node.bound(*v) - (v.dot(&q) - c) > 0.0);
            if !violated {
                continue;
            }
            if node.is_leaf() {
                for k in node.start as usize..node.end as usize {
                    let idx = self.order[k] as usize;
                    if Some(idx) == exclude {
                        continue;
                    }
                    let normal = self.s_ord[k] - q;
                    let offset = self.o_ord[k] - c;
                    if !poly.clip(normal, offset, idx as i64) {
                        return false;
                    }
                }
            } else {
                let (l, r) = (node.left, node.right);
                let kl = key(&self.nodes[l as usize]);
                let kr = key(&self.nodes[r as usize]);
                if kl >= kr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        !poly.is_empty()
    }

    /// Cell of piece `i` inside `region`: `{x ∈ region : piece i attains the max}`.
    pub fn cell(&self, i: usize, region: &TaggedPolygon) -> TaggedPolygon {
        let mut p = region.clone();
        self.clip_below_ordered(&mut p, self.slopes[i], self.offsets[i], Some(i), ClipOrder::SlopeNear(self.slopes[i]));
        p
    }
}

fn build(slopes: &[Point], order: &mut [u32], start: usize, end: usize, nodes: &mut Vec<Node>) -> u32 {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &i in &order[start..end] {
        let s = slopes[i as usize];
        lo = lo.inf(&s);
        hi = hi.sup(&s);
    }
    let id = nodes.len() as u32;
    nodes.push(Node {
        lo,
        hi,
        a: 0.0,
        b: Point::zeros(),
        e: 0.0,
        start: start as u32,
        end: end as u32,
        left: NONE,
        right: NONE,
    });
    if end - start > LEAF_SIZE {
        let axis = if hi.x - lo.x >= hi.y - lo.y { 0 } else { 1 };
        let mid = (start + end) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            slopes[a as usize][axis]
                .total_cmp(&slopes[b as usize][axis])
                .then(a.cmp(&b))
        });
        let l = build(slopes, order, start, mid, nodes);
        let r = build(slopes, order, mid, end, nodes);
        nodes[id as usize].left = l;
        nodes[id as usize].right = r;
    }
    id
}

/// Least-squares `o ≈ a + b·s`; falls back to a constant fit when the slopes
/// are degenerate.
fn affine_fit(s: &[Point], o: &[f64]) -> (f64, Point) {
    let n = s.len() as f64;
    let sm = s.iter().fold(Point::zeros(), |acc, p| acc + p) / n;
    let om = o.iter().sum::<f64>() / n;
    if s.len() < 3 {
        return (om, Point::zeros());
    }
    let mut m = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (si, oi) in s.iter().zip(o) {
        let d = si - sm;
        let row = Vector3::new(1.0, d.x, d.y);
        m += row * row.transpose();
        rhs += row * (oi - om);
    }
    match m.cholesky() {
        Some(ch) => {
            let sol = ch.solve(&rhs);
            let b = Point::new(sol[1], sol[2]);
            if !(b.x.is_finite() && b.y.is_finite()) {
                return (om, Point::zeros());
            }
            (om + sol[0] - b.dot(&sm), b)
        }
        None => (om, Point::zeros()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon::{ConvexPolygon, BOUNDARY_TAG};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ma(n: usize, seed: u64) -> MaxAffine {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<Point> = (0..n).map(|_| Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let o: Vec<f64> = s.iter().map(|p| 0.5 * p.norm_squared() + rng.gen_range(-0.01..0.01)).collect();
        MaxAffine::new(s, o)
    }

    #[test]
    fn argmax_matches_brute_force() {
        let ma = random_ma(500, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let x = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let (i, v) = ma.argmax(x);
            let (mut bi, mut bv) = (0, f64::NEG_INFINITY);
            for k in 0..ma.len() {
                let val = ma.piece(k, x);
                if val > bv {
                    bv = val;
                    bi = k;
                }
            }
            assert_eq!(i, bi);
            assert_eq!(v, bv);
        }
    }

    #[test]
    fn cells_partition_the_square() {
        let ma = random_ma(300, 3);
        let sq = ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
        let region = TaggedPolygon::from_polygon(&sq, BOUNDARY_TAG);
        let total: f64 = (0..ma.len()).map(|i| ma.cell(i, &region).area()).sum();
        assert!((total - 4.0).abs() < 1e-10, "{total}");
        // cell membership agrees with argmax at centroids
        for i in 0..ma.len() {
            let c = ma.cell(i, &region);
            if c.area() > 1e-8 {
                assert_eq!(ma.argmax(c.centroid()).0, i);
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let ma = MaxAffine::new(vec![Point::new(1.0, 0.0), Point::new(-1.0, 0.0)], vec![0.0, 0.0]);
        assert_eq!(ma.argmax(Point::zeros()).0, 0);
    }

    #[test]
    fn refit_after_offset_change() {
        let mut ma = random_ma(200, 5);
        let new: Vec<f64> = ma.offsets().iter().map(|o| -o).collect();
        ma.set_offsets(&new);
        let x = Point::new(0.3, -0.2);
        let brute = (0..ma.len()).map(|k| ma.piece(k, x)).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(ma.value(x), brute);
    }
}
