//! Convex polygons and half-plane clipping.
//!
//! Polygons are stored as counter-clockwise vertex lists. Clipping keeps an
//! optional tag per edge so that callers building power diagrams can tell
//! which constraint produced each edge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Point;

/// Tag for edges that come from the clipping domain rather than a site.
pub const BOUNDARY_TAG: i64 = -1;

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Closed half-plane `normal · x <= offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: Point, offset: f64) -> Self {
        Self { normal, offset }
    }

    #[inline]
    pub fn signed(&self, x: Point) -> f64 {
        self.normal.dot(&x) - self.offset
    }

    pub fn contains(&self, x: Point) -> bool {
        self.signed(x) <= 0.0
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl TryFrom<Vec<[f64; 2]>> for ConvexPolygon {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        ConvexPolygon::new(v.into_iter().map(|p| Point::new(p[0], p[1])).collect())
    }
}

impl From<ConvexPolygon> for Vec<[f64; 2]> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices.iter().map(|v| [v.x, v.y]).collect()
    }
}

impl ConvexPolygon {
    /// Validating constructor: at least three vertices, counter-clockwise,
    /// convex up to `1e-12 * diameter²`, positive area.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidSpec(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidSpec("non-finite polygon vertex".into()));
        }
        let poly = Self { vertices };
        let d = poly.diameter();
        let tol = 1e-12 * d * d;
        let n = poly.vertices.len();
        for k in 0..n {
            let a = poly.vertices[k];
            let b = poly.vertices[(k + 1) % n];
            let c = poly.vertices[(k + 2) % n];
            if cross(b - a, c - b) < -tol {
                return Err(Error::InvalidSpec(format!(
                    "polygon is not convex counter-clockwise at vertex {}",
                    (k + 1) % n
                )));
            }
        }
        if poly.area() <= 0.0 {
            return Err(Error::InvalidSpec("polygon has non-positive area".into()));
        }
        Ok(poly)
    }

    /// Trusted constructor for internally produced vertex lists.
    pub(crate) fn from_raw(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    /// Axis-aligned box `[lo.x, hi.x] × [lo.y, hi.y]`.
    pub fn from_box(lo: Point, hi: Point) -> Self {
        Self::from_raw(vec![
            lo,
            Point::new(hi.x, lo.y),
            hi,
            Point::new(lo.x, hi.y),
        ])
    }

    /// Regular `n`-gon inscribed in the circle of the given radius.
    pub fn regular(n: usize, radius: f64, center: Point) -> Self {
        let verts = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                center + radius * Point::new(t.cos(), t.sin())
            })
            .collect();
        Self::from_raw(verts)
    }

    /// Convex hull (Andrew's monotone chain). Returns `None` for degenerate input.
    pub fn hull(points: &[Point]) -> Option<Self> {
        let mut pts: Vec<Point> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() < 3 {
            return None;
        }
        let mut lower: Vec<Point> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2
                && cross(lower[lower.len() - 1] - lower[lower.len() - 2], p - lower[lower.len() - 1]) <= 0.0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2
                && cross(upper[upper.len() - 1] - upper[upper.len() - 2], p - upper[upper.len() - 1]) <= 0.0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() < 3 {
            return None;
        }
        let poly = Self::from_raw(lower);
        (poly.area() > 0.0).then_some(poly)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Iterator over directed edges `(start, end)`.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        centroid_of(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d2: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d2 = d2.max((v[i] - v[j]).norm_squared());
            }
        }
        d2.sqrt()
    }

    /// `(lo, hi)` corners of the bounding box.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Support function `max_v v · dir`.
    pub fn support(&self, dir: Point) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(&dir))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Edge half-planes, outward normals of unit length.
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        self.edges()
            .filter_map(|(a, b)| {
                let t = b - a;
                let len = t.norm();
                (len > 0.0).then(|| {
                    let n = Point::new(t.y, -t.x) / len;
                    HalfPlane::new(n, n.dot(&a))
                })
            })
            .collect()
    }

    /// Point membership with an absolute slack.
    pub fn contains_with(&self, x: Point, slack: f64) -> bool {
        self.edges().all(|(a, b)| {
            let t = b - a;
            let len = t.norm();
            len == 0.0 || cross(t, x - a) / len >= -slack
        })
    }

    pub fn contains(&self, x: Point) -> bool {
        self.contains_with(x, 0.0)
    }

    /// Signed distance to the boundary, positive inside.
    pub fn inner_distance(&self, x: Point) -> f64 {
        self.edges()
            .filter_map(|(a, b)| {
                let t = b - a;
                let len = t.norm();
                (len > 0.0).then(|| cross(t, x - a) / len)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `other` lies inside `self` up to `slack` (vertex test, valid for convex sets).
    pub fn contains_polygon(&self, other: &ConvexPolygon, slack: f64) -> bool {
        other.vertices.iter().all(|&v| self.contains_with(v, slack))
    }

    pub fn map<F: Fn(Point) -> Point>(&self, f: F) -> ConvexPolygon {
        let mut verts: Vec<Point> = self.vertices.iter().map(|&v| f(v)).collect();
        if signed_area(&verts) < 0.0 {
            verts.reverse();
        }
        ConvexPolygon::from_raw(verts)
    }

    pub fn translated(&self, d: Point) -> ConvexPolygon {
        self.map(|v| v + d)
    }

    pub fn clip_half_plane(&self, hp: &HalfPlane) -> Option<ConvexPolygon> {
        let mut t = TaggedPolygon::from_polygon(self, BOUNDARY_TAG);
        if t.clip(hp.normal, hp.offset, BOUNDARY_TAG) {
            Some(t.into_polygon())
        } else {
            None
        }
    }

    /// Intersection with another convex polygon; `None` when empty.
    pub fn intersect(&self, other: &ConvexPolygon) -> Option<ConvexPolygon> {
        let mut t = TaggedPolygon::from_polygon(self, BOUNDARY_TAG);
        for hp in other.half_planes() {
            if !t.clip(hp.normal, hp.offset, BOUNDARY_TAG) {
                return None;
            }
        }
        Some(t.into_polygon())
    }

    /// Boundary points: every vertex plus `per_edge` interior samples per edge.
    pub fn boundary_samples(&self, per_edge: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.len() * (per_edge + 1));
        for (a, b) in self.edges() {
            out.push(a);
            for k in 1..=per_edge {
                let t = k as f64 / (per_edge + 1) as f64;
                out.push(a + t * (b - a));
            }
        }
        out
    }

    /// Second moment about the centroid, `∫ (x-c)(x-c)ᵀ / area`.
    pub fn covariance(&self) -> nalgebra::Matrix2<f64> {
        let c = self.centroid();
        let n = self.vertices.len();
        let mut m = nalgebra::Matrix2::zeros();
        let mut area = 0.0;
        for k in 0..n {
            let a = self.vertices[k] - c;
            let b = self.vertices[(k + 1) % n] - c;
            // triangle (0, a, b)
            let t = 0.5 * cross(a, b);
            area += t;
            let s = a * a.transpose() + b * b.transpose() + 0.5 * (a * b.transpose() + b * a.transpose());
            m += s * (t / 6.0);
        }
        if area > 0.0 {
            m / area
        } else {
            m
        }
    }
}

/// Operand accepted by [`clip`].
#[derive(Clone, Debug)]
pub enum ClipOperand<'a> {
    Polygon(&'a ConvexPolygon),
    HalfPlane(HalfPlane),
}

/// Intersection of a convex polygon with a polygon or a half-plane.
pub fn clip(a: &ConvexPolygon, b: ClipOperand<'_>) -> Option<ConvexPolygon> {
    match b {
        ClipOperand::Polygon(p) => a.intersect(p),
        ClipOperand::HalfPlane(h) => a.clip_half_plane(&h),
    }
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..n {
        s += cross(v[k], v[(k + 1) % n]);
    }
    0.5 * s
}

pub(crate) fn centroid_of(v: &[Point]) -> Point {
    let n = v.len();
    if n == 0 {
        return Point::zeros();
    }
    let o = v[0];
    let mut a = 0.0;
    let mut c = Point::zeros();
    for k in 1..n.saturating_sub(1) {
        let p = v[k] - o;
        let q = v[k + 1] - o;
        let t = cross(p, q);
        a += t;
        c += t * (p + q);
    }
    if a.abs() <= f64::MIN_POSITIVE {
        return v.iter().fold(Point::zeros(), |s, p| s + p) / n as f64;
    }
    o + c / (3.0 * a)
}

/// Convex polygon whose edges carry an integer tag (edge `k` runs from
/// vertex `k` to vertex `k + 1`).
#[derive(Clone, Debug, Default)]
pub struct TaggedPolygon {
    pub points: Vec<Point>,
    pub tags: Vec<i64>,
}

impl TaggedPolygon {
    pub fn from_polygon(p: &ConvexPolygon, tag: i64) -> Self {
        Self {
            points: p.vertices.clone(),
            tags: vec![tag; p.vertices.len()],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() < 3
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn centroid(&self) -> Point {
        centroid_of(&self.points)
    }

    pub fn into_polygon(self) -> ConvexPolygon {
        ConvexPolygon::from_raw(self.points)
    }

    pub fn to_polygon(&self) -> ConvexPolygon {
        ConvexPolygon::from_raw(self.points.clone())
    }

    /// Edges as `(start, end, tag)`.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point, i64)> + '_ {
        let n = self.points.len();
        (0..n).map(move |k| (self.points[k], self.points[(k + 1) % n], self.tags[k]))
    }

    /// Clip by `normal · x <= offset`; the new edge gets `tag`.
    /// Returns `false` when the result is empty.
    pub fn clip(&mut self, normal: Point, offset: f64, tag: i64) -> bool {
        let n = self.points.len();
        if n < 3 {
            return false;
        }
        let nn = normal.norm_squared();
        if nn == 0.0 {
            if offset < 0.0 {
                self.points.clear();
                self.tags.clear();
                return false;
            }
            return true;
        }
        let mut any_out = false;
        let mut any_in = false;
        let mut dist = [0.0f64; 64];
        let mut heap_dist;
        let d: &mut [f64] = if n <= 64 {
            &mut dist[..n]
        } else {
            heap_dist = vec![0.0; n];
            &mut heap_dist[..]
        };
        for k in 0..n {
            let s = normal.dot(&self.points[k]) - offset;
            d[k] = s;
            if s > 0.0 {
                any_out = true;
            } else {
                any_in = true;
            }
        }
        if !any_out {
            return true;
        }
        if !any_in {
            self.points.clear();
            self.tags.clear();
            return false;
        }
        let mut pts = Vec::with_capacity(n + 1);
        let mut tags = Vec::with_capacity(n + 1);
        for k in 0..n {
            let j = (k + 1) % n;
            let (p, q) = (self.points[k], self.points[j]);
            let (dp, dq) = (d[k], d[j]);
            let inside_p = dp <= 0.0;
            let inside_q = dq <= 0.0;
            if inside_p {
                pts.push(p);
                tags.push(self.tags[k]);
                if !inside_q {
                    let t = dp / (dp - dq);
                    pts.push(p + t * (q - p));
                    tags.push(tag);
                }
            } else if inside_q {
                let t = dp / (dp - dq);
                pts.push(p + t * (q - p));
                tags.push(self.tags[k]);
            }
        }
        self.points = pts;
        self.tags = tags;
        self.dedup();
        self.points.len() >= 3
    }

    fn dedup(&mut self) {
        let n = self.points.len();
        if n < 2 {
            return;
        }
        let scale = self
            .points
            .iter()
            .fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
            .max(1e-300);
        let eps2 = (1e-14 * scale).powi(2);
        let mut pts = Vec::with_capacity(n);
        let mut tags = Vec::with_capacity(n);
        for k in 0..n {
            let next = self.points[(k + 1) % n];
            if (next - self.points[k]).norm_squared() <= eps2 {
                continue;
            }
            pts.push(self.points[k]);
            tags.push(self.tags[k]);
        }
        if pts.len() < 3 || signed_area(&pts) <= 0.0 {
            pts.clear();
            tags.clear();
        }
        self.points = pts;
        self.tags = tags;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(a: f64) -> ConvexPolygon {
        ConvexPolygon::from_box(Point::new(-a, -a), Point::new(a, a))
    }

    #[test]
    fn square_half_plane() {
        let s = square(1.0);
        let right = clip(&s, ClipOperand::HalfPlane(HalfPlane::new(Point::new(-1.0, 0.0), 0.0))).unwrap();
        assert!((right.area() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn disjoint_and_overlap() {
        let a = square(1.0);
        let far = a.translated(Point::new(5.0, 0.0));
        assert!(clip(&a, ClipOperand::Polygon(&far)).is_none());
        let b = ConvexPolygon::from_box(Point::new(0.0, 0.0), Point::new(2.0, 2.0));
        let c = clip(&a, ClipOperand::Polygon(&b)).unwrap();
        assert!((c.area() - 1.0).abs() < 1e-14);
        assert!((c.centroid() - Point::new(0.5, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn rejects_clockwise_and_nonconvex() {
        let cw = vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        assert!(ConvexPolygon::new(cw).is_err());
        let dart = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 0.3),
            Point::new(1.0, 2.0),
        ];
        assert!(ConvexPolygon::new(dart).is_err());
    }

    #[test]
    fn tags_follow_edges() {
        let mut t = TaggedPolygon::from_polygon(&square(1.0), BOUNDARY_TAG);
        assert!(t.clip(Point::new(1.0, 0.0), 0.0, 7));
        let tagged: Vec<_> = t.edges().filter(|e| e.2 == 7).collect();
        assert_eq!(tagged.len(), 1);
        let (a, b, _) = tagged[0];
        assert!(a.x.abs() < 1e-15 && b.x.abs() < 1e-15);
        assert!(((b - a).norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn covariance_of_square() {
        let c = square(1.0).covariance();
        assert!((c[(0, 0)] - 1.0 / 3.0).abs() < 1e-14);
        assert!(c[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn hull_drops_interior_points() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, 0.5),
        ];
        let h = ConvexPolygon::hull(&pts).unwrap();
        assert_eq!(h.len(), 4);
        assert!((h.area() - 1.0).abs() < 1e-15);
    }
}
