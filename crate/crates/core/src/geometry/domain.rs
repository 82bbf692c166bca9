//! Convex planar domains with `C^{1,1}` boundary, represented exactly as
//! closed splines of line segments and circular arcs.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::polygon::{cross, ConvexPolygon};
use crate::error::{Error, Result};
use crate::Point;

/// JSON-facing description of a domain, `{"kind": ..., params...}`.
///
/// All shapes are centred at the origin; use [`ConvexDomain::transformed`]
/// to move them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainDescriptor {
    Square {
        side: f64,
        #[serde(default)]
        corner_radius: f64,
    },
    Rectangle {
        a: f64,
        b: f64,
        #[serde(default)]
        corner_radius: f64,
    },
    Disk {
        radius: f64,
    },
    RoundedPolygon {
        vertices: Vec<[f64; 2]>,
        corner_radius: f64,
    },
    Superellipse {
        a: f64,
        b: f64,
        power: f64,
    },
}

impl DomainDescriptor {
    pub fn label(&self) -> String {
        match self {
            DomainDescriptor::Square { side, corner_radius } => {
                format!("square(side={side}, r={corner_radius})")
            }
            DomainDescriptor::Rectangle { a, b, corner_radius } => {
                format!("rectangle({a}x{b}, r={corner_radius})")
            }
            DomainDescriptor::Disk { radius } => format!("disk(R={radius})"),
            DomainDescriptor::RoundedPolygon { vertices, corner_radius } => {
                format!("rounded_polygon(n={}, r={corner_radius})", vertices.len())
            }
            DomainDescriptor::Superellipse { a, b, power } => {
                format!("superellipse({a}, {b}, p={power})")
            }
        }
    }
}

/// One piece of the boundary spline, traversed counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundaryPiece {
    Segment { start: [f64; 2], end: [f64; 2] },
    /// Counter-clockwise arc, `sweep > 0`.
    Arc {
        center: [f64; 2],
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

fn p(a: [f64; 2]) -> Point {
    Point::new(a[0], a[1])
}

fn arr(x: Point) -> [f64; 2] {
    [x.x, x.y]
}

impl BoundaryPiece {
    pub fn length(&self) -> f64 {
        match *self {
            BoundaryPiece::Segment { start, end } => (p(end) - p(start)).norm(),
            BoundaryPiece::Arc { radius, sweep, .. } => radius * sweep,
        }
    }

    pub fn start(&self) -> Point {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point {
        self.point_at(self.length())
    }

    /// Point at arclength `t` from the start of the piece.
    pub fn point_at(&self, t: f64) -> Point {
        match *self {
            BoundaryPiece::Segment { start, end } => {
                let (a, b) = (p(start), p(end));
                let len = (b - a).norm();
                if len == 0.0 {
                    a
                } else {
                    a + (t / len) * (b - a)
                }
            }
            BoundaryPiece::Arc { center, radius, start_angle, .. } => {
                let th = start_angle + t / radius;
                p(center) + radius * Point::new(th.cos(), th.sin())
            }
        }
    }

    /// Unit tangent at arclength `t`.
    pub fn tangent_at(&self, t: f64) -> Point {
        match *self {
            BoundaryPiece::Segment { start, end } => (p(end) - p(start)).normalize(),
            BoundaryPiece::Arc { radius, start_angle, .. } => {
                let th = start_angle + t / radius;
                Point::new(-th.sin(), th.cos())
            }
        }
    }

    /// Nearest point on the piece: `(arclength parameter, point)`.
    pub fn nearest(&self, x: Point) -> (f64, Point) {
        match *self {
            BoundaryPiece::Segment { start, end } => {
                let (a, b) = (p(start), p(end));
                let d = b - a;
                let l2 = d.norm_squared();
                if l2 == 0.0 {
                    return (0.0, a);
                }
                let s = ((x - a).dot(&d) / l2).clamp(0.0, 1.0);
                (s * l2.sqrt(), a + s * d)
            }
            BoundaryPiece::Arc { center, radius, start_angle, sweep } => {
                let c = p(center);
                let r = x - c;
                let rel = if r.norm_squared() == 0.0 {
                    0.0
                } else {
                    (r.y.atan2(r.x) - start_angle).rem_euclid(TAU)
                };
                let t = if rel <= sweep {
                    rel * radius
                } else {
                    // outside the angular range: pick the closer endpoint
                    let e0 = self.point_at(0.0);
                    let e1 = self.point_at(sweep * radius);
                    if (x - e0).norm_squared() <= (x - e1).norm_squared() {
                        0.0
                    } else {
                        sweep * radius
                    }
                };
                (t, self.point_at(t))
            }
        }
    }

    fn rotated(&self, angle: f64, shift: Point) -> BoundaryPiece {
        let rot = nalgebra::Rotation2::new(angle);
        match *self {
            BoundaryPiece::Segment { start, end } => BoundaryPiece::Segment {
                start: arr(rot * p(start) + shift),
                end: arr(rot * p(end) + shift),
            },
            BoundaryPiece::Arc { center, radius, start_angle, sweep } => BoundaryPiece::Arc {
                center: arr(rot * p(center) + shift),
                radius,
                start_angle: start_angle + angle,
                sweep,
            },
        }
    }

    /// Contribution to `(∮ x dy - y dx)/2, ∮ x²/2 dy, -∮ y²/2 dx)`.
    fn moments(&self) -> (f64, f64, f64) {
        match *self {
            BoundaryPiece::Segment { start, end } => {
                let (a, b) = (p(start), p(end));
                let area = 0.5 * cross(a, b);
                let dy = b.y - a.y;
                let dx = b.x - a.x;
                let mx = dy * (a.x * a.x + a.x * b.x + b.x * b.x) / 6.0;
                let my = -dx * (a.y * a.y + a.y * b.y + b.y * b.y) / 6.0;
                (area, mx, my)
            }
            BoundaryPiece::Arc { center, radius, start_angle, sweep } => {
                // Gauss-Legendre on sub-arcs of at most π/8.
                let parts = ((sweep / (PI / 8.0)).ceil() as usize).max(1);
                let h = sweep / parts as f64;
                let c = p(center);
                let (mut a, mut mx, mut my) = (0.0, 0.0, 0.0);
                for k in 0..parts {
                    let t0 = start_angle + k as f64 * h;
                    for (&xi, &w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
                        let th = t0 + 0.5 * h * (xi + 1.0);
                        let (s, co) = th.sin_cos();
                        let x = c.x + radius * co;
                        let y = c.y + radius * s;
                        let dx = -radius * s;
                        let dy = radius * co;
                        let ww = 0.5 * h * w;
                        a += ww * 0.5 * (x * dy - y * dx);
                        mx += ww * 0.5 * x * x * dy;
                        my -= ww * 0.5 * y * y * dx;
                    }
                }
                (a, mx, my)
            }
        }
    }
}

const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Default number of polygon segments per full turn of arc.
pub const DEFAULT_ARC_RESOLUTION: usize = 256;

/// A point on the boundary returned by [`ConvexDomain::project`].
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPoint {
    /// Arclength fraction in `[0, 1)`.
    pub s: f64,
    pub point: Point,
    pub distance: f64,
    pub piece: usize,
}

/// Convex domain bounded by a closed counter-clockwise segment/arc spline.
#[derive(Clone, Debug)]
pub struct ConvexDomain {
    pieces: Vec<BoundaryPiece>,
    offsets: Vec<f64>,
    perimeter: f64,
    r_min: f64,
    area: f64,
    centroid: Point,
    label: String,
    corners: Vec<usize>,
    polygon: ConvexPolygon,
}

impl ConvexDomain {
    /// Build from pieces, checking closure, convexity and tangent continuity.
    /// Tangent jumps are admitted only when `allow_corners` is set.
    pub fn from_pieces(pieces: Vec<BoundaryPiece>, label: impl Into<String>, allow_corners: bool) -> Result<Self> {
        Self::from_pieces_with(pieces, label, allow_corners, DEFAULT_ARC_RESOLUTION)
    }

    pub fn from_pieces_with(
        pieces: Vec<BoundaryPiece>,
        label: impl Into<String>,
        allow_corners: bool,
        arc_resolution: usize,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidSpec("domain has no boundary pieces".into()));
        }
        let mut offsets = Vec::with_capacity(pieces.len() + 1);
        let mut acc = 0.0;
        for pc in &pieces {
            offsets.push(acc);
            acc += pc.length();
        }
        offsets.push(acc);
        let perimeter = acc;
        if !(perimeter > 0.0) {
            return Err(Error::InvalidSpec("domain has zero perimeter".into()));
        }

        let mut r_min = f64::INFINITY;
        let mut corners = Vec::new();
        let mut turning = 0.0;
        let diam_scale = perimeter / PI;
        let n = pieces.len();
        for k in 0..n {
            let a = &pieces[k];
            let b = &pieces[(k + 1) % n];
            if (a.end() - b.start()).norm() > 1e-12 * diam_scale.max(1.0) {
                return Err(Error::InvalidSpec(format!("boundary not closed between pieces {k} and {}", (k + 1) % n)));
            }
            if let BoundaryPiece::Arc { radius, sweep, .. } = *a {
                if !(radius > 0.0) || !(sweep > 0.0) {
                    return Err(Error::InvalidSpec("arc with non-positive radius or sweep".into()));
                }
                r_min = r_min.min(radius);
                turning += sweep;
            }
            let t_in = a.tangent_at(a.length());
            let t_out = b.tangent_at(0.0);
            let jump = cross(t_in, t_out).atan2(t_in.dot(&t_out));
            if jump < -1e-9 {
                return Err(Error::InvalidSpec(format!("boundary turns clockwise at junction {}", (k + 1) % n)));
            }
            if jump > 1e-9 {
                if !allow_corners {
                    return Err(Error::InvalidSpec(format!(
                        "tangent jump {jump:.3e} at junction {} (boundary not C^1,1)",
                        (k + 1) % n
                    )));
                }
                corners.push((k + 1) % n);
            }
            turning += jump.max(0.0);
        }
        if (turning - TAU).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!("total turning {turning} differs from 2π")));
        }
        if !corners.is_empty() {
            r_min = 0.0;
        }

        let (mut area, mut mx, mut my) = (0.0, 0.0, 0.0);
        for pc in &pieces {
            let (a, x, y) = pc.moments();
            area += a;
            mx += x;
            my += y;
        }
        if !(area > 0.0) {
            return Err(Error::InvalidSpec("domain has non-positive area".into()));
        }
        let centroid = Point::new(mx / area, my / area);
        let polygon = polygonize(&pieces, arc_resolution)?;
        Ok(Self {
            pieces,
            offsets,
            perimeter,
            r_min,
            area,
            centroid,
            label: label.into(),
            corners,
            polygon,
        })
    }

    pub fn pieces(&self) -> &[BoundaryPiece] {
        &self.pieces
    }
    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }
    /// Smallest arc radius; `0` for corner domains, `∞` for polygons without arcs.
    pub fn r_min(&self) -> f64 {
        self.r_min
    }
    pub fn area(&self) -> f64 {
        self.area
    }
    pub fn centroid(&self) -> Point {
        self.centroid
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    /// `true` when the boundary has unsmoothed corners (admitted as a limit case).
    pub fn is_corner_domain(&self) -> bool {
        !self.corners.is_empty()
    }
    /// Polygonization used by all discrete computations.
    pub fn polygon(&self) -> &ConvexPolygon {
        &self.polygon
    }
    pub fn diameter(&self) -> f64 {
        self.polygon.diameter()
    }

    /// Corner locations as `(arclength fraction, point)`.
    pub fn corners(&self) -> Vec<(f64, Point)> {
        self.corners
            .iter()
            .map(|&k| (self.offsets[k] / self.perimeter, self.pieces[k].start()))
            .collect()
    }

    pub fn near_corner(&self, x: Point, radius: f64) -> bool {
        self.corners
            .iter()
            .any(|&k| (self.pieces[k].start() - x).norm() < radius)
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let t = s.rem_euclid(1.0) * self.perimeter;
        let k = match self.offsets.binary_search_by(|o| o.total_cmp(&t)) {
            Ok(i) => i.min(self.pieces.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.pieces.len() - 1),
        };
        (k, t - self.offsets[k])
    }

    /// Boundary point at arclength fraction `s`.
    pub fn point_at(&self, s: f64) -> Point {
        let (k, t) = self.locate(s);
        self.pieces[k].point_at(t)
    }

    /// Unit inner normal at arclength fraction `s ∈ [0, 1)`.
    pub fn inner_normal(&self, s: f64) -> Result<Point> {
        let (k, t) = self.locate(s);
        let eps = 1e-12 * self.perimeter;
        let n = self.pieces.len();
        let at_start = t <= eps;
        let at_end = self.pieces[k].length() - t <= eps;
        let junction = if at_start {
            Some(k)
        } else if at_end {
            Some((k + 1) % n)
        } else {
            None
        };
        if let Some(j) = junction {
            if self.corners.contains(&j) {
                let prev = &self.pieces[(j + n - 1) % n];
                let next = &self.pieces[j];
                let a = left_normal(prev.tangent_at(prev.length()));
                let b = left_normal(next.tangent_at(0.0));
                let at = next.start();
                return Err(Error::AmbiguousNormal {
                    at: [at.x, at.y],
                    extremes: [[a.x, a.y], [b.x, b.y]],
                });
            }
        }
        Ok(left_normal(self.pieces[k].tangent_at(t)))
    }

    /// Nearest boundary point.
    pub fn project(&self, x: Point) -> BoundaryPoint {
        let mut best = BoundaryPoint {
            s: 0.0,
            point: self.pieces[0].start(),
            distance: f64::INFINITY,
            piece: 0,
        };
        for (k, pc) in self.pieces.iter().enumerate() {
            let (t, q) = pc.nearest(x);
            let d = (q - x).norm();
            if d < best.distance {
                best = BoundaryPoint {
                    s: ((self.offsets[k] + t) / self.perimeter).rem_euclid(1.0),
                    point: q,
                    distance: d,
                    piece: k,
                };
            }
        }
        best
    }

    /// Inner normal at the boundary point nearest to `x`. At a corner the
    /// bisector of the normal cone is returned.
    pub fn inner_normal_near(&self, x: Point) -> Point {
        let bp = self.project(x);
        match self.inner_normal(bp.s) {
            Ok(n) => n,
            Err(Error::AmbiguousNormal { extremes, .. }) => {
                (Point::new(extremes[0][0] + extremes[1][0], extremes[0][1] + extremes[1][1])).normalize()
            }
            Err(_) => unreachable!("inner_normal only fails at corners"),
        }
    }

    /// Distance to the boundary (exact spline distance).
    pub fn boundary_distance(&self, x: Point) -> f64 {
        self.project(x).distance
    }

    pub fn contains(&self, x: Point) -> bool {
        self.polygon.contains(x)
    }

    /// Rigid motion: rotate by `angle` about the origin, then translate.
    pub fn transformed(&self, angle: f64, shift: Point) -> ConvexDomain {
        let pieces: Vec<BoundaryPiece> = self.pieces.iter().map(|pc| pc.rotated(angle, shift)).collect();
        let rot = nalgebra::Rotation2::new(angle);
        let polygon = self.polygon.map(|v| rot * v + shift);
        ConvexDomain {
            pieces,
            offsets: self.offsets.clone(),
            perimeter: self.perimeter,
            r_min: self.r_min,
            area: self.area,
            centroid: rot * self.centroid + shift,
            label: self.label.clone(),
            corners: self.corners.clone(),
            polygon,
        }
    }
}

#[inline]
pub(crate) fn left_normal(t: Point) -> Point {
    Point::new(-t.y, t.x)
}

fn polygonize(pieces: &[BoundaryPiece], arc_resolution: usize) -> Result<ConvexPolygon> {
    let mut pts: Vec<Point> = Vec::new();
    for pc in pieces {
        match *pc {
            BoundaryPiece::Segment { start, .. } => pts.push(p(start)),
            BoundaryPiece::Arc { center, radius, start_angle, sweep } => {
                let m = ((sweep / TAU) * arc_resolution as f64).ceil().max(1.0) as usize;
                for j in 0..m {
                    let th = start_angle + sweep * j as f64 / m as f64;
                    pts.push(p(center) + radius * Point::new(th.cos(), th.sin()));
                }
            }
        }
    }
    let scale = pts.iter().fold(0.0f64, |m, q| m.max(q.norm())).max(1e-300);
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for q in pts {
        if out.last().is_none_or(|l: &Point| (q - l).norm() > 1e-12 * scale) {
            out.push(q);
        }
    }
    while out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= 1e-12 * scale {
        out.pop();
    }
    ConvexPolygon::new(out)
}

/// Fillet every corner of a convex CCW polygon with a circular arc of the
/// given radius (per vertex). A zero radius leaves a corner.
pub fn rounded_polygon_pieces(vertices: &[Point], radii: &[f64]) -> Result<Vec<BoundaryPiece>> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::InvalidSpec("rounded polygon needs at least 3 vertices".into()));
    }
    let mut tin = vec![Point::zeros(); n];
    let mut tout = vec![Point::zeros(); n];
    let mut arcs: Vec<Option<BoundaryPiece>> = vec![None; n];
    let mut tangent_len = vec![0.0; n];
    for k in 0..n {
        let prev = vertices[(k + n - 1) % n];
        let cur = vertices[k];
        let next = vertices[(k + 1) % n];
        let d_in = cur - prev;
        let d_out = next - cur;
        if d_in.norm() == 0.0 || d_out.norm() == 0.0 {
            return Err(Error::InvalidSpec("repeated polygon vertex".into()));
        }
        let d_in = d_in.normalize();
        let d_out = d_out.normalize();
        let theta = cross(d_in, d_out).atan2(d_in.dot(&d_out));
        if theta < -1e-12 {
            return Err(Error::InvalidSpec(format!("vertex list is not convex counter-clockwise at vertex {k}")));
        }
        let r = radii[k];
        if r < 0.0 {
            return Err(Error::InvalidSpec("negative corner radius".into()));
        }
        if r == 0.0 || theta <= 1e-12 {
            tin[k] = cur;
            tout[k] = cur;
            continue;
        }
        let tl = r * (0.5 * theta).tan();
        tangent_len[k] = tl;
        tin[k] = cur - tl * d_in;
        tout[k] = cur + tl * d_out;
        let center = tin[k] + r * left_normal(d_in);
        let a0 = (tin[k] - center).y.atan2((tin[k] - center).x);
        arcs[k] = Some(BoundaryPiece::Arc {
            center: arr(center),
            radius: r,
            start_angle: a0,
            sweep: theta,
        });
    }
    for k in 0..n {
        let len = (vertices[(k + 1) % n] - vertices[k]).norm();
        if tangent_len[k] + tangent_len[(k + 1) % n] > len * (1.0 + 1e-12) {
            return Err(Error::InvalidSpec(format!("rounding arcs overlap on edge {k}")));
        }
    }
    let mut pieces = Vec::with_capacity(2 * n);
    for k in 0..n {
        let a = tout[(k + n - 1) % n];
        let b = tin[k];
        if (b - a).norm() > 1e-14 * (1.0 + a.norm()) {
            pieces.push(BoundaryPiece::Segment { start: arr(a), end: arr(b) });
        }
        if let Some(arc) = arcs[k] {
            pieces.push(arc);
        }
    }
    Ok(pieces)
}

/// Instantiate a domain from its descriptor.
pub fn make_domain(desc: &DomainDescriptor) -> Result<ConvexDomain> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")))
        }
    };
    let label = desc.label();
    match desc {
        DomainDescriptor::Square { side, corner_radius } => {
            positive("side", *side)?;
            rect_domain(*side, *side, *corner_radius, label)
        }
        DomainDescriptor::Rectangle { a, b, corner_radius } => {
            positive("a", *a)?;
            positive("b", *b)?;
            rect_domain(*a, *b, *corner_radius, label)
        }
        DomainDescriptor::Disk { radius } => {
            positive("radius", *radius)?;
            let arc = BoundaryPiece::Arc {
                center: [0.0, 0.0],
                radius: *radius,
                start_angle: 0.0,
                sweep: TAU,
            };
            ConvexDomain::from_pieces(vec![arc], label, false)
        }
        DomainDescriptor::RoundedPolygon { vertices, corner_radius } => {
            if *corner_radius < 0.0 {
                return Err(Error::InvalidSpec("corner radius must be non-negative".into()));
            }
            let v: Vec<Point> = vertices.iter().map(|q| p(*q)).collect();
            let pieces = rounded_polygon_pieces(&v, &vec![*corner_radius; v.len()])?;
            ConvexDomain::from_pieces(pieces, label, *corner_radius == 0.0)
        }
        DomainDescriptor::Superellipse { a, b, power } => {
            positive("a", *a)?;
            positive("b", *b)?;
            if !(*power >= 2.0) {
                return Err(Error::InvalidSpec(format!(
                    "superellipse power {power} < 2 has unbounded boundary curvature"
                )));
            }
            superellipse_domain(*a, *b, *power, label)
        }
    }
}

fn rect_domain(a: f64, b: f64, r: f64, label: String) -> Result<ConvexDomain> {
    if r < 0.0 {
        return Err(Error::InvalidSpec("corner radius must be non-negative".into()));
    }
    let (ha, hb) = (0.5 * a, 0.5 * b);
    let v = [
        Point::new(ha, -hb),
        Point::new(ha, hb),
        Point::new(-ha, hb),
        Point::new(-ha, -hb),
    ];
    // Start the boundary at the midpoint of the right edge so that s = 0 is a
    // smooth point.
    let mut pieces = rounded_polygon_pieces(&v, &[r; 4])?;
    let right = pieces.iter().position(|pc| {
        matches!(*pc, BoundaryPiece::Segment { start, end } if start[0] == ha && end[0] == ha && start[1] < end[1])
    });
    if let Some(k) = right {
        pieces.rotate_left(k);
        if let BoundaryPiece::Segment { start, end } = pieces[0] {
            let mid = [ha, 0.5 * (start[1] + end[1])];
            pieces[0] = BoundaryPiece::Segment { start: mid, end };
            pieces.push(BoundaryPiece::Segment { start, end: mid });
        }
    }
    ConvexDomain::from_pieces(pieces, label, r == 0.0)
}

fn superellipse_domain(a: f64, b: f64, power: f64, label: String) -> Result<ConvexDomain> {
    let m = 256;
    let e = 2.0 / power;
    let pts: Vec<Point> = (0..m)
        .map(|k| {
            let t = TAU * k as f64 / m as f64;
            let (s, c) = t.sin_cos();
            Point::new(a * c.signum() * c.abs().powf(e), b * s.signum() * s.abs().powf(e))
        })
        .collect();
    let n = pts.len();
    let radii: Vec<f64> = (0..n)
        .map(|k| {
            let prev = pts[(k + n - 1) % n];
            let cur = pts[k];
            let next = pts[(k + 1) % n];
            let d_in = (cur - prev).normalize();
            let d_out = (next - cur).normalize();
            let theta = cross(d_in, d_out).atan2(d_in.dot(&d_out));
            let lmin = (cur - prev).norm().min((next - cur).norm());
            if theta <= 1e-12 {
                0.0
            } else {
                0.49 * lmin / (0.5 * theta).tan()
            }
        })
        .collect();
    let pieces = rounded_polygon_pieces(&pts, &radii)?;
    // Vertices with negligible turning keep a zero radius; they are smooth
    // junctions, not corners.
    ConvexDomain::from_pieces(pieces, label, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_area_and_corner_flag() {
        let d = make_domain(&DomainDescriptor::Square { side: 2.0, corner_radius: 0.0 }).unwrap();
        assert!((d.area() - 4.0).abs() < 1e-14);
        assert!(d.is_corner_domain());
        assert_eq!(d.r_min(), 0.0);
        assert_eq!(d.corners().len(), 4);
    }

    #[test]
    fn disk_area() {
        let d = make_domain(&DomainDescriptor::Disk { radius: 1.0 }).unwrap();
        assert!((d.area() - PI).abs() < 1e-13);
        assert_eq!(d.r_min(), 1.0);
        assert!(!d.is_corner_domain());
        assert!(d.centroid().norm() < 1e-14);
    }

    #[test]
    fn rounded_square_area() {
        // square minus four corner fillets: 4 - (4 - π) r²
        let d = make_domain(&DomainDescriptor::Square { side: 2.0, corner_radius: 0.2 }).unwrap();
        let expected = 4.0 - (4.0 - PI) * 0.04;
        assert!((d.area() - expected).abs() < 1e-13, "{} vs {}", d.area(), expected);
        assert!((expected - 3.965_663_706_143_592).abs() < 1e-12);
        assert!((d.r_min() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn normals() {
        let sq = make_domain(&DomainDescriptor::Square { side: 2.0, corner_radius: 0.0 }).unwrap();
        let n = sq.inner_normal(0.0).unwrap();
        assert!((sq.point_at(0.0) - Point::new(1.0, 0.0)).norm() < 1e-15);
        assert!((n - Point::new(-1.0, 0.0)).norm() < 1e-15);
        let disk = make_domain(&DomainDescriptor::Disk { radius: 1.0 }).unwrap();
        assert!((disk.inner_normal(0.0).unwrap() - Point::new(-1.0, 0.0)).norm() < 1e-15);

        let rs = make_domain(&DomainDescriptor::Square { side: 2.0, corner_radius: 0.2 }).unwrap();
        // arc centre (0.8, 0.8); the 45° point is centre + 0.2 (1,1)/√2
        let target = Point::new(0.8, 0.8) + 0.2 * Point::new(1.0, 1.0) / 2f64.sqrt();
        let bp = rs.project(target);
        assert!(bp.distance < 1e-14);
        let n = rs.inner_normal(bp.s).unwrap();
        let h = 0.5f64.sqrt();
        assert!((n - Point::new(-h, -h)).norm() < 1e-12);
    }

    #[test]
    fn corner_normal_is_ambiguous() {
        let sq = make_domain(&DomainDescriptor::Square { side: 2.0, corner_radius: 0.0 }).unwrap();
        let (s, _) = sq.corners()[0];
        match sq.inner_normal(s) {
            Err(Error::AmbiguousNormal { extremes, .. }) => {
                let a = Point::new(extremes[0][0], extremes[0][1]);
                let b = Point::new(extremes[1][0], extremes[1][1]);
                assert!((a.norm() - 1.0).abs() < 1e-14 && (b.norm() - 1.0).abs() < 1e-14);
                assert!(a.dot(&b).abs() < 1e-14);
            }
            other => panic!("expected ambiguous normal, got {other:?}"),
        }
    }

    #[test]
    fn invalid_descriptors() {
        assert!(make_domain(&DomainDescriptor::Disk { radius: -1.0 }).is_err());
        assert!(make_domain(&DomainDescriptor::Square { side: 2.0, corner_radius: 1.5 }).is_err());
        let nonconvex = DomainDescriptor::RoundedPolygon {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.3], [1.0, 2.0]],
            corner_radius: 0.05,
        };
        assert!(make_domain(&nonconvex).is_err());
        assert!(make_domain(&DomainDescriptor::Superellipse { a: 1.0, b: 1.0, power: 1.5 }).is_err());
    }

    #[test]
    fn superellipse_is_smooth() {
        let d = make_domain(&DomainDescriptor::Superellipse { a: 1.0, b: 0.7, power: 4.0 }).unwrap();
        assert!(!d.is_corner_domain());
        assert!(d.r_min() > 0.0);
        // area of |x|^4 + |y/0.7|^4 <= 1 is 0.7 * Γ(1/4)² / (2 √π) ≈ 0.7 * 3.708149
        assert!((d.area() - 0.7 * 3.708_149_354_602_744).abs() < 2e-3);
    }

    #[test]
    fn normal_winds_once() {
        let d = make_domain(&DomainDescriptor::Square { side: 2.0, corner_radius: 0.3 }).unwrap();
        let m = 4000;
        let mut total = 0.0;
        let mut prev = d.inner_normal(0.0).unwrap();
        for k in 1..=m {
            let n = d.inner_normal((k as f64 / m as f64).min(1.0 - 1e-15)).unwrap();
            total += cross(prev, n).atan2(prev.dot(&n));
            prev = n;
        }
        assert!((total - TAU).abs() < 1e-6, "{total}");
    }

    #[test]
    fn rotation_moves_everything() {
        let d = make_domain(&DomainDescriptor::Rectangle { a: 2.0, b: 1.0, corner_radius: 0.1 }).unwrap();
        let r = d.transformed(0.4, Point::new(0.3, -0.2));
        assert!((r.area() - d.area()).abs() < 1e-14);
        let rot = nalgebra::Rotation2::new(0.4);
        assert!((r.point_at(0.3) - (rot * d.point_at(0.3) + Point::new(0.3, -0.2))).norm() < 1e-13);
        assert!((r.inner_normal(0.3).unwrap() - rot * d.inner_normal(0.3).unwrap()).norm() < 1e-13);
    }
}
