//! Reflected near-boundary level sets `D_h`.

use serde::{Deserialize, Serialize};

use super::frame::LocalPotential;
use crate::error::{Error, Result};
use crate::geometry::polygon::{ConvexPolygon, TaggedPolygon, BOUNDARY_TAG};
use crate::transport::maxaffine::ClipOrder;
use crate::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DhSet {
    pub h: f64,
    pub a_h: f64,
    /// `D⁺ = {ũ < h} ∩ {z₂ > a_h}` in local coordinates.
    pub upper: ConvexPolygon,
    /// Convex hull of `D⁺` and its reflection in `{z₂ = a_h}`.
    pub polygon: ConvexPolygon,
    /// `x_h = (0, a_h)`.
    pub center: Point,
    pub inradius: f64,
    pub circumradius: f64,
}

impl DhSet {
    pub fn roundness(&self) -> f64 {
        self.inradius / self.circumradius
    }
}

const FLOOR_TAG: i64 = -3;

/// Working box cut to the inner side `{z₂ ≥ 0}`, floor edge tagged apart.
fn working_box(region: &ConvexPolygon) -> TaggedPolygon {
    let (lo, hi) = region.bounding_box();
    let c = 0.5 * (lo + hi);
    let half = 2.0 * (hi - lo).max();
    let b = ConvexPolygon::from_box(c - Point::new(half, half), c + Point::new(half, half));
    let mut t = TaggedPolygon::from_polygon(&b, BOUNDARY_TAG);
    t.clip(Point::new(0.0, -1.0), 0.0, FLOOR_TAG);
    t
}

/// `a_h` is the smallest `a ≥ 0` with `D⁺_{h,a} ⊂ Ω`, found by bisection to
/// `1e-10`; raises [`Error::Construction`] if none exists below `√h`.
pub fn dh_set(local: &LocalPotential, h: f64) -> Result<DhSet> {
    if !(h > 0.0) {
        return Err(Error::InvalidSpec(format!("height must be positive, got {h}")));
    }
    // D⁺ lies in {z₂ > a_h ≥ 0}; the lower side is never needed and may be
    // unbounded when the subtracted slope sits outside the sites' hull.
    let mut level = working_box(&local.region);
    let hint = Point::new(0.0, 1e-9 * local.region.diameter());
    local.kernel.clip_below_ordered(&mut level, Point::zeros(), -h, None, ClipOrder::Point(hint));
    if level.is_empty() {
        return Err(Error::Construction(format!("empty level set at height {h:.3e}")));
    }
    if level.tags.contains(&BOUNDARY_TAG) {
        return Err(Error::HeightTooLarge { h });
    }
    let slack = 1e-12 * local.region.diameter();
    let upper_at = |a: f64| -> Option<ConvexPolygon> {
        let mut p = level.clone();
        if p.clip(Point::new(0.0, -1.0), -a, BOUNDARY_TAG) {
            Some(p.into_polygon())
        } else {
            None
        }
    };
    let inside = |a: f64| match upper_at(a) {
        Some(p) => local.region.contains_polygon(&p, slack),
        None => true,
    };
    let top = h.sqrt();
    let a_h = if inside(0.0) {
        0.0
    } else {
        if !inside(top) {
            return Err(Error::Construction(format!("no admissible a_h below sqrt(h) at height {h:.3e}")));
        }
        let (mut lo, mut hi) = (0.0, top);
        while hi - lo > 1e-10 {
            let m = 0.5 * (lo + hi);
            if inside(m) {
                hi = m;
            } else {
                lo = m;
            }
        }
        hi
    };
    let upper = upper_at(a_h).ok_or_else(|| Error::Construction(format!("empty D+ at height {h:.3e}")))?;
    let mut pts: Vec<Point> = upper.vertices().to_vec();
    pts.extend(upper.vertices().iter().map(|p| Point::new(p.x, 2.0 * a_h - p.y)));
    let polygon = ConvexPolygon::hull(&pts).ok_or_else(|| Error::Construction("degenerate D_h".into()))?;
    let center = Point::new(0.0, a_h);
    let inradius = polygon.inner_distance(center);
    let circumradius = polygon
        .vertices()
        .iter()
        .map(|v| (v - center).norm())
        .fold(0.0, f64::max);
    if !(inradius > 0.0) {
        return Err(Error::Construction(format!("x_h outside D_h at height {h:.3e}")));
    }
    Ok(DhSet {
        h,
        a_h,
        upper,
        polygon,
        center,
        inradius,
        circumradius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sections::frame::Frame;
    use crate::transport::maxaffine::MaxAffine;

    fn affine_quad(a: f64, n: usize) -> MaxAffine {
        // tangent planes of a x1²/2 + x2²/(2a) at a grid of points
        let mut s = Vec::new();
        let mut o = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let x = Point::new(-2.0 + 4.0 * (i as f64 + 0.5) / n as f64, -2.0 + 4.0 * (j as f64 + 0.5) / n as f64);
                let g = Point::new(a * x.x, x.y / a);
                s.push(g);
                o.push(g.dot(&x) - 0.5 * (a * x.x * x.x + x.y * x.y / a));
            }
        }
        MaxAffine::new(s, o)
    }

    #[test]
    fn identity_gives_disk() {
        let u = affine_quad(1.0, 300);
        let region = ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
        let x0 = Point::new(1.0, 0.0);
        let local = LocalPotential::new(&u, &region, Frame::from_normal(x0, Point::new(-1.0, 0.0)), x0);
        let d = dh_set(&local, 0.01).unwrap();
        assert!(d.a_h < 1e-9);
        let r = (0.02f64).sqrt();
        assert!((d.circumradius - r).abs() < 0.01 * r, "{d:?}");
        assert!((d.inradius - r).abs() < 0.02 * r);
    }

    #[test]
    fn affine_ratio_is_half() {
        let u = affine_quad(2.0, 300);
        let region = ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
        let x0 = Point::new(1.0, 0.0);
        let local = LocalPotential::new(&u, &region, Frame::from_normal(x0, Point::new(-1.0, 0.0)), Point::new(2.0, 0.0));
        let d = dh_set(&local, 0.01).unwrap();
        assert!((d.roundness() - 0.5).abs() < 0.02, "{}", d.roundness());
        // reflection symmetry about z2 = a_h
        for v in d.polygon.vertices() {
            let m = Point::new(v.x, 2.0 * d.a_h - v.y);
            assert!(d.polygon.contains_with(m, 1e-9));
        }
    }

    #[test]
    fn curved_boundary_lifts_a_h() {
        let u = affine_quad(1.0, 300);
        let region = ConvexPolygon::regular(512, 1.0, Point::zeros());
        let x0 = Point::new(1.0, 0.0);
        let local = LocalPotential::new(&u, &region, Frame::from_normal(x0, Point::new(-1.0, 0.0)), x0);
        let d = dh_set(&local, 0.01).unwrap();
        assert!(d.a_h > 0.0 && d.a_h < 0.1, "{}", d.a_h);
        assert!(local.region.contains_polygon(&d.upper, 1e-9));
    }
}
