//! Boundary frames and potentials recentred at a base point.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::domain::ConvexDomain;
use crate::geometry::polygon::ConvexPolygon;
use crate::transport::maxaffine::MaxAffine;
use crate::{Mat2, Point};

/// Orthonormal frame at `origin`: `e2` is the inner normal, `e1` the
/// counter-clockwise tangent `(ν₂, −ν₁)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: Point,
    pub e1: Point,
    pub e2: Point,
}

impl Frame {
    pub fn from_normal(origin: Point, normal: Point) -> Self {
        let e2 = normal.normalize();
        Self {
            origin,
            e1: Point::new(e2.y, -e2.x),
            e2,
        }
    }

    /// Frame at boundary arclength fraction `s`.
    pub fn at_boundary(domain: &ConvexDomain, s: f64) -> Result<Self> {
        Ok(Self::from_normal(domain.point_at(s), domain.inner_normal(s)?))
    }

    /// Columns `e1, e2`.
    pub fn rotation(&self) -> Mat2 {
        Mat2::new(self.e1.x, self.e2.x, self.e1.y, self.e2.y)
    }

    pub fn to_local(&self, x: Point) -> Point {
        let d = x - self.origin;
        Point::new(d.dot(&self.e1), d.dot(&self.e2))
    }

    pub fn to_global(&self, z: Point) -> Point {
        self.origin + self.e1 * z.x + self.e2 * z.y
    }

    /// Vector (no translation) into local coordinates.
    pub fn vec_to_local(&self, v: Point) -> Point {
        Point::new(v.dot(&self.e1), v.dot(&self.e2))
    }
}

/// `ũ(z) = u(o + Rz) − u(o) − p·Rz` in frame coordinates, with the region
/// expressed in the same coordinates.
#[derive(Clone, Debug)]
pub struct LocalPotential {
    pub frame: Frame,
    /// Subtracted slope, in global coordinates.
    pub slope: Point,
    pub value_at_origin: f64,
    pub kernel: MaxAffine,
    pub region: ConvexPolygon,
}

impl LocalPotential {
    pub fn new(u: &MaxAffine, region: &ConvexPolygon, frame: Frame, slope: Point) -> Self {
        let o = frame.origin;
        let u0 = u.value(o);
        let slopes = u.slopes().iter().map(|y| frame.vec_to_local(y - slope)).collect();
        let offsets = u
            .slopes()
            .iter()
            .zip(u.offsets())
            .map(|(y, c)| c - o.dot(y) + u0)
            .collect();
        Self {
            frame,
            slope,
            value_at_origin: u0,
            kernel: MaxAffine::new(slopes, offsets),
            region: region.map(|x| frame.to_local(x)),
        }
    }

    pub fn value(&self, z: Point) -> f64 {
        self.kernel.value(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recentred_values_match() {
        let s = vec![Point::new(1.0, 0.5), Point::new(-0.3, 0.2), Point::new(0.1, -1.0)];
        let u = MaxAffine::new(s, vec![0.1, -0.2, 0.3]);
        let region = ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
        let f = Frame::from_normal(Point::new(1.0, 0.0), Point::new(-1.0, 0.0));
        assert!((f.e1 - Point::new(0.0, 1.0)).norm() < 1e-15);
        let p = Point::new(0.2, 0.1);
        let l = LocalPotential::new(&u, &region, f, p);
        for z in [Point::new(0.3, 0.4), Point::new(-0.7, 0.1), Point::zeros()] {
            let x = f.to_global(z);
            let want = u.value(x) - u.value(f.origin) - p.dot(&(x - f.origin));
            assert!((l.value(z) - want).abs() < 1e-14);
        }
        assert!((l.region.area() - 4.0).abs() < 1e-12);
        assert!((f.to_local(f.to_global(Point::new(0.3, -0.2))) - Point::new(0.3, -0.2)).norm() < 1e-15);
    }
}
