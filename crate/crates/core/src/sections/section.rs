//! Plain and centred sections `{u < ℓ + h}` of max-affine potentials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ellipse::{john_normalize, Ellipse, NormalizingMap};
use crate::geometry::polygon::{ConvexPolygon, TaggedPolygon, BOUNDARY_TAG};
use crate::transport::maxaffine::{ClipOrder, MaxAffine};
use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    Plain,
    Centred,
}

/// `ℓ(x) = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub slope: Point,
    pub intercept: f64,
}

impl Affine {
    /// Affine function through `(x0, value)` with the given slope.
    pub fn through(x0: Point, value: f64, slope: Point) -> Self {
        Self {
            slope,
            intercept: value - slope.dot(&x0),
        }
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.slope.dot(&x) + self.intercept
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JohnData {
    pub ellipse: Ellipse,
    pub map: NormalizingMap,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Section {
    pub kind: SectionKind,
    pub x0: Point,
    pub h: f64,
    pub affine: Affine,
    pub vertices: ConvexPolygon,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub john: Option<JohnData>,
    pub centroid: Point,
}

impl Section {
    pub fn polygon(&self) -> &ConvexPolygon {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        self.vertices.area()
    }

    pub fn diameter(&self) -> f64 {
        self.vertices.diameter()
    }

    /// Compute and attach the John normalization.
    pub fn with_john(mut self) -> Result<Self> {
        let (ellipse, map) = john_normalize(&self.vertices)?;
        self.john = Some(JohnData { ellipse, map });
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SectionOptions {
    /// Half-width of the working box in units of the region's half-extent.
    pub box_factor: f64,
    /// Initial damping of the centring iteration.
    pub centring_tau: f64,
    pub centring_max_iterations: usize,
    /// Required `|centroid − x0| / diameter`.
    pub centring_tol: f64,
}

impl Default for SectionOptions {
    fn default() -> Self {
        Self {
            box_factor: 4.0,
            centring_tau: 0.5,
            centring_max_iterations: 500,
            centring_tol: 1e-7,
        }
    }
}

fn working_box(region: &ConvexPolygon, factor: f64) -> ConvexPolygon {
    let (lo, hi) = region.bounding_box();
    let c = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo).max() * factor;
    ConvexPolygon::from_box(c - Point::new(half, half), c + Point::new(half, half))
}

/// `{x ∈ box : u(x) <= ℓ(x) + h}` as a tagged polygon (box edges tagged
/// [`BOUNDARY_TAG`]).
/// `hint` should be a point of the result; it steers the traversal.
pub fn sublevel(u: &MaxAffine, ell: &Affine, h: f64, bbox: &ConvexPolygon, hint: Point) -> TaggedPolygon {
    let mut p = TaggedPolygon::from_polygon(bbox, BOUNDARY_TAG);
    u.clip_below_ordered(&mut p, ell.slope, -(ell.intercept + h), None, ClipOrder::Point(hint));
    p
}

/// `S_h(x0) = {x ∈ region : u(x) < ℓ(x) + h}` with `ℓ(x) = u(x0) + p·(x − x0)`.
///
/// Raises [`Error::HeightTooLarge`] when the section is the whole region.
pub fn plain_section(u: &MaxAffine, region: &ConvexPolygon, x0: Point, h: f64, slope: Point, opts: &SectionOptions) -> Result<Section> {
    if !(h > 0.0) {
        return Err(Error::InvalidSpec(format!("section height must be positive, got {h}")));
    }
    let ell = Affine::through(x0, u.value(x0), slope);
    let bbox = working_box(region, opts.box_factor);
    let mut p = sublevel(u, &ell, h, &bbox, x0);
    if p.is_empty() {
        return Err(Error::DegenerateSection(format!("empty section at height {h:.3e}")));
    }
    for hp in region.half_planes() {
        if !p.clip(hp.normal, hp.offset, BOUNDARY_TAG) {
            return Err(Error::DegenerateSection(format!("section at height {h:.3e} misses the region")));
        }
    }
    let poly = p.into_polygon();
    if poly.area() >= region.area() * (1.0 - 1e-12) {
        return Err(Error::HeightTooLarge { h });
    }
    let centroid = poly.centroid();
    Ok(Section {
        kind: SectionKind::Plain,
        x0,
        h,
        affine: ell,
        vertices: poly,
        john: None,
        centroid,
    })
}

fn raw_centred(u: &MaxAffine, bbox: &ConvexPolygon, x0: Point, u0: f64, slope: Point, h: f64) -> Result<(TaggedPolygon, Affine)> {
    let ell = Affine::through(x0, u0, slope);
    let p = sublevel(u, &ell, h, bbox, x0);
    if p.is_empty() {
        return Err(Error::DegenerateSection(format!("empty section at height {h:.3e}")));
    }
    if p.tags.contains(&BOUNDARY_TAG) {
        return Err(Error::HeightTooLarge { h });
    }
    Ok((p, ell))
}

/// At a boundary base point the supporting slope lies on the boundary of the
/// gradient image and the sub-level set of the extension is unbounded; the
/// start is then pulled toward the mean slope until the set is bounded.
fn bounded_start(u: &MaxAffine, bbox: &ConvexPolygon, x0: Point, u0: f64, slope: Point, h: f64) -> Result<(Point, (TaggedPolygon, Affine))> {
    match raw_centred(u, bbox, x0, u0, slope, h) {
        Err(Error::HeightTooLarge { .. }) => {}
        other => return other.map(|r| (slope, r)),
    }
    let n = u.slopes().len().max(1) as f64;
    let mean = u.slopes().iter().fold(Point::zeros(), |a, p| a + p) / n;
    let mut last = Error::HeightTooLarge { h };
    for t in [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3] {
        let p = slope + t * (mean - slope);
        match raw_centred(u, bbox, x0, u0, p, h) {
            Ok(r) => return Ok((p, r)),
            Err(e @ Error::HeightTooLarge { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Centred section `S^c_h(x0)`: the slope of `ℓ̂` (with `ℓ̂(x0) = u(x0)`) is
/// tuned until `x0` is the centroid of `{u < ℓ̂ + h}` in the whole plane.
///
/// The iteration is `p ← p + τ (h/2) Σ⁻¹ (x0 − centroid)` with `Σ` the
/// section covariance (exact Newton for quadratics), `τ` halved whenever the
/// centroid gap fails to decrease.
pub fn centred_section(
    u: &MaxAffine,
    region: &ConvexPolygon,
    x0: Point,
    h: f64,
    slope_init: Point,
    opts: &SectionOptions,
) -> Result<Section> {
    if !(h > 0.0) {
        return Err(Error::InvalidSpec(format!("section height must be positive, got {h}")));
    }
    let bbox = working_box(region, opts.box_factor);
    let u0 = u.value(x0);
    let (mut slope, (mut poly, mut ell)) = bounded_start(u, &bbox, x0, u0, slope_init, h)?;
    let mut centroid = poly.centroid();
    let mut gap = (centroid - x0).norm();
    let mut tau = opts.centring_tau;
    for _ in 0..opts.centring_max_iterations {
        let polygon = poly.to_polygon();
        let diam = polygon.diameter();
        if gap <= opts.centring_tol * diam {
            return Ok(Section {
                kind: SectionKind::Centred,
                x0,
                h,
                affine: ell,
                vertices: polygon,
                john: None,
                centroid,
            });
        }
        let cov = polygon.covariance();
        let Some(ci) = cov.try_inverse() else {
            return Err(Error::DegenerateSection("singular section covariance".into()));
        };
        let step = 0.5 * h * (ci * (x0 - centroid));
        loop {
            let trial = slope + tau * step;
            match raw_centred(u, &bbox, x0, u0, trial, h) {
                Ok((p2, e2)) => {
                    let c2 = p2.centroid();
                    let g2 = (c2 - x0).norm();
                    if g2 < gap {
                        slope = trial;
                        poly = p2;
                        ell = e2;
                        centroid = c2;
                        gap = g2;
                        break;
                    }
                }
                Err(Error::HeightTooLarge { .. }) | Err(Error::DegenerateSection(_)) => {}
                Err(e) => return Err(e),
            }
            tau *= 0.5;
            if tau < 1e-8 {
                return Err(Error::CentringFailure {
                    iterations: opts.centring_max_iterations,
                    gap,
                });
            }
        }
    }
    Err(Error::CentringFailure {
        iterations: opts.centring_max_iterations,
        gap,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Dense max-affine approximation of |x|²/2 from below (tangent planes).
    pub(crate) fn quad(n: usize, half: f64) -> MaxAffine {
        let mut s = Vec::new();
        for i in 0..n {
            for j in 0..n {
                s.push(Point::new(
                    -half + 2.0 * half * (i as f64 + 0.5) / n as f64,
                    -half + 2.0 * half * (j as f64 + 0.5) / n as f64,
                ));
            }
        }
        let o = s.iter().map(|p| 0.5 * p.norm_squared()).collect();
        MaxAffine::new(s, o)
    }

    fn square() -> ConvexPolygon {
        ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0))
    }

    #[test]
    fn plain_section_of_quadratic_is_disk() {
        let u = quad(200, 1.0);
        let s = plain_section(&u, &square(), Point::zeros(), 0.02, Point::zeros(), &Default::default()).unwrap();
        // radius 0.2 disk, up to the discretization of u (slope spacing 0.01)
        assert!((s.area() - 0.04 * PI).abs() < 0.04 * PI * 0.05, "{}", s.area());
        assert!(s.centroid.norm() < 1e-3);
    }

    #[test]
    fn centred_section_translates() {
        let u = quad(200, 1.0);
        let x0 = Point::new(0.3, 0.0);
        let s = centred_section(&u, &square(), x0, 0.02, Point::zeros(), &Default::default()).unwrap();
        assert!((s.affine.slope - x0).norm() < 0.02, "{:?}", s.affine.slope);
        assert!((s.centroid - x0).norm() <= 1e-3 * s.diameter());
    }

    #[test]
    fn whole_region_is_too_high() {
        let u = quad(20, 1.0);
        let r = plain_section(&u, &square(), Point::zeros(), 10.0, Point::zeros(), &Default::default());
        assert!(matches!(r, Err(Error::HeightTooLarge { .. })));
    }

    #[test]
    fn monotone_in_height() {
        let u = quad(60, 1.0);
        let x0 = Point::new(0.9, 0.1);
        let p = u.gradient(x0);
        let a = plain_section(&u, &square(), x0, 0.01, p, &Default::default()).unwrap();
        let b = plain_section(&u, &square(), x0, 0.04, p, &Default::default()).unwrap();
        assert!(b.polygon().contains_polygon(a.polygon(), 1e-12));
    }
}
