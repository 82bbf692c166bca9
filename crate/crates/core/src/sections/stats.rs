//! Shape statistics of sections: density ratios, balance, scaling fits,
//! duality pairings and the sandwich constant.

use serde::{Deserialize, Serialize};

use super::frame::Frame;
use super::section::{centred_section, plain_section, Section, SectionOptions};
use crate::error::{Error, Result};
use crate::geometry::polygon::ConvexPolygon;
use crate::numerics::{loglog_fit, LineFit};
use crate::transport::maxaffine::MaxAffine;
use crate::Point;

/// `area(S ∩ Ω) / area(S)`.
pub fn density_ratio(sec: &Section, region: &ConvexPolygon) -> f64 {
    let a = sec.area();
    if a <= 0.0 {
        return 0.0;
    }
    match sec.polygon().intersect(region) {
        Some(p) => (p.area() / a).min(1.0),
        None => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceStats {
    pub e1: Point,
    pub e2: Point,
    /// `sup ⟨x − x0, e1⟩` over the section.
    pub q1: f64,
    /// `inf ⟨x − x0, e1⟩`.
    pub xi1: f64,
    pub lambda1: f64,
    /// Normal extent `sup ⟨x − x0, e2⟩`.
    pub lambda2: f64,
    pub ratio: f64,
}

pub fn balance_stats(sec: &Section, frame: &Frame) -> Result<BalanceStats> {
    let mut q1 = f64::NEG_INFINITY;
    let mut xi1 = f64::INFINITY;
    let mut lambda2 = f64::NEG_INFINITY;
    for v in sec.polygon().vertices() {
        let z = frame.to_local(*v);
        q1 = q1.max(z.x);
        xi1 = xi1.min(z.x);
        lambda2 = lambda2.max(z.y);
    }
    let scale = sec.diameter().max(f64::MIN_POSITIVE);
    let tiny = 1e-12 * scale;
    if !(q1 - xi1 > tiny) || !(q1 > tiny) || !(xi1 < -tiny) || !(lambda2 > tiny) {
        return Err(Error::DegenerateSection(format!(
            "zero-width section at height {:.3e} (q1 = {q1:.3e}, xi1 = {xi1:.3e}, lambda2 = {lambda2:.3e})",
            sec.h
        )));
    }
    Ok(BalanceStats {
        e1: frame.e1,
        e2: frame.e2,
        q1,
        xi1,
        lambda1: q1 - xi1,
        lambda2,
        ratio: q1 / xi1.abs(),
    })
}

/// Log-log slopes of area, tangential width and normal width against `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub volume: LineFit,
    pub tangential: LineFit,
    pub normal: LineFit,
}

/// Widths are measured along the frame axes (`max − min` of the projections).
pub fn scaling_fit(sections: &[Section], frame: &Frame) -> Result<ScalingFit> {
    if sections.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: sections.len(),
        });
    }
    let mut hs = Vec::new();
    let mut areas = Vec::new();
    let mut tan = Vec::new();
    let mut nor = Vec::new();
    for s in sections {
        hs.push(s.h);
        areas.push(s.area());
        tan.push(s.polygon().support(frame.e1) + s.polygon().support(-frame.e1));
        nor.push(s.polygon().support(frame.e2) + s.polygon().support(-frame.e2));
    }
    let fit = |y: &[f64]| {
        loglog_fit(&hs, y).ok_or(Error::InsufficientData {
            needed: 3,
            got: 0,
        })
    };
    Ok(ScalingFit {
        volume: fit(&areas)?,
        tangential: fit(&tan)?,
        normal: fit(&nor)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingStats {
    pub h: f64,
    /// `max |x·y| / h`.
    pub upper: f64,
    /// `min_{x ∈ ∂S[u]} max_{y ∈ S[v]} x·y / h`.
    pub lower: f64,
}

/// Pairing of a section of `u` at `x0` with a section of the dual at `y0`,
/// both taken relative to their base points.
pub fn pairing_stats(sec_u: &Section, sec_v: &Section, h: f64) -> PairingStats {
    let xs: Vec<Point> = sec_u.polygon().vertices().iter().map(|x| x - sec_u.x0).collect();
    let ys: Vec<Point> = sec_v.polygon().vertices().iter().map(|y| y - sec_v.x0).collect();
    let mut upper: f64 = 0.0;
    for x in &xs {
        for y in &ys {
            upper = upper.max(x.dot(y).abs());
        }
    }
    let support = |x: Point| ys.iter().map(|y| x.dot(y)).fold(f64::NEG_INFINITY, f64::max);
    let boundary = sec_u.polygon().translated(-sec_u.x0).boundary_samples(16);
    let lower = boundary.iter().map(|x| support(*x)).fold(f64::INFINITY, f64::min);
    PairingStats {
        h,
        upper: upper / h,
        lower: lower / h,
    }
}

/// Smallest `b ≥ 1` (to a relative resolution of 1%) with
/// `S^c_{h/b} ∩ Ω ⊆ S_h ⊆ S^c_{bh} ∩ Ω`, or `None` when no `b ≤ b_max` works.
pub fn sandwich_constant(
    u: &MaxAffine,
    region: &ConvexPolygon,
    x0: Point,
    h: f64,
    slope: Point,
    b_max: f64,
    opts: &SectionOptions,
) -> Result<Option<f64>> {
    let plain = plain_section(u, region, x0, h, slope, opts)?;
    let slack = 1e-9 * region.diameter();
    let inner_ok = |b: f64| -> bool {
        match centred_section(u, region, x0, h / b, slope, opts) {
            Ok(c) => match c.polygon().intersect(region) {
                Some(p) => plain.polygon().contains_polygon(&p, slack),
                None => true,
            },
            Err(_) => false,
        }
    };
    let outer_ok = |b: f64| -> bool {
        match centred_section(u, region, x0, h * b, slope, opts) {
            Ok(c) => c.polygon().contains_polygon(plain.polygon(), slack),
            Err(_) => false,
        }
    };
    let b1 = smallest(&inner_ok, b_max);
    let b2 = smallest(&outer_ok, b_max);
    Ok(match (b1, b2) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    })
}

/// Smallest `b` in `[1, b_max]` with `ok(b)`, assuming monotonicity.
fn smallest(ok: &dyn Fn(f64) -> bool, b_max: f64) -> Option<f64> {
    if ok(1.0) {
        return Some(1.0);
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while !ok(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > b_max {
            return None;
        }
    }
    while hi / lo > 1.01 {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sections::section::tests::quad;
    use crate::sections::section::SectionKind;

    fn square() -> ConvexPolygon {
        ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0))
    }

    fn disk_section(center: Point, r: f64, h: f64) -> Section {
        let p = ConvexPolygon::regular(512, r, center);
        Section {
            kind: SectionKind::Centred,
            x0: center,
            h,
            affine: crate::sections::section::Affine {
                slope: Point::zeros(),
                intercept: 0.0,
            },
            centroid: p.centroid(),
            vertices: p,
            john: None,
        }
    }

    #[test]
    fn pairing_of_concentric_disks() {
        for h in [0.01f64, 0.04] {
            let r = (2.0 * h).sqrt();
            let a = disk_section(Point::new(0.3, 0.1), r, h);
            let b = disk_section(Point::new(-0.5, 0.2), r, h);
            let p = pairing_stats(&a, &b, h);
            assert!((p.upper - 2.0).abs() < 1e-3, "{p:?}");
            assert!((p.lower - 2.0).abs() < 1e-3, "{p:?}");
        }
    }

    #[test]
    fn balance_of_half_disk() {
        let u = quad(200, 1.0);
        let region = square();
        let x0 = Point::new(1.0, 0.0);
        let frame = Frame::from_normal(x0, Point::new(-1.0, 0.0));
        let s = plain_section(&u, &region, x0, 0.02, x0, &Default::default()).unwrap();
        let b = balance_stats(&s, &frame).unwrap();
        assert!((b.ratio - 1.0).abs() < 0.02, "{b:?}");
        assert!((b.lambda2 - 0.2).abs() < 0.01);
        assert!((density_ratio(&s, &region) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_balance() {
        let mut s = disk_section(Point::zeros(), 0.1, 0.01);
        s.vertices = ConvexPolygon::from_box(Point::new(0.0, 0.0), Point::new(0.1, 0.1));
        let frame = Frame::from_normal(Point::zeros(), Point::new(0.0, 1.0));
        assert!(matches!(balance_stats(&s, &frame), Err(Error::DegenerateSection(_))));
    }

    #[test]
    fn scaling_of_quadratic() {
        let u = quad(400, 1.0);
        let frame = Frame::from_normal(Point::zeros(), Point::new(0.0, 1.0));
        let secs: Vec<Section> = [0.04, 0.01, 0.0025]
            .iter()
            .map(|&h| plain_section(&u, &square(), Point::zeros(), h, Point::zeros(), &Default::default()).unwrap())
            .collect();
        let f = scaling_fit(&secs, &frame).unwrap();
        assert!((f.volume.slope - 1.0).abs() < 0.02, "{f:?}");
        assert!((f.tangential.slope - 0.5).abs() < 0.02);
        assert!((f.normal.slope - 0.5).abs() < 0.02);
        assert!(matches!(scaling_fit(&secs[..2], &frame), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn sandwich_is_one_for_quadratic_interior() {
        let u = quad(200, 1.0);
        let b = sandwich_constant(&u, &square(), Point::zeros(), 0.02, Point::zeros(), 64.0, &Default::default())
            .unwrap()
            .unwrap();
        assert!(b < 1.1, "{b}");
    }

    #[test]
    fn centred_density_ratio_halves_at_edge() {
        let u = quad(200, 2.0);
        let x0 = Point::new(1.0, 0.0);
        let s = centred_section(&u, &square(), x0, 0.005, x0, &Default::default()).unwrap();
        assert!((density_ratio(&s, &square()) - 0.5).abs() < 0.02);
    }
}
