//! Boundary decay of the recentred potential along tangential chords.

use serde::{Deserialize, Serialize};

use super::frame::LocalPotential;
use crate::numerics::{loglog_fit, LineFit};
use crate::Point;

/// One side (`t > 0` along `e1`, or `t < 0`) of a decay profile.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecaySide {
    pub t: Vec<f64>,
    /// `u̲(t) = inf { ũ(z) : z₁ = t, z ∈ Ω }`.
    pub under: Vec<f64>,
    /// `(u̲(2t) − u̲(t)) / t`, absent when `2t` is unavailable.
    pub under1: Vec<Option<f64>>,
    /// Grid points whose chord misses the region.
    pub skipped: Vec<f64>,
    pub exponent: Option<LineFit>,
    pub exponent1: Option<LineFit>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub positive: DecaySide,
    pub negative: DecaySide,
    /// Fit of the even part `(u̲(t) + u̲(−t)) / 2`, insensitive to the choice
    /// of supporting slope.
    pub even_exponent: Option<LineFit>,
}

/// Chord `{z₁ = t} ∩ Ω` in local coordinates as `(lo, hi)` in `z₂`.
fn chord(local: &LocalPotential, t: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, b) in local.region.edges() {
        let (da, db) = (a.x - t, b.x - t);
        if da == 0.0 {
            lo = lo.min(a.y);
            hi = hi.max(a.y);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let s = da / (da - db);
            let y = a.y + s * (b.y - a.y);
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Minimum of the convex piecewise-affine `ũ(t, ·)` on `[lo, hi]`.
fn chord_min(local: &LocalPotential, t: f64, lo: f64, hi: f64) -> f64 {
    let g = |s: f64| local.value(Point::new(t, s));
    let d = |s: f64| local.kernel.gradient(Point::new(t, s)).y;
    let (mut a, mut b) = (lo, hi);
    if d(a) >= 0.0 {
        return g(a);
    }
    if d(b) <= 0.0 {
        return g(b);
    }
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if d(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    g(a).min(g(b))
}

/// Minimum over the chord at `t`, or `None` if the chord misses the region.
pub fn chord_infimum(local: &LocalPotential, t: f64) -> Option<f64> {
    let (lo, hi) = chord(local, t)?;
    Some(chord_min(local, t, lo, hi))
}

fn side(local: &LocalPotential, ts: &[f64], sign: f64) -> DecaySide {
    let mut out = DecaySide::default();
    let mut values = Vec::with_capacity(ts.len());
    for &t in ts {
        let v = chord_infimum(local, sign * t);
        if v.is_none() {
            out.skipped.push(t);
        }
        values.push(v);
    }
    for (k, &t) in ts.iter().enumerate() {
        let Some(v) = values[k] else { continue };
        let d = chord_infimum(local, sign * 2.0 * t).map(|v2| (v2 - v) / t);
        out.t.push(t);
        out.under.push(v);
        out.under1.push(d);
    }
    out.exponent = loglog_fit(&out.t, &out.under);
    let d1: Vec<f64> = out.under1.iter().map(|d| d.unwrap_or(f64::NAN)).collect();
    out.exponent1 = loglog_fit(&out.t, &d1);
    out
}

/// Profiles of `u̲` on both sides of the base point for the positive grid `ts`.
pub fn decay_profile(local: &LocalPotential, ts: &[f64]) -> DecayProfile {
    let positive = side(local, ts, 1.0);
    let negative = side(local, ts, -1.0);
    let mut et = Vec::new();
    let mut ev = Vec::new();
    for (k, t) in positive.t.iter().enumerate() {
        if let Some(j) = negative.t.iter().position(|s| s == t) {
            et.push(*t);
            ev.push(0.5 * (positive.under[k] + negative.under[j]));
        }
    }
    let even_exponent = loglog_fit(&et, &ev);
    DecayProfile {
        positive,
        negative,
        even_exponent,
    }
}

/// Geometric grid of `count` points from `t_max` down by `ratio`.
pub fn geometric_grid(t_max: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| t_max / ratio.powi(k as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon::ConvexPolygon;
    use crate::sections::frame::Frame;
    use crate::sections::section::tests::quad;

    #[test]
    fn quadratic_at_mid_edge() {
        let u = quad(400, 2.0);
        let region = ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
        let x0 = Point::new(1.0, 0.0);
        let frame = Frame::from_normal(x0, Point::new(-1.0, 0.0));
        let local = LocalPotential::new(&u, &region, frame, x0);
        let ts = geometric_grid(0.4, 2.0, 4);
        let p = decay_profile(&local, &ts);
        for (t, v) in p.positive.t.iter().zip(&p.positive.under) {
            assert!((v - 0.5 * t * t).abs() < 1e-4, "{t} {v}");
        }
        assert!((p.positive.exponent.unwrap().slope - 2.0).abs() < 0.01);
        assert!((p.even_exponent.unwrap().slope - 2.0).abs() < 0.01);
        assert!((p.positive.exponent1.unwrap().slope - 1.0).abs() < 0.02);
    }

    #[test]
    fn chord_outside_is_skipped() {
        let u = quad(20, 1.0);
        let region = ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
        let frame = Frame::from_normal(Point::new(1.0, 0.0), Point::new(-1.0, 0.0));
        let local = LocalPotential::new(&u, &region, frame, Point::new(1.0, 0.0));
        let p = decay_profile(&local, &[0.5, 3.0]);
        assert_eq!(p.positive.skipped, vec![3.0]);
        assert_eq!(p.positive.t, vec![0.5]);
    }
}
