//! Hölder quotients, Sobolev norms and the modulus of continuity of `D²u`.

use serde::{Deserialize, Serialize};

use super::hessian::HessianField;
use crate::numerics::{loglog_fit, LineFit};
use crate::transport::density::Modulus;
use crate::transport::field::PointGrid;
use crate::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderBand {
    pub k: usize,
    /// Pair distances in `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    pub pairs: usize,
    /// `max |H(x) − H(z)|_F / |x − z|^α`; `None` for an empty band.
    pub quotient: Option<f64>,
}

/// Quotients over the dyadic bands `|x − z| ∈ [2^{−k−1}, 2^{−k}]·d0`,
/// `k = 0..bands`.
pub fn holder_seminorm(field: &HessianField, alpha: f64, d0: f64, bands: usize) -> Vec<HolderBand> {
    let pts = field.points();
    let grid = PointGrid::new(pts.clone(), (d0 / 4.0).max(1e-9));
    let mut out: Vec<HolderBand> = (0..bands)
        .map(|k| {
            let hi = d0 * 0.5f64.powi(k as i32);
            HolderBand {
                k,
                lo: 0.5 * hi,
                hi,
                pairs: 0,
                quotient: None,
            }
        })
        .collect();
    for (i, x) in pts.iter().enumerate() {
        for j in grid.within(*x, d0) {
            if j <= i {
                continue;
            }
            let d = (pts[j] - x).norm();
            if d <= 0.0 {
                continue;
            }
            let k = (d0 / d).log2().floor();
            if !(k >= 0.0) || k as usize >= bands {
                continue;
            }
            let k = k as usize;
            let q = (field.samples[i].hessian - field.samples[j].hessian).norm() / d.powf(alpha);
            let b = &mut out[k];
            b.pairs += 1;
            b.quotient = Some(b.quotient.map_or(q, |m: f64| m.max(q)));
        }
    }
    out
}

/// Band max/min over the nonempty bands.
pub fn band_spread(bands: &[HolderBand]) -> Option<f64> {
    let q: Vec<f64> = bands.iter().filter_map(|b| b.quotient).collect();
    if q.len() < 2 {
        return None;
    }
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = q.iter().copied().fold(f64::INFINITY, f64::min);
    Some(max / min)
}

/// `(Σ w_i |H_i|_F^p)^{1/p}` with the sample weights (cell areas).
pub fn sobolev_norm(field: &HessianField, p: f64) -> f64 {
    let s: f64 = field
        .samples
        .iter()
        .map(|s| s.weight * s.hessian.norm().powf(p))
        .sum();
    s.powf(1.0 / p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusRow {
    pub r: f64,
    /// `ω_{D²u}(r)`.
    pub omega: f64,
    /// `ω_f(r)`.
    pub omega_f: f64,
    /// `∫₀^r ω_f(t)/t dt`.
    pub dini: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub rows: Vec<ModulusRow>,
    /// `ω` is nondecreasing in `r`.
    pub monotone: bool,
    /// Log-log slope of `ω` against `r`.
    pub trend: Option<LineFit>,
}

/// `ω(r) = max { |H(x) − H(z)|_F : |x − z| ≤ r }` on `r_k = r_max·2^{−k}`.
pub fn modulus_report(field: &HessianField, modulus: &Modulus, r_max: f64, levels: usize) -> ModulusReport {
    let pts = field.points();
    let grid = PointGrid::new(pts.clone(), (r_max / 4.0).max(1e-9));
    let radii: Vec<f64> = (0..levels).map(|k| r_max * 0.5f64.powi(k as i32)).collect();
    let mut omega = vec![0.0f64; levels];
    for (i, x) in pts.iter().enumerate() {
        for j in grid.within(*x, r_max) {
            if j <= i {
                continue;
            }
            let d = (pts[j] - x).norm();
            let dh = (field.samples[i].hessian - field.samples[j].hessian).norm();
            for (k, r) in radii.iter().enumerate() {
                if d <= *r {
                    omega[k] = omega[k].max(dh);
                } else {
                    break;
                }
            }
        }
    }
    let rows: Vec<ModulusRow> = radii
        .iter()
        .zip(&omega)
        .map(|(&r, &w)| ModulusRow {
            r,
            omega: w,
            omega_f: modulus.eval(r),
            dini: modulus.dini_integral(r),
        })
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].omega <= w[0].omega);
    let trend = loglog_fit(&radii, &omega);
    ModulusReport { rows, monotone, trend }
}

/// Determinant ratios `det H / f` at interior samples.
pub fn determinant_ratios(field: &HessianField, f: &dyn Fn(Point) -> f64, min_distance: f64) -> Vec<f64> {
    field
        .samples
        .iter()
        .filter(|s| s.boundary_distance >= min_distance)
        .map(|s| s.hessian.determinant() / f(s.x))
        .collect()
}
