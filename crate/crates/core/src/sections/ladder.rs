//! Dyadic height ladders at a base point.

use serde::{Deserialize, Serialize};

use super::section::{centred_section, SectionOptions};
use crate::error::{Error, Result};
use crate::geometry::polygon::ConvexPolygon;
use crate::transport::field::TransportField;
use crate::transport::maxaffine::MaxAffine;
use crate::Point;

/// How the supporting slope at a base point is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeRule {
    /// The site of the active cell (a true subgradient of the discrete `u`).
    Site,
    /// Gradient of a local affine fit of the map (consistent at super-cell scale).
    #[default]
    Fitted,
}

pub fn supporting_slope(field: &TransportField, x0: Point, rule: SlopeRule) -> Point {
    match rule {
        SlopeRule::Site => field.u.brenier_map(x0),
        SlopeRule::Fitted => field.fitted_gradient(x0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LadderOptions {
    /// Number of levels `J`.
    pub levels: usize,
    /// Fixed top height; chosen from `diameter_fraction` when absent.
    pub h0: Option<f64>,
    /// Target `diam S^c_{h0} / diam Ω`.
    pub diameter_fraction: f64,
    /// Levels whose plain section covers fewer cells than this are floored.
    pub floor_cells: f64,
    pub slope_rule: SlopeRule,
    pub sections: SectionOptions,
    /// Largest decay abscissa as a fraction of `diam Ω`.
    pub decay_t_max: f64,
    /// Ratio between consecutive decay abscissae.
    pub decay_ratio: f64,
    /// Smallest decay abscissa in units of the cell spacing.
    pub decay_min_spacings: f64,
}

impl Default for LadderOptions {
    fn default() -> Self {
        Self {
            levels: 6,
            h0: None,
            diameter_fraction: 0.2,
            floor_cells: 8.0,
            slope_rule: SlopeRule::Fitted,
            sections: SectionOptions::default(),
            decay_t_max: 0.2,
            decay_ratio: std::f64::consts::SQRT_2,
            decay_min_spacings: 6.0,
        }
    }
}

/// `h_j = h0 · 4^{−j}`, `j = 0..levels`.
pub fn ladder_heights(h0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|j| h0 * 0.25f64.powi(j as i32)).collect()
}

/// Largest `h = h_guess · 2^k` whose centred section at `x0` has diameter at
/// most `target`.
pub fn choose_h0(u: &MaxAffine, region: &ConvexPolygon, x0: Point, slope: Point, target: f64, opts: &SectionOptions) -> Result<f64> {
    let diam = |h: f64| -> Option<f64> { centred_section(u, region, x0, h, slope, opts).ok().map(|s| s.diameter()) };
    let mut h = target * target / 8.0;
    let mut fits = diam(h).is_some_and(|d| d <= target);
    if fits {
        for _ in 0..40 {
            match diam(2.0 * h) {
                Some(d) if d <= target => h *= 2.0,
                _ => break,
            }
        }
        Ok(h)
    } else {
        for _ in 0..60 {
            h *= 0.5;
            fits = diam(h).is_some_and(|d| d <= target);
            if fits {
                return Ok(h);
            }
        }
        Err(Error::Construction(format!("no admissible top height at ({:.4}, {:.4})", x0.x, x0.y)))
    }
}
