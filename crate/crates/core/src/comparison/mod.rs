//! Dirichlet Monge–Ampère solver and the comparison experiments near a
//! boundary point.

pub mod cascade;
pub mod dirichlet;
pub mod gap;

use serde::{Deserialize, Serialize};

pub use cascade::{cascade_report, CascadeLevel, CascadeReport};
pub use dirichlet::{solve_dirichlet, DirichletMethod, DirichletOptions, DirichletSolution};
pub use gap::{comparison_gap, ComparisonGap, GapRow};

use crate::error::{Error, Result};
use crate::sections::frame::{Frame, LocalPotential};
use crate::sections::ladder::{supporting_slope, SlopeRule};
use crate::sections::{dh_set, DhSet};
use crate::transport::field::TransportField;
use crate::transport::maxaffine::MaxAffine;
use crate::{Mat2, Point};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparisonOptions {
    /// Boundary arclength fraction of `x₀`; the first ladder base point when absent.
    pub base: Option<f64>,
    pub slope_rule: SlopeRule,
    /// Target `diam D_{h0} / diam Ω` when `h0` is not given.
    pub diameter_fraction: f64,
    pub h0: Option<f64>,
    /// Number of heights in the gap ladder.
    pub levels: usize,
    /// Ratio between consecutive gap-ladder heights.
    pub height_ratio: f64,
    /// Lattice nodes across the inscribed disk of each `D_h`.
    pub nodes_across: usize,
    /// Cascade depth `K` (levels `k = 0..=K`); no cascade when zero.
    pub cascade_levels: usize,
    /// Hessian fit radius as a fraction of the inradius of `D_{k+1}`.
    pub fit_fraction: f64,
    pub dirichlet: DirichletOptions,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            base: None,
            slope_rule: SlopeRule::Fitted,
            diameter_fraction: 0.5,
            h0: None,
            levels: 5,
            height_ratio: 0.5,
            nodes_across: 40,
            cascade_levels: 5,
            fit_fraction: 0.5,
            dirichlet: DirichletOptions::default(),
        }
    }
}

impl ComparisonOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.levels < 3 {
            return bad(format!("comparison needs at least 3 levels, got {}", self.levels));
        }
        if !(self.height_ratio > 0.0 && self.height_ratio < 1.0) {
            return bad(format!("height_ratio must lie in (0, 1), got {}", self.height_ratio));
        }
        if self.nodes_across < 10 {
            return bad(format!("nodes_across must be at least 10, got {}", self.nodes_across));
        }
        if self.cascade_levels > 6 {
            return bad(format!("cascade depth {} exceeds 6", self.cascade_levels));
        }
        if !(self.diameter_fraction > 0.0 && self.diameter_fraction <= 1.0) {
            return bad(format!("diameter_fraction must lie in (0, 1], got {}", self.diameter_fraction));
        }
        if !(self.fit_fraction > 0.0 && self.fit_fraction <= 1.0) {
            return bad(format!("fit_fraction must lie in (0, 1], got {}", self.fit_fraction));
        }
        if let Some(h) = self.h0 {
            if !(h > 0.0) {
                return bad(format!("h0 must be positive, got {h}"));
            }
        }
        Ok(())
    }
}

/// `u` recentred at a boundary point and divided by `√f(x₀)`, so that the
/// local equation is `det D²ũ = f/f(x₀)`.
#[derive(Clone, Debug)]
pub struct Recentred {
    pub s: f64,
    pub x0: Point,
    pub f0: f64,
    pub local: LocalPotential,
}

impl Recentred {
    pub fn new(field: &TransportField, s: f64, rule: SlopeRule) -> Result<Self> {
        let frame = Frame::at_boundary(&field.source, s)?;
        let x0 = frame.origin;
        let f0 = field.density.eval(x0);
        let k = 1.0 / f0.sqrt();
        let ma = field.u.kernel();
        let scaled = MaxAffine::new(
            ma.slopes().iter().map(|y| y * k).collect(),
            ma.offsets().iter().map(|c| c * k).collect(),
        );
        let slope = supporting_slope(field, x0, rule) * k;
        let local = LocalPotential::new(&scaled, field.source.polygon(), frame, slope);
        Ok(Self { s, x0, f0, local })
    }

    /// `f/f(x₀)` at a local point.
    pub fn density(&self, field: &TransportField, z: Point) -> f64 {
        field.density.eval(self.local.frame.to_global(z)) / self.f0
    }

    /// Height whose `D_h` has diameter close to `target` (within a factor 2).
    pub fn height_for_diameter(&self, target: f64) -> Result<f64> {
        let mut h = target * target / 8.0;
        let mut last_ok: Option<f64> = None;
        for _ in 0..60 {
            match dh_set(&self.local, h) {
                Ok(d) => {
                    let diam = d.polygon.diameter();
                    if diam > 2.0 * target {
                        if last_ok.is_some() {
                            return Ok(h * 0.25);
                        }
                        h *= 0.25;
                    } else if diam < 0.5 * target {
                        last_ok = Some(h);
                        h *= 4.0;
                    } else {
                        return Ok(h);
                    }
                }
                Err(Error::HeightTooLarge { .. }) | Err(Error::Construction(_)) => {
                    if let Some(h) = last_ok {
                        return Ok(h);
                    }
                    h *= 0.25;
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::Construction(format!("no height with D_h diameter near {target:.3e}")))
    }
}

/// Solve `det D²w = rhs` on `D_h` with boundary value `g`, lattice centred
/// at `x_h`.
pub fn solve_on_dh(d: &DhSet, g: f64, rhs: f64, nodes_across: usize, opts: &DirichletOptions) -> Result<DirichletSolution> {
    let dx = 2.0 * d.inradius / nodes_across as f64;
    solve_dirichlet(&d.polygon, &|_| g, rhs, dx, d.center, opts)
}

/// Least-squares quadratic `c + b·(z − x) + ½(z − x)ᵀH(z − x)` through the
/// nodes within `r` of `x`; returns `H`.
pub fn quadratic_hessian(nodes: &[Point], values: &[f64], x: Point, r: f64) -> Option<Mat2> {
    let mut m = nalgebra::SMatrix::<f64, 6, 6>::zeros();
    let mut rhs = nalgebra::SVector::<f64, 6>::zeros();
    let mut count = 0;
    for (z, v) in nodes.iter().zip(values) {
        let d = (z - x) / r;
        if d.norm_squared() > 1.0 {
            continue;
        }
        let row = nalgebra::SVector::<f64, 6>::from([1.0, d.x, d.y, 0.5 * d.x * d.x, d.x * d.y, 0.5 * d.y * d.y]);
        m += row * row.transpose();
        rhs += *v * row;
        count += 1;
    }
    if count < 10 {
        return None;
    }
    let c = m.cholesky()?.solve(&rhs);
    let r2 = r * r;
    Some(Mat2::new(c[3], c[4], c[4], c[5]) / r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_fit_is_exact_on_quadratics() {
        let mut nodes = Vec::new();
        for i in -5..=5 {
            for j in -5..=5 {
                nodes.push(Point::new(i as f64 * 0.1, j as f64 * 0.1));
            }
        }
        let vals: Vec<f64> = nodes.iter().map(|p| 1.0 + p.x - 2.0 * p.y + 1.5 * p.x * p.x + 0.3 * p.x * p.y + 0.25 * p.y * p.y).collect();
        let h = quadratic_hessian(&nodes, &vals, Point::new(0.05, 0.0), 0.35).unwrap();
        assert!((h - Mat2::new(3.0, 0.3, 0.3, 0.5)).norm() < 1e-10, "{h}");
    }

    #[test]
    fn options_validate() {
        assert!(ComparisonOptions::default().validate().is_ok());
        let o = ComparisonOptions { cascade_levels: 7, ..Default::default() };
        assert!(o.validate().is_err());
    }
}
