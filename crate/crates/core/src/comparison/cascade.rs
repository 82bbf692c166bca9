//! Dyadic cascade `D_k = D_{h0·4^{-k}}` of constant-rhs Dirichlet problems.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{quadratic_hessian, solve_on_dh, ComparisonOptions, DirichletSolution, Recentred};
use crate::error::{Error, Result};
use crate::geometry::ellipse::{john_normalize, NormalizingMap};
use crate::geometry::polygon::ConvexPolygon;
use crate::sections::{dh_set, DhSet};
use crate::transport::field::TransportField;
use crate::{Mat2, Point};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeLevel {
    pub k: usize,
    pub h: f64,
    pub a_h: f64,
    pub domain: ConvexPolygon,
    /// `f_k = inf_{D_k ∩ Ω} f/f(x₀)`.
    pub f_k: f64,
    /// `ω_k = osc_{D_k ∩ Ω} f/f(x₀)`.
    pub omega: f64,
    pub nodes: usize,
    pub residual: f64,
    /// Normalized Hessian of `u_k` at `x_{h_{k+1}}` (absent on the last level).
    pub hessian_next: Option<Mat2>,
    /// Normalized Hessian of `u_k` at its own `x_{h_k}`.
    pub hessian_own: Option<Mat2>,
    /// `|D²u_k − D²u_{k+1}|_F` at `x_{h_{k+1}}`.
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeReport {
    pub s: f64,
    pub x0: Point,
    pub h0: f64,
    pub normalization: NormalizingMap,
    pub levels: Vec<CascadeLevel>,
    /// Why the cascade stopped early.
    pub truncated: Option<String>,
    /// `max gap_k/ω_k` over levels with `ω_k > 0`.
    pub constant: Option<f64>,
    /// `max/min` of `gap_k/ω_k`.
    pub ratio_spread: Option<f64>,
    pub gap_sum: f64,
    pub omega_sum: f64,
}

impl CascadeReport {
    pub fn gaps(&self) -> Vec<f64> {
        self.levels.iter().filter_map(|l| l.gap).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,h,a_h,f_k,omega,gap,ratio,nodes,residual\n");
        for l in &self.levels {
            let gap = l.gap.map(|g| format!("{g:.6e}")).unwrap_or_default();
            let ratio = match l.gap {
                Some(g) if l.omega > 0.0 => format!("{:.6e}", g / l.omega),
                _ => String::new(),
            };
            s += &format!(
                "{},{:.6e},{:.6e},{:.8},{:.6e},{},{},{},{:.3e}\n",
                l.k, l.h, l.a_h, l.f_k, l.omega, gap, ratio, l.nodes, l.residual
            );
        }
        s
    }
}

struct Solved {
    d: DhSet,
    f_k: f64,
    omega: f64,
    w: DirichletSolution,
}

fn solve_level(field: &TransportField, rc: &Recentred, h: f64, opts: &ComparisonOptions) -> Result<Solved> {
    let d = dh_set(&rc.local, h)?;
    // sample f on D_k ∩ Ω: a fine lattice, D⁺ vertices and x₀ itself
    let probe = solve_probe(&d, opts.nodes_across);
    let mut vals: Vec<f64> = probe
        .iter()
        .chain(d.upper.vertices())
        .chain(std::iter::once(&Point::zeros()))
        .filter(|z| rc.local.region.contains_with(**z, 1e-12))
        .map(|z| rc.density(field, *z))
        .collect();
    if vals.is_empty() {
        vals.push(1.0);
    }
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = solve_on_dh(&d, h, lo, opts.nodes_across, &opts.dirichlet)?;
    Ok(Solved { d, f_k: lo, omega: hi - lo, w })
}

fn solve_probe(d: &DhSet, across: usize) -> Vec<Point> {
    let dx = 2.0 * d.inradius / across as f64;
    let (lo, hi) = d.polygon.bounding_box();
    let mut out = Vec::new();
    let nx = ((hi.x - lo.x) / dx).ceil() as usize;
    let ny = ((hi.y - lo.y) / dx).ceil() as usize;
    for j in 0..=ny {
        for i in 0..=nx {
            let z = lo + Point::new(i as f64 * dx, j as f64 * dx);
            if d.polygon.contains(z) {
                out.push(z);
            }
        }
    }
    out
}

/// Cascade at boundary fraction `s` with `opts.cascade_levels` steps.
pub fn cascade_report(field: &TransportField, s: f64, opts: &ComparisonOptions) -> Result<CascadeReport> {
    opts.validate()?;
    if opts.cascade_levels == 0 {
        return Err(Error::InvalidConfig("cascade depth is zero".into()));
    }
    let rc = Recentred::new(field, s, opts.slope_rule)?;
    let h0 = match opts.h0 {
        Some(h) => h,
        None => rc.height_for_diameter(opts.diameter_fraction * field.source.diameter())?,
    };
    let d0 = dh_set(&rc.local, h0)?;
    let (_, t) = john_normalize(&d0.polygon)?;
    let heights: Vec<f64> = (0..=opts.cascade_levels).map(|k| h0 * 0.25f64.powi(k as i32)).collect();
    let solved: Vec<Result<Solved>> = heights.par_iter().map(|&h| solve_level(field, &rc, h, opts)).collect();
    let mut ok = Vec::new();
    let mut truncated = None;
    for (k, r) in solved.into_iter().enumerate() {
        match r {
            Ok(s) => ok.push(s),
            Err(e) => {
                truncated = Some(format!("level {k}: {e}"));
                break;
            }
        }
    }
    // Ĥ = L⁻ᵀ H L⁻¹ / h0 in the coordinates where D_0 is John-normalized and has height 1.
    let li = t.linear.try_inverse().ok_or(Error::SingularMap { det: t.determinant() })?;
    let normalize = |h: Mat2| li.transpose() * h * li / h0;
    let hess = |s: &Solved, at: Point, r: f64| quadratic_hessian(&s.w.nodes, &s.w.values, at, r).map(normalize);
    let mut levels = Vec::new();
    for (k, s) in ok.iter().enumerate() {
        let own_r = opts.fit_fraction * s.d.inradius;
        let hessian_own = hess(s, s.d.center, own_r);
        let (hessian_next, gap) = match ok.get(k + 1) {
            Some(next) => {
                let at = next.d.center;
                let r = opts.fit_fraction * next.d.inradius;
                let a = hess(s, at, r);
                let b = hess(next, at, r);
                let gap = match (a, b) {
                    (Some(a), Some(b)) => Some((a - b).norm()),
                    _ => None,
                };
                (a, gap)
            }
            None => (None, None),
        };
        levels.push(CascadeLevel {
            k,
            h: s.d.h,
            a_h: s.d.a_h,
            domain: s.d.polygon.clone(),
            f_k: s.f_k,
            omega: s.omega,
            nodes: s.w.nodes.len(),
            residual: s.w.residual,
            hessian_next,
            hessian_own,
            gap,
        });
    }
    let ratios: Vec<f64> = levels
        .iter()
        .filter_map(|l| match l.gap {
            Some(g) if l.omega > 0.0 => Some(g / l.omega),
            _ => None,
        })
        .collect();
    let constant = ratios.iter().copied().reduce(f64::max);
    let ratio_spread = match (constant, ratios.iter().copied().reduce(f64::min)) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    let gap_sum = levels.iter().filter_map(|l| l.gap).sum();
    let omega_sum = levels.iter().filter(|l| l.gap.is_some()).map(|l| l.omega).sum();
    Ok(CascadeReport {
        s,
        x0: rc.x0,
        h0,
        normalization: t,
        levels,
        truncated,
        constant,
        ratio_spread,
        gap_sum,
        omega_sum,
    })
}
