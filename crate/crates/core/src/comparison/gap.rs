//! `sup |ũ − w|` over a ladder of `D_h`, `w` solving `det D²w = 1` in `D_h`
//! with `w = h` on its boundary.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_on_dh, ComparisonOptions, Recentred};
use crate::error::{Error, Result};
use crate::numerics::{loglog_fit, LineFit};
use crate::sections::dh_set;
use crate::transport::field::TransportField;
use crate::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub h: f64,
    pub a_h: f64,
    pub roundness: f64,
    pub nodes: usize,
    pub spacing: f64,
    /// Sup over nodes in `D_h ∩ Ω`.
    pub sup_inside: f64,
    /// Sup over all nodes, `ũ` extended evenly across `{z₂ = a_h}`.
    pub sup_all: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGap {
    pub s: f64,
    pub x0: Point,
    pub f0: f64,
    pub rows: Vec<GapRow>,
    /// Heights whose construction or solve failed, with the reason.
    pub failures: Vec<(f64, String)>,
    pub exponent: Option<LineFit>,
    pub exponent_all: Option<LineFit>,
}

impl ComparisonGap {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,a_h,roundness,nodes,spacing,sup_inside,sup_all,residual\n");
        for r in &self.rows {
            s += &format!(
                "{:.6e},{:.6e},{:.6},{},{:.6e},{:.6e},{:.6e},{:.3e}\n",
                r.h, r.a_h, r.roundness, r.nodes, r.spacing, r.sup_inside, r.sup_all, r.residual
            );
        }
        if let Some(f) = &self.exponent {
            s += &format!("# exponent,{:.6},{:.6}\n", f.slope, f.half_width);
        }
        s
    }
}

fn gap_row(rc: &Recentred, h: f64, opts: &ComparisonOptions) -> Result<GapRow> {
    let d = dh_set(&rc.local, h)?;
    let w = solve_on_dh(&d, h, 1.0, opts.nodes_across, &opts.dirichlet)?;
    let region = &rc.local.region;
    let mut sup_inside: f64 = 0.0;
    let mut sup_all: f64 = 0.0;
    for (z, v) in w.nodes.iter().zip(&w.values) {
        if region.contains(*z) {
            let e = (rc.local.value(*z) - v).abs();
            sup_inside = sup_inside.max(e);
            sup_all = sup_all.max(e);
        } else {
            let r = Point::new(z.x, 2.0 * d.a_h - z.y);
            sup_all = sup_all.max((rc.local.value(r) - v).abs());
        }
    }
    Ok(GapRow {
        h,
        a_h: d.a_h,
        roundness: d.roundness(),
        nodes: w.nodes.len(),
        spacing: w.spacing,
        sup_inside,
        sup_all,
        residual: w.residual,
    })
}

/// Gap ladder at boundary fraction `s`; needs at least three successful
/// levels for the exponent fit.
pub fn comparison_gap(field: &TransportField, s: f64, opts: &ComparisonOptions) -> Result<ComparisonGap> {
    opts.validate()?;
    let rc = Recentred::new(field, s, opts.slope_rule)?;
    let h0 = match opts.h0 {
        Some(h) => h,
        None => rc.height_for_diameter(opts.diameter_fraction * field.source.diameter())?,
    };
    let heights: Vec<f64> = (0..opts.levels).map(|j| h0 * opts.height_ratio.powi(j as i32)).collect();
    let results: Vec<Result<GapRow>> = heights.par_iter().map(|&h| gap_row(&rc, h, opts)).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (h, r) in heights.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((*h, e.to_string())),
        }
    }
    if rows.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: rows.len() });
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let exponent = loglog_fit(&hs, &rows.iter().map(|r| r.sup_inside).collect::<Vec<_>>());
    let exponent_all = loglog_fit(&hs, &rows.iter().map(|r| r.sup_all).collect::<Vec<_>>());
    Ok(ComparisonGap {
        s,
        x0: rc.x0,
        f0: rc.f0,
        rows,
        failures,
        exponent,
        exponent_all,
    })
}
