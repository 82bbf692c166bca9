//! Derivative estimates and the boundary-regularity diagnostics built on them.

pub mod hessian;
pub mod norms;
pub mod obliqueness;

use serde::{Deserialize, Serialize};

pub use hessian::{hessian_field, second_difference_hessian, HessianField, HessianSample, RadiusPolicy, SampleSpec};
pub use norms::{band_spread, holder_seminorm, modulus_report, sobolev_norm, HolderBand, ModulusReport, ModulusRow};
pub use obliqueness::{obliqueness_profile, ObliquenessProfile, ObliquenessSample};

use crate::error::Result;
use crate::numerics::percentile;
use crate::transport::density::Modulus;
use crate::transport::field::TransportField;
use crate::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegularityOptions {
    pub rho: f64,
    /// Radius floor coefficient; `2·diam Ω` when absent.
    pub kappa: Option<f64>,
    pub min_cells: usize,
    pub p_values: Vec<f64>,
    /// Hölder exponent of the band quotients; the density's exponent (capped
    /// at 1) when absent, or 1/2 for constant densities.
    pub holder_alpha: Option<f64>,
    pub holder_bands: usize,
    /// Top band distance; `0.25·diam Ω` when absent.
    pub holder_d0: Option<f64>,
    /// Radius of the sample cluster around the base point; `0.25·diam Ω`
    /// when absent.
    pub near_radius: Option<f64>,
    pub modulus_levels: usize,
    /// Largest modulus radius; `0.25·diam Ω` when absent.
    pub modulus_r_max: Option<f64>,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        Self {
            rho: 0.5,
            kappa: None,
            min_cells: 6,
            p_values: vec![1.0, 2.0, 4.0, 8.0],
            holder_alpha: None,
            holder_bands: 3,
            holder_d0: None,
            near_radius: None,
            modulus_levels: 6,
            modulus_r_max: None,
        }
    }
}

impl RegularityOptions {
    pub fn policy(&self, diameter: f64) -> RadiusPolicy {
        RadiusPolicy {
            rho: self.rho,
            kappa: self.kappa.unwrap_or(2.0 * diameter),
            min_cells: self.min_cells,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevEntry {
    pub p: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(v: &[f64]) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        Some(Summary {
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            median: percentile(v, 50.0),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            count: v.len(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderTable {
    pub center: Point,
    pub alpha: f64,
    pub d0: f64,
    pub bands: Vec<HolderBand>,
    pub spread: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub obliqueness: ObliquenessProfile,
    pub holder: Option<HolderTable>,
    pub sobolev: Vec<SobolevEntry>,
    pub modulus: ModulusReport,
    /// `det H / f` at samples at least one fit radius from the boundary.
    pub det_ratio: Option<Summary>,
    /// Relative Frobenius difference between the map-fit and
    /// second-difference estimators at interior samples.
    pub estimator_gap: Option<Summary>,
    pub samples: usize,
    pub widened: usize,
    pub dropped: usize,
}

/// Run every regularity diagnostic. `base` selects the cluster used for the
/// Hölder bands.
pub fn analyze(
    field: &TransportField,
    opts: &RegularityOptions,
    boundary_samples: usize,
    corner_radius: f64,
    base: Option<Point>,
) -> Result<RegularityReport> {
    let diam = field.source.diameter();
    let policy = opts.policy(diam);
    let exclude = |x: Point| field.source.near_corner(x, corner_radius);
    let obliqueness = obliqueness_profile(field, boundary_samples, corner_radius)?;

    let all = hessian_field(field, &SampleSpec::Cells, &policy, &exclude);
    let sobolev = opts
        .p_values
        .iter()
        .map(|&p| SobolevEntry {
            p,
            value: sobolev_norm(&all, p),
        })
        .collect();
    let modulus = field.density.modulus();
    let r_max = opts.modulus_r_max.unwrap_or(0.25 * diam);
    let modulus_table = modulus_report(&all, &modulus, r_max, opts.modulus_levels);

    let interior: Vec<&HessianSample> = all.samples.iter().filter(|s| s.boundary_distance >= s.radius).collect();
    let det: Vec<f64> = interior.iter().map(|s| s.hessian.determinant() / field.density.eval(s.x)).collect();
    let gaps: Vec<f64> = interior
        .iter()
        .step_by((interior.len() / 256).max(1))
        .map(|s| {
            let r = s.radius.min(0.5 * s.boundary_distance).max(2.0 * field.spacing());
            let h2 = second_difference_hessian(field.u.kernel(), s.x, r);
            (h2 - s.hessian).norm() / s.hessian.norm()
        })
        .collect();

    let holder = match base {
        Some(c) => {
            let alpha = opts.holder_alpha.unwrap_or(match modulus {
                Modulus::Holder { alpha, .. } => alpha.min(1.0),
                _ => 0.5,
            });
            let near = opts.near_radius.unwrap_or(0.25 * diam);
            let d0 = opts.holder_d0.unwrap_or(0.25 * diam);
            let local = hessian_field(
                field,
                &SampleSpec::Near {
                    center: [c.x, c.y],
                    radius: near,
                },
                &policy,
                &exclude,
            );
            let bands = holder_seminorm(&local, alpha, d0, opts.holder_bands);
            Some(HolderTable {
                center: c,
                alpha,
                d0,
                spread: band_spread(&bands),
                bands,
            })
        }
        None => None,
    };

    Ok(RegularityReport {
        obliqueness,
        holder,
        sobolev,
        modulus: modulus_table,
        det_ratio: Summary::of(&det),
        estimator_gap: Summary::of(&gaps),
        samples: all.samples.len(),
        widened: all.samples.iter().filter(|s| s.widened).count(),
        dropped: all.dropped.len(),
    })
}
