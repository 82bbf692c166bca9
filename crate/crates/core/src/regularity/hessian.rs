//! Finite-scale Hessian estimates of the potential.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::transport::field::TransportField;
use crate::transport::maxaffine::MaxAffine;
use crate::{Mat2, Point};

/// Sample points for a [`HessianField`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleSpec {
    /// Every nonempty cell centroid, weighted by its cell area.
    Cells,
    /// Cell centroids within `radius` of `center`.
    Near { center: [f64; 2], radius: f64 },
    /// Explicit points with unit weights.
    Points { points: Vec<[f64; 2]> },
}

/// Fit radius `r(x) = max(ρ·dist(x, ∂Ω), κ·N^{−1/4})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusPolicy {
    pub rho: f64,
    pub kappa: f64,
    /// Fewer cells in the ball widen it (flagged).
    pub min_cells: usize,
}

impl RadiusPolicy {
    pub fn radius(&self, dist: f64, n: usize) -> f64 {
        (self.rho * dist).max(self.kappa * (n as f64).powf(-0.25))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianSample {
    pub x: Point,
    pub hessian: Mat2,
    pub radius: f64,
    pub residual: f64,
    pub cells: usize,
    pub boundary_distance: f64,
    pub weight: f64,
    /// The radius had to be widened to reach `min_cells`.
    pub widened: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HessianField {
    pub samples: Vec<HessianSample>,
    /// Samples without enough cells even after widening.
    pub dropped: Vec<Point>,
    pub n: usize,
}

impl HessianField {
    pub fn points(&self) -> Vec<Point> {
        self.samples.iter().map(|s| s.x).collect()
    }
}

const MAX_WIDENINGS: usize = 4;

/// Least-squares Hessian field from affine fits of the map.
pub fn hessian_field(field: &TransportField, spec: &SampleSpec, policy: &RadiusPolicy, exclude: &dyn Fn(Point) -> bool) -> HessianField {
    let pts: Vec<(Point, f64)> = match spec {
        SampleSpec::Cells => (0..field.n())
            .filter(|&i| field.areas[i] > 0.0)
            .map(|i| (field.centroids[i], field.areas[i]))
            .collect(),
        SampleSpec::Near { center, radius } => {
            let c = Point::new(center[0], center[1]);
            field.cells_near(c, *radius).into_iter().map(|i| (field.centroids[i], field.areas[i])).collect()
        }
        SampleSpec::Points { points } => points.iter().map(|p| (Point::new(p[0], p[1]), 1.0)).collect(),
    };
    let pts: Vec<(Point, f64)> = pts.into_iter().filter(|(x, _)| !exclude(*x)).collect();
    let n = field.n();
    let fits: Vec<Result<HessianSample, Point>> = pts
        .par_iter()
        .map(|&(x, w)| {
            let dist = field.source.boundary_distance(x);
            let mut r = policy.radius(dist, n);
            for k in 0..=MAX_WIDENINGS {
                if let Some(fit) = field.fit_map(x, r, policy.min_cells) {
                    return Ok(HessianSample {
                        x,
                        hessian: fit.hessian,
                        radius: r,
                        residual: fit.residual,
                        cells: fit.count,
                        boundary_distance: dist,
                        weight: w,
                        widened: k > 0,
                    });
                }
                r *= 2.0;
            }
            Err(x)
        })
        .collect();
    let mut out = HessianField {
        n,
        ..Default::default()
    };
    for f in fits {
        match f {
            Ok(s) => out.samples.push(s),
            Err(x) => out.dropped.push(x),
        }
    }
    out
}

/// Centred second differences of `u` at scale `r` (the independent estimator).
pub fn second_difference_hessian(u: &MaxAffine, x: Point, r: f64) -> Mat2 {
    let e1 = Point::new(r, 0.0);
    let e2 = Point::new(0.0, r);
    let u0 = u.value(x);
    let d11 = (u.value(x + e1) - 2.0 * u0 + u.value(x - e1)) / (r * r);
    let d22 = (u.value(x + e2) - 2.0 * u0 + u.value(x - e2)) / (r * r);
    let d12 = (u.value(x + e1 + e2) - u.value(x + e1 - e2) - u.value(x - e1 + e2) + u.value(x - e1 - e2)) / (4.0 * r * r);
    Mat2::new(d11, d12, d12, d22)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sections::section::tests::quad;

    #[test]
    fn second_difference_of_quadratic() {
        let u = quad(400, 1.0);
        let h = second_difference_hessian(&u, Point::new(0.1, -0.2), 0.1);
        assert!((h - Mat2::identity()).norm() < 0.01, "{h}");
    }

    #[test]
    fn radius_policy() {
        let p = RadiusPolicy { rho: 0.5, kappa: 2.0, min_cells: 6 };
        assert!((p.radius(0.0, 16) - 1.0).abs() < 1e-15);
        assert!((p.radius(4.0, 16) - 2.0).abs() < 1e-15);
    }
}
