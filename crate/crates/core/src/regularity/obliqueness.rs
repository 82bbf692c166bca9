//! Obliqueness `⟨ν(x), ν*(Du(x))⟩` along the source boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::percentile;
use crate::transport::field::TransportField;
use crate::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObliquenessSample {
    /// Boundary arclength fraction.
    pub s: f64,
    pub x: Point,
    pub normal: Point,
    pub image: Point,
    pub projection: Point,
    pub target_normal: Point,
    pub product: f64,
    /// Distance from the image to the target boundary.
    pub distance: f64,
    /// Projection distance above the reliability threshold, or the
    /// projection is within twice that distance of a target corner (the
    /// nearest piece is then ambiguous).
    pub unreliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObliquenessProfile {
    pub samples: Vec<ObliquenessSample>,
    /// Minimum over reliable samples.
    pub min: f64,
    pub p5: f64,
    pub p25: f64,
    pub p50: f64,
    /// `5·diam(Ω*)·N^{−1/2}`.
    pub threshold: f64,
    pub unreliable: usize,
    /// Samples skipped inside corner-exclusion zones.
    pub excluded: usize,
    pub max_distance: f64,
}

impl ObliquenessProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("s,x,y,product,distance,unreliable\n");
        for p in &self.samples {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.s, p.x.x, p.x.y, p.product, p.distance, p.unreliable as u8
            ));
        }
        s
    }
}

/// Profile over `m` boundary samples equispaced in arclength, skipping
/// points within `corner_radius` of a corner of the source.
pub fn obliqueness_profile(field: &TransportField, m: usize, corner_radius: f64) -> Result<ObliquenessProfile> {
    if m == 0 {
        return Err(Error::InvalidConfig("need at least one boundary sample".into()));
    }
    let threshold = 5.0 * field.target.diameter() / (field.n() as f64).sqrt();
    let mut samples = Vec::with_capacity(m);
    let mut excluded = 0;
    for k in 0..m {
        let s = (k as f64 + 0.5) / m as f64;
        let x = field.source.point_at(s);
        if field.source.near_corner(x, corner_radius) {
            excluded += 1;
            continue;
        }
        let normal = match field.source.inner_normal(s) {
            Ok(n) => n,
            Err(Error::AmbiguousNormal { .. }) => {
                excluded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let image = field.u.brenier_map(x);
        let bp = field.target.project(image);
        let target_normal = field.target.inner_normal_near(image);
        samples.push(ObliquenessSample {
            s,
            x,
            normal,
            image,
            projection: bp.point,
            target_normal,
            product: normal.dot(&target_normal),
            distance: bp.distance,
            unreliable: bp.distance > threshold || field.target.near_corner(bp.point, 2.0 * bp.distance),
        });
    }
    let reliable: Vec<f64> = samples.iter().filter(|p| !p.unreliable).map(|p| p.product).collect();
    if reliable.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(ObliquenessProfile {
        min: reliable.iter().copied().fold(f64::INFINITY, f64::min),
        p5: percentile(&reliable, 5.0),
        p25: percentile(&reliable, 25.0),
        p50: percentile(&reliable, 50.0),
        threshold,
        unreliable: samples.iter().filter(|p| p.unreliable).count(),
        excluded,
        max_distance: samples.iter().map(|p| p.distance).fold(0.0, f64::max),
        samples,
    })
}
