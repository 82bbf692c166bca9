//! Source densities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::polygon::ConvexPolygon;
use crate::geometry::quadrature::polygon_integral;
use crate::Point;

/// Density shape before normalization, `{"kind": ...}` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum DensityDescriptor {
    #[default]
    Constant,
    /// `g(x) = 1 + amplitude·|x − anchor|^alpha`.
    Holder {
        alpha: f64,
        amplitude: f64,
        #[serde(default)]
        anchor: [f64; 2],
    },
    /// `g(x) = 1 + ω(|x − anchor|)` with `ω` interpolated linearly from a
    /// table of `[r, ω(r)]` pairs (`ω(0) = 0`, constant beyond the last row).
    Dini {
        table: Vec<[f64; 2]>,
        #[serde(default)]
        anchor: [f64; 2],
    },
}


/// Modulus of continuity of the normalized density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulus {
    Constant,
    Holder { alpha: f64, constant: f64 },
    Dini { table: Vec<[f64; 2]> },
}

impl Modulus {
    /// `ω(r)`.
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Modulus::Constant => 0.0,
            Modulus::Holder { alpha, constant } => constant * r.powf(alpha.min(1.0)),
            Modulus::Dini { table } => interp(table, r),
        }
    }

    /// `∫₀^r ω(t)/t dt` (the Dini integral).
    pub fn dini_integral(&self, r: f64) -> f64 {
        match self {
            Modulus::Constant => 0.0,
            Modulus::Holder { alpha, constant } => {
                let a = alpha.min(1.0);
                constant * r.powf(a) / a
            }
            Modulus::Dini { .. } => {
                if r <= 0.0 {
                    return 0.0;
                }
                // substitute t = e^s to handle the 1/t weight
                let lo = (r * 1e-12).ln();
                crate::geometry::quadrature::adaptive_simpson(&|s: f64| self.eval(s.exp()), lo, r.ln(), 1e-12)
            }
        }
    }
}

fn interp(table: &[[f64; 2]], r: f64) -> f64 {
    if table.is_empty() || r <= 0.0 {
        return 0.0;
    }
    let mut prev = [0.0, 0.0];
    for row in table {
        if r <= row[0] {
            let w = if row[0] > prev[0] { (r - prev[0]) / (row[0] - prev[0]) } else { 1.0 };
            return prev[1] + w * (row[1] - prev[1]);
        }
        prev = *row;
    }
    prev[1]
}

/// Normalized density `f = factor·g` on the source polygon, with
/// `∫_Ω f = target mass`.
#[derive(Clone, Debug)]
pub struct DensityField {
    descriptor: DensityDescriptor,
    factor: f64,
    lower: f64,
    upper: f64,
    /// Absolute tolerance per unit area for adaptive quadrature.
    pub quad_tol: f64,
}

impl DensityField {
    /// Normalize `descriptor` over `source` so its integral equals `mass`.
    pub fn new(descriptor: DensityDescriptor, source: &ConvexPolygon, mass: f64) -> Result<Self> {
        validate(&descriptor)?;
        if !(mass > 0.0) {
            return Err(Error::InvalidConfig("target mass must be positive".into()));
        }
        let mut field = DensityField {
            descriptor,
            factor: 1.0,
            lower: 1.0,
            upper: 1.0,
            quad_tol: 1e-9,
        };
        let total = field.integrate(source.vertices());
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidConfig("density is not normalizable".into()));
        }
        field.factor = mass / total;
        let (gmin, gmax) = field.raw_bounds(source);
        field.lower = field.factor * gmin;
        field.upper = field.factor * gmax;
        Ok(field)
    }

    /// Constant density `value` (no normalization).
    pub fn constant(value: f64) -> Self {
        DensityField {
            descriptor: DensityDescriptor::Constant,
            factor: value,
            lower: value,
            upper: value,
            quad_tol: 1e-9,
        }
    }

    pub fn descriptor(&self) -> &DensityDescriptor {
        &self.descriptor
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.descriptor, DensityDescriptor::Constant)
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// `(λ, Λ)` over the source polygon.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    fn raw(&self, x: Point) -> f64 {
        match &self.descriptor {
            DensityDescriptor::Constant => 1.0,
            DensityDescriptor::Holder { alpha, amplitude, anchor } => {
                let r = (x - Point::new(anchor[0], anchor[1])).norm();
                1.0 + amplitude * r.powf(*alpha)
            }
            DensityDescriptor::Dini { table, anchor } => {
                let r = (x - Point::new(anchor[0], anchor[1])).norm();
                1.0 + interp(table, r)
            }
        }
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.factor * self.raw(x)
    }

    /// Modulus of continuity of `f` itself.
    pub fn modulus(&self) -> Modulus {
        match &self.descriptor {
            DensityDescriptor::Constant => Modulus::Constant,
            DensityDescriptor::Holder { alpha, amplitude, .. } => {
                // |r^α − s^α| ≤ |r − s|^α for α ≤ 1; for α > 1 use the Lipschitz bound on the unit scale
                Modulus::Holder {
                    alpha: alpha.min(1.0),
                    constant: self.factor * amplitude.abs() * alpha.max(1.0),
                }
            }
            DensityDescriptor::Dini { table, .. } => Modulus::Dini {
                table: table.iter().map(|r| [r[0], self.factor * r[1]]).collect(),
            },
        }
    }

    /// `∫ f` over a convex polygon given by its vertices.
    pub fn integrate(&self, vertices: &[Point]) -> f64 {
        if vertices.len() < 3 {
            return 0.0;
        }
        if self.is_constant() {
            return self.factor * crate::geometry::polygon::signed_area(vertices);
        }
        polygon_integral(vertices, &|x| self.eval(x), self.quad_tol)
    }

    /// `∫ f` along the segment `[a, b]`.
    pub fn integrate_segment(&self, a: Point, b: Point) -> f64 {
        if self.is_constant() {
            return self.factor * (b - a).norm();
        }
        crate::geometry::quadrature::segment_gauss3(a, b, &|x| self.eval(x))
    }

    fn raw_bounds(&self, poly: &ConvexPolygon) -> (f64, f64) {
        let anchor = match &self.descriptor {
            DensityDescriptor::Constant => return (1.0, 1.0),
            DensityDescriptor::Holder { anchor, .. } | DensityDescriptor::Dini { anchor, .. } => Point::new(anchor[0], anchor[1]),
        };
        let dmax = poly.vertices().iter().map(|v| (v - anchor).norm()).fold(0.0, f64::max);
        let dmin = if poly.contains(anchor) {
            0.0
        } else {
            poly.edges()
                .map(|(a, b)| {
                    let d = b - a;
                    let t = ((anchor - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
                    (a + t * d - anchor).norm()
                })
                .fold(f64::INFINITY, f64::min)
        };
        let g = |r: f64| self.raw(anchor + Point::new(r, 0.0));
        // g is monotone in the radius for non-negative amplitudes / tables
        let (a, b) = (g(dmin), g(dmax));
        (a.min(b), a.max(b))
    }
}

fn validate(d: &DensityDescriptor) -> Result<()> {
    match d {
        DensityDescriptor::Constant => Ok(()),
        DensityDescriptor::Holder { alpha, amplitude, .. } => {
            if !(*alpha > 0.0 && *alpha <= 2.0) {
                return Err(Error::InvalidConfig(format!("Hölder exponent {alpha} outside (0, 2]")));
            }
            if !(*amplitude >= 0.0) {
                return Err(Error::InvalidConfig("Hölder amplitude must be non-negative".into()));
            }
            Ok(())
        }
        DensityDescriptor::Dini { table, .. } => {
            let mut last = 0.0;
            for row in table {
                if !(row[0] > last) || !(row[1] >= 0.0) {
                    return Err(Error::InvalidConfig("Dini table must have increasing radii and non-negative values".into()));
                }
                last = row[0];
            }
            Ok(())
        }
    }
}
