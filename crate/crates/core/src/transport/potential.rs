//! Max-affine Brenier potentials and their Legendre duals.

use serde::{Deserialize, Serialize};

use super::laguerre::LaguerreDiagram;
use super::maxaffine::MaxAffine;
use crate::error::{Error, Result};
use crate::geometry::polygon::ConvexPolygon;
use crate::Point;

/// `u(x) = max_i (x·y_i − ψ_i)`, defined on the whole plane.
#[derive(Clone, Debug)]
pub struct SemiDiscretePotential {
    sites: Vec<Point>,
    masses: Vec<f64>,
    weights: Vec<f64>,
    gauge: usize,
    residual: f64,
    kernel: MaxAffine,
}

/// JSON form `{sites, masses, weights, gauge, residual}`.
#[derive(Serialize, Deserialize)]
struct PotentialJson {
    sites: Vec<[f64; 2]>,
    masses: Vec<f64>,
    weights: Vec<f64>,
    gauge: usize,
    residual: f64,
}

impl Serialize for SemiDiscretePotential {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PotentialJson {
            sites: self.sites.iter().map(|p| [p.x, p.y]).collect(),
            masses: self.masses.clone(),
            weights: self.weights.clone(),
            gauge: self.gauge,
            residual: self.residual,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SemiDiscretePotential {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PotentialJson::deserialize(d)?;
        let sites = j.sites.iter().map(|p| Point::new(p[0], p[1])).collect();
        SemiDiscretePotential::new(sites, j.masses, j.weights, j.gauge, j.residual).map_err(serde::de::Error::custom)
    }
}

impl SemiDiscretePotential {
    pub fn new(sites: Vec<Point>, masses: Vec<f64>, weights: Vec<f64>, gauge: usize, residual: f64) -> Result<Self> {
        let n = sites.len();
        if n == 0 || masses.len() != n || weights.len() != n || gauge >= n {
            return Err(Error::InvalidSpec("inconsistent potential arrays".into()));
        }
        if sites.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidSpec("non-finite potential data".into()));
        }
        let kernel = MaxAffine::new(sites.clone(), weights.clone());
        Ok(Self {
            sites,
            masses,
            weights,
            gauge,
            residual,
            kernel,
        })
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn gauge(&self) -> usize {
        self.gauge
    }
    /// Max relative cell-mass error at the end of the solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }
    pub fn len(&self) -> usize {
        self.sites.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
    pub fn kernel(&self) -> &MaxAffine {
        &self.kernel
    }

    pub fn value(&self, x: Point) -> f64 {
        self.kernel.value(x)
    }

    /// Index of the active piece (lowest index on ties).
    pub fn active(&self, x: Point) -> usize {
        self.kernel.argmax(x).0
    }

    /// Brenier map `∇u(x)`: the site of the active piece.
    pub fn brenier_map(&self, x: Point) -> Point {
        self.sites[self.active(x)]
    }

    pub fn laguerre_diagram(&self, source: &ConvexPolygon) -> LaguerreDiagram {
        LaguerreDiagram::new(&self.kernel, source)
    }

    /// Legendre dual restricted to the source polygon.
    ///
    /// `u` is affine on every cell, so `sup_{x ∈ Ω} (x·y − u(x))` is attained
    /// at a diagram vertex; the dual is the max-affine function with those
    /// vertices as slopes.
    pub fn legendre_dual(&self, source: &ConvexPolygon) -> DualPotential {
        let diagram = self.laguerre_diagram(source);
        let mut verts = diagram.vertices();
        verts.extend(source.vertices().iter().copied());
        verts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        verts.dedup();
        let offsets: Vec<f64> = verts.iter().map(|x| self.value(*x)).collect();
        DualPotential {
            kernel: MaxAffine::new(verts, offsets),
        }
    }
}

/// `v(y) = max_x (x·y − u(x))` over the vertices of the source polygonization
/// and the Laguerre diagram.
#[derive(Clone, Debug)]
pub struct DualPotential {
    kernel: MaxAffine,
}

impl DualPotential {
    pub fn value(&self, y: Point) -> f64 {
        self.kernel.value(y)
    }

    /// Maximizing source point, the dual map `∇v(y)`.
    pub fn dual_map(&self, y: Point) -> Point {
        self.kernel.gradient(y)
    }

    pub fn kernel(&self) -> &MaxAffine {
        &self.kernel
    }

    /// Conjugate of `v` evaluated at `x` using the given slopes
    /// (`max_k (x·y_k − v(y_k))`).
    pub fn conjugate_at(&self, x: Point, slopes: &[Point]) -> f64 {
        slopes
            .iter()
            .map(|y| x.dot(y) - self.value(*y))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
