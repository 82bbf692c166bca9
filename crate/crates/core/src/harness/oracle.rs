//! Closed-form oracle scenarios.

use super::config::{OracleSpec, RigidMotion, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::domain::DomainDescriptor;
use crate::geometry::quadrature::adaptive_simpson;
use crate::transport::density::DensityDescriptor;
use crate::{Mat2, Point};

/// Radial map `x ↦ R(|x|) x/|x|` between unit disks with
/// `∫₀^r f(s) s ds = R(r)²/2`.
#[derive(Clone, Debug)]
pub struct RadialOracle {
    profile: RadialProfile,
    /// Normalization so that `∫_{B₁} f = π`.
    factor: f64,
}

#[derive(Clone, Debug)]
enum RadialProfile {
    Constant,
    /// `1 + amplitude·r^alpha`.
    Power { alpha: f64, amplitude: f64 },
    /// `1 + ω(r)`, piecewise linear.
    Table(Vec<[f64; 2]>),
}

const TOL: f64 = 1e-12;

impl RadialOracle {
    pub fn new(density: &DensityDescriptor) -> Result<Self> {
        let profile = match density {
            DensityDescriptor::Constant => RadialProfile::Constant,
            DensityDescriptor::Holder { alpha, amplitude, anchor } => {
                if anchor != &[0.0, 0.0] {
                    return Err(Error::InvalidConfig("radial oracle needs the density anchored at the origin".into()));
                }
                RadialProfile::Power {
                    alpha: *alpha,
                    amplitude: *amplitude,
                }
            }
            DensityDescriptor::Dini { table, anchor } => {
                if anchor != &[0.0, 0.0] {
                    return Err(Error::InvalidConfig("radial oracle needs the density anchored at the origin".into()));
                }
                RadialProfile::Table(table.clone())
            }
        };
        let mut o = RadialOracle { profile, factor: 1.0 };
        let raw = adaptive_simpson(&|s: f64| o.raw(s) * s, 0.0, 1.0, TOL);
        if !(raw > 0.0 && raw.is_finite()) || (0..=64).any(|k| !(o.raw(k as f64 / 64.0) > 0.0)) {
            return Err(Error::InvalidConfig("radial density is not positive and normalizable".into()));
        }
        o.factor = 0.5 / raw;
        Ok(o)
    }

    fn raw(&self, r: f64) -> f64 {
        match &self.profile {
            RadialProfile::Constant => 1.0,
            RadialProfile::Power { alpha, amplitude } => 1.0 + amplitude * r.powf(*alpha),
            RadialProfile::Table(t) => {
                1.0 + crate::transport::density::Modulus::Dini { table: t.clone() }.eval(r)
            }
        }
    }

    /// Normalized density at radius `r`.
    pub fn density(&self, r: f64) -> f64 {
        self.factor * self.raw(r)
    }

    /// `R(r)`.
    pub fn radius_map(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let m = adaptive_simpson(&|s: f64| self.density(s) * s, 0.0, r, TOL * r * r);
        (2.0 * m).sqrt()
    }

    /// `(R′(r), R(r)/r)`, the eigenvalues of `D²u` (radial, tangential).
    pub fn eigenvalues(&self, r: f64) -> (f64, f64) {
        if r < 1e-9 {
            let v = self.density(0.0).sqrt();
            return (v, v);
        }
        let big = self.radius_map(r);
        (self.density(r) * r / big, big / r)
    }
}

/// Exact potential and map of an oracle scenario, in scenario coordinates
/// (the rigid motion is applied).
#[derive(Clone, Debug)]
pub struct Oracle {
    kind: OracleKind,
    motion: RigidMotion,
}

#[derive(Clone, Debug)]
enum OracleKind {
    Affine { a: f64 },
    Radial(RadialOracle),
}

impl Oracle {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Option<Self>> {
        let kind = match &cfg.oracle {
            None => return Ok(None),
            Some(OracleSpec::Affine { a }) => OracleKind::Affine { a: *a },
            Some(OracleSpec::Radial) => OracleKind::Radial(RadialOracle::new(&cfg.density)?),
        };
        Ok(Some(Oracle { kind, motion: cfg.motion }))
    }

    fn rot(&self) -> Mat2 {
        let (s, c) = self.motion.angle.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    fn to_model(&self, x: Point) -> Point {
        let s = Point::new(self.motion.shift[0], self.motion.shift[1]);
        self.rot().transpose() * (x - s)
    }

    fn model_map(&self, z: Point) -> Point {
        match &self.kind {
            OracleKind::Affine { a } => Point::new(a * z.x, z.y / a),
            OracleKind::Radial(r) => {
                let n = z.norm();
                if n == 0.0 {
                    Point::zeros()
                } else {
                    z * (r.radius_map(n) / n)
                }
            }
        }
    }

    fn model_hessian(&self, z: Point) -> Mat2 {
        match &self.kind {
            OracleKind::Affine { a } => Mat2::new(*a, 0.0, 0.0, 1.0 / a),
            OracleKind::Radial(r) => {
                let n = z.norm();
                let (rad, tan) = r.eigenvalues(n);
                if n == 0.0 {
                    return Mat2::identity() * rad;
                }
                let e = z / n;
                let p = e * e.transpose();
                p * rad + (Mat2::identity() - p) * tan
            }
        }
    }

    /// Exact Brenier map.
    pub fn map(&self, x: Point) -> Point {
        let s = Point::new(self.motion.shift[0], self.motion.shift[1]);
        self.rot() * self.model_map(self.to_model(x)) + s
    }

    /// Exact Hessian `D²u(x)`.
    pub fn hessian(&self, x: Point) -> Mat2 {
        let r = self.rot();
        r * self.model_hessian(self.to_model(x)) * r.transpose()
    }

    /// Exact potential of the unmoved scenario, up to an additive constant.
    pub fn model_potential(&self, z: Point) -> f64 {
        match &self.kind {
            OracleKind::Affine { a } => 0.5 * (a * z.x * z.x + z.y * z.y / a),
            OracleKind::Radial(r) => adaptive_simpson(&|s: f64| r.radius_map(s), 0.0, z.norm(), 1e-12),
        }
    }
}

/// Affine oracle: `Ω = [−1,1]²`, `Ω* = [−a,a]×[−1/a,1/a]`, `f ≡ 1`,
/// `u = a x₁²/2 + x₂²/(2a)`.
pub fn oracle_affine(a: f64) -> Result<(ScenarioConfig, Oracle)> {
    if !(1.0..=4.0).contains(&a) {
        return Err(Error::InvalidConfig(format!("affine oracle needs a in [1, 4], got {a}")));
    }
    let cfg = ScenarioConfig {
        name: format!("affine-{a}"),
        source: DomainDescriptor::Square {
            side: 2.0,
            corner_radius: 0.0,
        },
        target: DomainDescriptor::Rectangle {
            a: 2.0 * a,
            b: 2.0 / a,
            corner_radius: 0.0,
        },
        density: DensityDescriptor::Constant,
        oracle: Some(OracleSpec::Affine { a }),
        ..ScenarioConfig::default()
    };
    let o = Oracle::from_config(&cfg)?.expect("oracle present");
    Ok((cfg, o))
}

/// Radial oracle between unit disks for a density anchored at the origin.
pub fn oracle_radial(density: DensityDescriptor) -> Result<(ScenarioConfig, Oracle)> {
    let disk = DomainDescriptor::Disk { radius: 1.0 };
    let cfg = ScenarioConfig {
        name: "radial".into(),
        source: disk.clone(),
        target: disk,
        density,
        oracle: Some(OracleSpec::Radial),
        ..ScenarioConfig::default()
    };
    let o = Oracle::from_config(&cfg)?.expect("oracle present");
    Ok((cfg, o))
}

/// The radial test density `(2/3)(1 + r²)`.
pub fn quadratic_radial_density() -> DensityDescriptor {
    DensityDescriptor::Holder {
        alpha: 2.0,
        amplitude: 1.0,
        anchor: [0.0, 0.0],
    }
}
