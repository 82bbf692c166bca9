//! Scenario configuration (a single JSON document).

use serde::{Deserialize, Serialize};

use crate::comparison::ComparisonOptions;
use crate::error::{Error, Result};
use crate::geometry::domain::{make_domain, ConvexDomain, DomainDescriptor};
use crate::regularity::RegularityOptions;
use crate::sections::LadderOptions;
use crate::transport::density::{DensityDescriptor, DensityField};
use crate::transport::solver::SolverOptions;
use crate::Point;

/// Rigid motion applied to the whole scenario (rotation about the origin,
/// then translation).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RigidMotion {
    pub angle: f64,
    pub shift: [f64; 2],
}

impl RigidMotion {
    pub fn is_identity(&self) -> bool {
        self.angle == 0.0 && self.shift == [0.0, 0.0]
    }

    pub fn apply(&self, x: Point) -> Point {
        let (s, c) = self.angle.sin_cos();
        Point::new(c * x.x - s * x.y + self.shift[0], s * x.x + c * x.y + self.shift[1])
    }
}

/// Closed-form oracle attached to a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleSpec {
    /// `u = a x₁²/2 + x₂²/(2a)` from `[−1,1]²` onto `[−a,a]×[−1/a,1/a]`.
    Affine { a: f64 },
    /// Radial map between unit disks for the configured radial density.
    Radial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub name: String,
    pub source: DomainDescriptor,
    pub target: DomainDescriptor,
    pub density: DensityDescriptor,
    /// Number of target sites.
    pub n: usize,
    pub seed: u64,
    pub lloyd_iterations: usize,
    /// Boundary arclength fractions of the ladder base points.
    pub base_points: Vec<f64>,
    /// Number of boundary samples for the obliqueness profile.
    pub boundary_samples: usize,
    /// Corner-exclusion radius as a fraction of the source diameter.
    pub corner_exclusion: f64,
    pub motion: RigidMotion,
    pub oracle: Option<OracleSpec>,
    pub solver: SolverOptions,
    pub ladder: LadderOptions,
    pub regularity: RegularityOptions,
    /// Dirichlet comparison and cascade; skipped when absent.
    pub comparison: Option<ComparisonOptions>,
    /// Compute the sandwich constant at each ladder level (costly).
    pub sandwich: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let square = DomainDescriptor::Square {
            side: 2.0,
            corner_radius: 0.0,
        };
        Self {
            name: "identity".into(),
            source: square.clone(),
            target: square,
            density: DensityDescriptor::Constant,
            n: 1024,
            seed: 1,
            lloyd_iterations: crate::transport::sampling::DEFAULT_LLOYD_ITERATIONS,
            base_points: vec![0.0],
            boundary_samples: 256,
            corner_exclusion: 0.05,
            motion: RigidMotion::default(),
            oracle: None,
            solver: SolverOptions::default(),
            ladder: LadderOptions::default(),
            regularity: RegularityOptions::default(),
            comparison: None,
            sandwich: false,
        }
    }
}

/// Domains and density instantiated from a config.
#[derive(Clone, Debug)]
pub struct Instance {
    pub source: ConvexDomain,
    pub target: ConvexDomain,
    pub density: DensityField,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 {
            return Err(Error::InvalidConfig(format!("n must be at least 16, got {}", self.n)));
        }
        if self.base_points.iter().any(|s| !(0.0..1.0).contains(s)) {
            return Err(Error::InvalidConfig("base points must lie in [0, 1)".into()));
        }
        let positive = [
            ("solver.tol", self.solver.tol),
            ("solver.cg_tol", self.solver.cg_tol),
            ("solver.damping_fraction", self.solver.damping_fraction),
            ("ladder.diameter_fraction", self.ladder.diameter_fraction),
            ("ladder.sections.centring_tol", self.ladder.sections.centring_tol),
            ("ladder.sections.centring_tau", self.ladder.sections.centring_tau),
            ("ladder.sections.box_factor", self.ladder.sections.box_factor),
            ("regularity.rho", self.regularity.rho),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.corner_exclusion >= 0.0) {
            return Err(Error::InvalidConfig("corner_exclusion must be nonnegative".into()));
        }
        if let Some(h0) = self.ladder.h0 {
            if !(h0 > 0.0) {
                return Err(Error::InvalidConfig("ladder.h0 must be positive".into()));
            }
        }
        if let Some(c) = &self.comparison {
            c.validate()?;
        }
        if let Some(OracleSpec::Affine { a }) = self.oracle {
            if !(1.0..=4.0).contains(&a) {
                return Err(Error::InvalidConfig(format!("affine oracle needs a in [1, 4], got {a}")));
            }
        }
        Ok(())
    }

    /// Build the domains (with the rigid motion applied) and the density
    /// normalized to the target area.
    pub fn instantiate(&self) -> Result<Instance> {
        let map_err = |e: Error| match e {
            Error::InvalidSpec(m) => Error::InvalidConfig(m),
            other => other,
        };
        let mut source = make_domain(&self.source).map_err(map_err)?;
        let mut target = make_domain(&self.target).map_err(map_err)?;
        let mut density = self.density.clone();
        if !self.motion.is_identity() {
            let shift = Point::new(self.motion.shift[0], self.motion.shift[1]);
            source = source.transformed(self.motion.angle, shift);
            target = target.transformed(self.motion.angle, shift);
            match &mut density {
                DensityDescriptor::Constant => {}
                DensityDescriptor::Holder { anchor, .. } | DensityDescriptor::Dini { anchor, .. } => {
                    let a = self.motion.apply(Point::new(anchor[0], anchor[1]));
                    *anchor = [a.x, a.y];
                }
            }
        }
        let density = DensityField::new(density, source.polygon(), target.area()).map_err(map_err)?;
        Ok(Instance { source, target, density })
    }
}
