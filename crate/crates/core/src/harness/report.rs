//! Versioned scenario reports, CSV exports and the convergence comparator.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::comparison::{CascadeReport, ComparisonGap};
use crate::error::{Error, Result};
use crate::numerics::LineFit;
use crate::regularity::RegularityReport;
use crate::sections::{BalanceStats, DecayProfile, Frame, PairingStats, ScalingFit};
use crate::transport::SolveStats;
use crate::Point;

/// Bumped on every change of the report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub iterations: usize,
    pub residual: f64,
    /// Max relative cell-mass error recomputed on the final diagram.
    pub max_mass_error: f64,
    pub history: SolveStats,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub solve_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapError {
    /// RMS over nonempty cells of `|y_i − T(centroid_i)|`.
    pub rms: f64,
    pub max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DhRow {
    pub a_h: f64,
    pub inradius: f64,
    pub circumradius: f64,
}

/// One height of a section ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub h: f64,
    /// Plain section covers fewer than `floor_cells` cells.
    pub floored: bool,
    pub plain_area: Option<f64>,
    pub plain_diameter: Option<f64>,
    pub centred_area: Option<f64>,
    pub centred_diameter: Option<f64>,
    pub centred_slope: Option<Point>,
    /// `area(S^c ∩ Ω) / area(S^c)`.
    pub density_ratio: Option<f64>,
    pub balance: Option<BalanceStats>,
    pub pairing: Option<PairingStats>,
    pub sandwich: Option<f64>,
    pub dh: Option<DhRow>,
    /// `stage: message` for every quantity that could not be computed.
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub s: f64,
    pub frame: Frame,
    pub slope: Point,
    /// `Du(x₀)` used as the dual base point.
    pub dual_base: Point,
    pub h0: f64,
    pub levels: Vec<LevelRow>,
    /// Fit over non-floored centred sections.
    pub scaling: Option<ScalingFit>,
    /// Fit over non-floored plain sections.
    pub plain_scaling: Option<ScalingFit>,
    pub dh_inradius: Option<LineFit>,
    pub dh_circumradius: Option<LineFit>,
    pub decay: DecayProfile,
}

impl Ladder {
    /// Levels above the resolution floor.
    pub fn resolved(&self) -> impl Iterator<Item = &LevelRow> {
        self.levels.iter().filter(|l| !l.floored)
    }

    /// Decay exponent: the even-part fit, else the mean of the one-sided fits.
    pub fn decay_exponent(&self) -> Option<f64> {
        if let Some(f) = &self.decay.even_exponent {
            return Some(f.slope);
        }
        match (&self.decay.positive.exponent, &self.decay.negative.exponent) {
            (Some(a), Some(b)) => Some(0.5 * (a.slope + b.slope)),
            (Some(a), None) | (None, Some(a)) => Some(a.slope),
            _ => None,
        }
    }
}

/// A measured constant with the resolution it was measured at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: Option<f64>,
    pub n: usize,
    /// Heights contributing to the value.
    pub heights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredConstants {
    /// Uniform density: min density ratio.
    pub delta0: Measured,
    /// Obliqueness: min `⟨ν, ν*⟩`.
    pub mu: Measured,
    /// Sandwich constant: max `b`.
    pub b: Measured,
    pub pairing_upper: Measured,
    pub pairing_lower: Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub code: String,
    pub message: String,
}

impl Failure {
    pub fn new(stage: impl Into<String>, e: &Error) -> Self {
        Failure {
            stage: stage.into(),
            code: e.code().into(),
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub config: ScenarioConfig,
    pub solver: SolverSummary,
    pub timing: Timing,
    pub map_error: Option<MapError>,
    pub ladders: Vec<Ladder>,
    pub regularity: Option<RegularityReport>,
    pub comparison: Option<ComparisonGap>,
    pub cascade: Option<CascadeReport>,
    pub constants: MeasuredConstants,
    /// Frame-independent scalars, keyed by name (`name@s` per base point).
    pub summary: BTreeMap<String, f64>,
    pub failures: Vec<Failure>,
}

impl ScenarioReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: ScenarioReport = serde_json::from_str(text)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::IncompatibleReport(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        Ok(r)
    }

    /// Copy with the wall-time fields zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.timing = Timing::default();
        r
    }

    /// Write every table as CSV into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        let mut put = |name: &str, body: String| -> Result<()> {
            std::fs::write(dir.join(name), body)?;
            files.push(name.to_string());
            Ok(())
        };
        put("solver.csv", self.solver.history.to_csv())?;
        let mut s = String::from("key,value\n");
        for (k, v) in &self.summary {
            s += &format!("{k},{v:e}\n");
        }
        put("summary.csv", s)?;
        if let Some(r) = &self.regularity {
            put("obliqueness.csv", r.obliqueness.to_csv())?;
            let mut s = String::from("p,value\n");
            for e in &r.sobolev {
                s += &format!("{},{:e}\n", e.p, e.value);
            }
            put("sobolev.csv", s)?;
            if let Some(t) = &r.holder {
                let mut s = String::from("k,lo,hi,pairs,quotient\n");
                for b in &t.bands {
                    let q = b.quotient.map(|q| format!("{q:e}")).unwrap_or_default();
                    s += &format!("{},{:e},{:e},{},{}\n", b.k, b.lo, b.hi, b.pairs, q);
                }
                put("holder.csv", s)?;
            }
        }
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let mut s = String::from(
            "s,h,floored,plain_area,centred_area,density_ratio,balance_ratio,pairing_upper,pairing_lower,sandwich,a_h,inradius,circumradius\n",
        );
        for l in &self.ladders {
            for r in &l.levels {
                s += &format!(
                    "{},{:e},{},{},{},{},{},{},{},{},{},{},{}\n",
                    l.s,
                    r.h,
                    r.floored as u8,
                    opt(r.plain_area),
                    opt(r.centred_area),
                    opt(r.density_ratio),
                    opt(r.balance.as_ref().map(|b| b.ratio)),
                    opt(r.pairing.map(|p| p.upper)),
                    opt(r.pairing.map(|p| p.lower)),
                    opt(r.sandwich),
                    opt(r.dh.map(|d| d.a_h)),
                    opt(r.dh.map(|d| d.inradius)),
                    opt(r.dh.map(|d| d.circumradius)),
                );
            }
        }
        put("ladder.csv", s)?;
        let mut s = String::from("s,side,t,under,under1\n");
        for l in &self.ladders {
            for (name, side) in [("+", &l.decay.positive), ("-", &l.decay.negative)] {
                for k in 0..side.t.len() {
                    s += &format!("{},{},{:e},{:e},{}\n", l.s, name, side.t[k], side.under[k], opt(side.under1[k]));
                }
            }
        }
        put("decay.csv", s)?;
        if let Some(c) = &self.comparison {
            put("comparison.csv", c.to_csv())?;
        }
        if let Some(c) = &self.cascade {
            put("cascade.csv", c.to_csv())?;
        }
        Ok(files)
    }
}

/// Stability bands of the convergence comparator (calibration defaults).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareOptions {
    /// Max relative drift per metric, by summary-key prefix; longest match wins.
    pub drift: BTreeMap<String, f64>,
    pub default_drift: f64,
    /// Band for the per-quadrupling ratio of the oracle map error.
    pub rate_band: [f64; 2],
    /// Summary-key prefixes to compare; all keys when empty.
    pub metrics: Vec<String>,
    /// Prefixes never compared. Solver residuals sit at the stopping
    /// tolerance and carry no convergence information.
    pub exclude: Vec<String>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        let mut drift = BTreeMap::new();
        drift.insert("obliqueness".into(), 0.3);
        drift.insert("sobolev".into(), 0.2);
        drift.insert("holder_spread".into(), 0.5);
        Self {
            drift,
            default_drift: 0.3,
            rate_band: [0.4, 0.7],
            metrics: Vec::new(),
            exclude: vec!["solver_residual".into(), "max_mass_error".into()],
        }
    }
}

impl CompareOptions {
    fn band(&self, key: &str) -> f64 {
        self.drift
            .iter()
            .filter(|(p, _)| key.starts_with(p.as_str()))
            .max_by_key(|(p, _)| p.len())
            .map(|(_, v)| *v)
            .unwrap_or(self.default_drift)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricDrift {
    pub metric: String,
    pub values: Vec<f64>,
    /// `max |v_k − v_last| / |v_last|`; for the map error, the per-quadrupling
    /// ratio instead.
    pub drift: f64,
    pub band: [f64; 2],
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub n: Vec<usize>,
    pub rows: Vec<MetricDrift>,
    pub pass: bool,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric");
        for n in &self.n {
            s += &format!(",n{n}");
        }
        s += ",drift,lo,hi,pass\n";
        for r in &self.rows {
            s += &r.metric;
            for v in &r.values {
                s += &format!(",{v:e}");
            }
            s += &format!(",{:e},{},{},{}\n", r.drift, r.band[0], r.band[1], r.pass as u8);
        }
        s
    }
}

/// Drift of every shared summary metric across reports sorted by `N`.
/// Reports must share the schema and the config up to `n`.
pub fn compare_reports(reports: &[ScenarioReport], opts: &CompareOptions) -> Result<ConvergenceTable> {
    if reports.len() < 2 {
        return Err(Error::IncompatibleReport(format!("need at least two reports, got {}", reports.len())));
    }
    let mut sorted: Vec<&ScenarioReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.config.n);
    let base = sorted[0];
    for r in &sorted[1..] {
        if r.schema_version != base.schema_version {
            return Err(Error::IncompatibleReport(format!(
                "schema versions {} and {} differ",
                base.schema_version, r.schema_version
            )));
        }
        let mut c = r.config.clone();
        c.n = base.config.n;
        if c != base.config {
            return Err(Error::IncompatibleReport(format!(
                "configs '{}' and '{}' differ beyond N",
                base.config.name, r.config.name
            )));
        }
    }
    let increasing = sorted.windows(2).all(|w| w[1].config.n > w[0].config.n);
    let mut rows = Vec::new();
    for key in base.summary.keys() {
        if !opts.metrics.is_empty() && !opts.metrics.iter().any(|p| key.starts_with(p.as_str())) {
            continue;
        }
        if opts.exclude.iter().any(|p| key.starts_with(p.as_str())) {
            continue;
        }
        let values: Vec<f64> = sorted.iter().filter_map(|r| r.summary.get(key).copied()).collect();
        if values.len() != sorted.len() {
            continue;
        }
        let last = *values.last().unwrap();
        if key == "map_rms" && increasing {
            // error ratio per quadrupling of N between consecutive reports
            let mut worst: Option<f64> = None;
            let mut pass = true;
            for k in 1..values.len() {
                let q = (sorted[k].config.n as f64 / sorted[k - 1].config.n as f64).log(4.0);
                let ratio = if values[k - 1] > 0.0 && q > 0.0 { (values[k] / values[k - 1]).powf(1.0 / q) } else { 1.0 };
                pass &= ratio >= opts.rate_band[0] && ratio <= opts.rate_band[1];
                worst = Some(match worst {
                    Some(w) if (w - 0.55).abs() >= (ratio - 0.55).abs() => w,
                    _ => ratio,
                });
            }
            rows.push(MetricDrift {
                metric: key.clone(),
                values,
                drift: worst.unwrap_or(1.0),
                band: opts.rate_band,
                pass,
            });
            continue;
        }
        let scale = last.abs().max(1e-300);
        let drift = values.iter().map(|v| (v - last).abs() / scale).fold(0.0, f64::max);
        let band = opts.band(key);
        rows.push(MetricDrift {
            metric: key.clone(),
            values,
            drift,
            band: [0.0, band],
            pass: drift <= band,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ConvergenceTable {
        n: sorted.iter().map(|r| r.config.n).collect(),
        rows,
        pass,
    })
}
