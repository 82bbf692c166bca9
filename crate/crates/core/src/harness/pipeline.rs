//! Scenario pipeline: solve, then the section, regularity and comparison stages.

use std::collections::BTreeMap;
use std::time::Instant;

use log::info;
use rayon::prelude::*;

use super::config::{Instance, ScenarioConfig};
use super::oracle::Oracle;
use super::report::*;
use crate::comparison::{cascade_report, comparison_gap};
use crate::error::Result;
use crate::geometry::domain::make_domain;
use crate::numerics::loglog_fit;
use crate::regularity;
use crate::sections::decay::geometric_grid;
use crate::sections::ladder::{choose_h0, ladder_heights, supporting_slope};
use crate::sections::*;
use crate::transport::laguerre::cell_masses;
use crate::transport::potential::DualPotential;
use crate::transport::sampling::sample_target_with;
use crate::transport::{solve_potential, SolveStats, TransportField};
use crate::Point;

/// A solved scenario.
pub struct Solved {
    pub instance: Instance,
    pub field: TransportField,
    pub stats: SolveStats,
    pub seconds: f64,
}

/// Sites are sampled in the unmoved target and then moved, so a rigid motion
/// of the config moves the discrete problem exactly.
pub fn solve_scenario(cfg: &ScenarioConfig) -> Result<Solved> {
    cfg.validate()?;
    let t0 = Instant::now();
    let instance = cfg.instantiate()?;
    let (sites, masses) = if cfg.motion.is_identity() {
        sample_target_with(&instance.target, cfg.n, cfg.seed, cfg.lloyd_iterations)
    } else {
        let model = make_domain(&cfg.target)?;
        let (s, _) = sample_target_with(&model, cfg.n, cfg.seed, cfg.lloyd_iterations);
        let m = instance.target.area() / cfg.n as f64;
        (s.into_iter().map(|p| cfg.motion.apply(p)).collect(), vec![m; cfg.n])
    };
    let (u, stats) = solve_potential(&instance.source, &instance.density, &sites, &masses, &cfg.solver)?;
    let field = TransportField::new(u, instance.source.clone(), instance.target.clone(), instance.density.clone());
    Ok(Solved {
        instance,
        field,
        stats,
        seconds: t0.elapsed().as_secs_f64(),
    })
}

/// Max relative cell-mass error of the solved diagram.
pub fn mass_error(field: &TransportField) -> f64 {
    let m = cell_masses(&field.diagram.cells, &field.density);
    m.iter()
        .zip(field.u.masses())
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max)
}

/// RMS and max over nonempty cells of `|y_i − T(centroid_i)|`.
pub fn map_error(field: &TransportField, oracle: &Oracle) -> MapError {
    let mut ss = 0.0;
    let mut max: f64 = 0.0;
    let mut count = 0usize;
    for (i, c) in field.centroids.iter().enumerate() {
        if field.areas[i] <= 0.0 {
            continue;
        }
        let e = (field.u.sites()[i] - oracle.map(*c)).norm();
        ss += e * e;
        max = max.max(e);
        count += 1;
    }
    MapError {
        rms: (ss / count.max(1) as f64).sqrt(),
        max,
    }
}

fn push_err(errors: &mut Vec<String>, stage: &str, e: impl std::fmt::Display) {
    errors.push(format!("{stage}: {e}"));
}

struct LevelOut {
    row: LevelRow,
    plain: Option<Section>,
    centred: Option<Section>,
}

#[allow(clippy::too_many_arguments)]
fn ladder_level(
    cfg: &ScenarioConfig,
    field: &TransportField,
    dual: &DualPotential,
    local: &LocalPotential,
    frame: &Frame,
    slope: Point,
    dual_base: Point,
    h: f64,
) -> LevelOut {
    let opts = &cfg.ladder.sections;
    let u = field.u.kernel();
    let region = field.source.polygon();
    let x0 = frame.origin;
    let mut errors = Vec::new();
    let cell_area = field.source.area() / field.n() as f64;

    let plain = plain_section(u, region, x0, h, slope, opts)
        .map_err(|e| push_err(&mut errors, "plain", e))
        .ok();
    let centred = centred_section(u, region, x0, h, slope, opts)
        .map_err(|e| push_err(&mut errors, "centred", e))
        .ok();
    let floored = plain.as_ref().is_none_or(|p| p.area() < cfg.ladder.floor_cells * cell_area);
    let balance = plain
        .as_ref()
        .and_then(|p| balance_stats(p, frame).map_err(|e| push_err(&mut errors, "balance", e)).ok());
    let density = centred.as_ref().map(|c| density_ratio(c, region));
    let pairing = centred.as_ref().and_then(|c| {
        centred_section(dual.kernel(), field.target.polygon(), dual_base, h, x0, opts)
            .map_err(|e| push_err(&mut errors, "dual", e))
            .ok()
            .map(|v| pairing_stats(c, &v, h))
    });
    let sandwich = if cfg.sandwich {
        sandwich_constant(u, region, x0, h, slope, 64.0, opts)
            .map_err(|e| push_err(&mut errors, "sandwich", e))
            .ok()
            .flatten()
    } else {
        None
    };
    let dh = dh_set(local, h)
        .map_err(|e| push_err(&mut errors, "dh", e))
        .ok()
        .map(|d| DhRow {
            a_h: d.a_h,
            inradius: d.inradius,
            circumradius: d.circumradius,
        });
    LevelOut {
        row: LevelRow {
            h,
            floored,
            plain_area: plain.as_ref().map(|p| p.area()),
            plain_diameter: plain.as_ref().map(|p| p.diameter()),
            centred_area: centred.as_ref().map(|c| c.area()),
            centred_diameter: centred.as_ref().map(|c| c.diameter()),
            centred_slope: centred.as_ref().map(|c| c.affine.slope),
            density_ratio: density,
            balance,
            pairing,
            sandwich,
            dh,
            errors,
        },
        plain,
        centred,
    }
}

/// Section ladder, `D_h` fits and decay profile at boundary fraction `s`.
pub fn build_ladder(cfg: &ScenarioConfig, field: &TransportField, dual: &DualPotential, s: f64) -> Result<Ladder> {
    let frame = Frame::at_boundary(&field.source, s)?;
    let x0 = frame.origin;
    let slope = supporting_slope(field, x0, cfg.ladder.slope_rule);
    let u = field.u.kernel();
    let region = field.source.polygon();
    let h0 = match cfg.ladder.h0 {
        Some(h) => h,
        None => choose_h0(
            u,
            region,
            x0,
            slope,
            cfg.ladder.diameter_fraction * field.source.diameter(),
            &cfg.ladder.sections,
        )?,
    };
    let local = LocalPotential::new(u, region, frame, slope);
    let heights = ladder_heights(h0, cfg.ladder.levels);
    let outs: Vec<LevelOut> = heights
        .par_iter()
        .map(|&h| ladder_level(cfg, field, dual, &local, &frame, slope, slope, h))
        .collect();

    let resolved: Vec<&LevelOut> = outs.iter().filter(|o| !o.row.floored).collect();
    let centred: Vec<Section> = resolved.iter().filter_map(|o| o.centred.clone()).collect();
    let plain: Vec<Section> = resolved.iter().filter_map(|o| o.plain.clone()).collect();
    let scaling = scaling_fit(&centred, &frame).ok();
    let plain_scaling = scaling_fit(&plain, &frame).ok();
    let (mut hs, mut rin, mut rout) = (Vec::new(), Vec::new(), Vec::new());
    for o in &resolved {
        if let Some(d) = o.row.dh {
            hs.push(o.row.h);
            rin.push(d.inradius);
            rout.push(d.circumradius);
        }
    }
    let (dh_inradius, dh_circumradius) = if hs.len() >= 3 {
        (loglog_fit(&hs, &rin), loglog_fit(&hs, &rout))
    } else {
        (None, None)
    };

    let t_max = cfg.ladder.decay_t_max * field.source.diameter();
    let t_min = cfg.ladder.decay_min_spacings * field.spacing();
    let ratio = cfg.ladder.decay_ratio;
    let count = if t_max > t_min { ((t_max / t_min).ln() / ratio.ln()).floor() as usize + 1 } else { 1 };
    let decay = decay_profile(&local, &geometric_grid(t_max, ratio, count));

    Ok(Ladder {
        s,
        frame,
        slope,
        dual_base: slope,
        h0,
        levels: outs.into_iter().map(|o| o.row).collect(),
        scaling,
        plain_scaling,
        dh_inradius,
        dh_circumradius,
        decay,
    })
}

fn measured(values: &[(f64, f64)], n: usize, min: bool) -> Measured {
    let v = values.iter().map(|p| p.1);
    let value = if values.is_empty() {
        None
    } else if min {
        Some(v.fold(f64::INFINITY, f64::min))
    } else {
        Some(v.fold(f64::NEG_INFINITY, f64::max))
    };
    let mut heights: Vec<f64> = values.iter().map(|p| p.0).collect();
    heights.sort_by(|a, b| b.total_cmp(a));
    heights.dedup();
    Measured { value, n, heights }
}

fn summarize(report: &ScenarioReport) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let mut put = |k: String, v: Option<f64>| {
        if let Some(v) = v.filter(|v| v.is_finite()) {
            m.insert(k, v);
        }
    };
    put("solver_residual".into(), Some(report.solver.residual));
    put("max_mass_error".into(), Some(report.solver.max_mass_error));
    put("map_rms".into(), report.map_error.as_ref().map(|e| e.rms));
    for l in &report.ladders {
        let s = l.s;
        let r: Vec<&LevelRow> = l.resolved().collect();
        let min = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |a: Option<f64>, b| Some(a.map_or(b, |a| a.min(b))));
        let max = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |a: Option<f64>, b| Some(a.map_or(b, |a| a.max(b))));
        put(format!("h0@{s}"), Some(l.h0));
        put(format!("density_ratio_min@{s}"), min(&mut r.iter().filter_map(|x| x.density_ratio)));
        put(format!("balance_min@{s}"), min(&mut r.iter().filter_map(|x| x.balance.as_ref().map(|b| b.ratio))));
        put(format!("balance_max@{s}"), max(&mut r.iter().filter_map(|x| x.balance.as_ref().map(|b| b.ratio))));
        put(format!("pairing_upper_max@{s}"), max(&mut r.iter().filter_map(|x| x.pairing.map(|p| p.upper))));
        put(format!("pairing_lower_min@{s}"), min(&mut r.iter().filter_map(|x| x.pairing.map(|p| p.lower))));
        put(format!("sandwich_max@{s}"), max(&mut r.iter().filter_map(|x| x.sandwich)));
        put(format!("area_slope@{s}"), l.scaling.as_ref().map(|f| f.volume.slope));
        put(format!("plain_area_slope@{s}"), l.plain_scaling.as_ref().map(|f| f.volume.slope));
        put(format!("dh_inradius_slope@{s}"), l.dh_inradius.map(|f| f.slope));
        put(format!("dh_circumradius_slope@{s}"), l.dh_circumradius.map(|f| f.slope));
        put(format!("decay_exponent@{s}"), l.decay_exponent());
    }
    if let Some(r) = &report.regularity {
        put("obliqueness_min".into(), Some(r.obliqueness.min));
        put("obliqueness_p50".into(), Some(r.obliqueness.p50));
        for e in &r.sobolev {
            put(format!("sobolev_p{}", e.p), Some(e.value));
        }
        put("holder_spread".into(), r.holder.as_ref().and_then(|h| h.spread));
        put("det_ratio_median".into(), r.det_ratio.map(|d| d.median));
    }
    if let Some(c) = &report.comparison {
        put("comparison_exponent".into(), c.exponent.map(|f| f.slope));
    }
    if let Some(c) = &report.cascade {
        put("cascade_spread".into(), c.ratio_spread);
        put("cascade_constant".into(), c.constant);
    }
    m
}

/// Run every stage of a scenario. Only a failed solve is an error; later
/// stage failures are recorded in the report.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let solved = solve_scenario(cfg)?;
    info!("solved {} (N = {}) in {:.2}s", cfg.name, cfg.n, solved.seconds);
    Ok(analyze_solved(cfg, &solved))
}

/// Every post-solve stage on an already solved scenario.
pub fn analyze_solved(cfg: &ScenarioConfig, solved: &Solved) -> ScenarioReport {
    let t0 = Instant::now();
    let field = &solved.field;
    let mut failures = Vec::new();

    let map_error = match Oracle::from_config(cfg) {
        Ok(o) => o.map(|o| map_error(field, &o)),
        Err(e) => {
            failures.push(Failure::new("oracle", &e));
            None
        }
    };
    let dual = field.u.legendre_dual(field.source.polygon());
    let ladders: Vec<Ladder> = cfg
        .base_points
        .iter()
        .filter_map(|&s| match build_ladder(cfg, field, &dual, s) {
            Ok(l) => Some(l),
            Err(e) => {
                failures.push(Failure::new(format!("ladder@{s}"), &e));
                None
            }
        })
        .collect();

    let corner = cfg.corner_exclusion * field.source.diameter();
    let base = cfg.base_points.first().map(|&s| field.source.point_at(s));
    let regularity = regularity::analyze(field, &cfg.regularity, cfg.boundary_samples, corner, base)
        .map_err(|e| failures.push(Failure::new("regularity", &e)))
        .ok();

    let (comparison, cascade) = match &cfg.comparison {
        Some(opts) => {
            let s = opts.base.or(cfg.base_points.first().copied()).unwrap_or(0.0);
            let g = comparison_gap(field, s, opts)
                .map_err(|e| failures.push(Failure::new("comparison", &e)))
                .ok();
            let c = if opts.cascade_levels > 0 {
                cascade_report(field, s, opts)
                    .map_err(|e| failures.push(Failure::new("cascade", &e)))
                    .ok()
            } else {
                None
            };
            (g, c)
        }
        None => (None, None),
    };

    let n = cfg.n;
    let collect = |f: &dyn Fn(&LevelRow) -> Option<f64>| -> Vec<(f64, f64)> {
        ladders
            .iter()
            .flat_map(|l| l.resolved())
            .filter_map(|r| f(r).map(|v| (r.h, v)))
            .collect()
    };
    let constants = MeasuredConstants {
        delta0: measured(&collect(&|r| r.density_ratio), n, true),
        mu: Measured {
            value: regularity.as_ref().map(|r| r.obliqueness.min),
            n,
            heights: Vec::new(),
        },
        b: measured(&collect(&|r| r.sandwich), n, false),
        pairing_upper: measured(&collect(&|r| r.pairing.map(|p| p.upper)), n, false),
        pairing_lower: measured(&collect(&|r| r.pairing.map(|p| p.lower)), n, true),
    };

    let mut report = ScenarioReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        solver: SolverSummary {
            iterations: solved.stats.iterations,
            residual: solved.stats.residual,
            max_mass_error: mass_error(field),
            history: solved.stats.clone(),
        },
        timing: Timing::default(),
        map_error,
        ladders,
        regularity,
        comparison,
        cascade,
        constants,
        summary: BTreeMap::new(),
        failures,
    };
    report.summary = summarize(&report);
    report.timing = Timing {
        solve_seconds: solved.seconds,
        total_seconds: solved.seconds + t0.elapsed().as_secs_f64(),
    };
    report
}

/// Source boundary, Laguerre cells and the top plain and centred sections of
/// every ladder.
pub fn scenario_svg(solved: &Solved, report: &ScenarioReport, size_px: f64) -> String {
    use crate::geometry::svg::{to_svg, Shape};
    let field = &solved.field;
    let cells: Vec<_> = field.diagram.cells.iter().filter(|c| !c.is_empty()).map(|c| c.to_polygon()).collect();
    let mut sections = Vec::new();
    let opts = &report.config.ladder.sections;
    for l in &report.ladders {
        let u = field.u.kernel();
        let region = field.source.polygon();
        if let Ok(p) = plain_section(u, region, l.frame.origin, l.h0, l.slope, opts) {
            sections.push((p.vertices, "#1f77b4"));
        }
        if let Ok(c) = centred_section(u, region, l.frame.origin, l.h0, l.slope, opts) {
            sections.push((c.vertices, "#d62728"));
        }
    }
    let mut shapes: Vec<Shape> = cells.iter().map(|c| Shape::Polygon(c, "#cccccc")).collect();
    shapes.push(Shape::Polygon(field.source.polygon(), "#000000"));
    shapes.extend(sections.iter().map(|(p, c)| Shape::Polygon(p, c)));
    let bases: Vec<Point> = report.ladders.iter().map(|l| l.frame.origin).collect();
    shapes.push(Shape::Points(&bases, "#000000"));
    to_svg(&shapes, size_px)
}
