//! Acceptance suite: one verdict line per criterion. Runs as a plain binary
//! (`harness = false`) so the verdicts are always printed.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbvp::comparison::{solve_dirichlet, ComparisonOptions, DirichletOptions};
use sbvp::geometry::ellipse::{inner_radius, outer_radius};
use sbvp::geometry::{john_normalize, ConvexPolygon, DomainDescriptor};
use sbvp::harness::*;
use sbvp::sections::{centred_section, pairing_stats, SectionOptions};
use sbvp::transport::{DensityDescriptor, SemiDiscretePotential};
use sbvp::Point;

struct Verdicts {
    lines: Vec<(usize, bool, String)>,
}

impl Verdicts {
    fn record(&mut self, id: usize, name: &str, checks: Vec<(bool, String)>) {
        let pass = checks.iter().all(|c| c.0);
        let detail: Vec<String> = checks
            .iter()
            .map(|(ok, s)| if *ok { s.clone() } else { format!("{s} [FAIL]") })
            .collect();
        let line = format!("{name}: {}", detail.join("; "));
        println!("criterion {id:2} {} {line}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id, pass, line));
    }
}

fn check(ok: bool, s: String) -> (bool, String) {
    (ok, s)
}

fn within(v: Option<f64>, lo: f64, hi: f64) -> bool {
    v.is_some_and(|v| v >= lo && v <= hi)
}

fn fmt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |v| format!("{v:.4}"))
}

struct Run {
    solved: Solved,
    report: ScenarioReport,
}

impl Run {
    fn new(cfg: ScenarioConfig) -> Run {
        let t = Instant::now();
        let solved = solve_scenario(&cfg).unwrap_or_else(|e| panic!("{} N={}: {e}", cfg.name, cfg.n));
        let report = analyze_solved(&cfg, &solved);
        eprintln!("  [{} N={} in {:.1}s, {} stage failures]", cfg.name, cfg.n, t.elapsed().as_secs_f64(), report.failures.len());
        for f in &report.failures {
            eprintln!("    {}: {}", f.stage, f.message);
        }
        Run { solved, report }
    }

    fn get(&self, k: &str) -> Option<f64> {
        self.report.summary.get(k).copied()
    }
}

fn rounded_square_disk(n: usize, density: DensityDescriptor) -> ScenarioConfig {
    ScenarioConfig {
        name: "rsq-disk".into(),
        source: DomainDescriptor::Square {
            side: 2.0,
            corner_radius: 0.2,
        },
        target: DomainDescriptor::Disk { radius: 1.0 },
        density,
        n,
        ..Default::default()
    }
}

fn holder_density() -> DensityDescriptor {
    DensityDescriptor::Holder {
        alpha: 0.5,
        amplitude: 0.5,
        anchor: [1.0, 0.0],
    }
}

/// Ladder settings for the section criteria: 5 levels from 0.3·diam.
fn with_ladder(mut cfg: ScenarioConfig, base: &[f64]) -> ScenarioConfig {
    cfg.ladder.diameter_fraction = 0.3;
    cfg.ladder.levels = 5;
    cfg.base_points = base.to_vec();
    cfg
}

fn affine(n: usize) -> ScenarioConfig {
    let (mut c, _) = oracle_affine(2.0).unwrap();
    c.n = n;
    c
}

fn main() {
    let t0 = Instant::now();
    let mut v = Verdicts { lines: Vec::new() };
    const RSQ_BASES: [f64; 3] = [0.0, 0.06, 0.125];
    const ORACLE_BASES: [f64; 2] = [0.0, 0.25];

    eprintln!("solving scenarios");
    let aff1k = Run::new(affine(1024));
    let aff4k = Run::new(affine(4096));
    let aff16k = Run::new(with_ladder(affine(16384), &ORACLE_BASES));
    let radial = {
        let (mut c, _) = oracle_radial(quadratic_radial_density()).unwrap();
        c.n = 4096;
        Run::new(c)
    };
    let ident4k = Run::new(ScenarioConfig {
        n: 4096,
        comparison: Some(ComparisonOptions::default()),
        ..Default::default()
    });
    let ident16k = Run::new(with_ladder(
        ScenarioConfig {
            n: 16384,
            comparison: Some(ComparisonOptions::default()),
            ..Default::default()
        },
        &ORACLE_BASES,
    ));
    let rsq2k = Run::new(rounded_square_disk(2048, DensityDescriptor::Constant));
    let rsq8k = Run::new(rounded_square_disk(8192, DensityDescriptor::Constant));
    let rsq16k = Run::new(with_ladder(rounded_square_disk(16384, DensityDescriptor::Constant), &RSQ_BASES));
    let hold16k = Run::new(ScenarioConfig {
        comparison: Some(ComparisonOptions::default()),
        ..rounded_square_disk(16384, holder_density())
    });
    let all = [&aff1k, &aff4k, &aff16k, &radial, &ident4k, &ident16k, &rsq2k, &rsq8k, &rsq16k, &hold16k];
    let oracles = [&ident16k, &aff16k];

    // 1
    let (r1, r4) = (aff1k.get("map_rms"), aff4k.get("map_rms"));
    let ratio = r1.zip(r4).map(|(a, b)| b / a);
    v.record(
        1,
        "affine oracle map error",
        vec![
            check(within(r4, 0.0, 0.06), format!("rms(N=4096) = {}", fmt(r4))),
            check(within(ratio, 0.4, 0.7), format!("rms ratio 1024→4096 = {}", fmt(ratio))),
        ],
    );

    // 2
    let rr = radial.get("map_rms");
    v.record(
        2,
        "radial oracle map error",
        vec![check(within(rr, 0.0, 0.06), format!("rms(N=4096) = {}", fmt(rr)))],
    );

    // 3
    let worst = all.iter().map(|r| r.report.solver.max_mass_error).fold(0.0, f64::max);
    v.record(
        3,
        "mass conservation",
        vec![check(worst <= 1e-5, format!("max relative cell-mass error {worst:.2e} over {} solves", all.len()))],
    );

    // 4
    let (o2, o8) = (rsq2k.get("obliqueness_min"), rsq8k.get("obliqueness_min"));
    let drift = o2.zip(o8).map(|(a, b)| (a - b).abs() / b);
    let oracle_min = [&aff4k, &radial, &ident16k]
        .iter()
        .filter_map(|r| r.get("obliqueness_min"))
        .fold(f64::INFINITY, f64::min);
    v.record(
        4,
        "obliqueness",
        vec![
            check(within(o2, 0.05, 1.0), format!("min(N=2048) = {}", fmt(o2))),
            check(within(o8, 0.05, 1.0), format!("min(N=8192) = {}", fmt(o8))),
            check(within(drift, 0.0, 0.3), format!("drift = {}", fmt(drift))),
            check(oracle_min >= 0.98, format!("oracle min = {oracle_min:.4}")),
        ],
    );

    let rsq_levels = rsq16k.report.ladders.iter().map(|l| l.resolved().count()).min().unwrap_or(0);
    let per_base = |key: &str| -> Vec<Option<f64>> { RSQ_BASES.iter().map(|s| rsq16k.get(&format!("{key}@{s}"))).collect() };
    let all_in = |xs: &[Option<f64>], lo: f64, hi: f64| xs.len() == RSQ_BASES.len() && xs.iter().all(|x| within(*x, lo, hi));
    let show = |xs: &[Option<f64>]| xs.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join("/");

    // 5
    // every level of the 5-level ladders, floored ones included
    let all_dens: Vec<f64> = rsq16k
        .report
        .ladders
        .iter()
        .flat_map(|l| l.levels.iter().filter_map(|x| x.density_ratio))
        .collect();
    let dens_min = all_dens.iter().copied().fold(f64::INFINITY, f64::min);
    let slopes = per_base("area_slope");
    let depth = rsq16k.report.ladders.iter().map(|l| l.levels.len()).min().unwrap_or(0);
    v.record(
        5,
        "uniform density and area scaling",
        vec![
            check(
                rsq16k.report.ladders.len() == 3 && depth == 5 && all_dens.len() == 15,
                format!("3 ladders of {depth} levels, ≥ {rsq_levels} above the floor"),
            ),
            check(dens_min >= 0.1, format!("min density ratio {dens_min:.4}")),
            check(rsq_levels >= 3 && all_in(&slopes, 0.85, 1.15), format!("area slope {}", show(&slopes))),
        ],
    );

    // 6
    let bmin = per_base("balance_min");
    let bmax = per_base("balance_max");
    let oracle_bal: Vec<f64> = oracles
        .iter()
        .flat_map(|r| r.report.ladders.iter())
        .flat_map(|l| l.resolved().filter_map(|x| x.balance.as_ref().map(|b| b.ratio)).collect::<Vec<_>>())
        .collect();
    let ob_dev = oracle_bal.iter().map(|b| (b - 1.0).abs()).fold(0.0, f64::max);
    v.record(
        6,
        "balance",
        vec![
            check(all_in(&bmin, 0.1, 10.0) && all_in(&bmax, 0.1, 10.0), format!("ratio range {} .. {}", show(&bmin), show(&bmax))),
            check(!oracle_bal.is_empty() && ob_dev <= 0.05, format!("oracle |ratio − 1| ≤ {ob_dev:.4} over {} levels", oracle_bal.len())),
        ],
    );

    // 7
    let up = per_base("pairing_upper_max");
    let lo = per_base("pairing_lower_min");
    let quad = interior_pairing(&ident16k);
    let qdev = quad.iter().flat_map(|(a, b)| [(a - 2.0).abs(), (b - 2.0).abs()]).fold(0.0, f64::max);
    v.record(
        7,
        "duality pairing",
        vec![
            check(all_in(&up, 0.0, 10.0), format!("upper max {}", show(&up))),
            check(all_in(&lo, 0.05, f64::INFINITY), format!("lower min {}", show(&lo))),
            check(quad.len() == 3 && qdev <= 0.1, format!("quadratic interior pairing {quad:.4?}")),
        ],
    );

    // 8
    let din = per_base("dh_inradius_slope");
    let dout = per_base("dh_circumradius_slope");
    let odh: Vec<Option<f64>> = oracles
        .iter()
        .flat_map(|r| {
            ORACLE_BASES
                .iter()
                .flat_map(|s| [r.get(&format!("dh_inradius_slope@{s}")), r.get(&format!("dh_circumradius_slope@{s}"))])
        })
        .collect();
    v.record(
        8,
        "D_h roundness",
        vec![
            check(all_in(&din, 0.4, 0.6), format!("inradius slope {}", show(&din))),
            check(all_in(&dout, 0.4, 0.6), format!("circumradius slope {}", show(&dout))),
            check(odh.iter().all(|x| within(*x, 0.48, 0.52)), format!("oracle slopes {}", show(&odh))),
        ],
    );

    // 9
    let dec = per_base("decay_exponent");
    let other: Vec<Option<f64>> = [&radial, &hold16k, &rsq8k].iter().map(|r| r.get("decay_exponent@0")).collect();
    let odec: Vec<Option<f64>> = oracles
        .iter()
        .flat_map(|r| ORACLE_BASES.iter().map(|s| r.get(&format!("decay_exponent@{s}"))))
        .collect();
    v.record(
        9,
        "boundary decay",
        vec![
            check(all_in(&dec, 1.8, 2.3), format!("rounded square {}", show(&dec))),
            check(other.iter().all(|x| within(*x, 1.8, 2.3)), format!("disk/Hölder/N=8192 {}", show(&other))),
            check(odec.iter().all(|x| within(*x, 1.98, 2.02)), format!("oracles {}", show(&odec))),
        ],
    );

    // 10
    v.record(10, "Dirichlet solver", dirichlet_checks());

    // 11
    let gap = hold16k.report.comparison.as_ref();
    let exp = hold16k.get("comparison_exponent");
    let used = gap.map_or(0, |g| g.rows.len());
    v.record(
        11,
        "comparison exponent",
        vec![
            check(used >= 4, format!("{used} levels")),
            check(within(exp, 1.1, f64::INFINITY), format!("exponent {}", fmt(exp))),
        ],
    );

    // 12
    let cas = hold16k.report.cascade.as_ref();
    let ratios: Vec<f64> = cas
        .map(|c| c.levels.iter().filter_map(|l| l.gap.filter(|_| l.omega > 0.0).map(|g| g / l.omega)).collect())
        .unwrap_or_default();
    let spread = hold16k.get("cascade_spread");
    let hold_min = cas.map_or(0.0, |c| c.gaps().into_iter().fold(f64::INFINITY, f64::min));
    let id_max = |r: &Run| r.report.cascade.as_ref().map_or(f64::NAN, |c| c.gaps().into_iter().fold(0.0, f64::max));
    let (n4, n16) = (id_max(&ident4k), id_max(&ident16k));
    v.record(
        12,
        "cascade",
        vec![
            check(ratios.len() >= 5, format!("{} levels with gap/ω", ratios.len())),
            check(within(spread, 1.0, 5.0), format!("gap/ω max/min = {}", fmt(spread))),
            check(n16 < n4, format!("constant-f gap {n4:.2e} → {n16:.2e} as N grows 4096→16384")),
            check(n16 < hold_min, format!("constant-f gap below Hölder gaps (min {hold_min:.2e})")),
        ],
    );

    // 13
    let hs = hold16k.get("holder_spread");
    let q = |r: &Run| -> Vec<Option<f64>> {
        r.report.regularity.as_ref().and_then(|g| g.holder.as_ref()).map_or(vec![], |h| h.bands.iter().map(|b| b.quotient).collect())
    };
    let (qa, qb) = (q(&aff4k), q(&aff16k));
    let halving: Vec<Option<f64>> = qa.iter().zip(&qb).map(|(a, b)| a.zip(*b).map(|(a, b)| b / a)).collect();
    v.record(
        13,
        "Hölder quotients",
        vec![
            check(within(hs, 1.0, 3.0), format!("band max/min = {}", fmt(hs))),
            check(
                !halving.is_empty() && halving.iter().all(|x| within(*x, 0.25, 1.0)),
                format!("oracle quotient ratio 4096→16384 {}", halving.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join("/")),
            ),
        ],
    );

    // 14
    let mut sob = Vec::new();
    for p in [1, 2, 4, 8] {
        let k = format!("sobolev_p{p}");
        let (a, b) = (rsq8k.get(&k), rsq16k.get(&k));
        let d = a.zip(b).map(|(a, b)| (a - b).abs() / b);
        sob.push(check(within(d, 0.0, 0.2), format!("p={p}: {} → {} (drift {})", fmt(a), fmt(b), fmt(d))));
    }
    let w22 = aff4k.get("sobolev_p2");
    let s17 = 17f64.sqrt();
    sob.push(check(within(w22, 0.9 * s17, 1.1 * s17), format!("affine p=2 {} vs √17 = {s17:.4}", fmt(w22))));
    v.record(14, "W^{2,p} norms", sob);

    // 15
    v.record(15, "property suites", property_checks());

    let failed: Vec<usize> = v.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.0}s",
        v.lines.len() - failed.len(),
        v.lines.len(),
        t0.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

/// Pairing of centred sections of the discrete identity potential and its
/// dual at an interior point (the quadratic case).
fn interior_pairing(run: &Run) -> Vec<(f64, f64)> {
    let f = &run.solved.field;
    let opts = SectionOptions::default();
    let dual = f.u.legendre_dual(f.source.polygon());
    let x0 = Point::zeros();
    [0.01, 0.02, 0.04]
        .iter()
        .filter_map(|&h| {
            let su = centred_section(f.u.kernel(), f.source.polygon(), x0, h, f.fitted_gradient(x0), &opts).ok()?;
            let sv = centred_section(dual.kernel(), f.target.polygon(), x0, h, x0, &opts).ok()?;
            let p = pairing_stats(&su, &sv, h);
            Some((p.upper, p.lower))
        })
        .collect()
}

fn dirichlet_checks() -> Vec<(bool, String)> {
    let disk = ConvexPolygon::regular(128, 1.0, Point::zeros());
    let dx = (std::f64::consts::PI / 400.0).sqrt();
    let o = DirichletOptions::default();
    let (a, b) = match (
        solve_dirichlet(&disk, &|_| 0.0, 1.0, dx, Point::zeros(), &o),
        solve_dirichlet(&disk, &|_| 0.0, 4.0, dx, Point::zeros(), &o),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return vec![check(false, format!("solve failed: {e}"))],
    };
    let err = a
        .nodes
        .iter()
        .zip(&a.values)
        .map(|(x, w)| (w - 0.5 * (x.norm_squared() - 1.0)).abs())
        .fold(0.0, f64::max);
    let scale = a.values.iter().zip(&b.values).map(|(x, y)| (2.0 * x - y).abs()).fold(0.0, f64::max);
    vec![
        check(err <= 0.02, format!("sup error {err:.4} at {} nodes", a.nodes.len())),
        check(scale <= 1e-8, format!("rhs scaling defect {scale:.1e}")),
    ]
}

fn random_polygon(rng: &mut ChaCha8Rng) -> Option<ConvexPolygon> {
    let k = rng.gen_range(3..24);
    let stretch: f64 = rng.gen_range(0.05..5.0);
    let shear: f64 = rng.gen_range(-2.0..2.0);
    let pts: Vec<Point> = (0..k)
        .map(|_| {
            let (x, y): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            Point::new(stretch * (x + shear * y), y / stretch)
        })
        .collect();
    let h = ConvexPolygon::hull(&pts)?;
    let d = h.diameter();
    (h.len() >= 3 && h.area() > 1e-3 * d * d).then_some(h)
}

fn random_potential(rng: &mut ChaCha8Rng) -> SemiDiscretePotential {
    let n = rng.gen_range(4..60);
    let sites: Vec<Point> = (0..n).map(|_| Point::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7))).collect();
    let w: Vec<f64> = sites.iter().map(|y| 0.5 * y.norm_squared() + rng.gen_range(-0.2..0.2)).collect();
    SemiDiscretePotential::new(sites, vec![1.0 / n as f64; n], w, 0, 0.0).unwrap()
}

fn property_checks() -> Vec<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut out = Vec::new();

    let (mut tested, mut violations) = (0, 0);
    while tested < 1000 {
        let Some(k) = random_polygon(&mut rng) else { continue };
        tested += 1;
        match john_normalize(&k) {
            Ok((_, t)) if inner_radius(&k, &t) >= 1.0 - 1e-6 && outer_radius(&k, &t) <= 2.0 + 1e-6 => {}
            _ => violations += 1,
        }
    }
    out.push(check(violations == 0, format!("John containment {violations} violations / {tested}")));

    let square = ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
    let (mut bic, mut cyc, mut pairs) = (0.0f64, 0, 0);
    for _ in 0..100 {
        let u = random_potential(&mut rng);
        let dual = u.legendre_dual(&square);
        let xs: Vec<Point> = (0..10).map(|_| Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        for x in &xs {
            bic = bic.max((dual.conjugate_at(*x, u.sites()) - u.value(*x)).abs());
        }
        let ys: Vec<Point> = xs.iter().map(|x| u.brenier_map(*x)).collect();
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if i != j {
                    pairs += 1;
                    if (xs[i] - xs[j]).dot(&(ys[i] - ys[j])) < -1e-12 {
                        cyc += 1;
                    }
                }
            }
        }
        let n = xs.len();
        for k in 1..n {
            let s: f64 = (0..n).map(|i| xs[i].dot(&(ys[i] - ys[(i + k) % n]))).sum();
            if s < -1e-12 {
                cyc += 1;
            }
        }
    }
    out.push(check(bic <= 1e-10, format!("biconjugation defect {bic:.1e}")));
    out.push(check(cyc == 0, format!("cyclical monotonicity {cyc} violations / {pairs} pairs")));

    let mut cfg = rounded_square_disk(1024, holder_density());
    cfg.base_points = vec![0.0, 0.06, 0.125];
    let a = run_scenario(&cfg).unwrap();
    let a2 = run_scenario(&cfg).unwrap();
    let same = a.without_timing().to_json().unwrap() == a2.without_timing().to_json().unwrap();
    out.push(check(same, "re-run byte-identical".into()));

    cfg.motion = RigidMotion {
        angle: 0.7,
        shift: [0.3, -0.2],
    };
    let b = run_scenario(&cfg).unwrap();
    let mut dev = 0.0f64;
    let mut keys_match = a.summary.len() == b.summary.len();
    for (k, x) in &a.summary {
        let Some(y) = b.summary.get(k) else {
            keys_match = false;
            continue;
        };
        let d = (x - y).abs();
        // residuals sit at the solver tolerance and are compared absolutely
        dev = dev.max(if k == "solver_residual" || k == "max_mass_error" { d } else { d / x.abs().max(1.0) });
    }
    out.push(check(keys_match && dev <= 1e-6, format!("rigid motion max deviation {dev:.1e} over {} metrics", a.summary.len())));
    out
}
