use std::process::Command;

use sbvp::geometry::DomainDescriptor;
use sbvp::harness::*;
use sbvp::transport::DensityDescriptor;
use sbvp::Error;

fn rounded_square_disk(n: usize) -> ScenarioConfig {
    ScenarioConfig {
        name: "rsq-disk".into(),
        source: DomainDescriptor::Square {
            side: 2.0,
            corner_radius: 0.2,
        },
        target: DomainDescriptor::Disk { radius: 1.0 },
        density: DensityDescriptor::Holder {
            alpha: 0.5,
            amplitude: 0.5,
            anchor: [1.0, 0.0],
        },
        n,
        base_points: vec![0.0, 0.06, 0.125],
        ..Default::default()
    }
}

#[test]
fn report_json_round_trip() {
    let (mut cfg, _) = oracle_affine(2.0).unwrap();
    cfg.n = 256;
    let r = run_scenario(&cfg).unwrap();
    let back = ScenarioReport::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), r.to_json().unwrap());
    assert_eq!(back.schema_version, SCHEMA_VERSION);

    let mut v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
    v["schema_version"] = (SCHEMA_VERSION + 1).into();
    let err = ScenarioReport::from_json(&v.to_string()).unwrap_err();
    assert!(matches!(err, Error::IncompatibleReport(_)));
}

#[test]
fn reports_are_reproducible() {
    let cfg = rounded_square_disk(512);
    let a = run_scenario(&cfg).unwrap().without_timing().to_json().unwrap();
    let b = run_scenario(&cfg).unwrap().without_timing().to_json().unwrap();
    assert!(a == b, "reports differ");
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cfg = rounded_square_disk(512);
    let run = |k| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
        pool.install(|| run_scenario(&cfg).unwrap().without_timing().to_json().unwrap())
    };
    assert!(run(1) == run(3));
}

#[test]
fn rigid_motion_covariance() {
    let mut cfg = rounded_square_disk(1024);
    let a = run_scenario(&cfg).unwrap();
    cfg.motion = RigidMotion {
        angle: 0.7,
        shift: [0.3, -0.2],
    };
    let b = run_scenario(&cfg).unwrap();
    assert!(a.summary.len() > 20);
    assert_eq!(a.summary.keys().collect::<Vec<_>>(), b.summary.keys().collect::<Vec<_>>());
    for (k, v) in &a.summary {
        let w = b.summary[k];
        // residuals sit at the solver tolerance; compare absolutely
        if k == "solver_residual" || k == "max_mass_error" {
            assert!((v - w).abs() < 1e-6, "{k}: {v} vs {w}");
            continue;
        }
        assert!((v - w).abs() <= 1e-6 * v.abs().max(1.0), "{k}: {v} vs {w}");
    }
}

#[test]
fn compare_identical_reports_passes() {
    let (mut cfg, _) = oracle_affine(2.0).unwrap();
    cfg.n = 256;
    let r = run_scenario(&cfg).unwrap();
    let t = compare_reports(&[r.clone(), r], &CompareOptions::default()).unwrap();
    assert!(t.pass);
    assert!(t.rows.iter().all(|row| row.drift == 0.0 || row.metric == "map_rms"));
}

#[test]
fn compare_rejects_mismatched_configs() {
    let (mut a, _) = oracle_affine(2.0).unwrap();
    a.n = 256;
    let (mut b, _) = oracle_affine(3.0).unwrap();
    b.n = 512;
    let ra = run_scenario(&a).unwrap();
    let rb = run_scenario(&b).unwrap();
    let err = compare_reports(&[ra.clone(), rb], &CompareOptions::default()).unwrap_err();
    assert!(matches!(err, Error::IncompatibleReport(_)));
    let err = compare_reports(&[ra], &CompareOptions::default()).unwrap_err();
    assert!(matches!(err, Error::IncompatibleReport(_)));
}

#[test]
fn compare_affine_rate_band() {
    let (mut cfg, _) = oracle_affine(2.0).unwrap();
    let mut reports = Vec::new();
    for n in [1024, 4096] {
        cfg.n = n;
        reports.push(run_scenario(&cfg).unwrap());
    }
    let t = compare_reports(&reports, &CompareOptions::default()).unwrap();
    let row = t.rows.iter().find(|r| r.metric == "map_rms").unwrap();
    assert!(row.pass, "map rms ratio {}", row.drift);
    assert!(t.to_csv().starts_with("metric,"));
}

#[test]
fn csv_and_svg_exports() {
    let (mut cfg, _) = oracle_affine(2.0).unwrap();
    cfg.n = 256;
    let solved = solve_scenario(&cfg).unwrap();
    let r = analyze_solved(&cfg, &solved);
    let dir = tempfile::tempdir().unwrap();
    let files = r.write_csv(dir.path()).unwrap();
    for f in ["solver.csv", "summary.csv", "obliqueness.csv", "ladder.csv"] {
        assert!(files.iter().any(|x| x == f), "{f} missing");
        let body = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(body.lines().count() >= 2, "{f} empty");
    }
    let svg = scenario_svg(&solved, &r, 400.0);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

fn sbvp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sbvp"))
}

#[test]
fn cli_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f);

    let st = sbvp()
        .args(["--threads", "2", "oracle", "affine", "--n", "256", "--out"])
        .arg(p("a.json"))
        .arg("--csv-dir")
        .arg(p("csv"))
        .arg("--svg")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(p("a.svg").exists() && p("csv/summary.csv").exists());
    ScenarioReport::from_json(&std::fs::read_to_string(p("a.json")).unwrap()).unwrap();

    let out = sbvp().arg("compare").arg(p("a.json")).arg(p("a.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("obliqueness_min"));

    std::fs::write(p("bad.json"), r#"{"n": 3}"#).unwrap();
    let st = sbvp().arg("solve").arg("--scenario").arg(p("bad.json")).status().unwrap();
    assert_eq!(st.code(), Some(3));

    std::fs::write(p("s.json"), r#"{"n": 128}"#).unwrap();
    let st = sbvp()
        .args(["solve", "--scenario"])
        .arg(p("s.json"))
        .arg("--out")
        .arg(p("sol.json"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let sol: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p("sol.json")).unwrap()).unwrap();
    assert_eq!(sol["weights"].as_array().unwrap().len(), 128);

    let st = sbvp()
        .args(["sweep", "--scenario"])
        .arg(p("s.json"))
        .args(["--n", "128,256", "--out-dir"])
        .arg(p("sweep"))
        .status()
        .unwrap();
    assert!(st.code() == Some(0) || st.code() == Some(4));
    assert!(p("sweep/compare.csv").exists() && p("sweep/report_n256.json").exists());
}

