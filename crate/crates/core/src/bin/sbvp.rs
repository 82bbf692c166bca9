use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sbvp::harness::report::{compare_reports, CompareOptions, ScenarioReport, SCHEMA_VERSION};
use sbvp::harness::{analyze_solved, oracle_affine, oracle_radial, quadratic_radial_density, scenario_svg, solve_scenario, ScenarioConfig};
use sbvp::transport::DensityDescriptor;
use sbvp::{Error, Point, Result};

/// Planar Monge–Ampère second boundary-value solver and boundary-regularity
/// diagnostics.
#[derive(Parser)]
#[command(name = "sbvp", version)]
struct Cli {
    /// Worker threads (also read from SBVP_THREADS); results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Output {
    /// Output JSON file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for CSV tables.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    /// Also write an SVG drawing next to the output (or to ./sbvp.svg).
    #[arg(long)]
    svg: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Affine,
    Radial,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the transport problem only.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Solve and run every diagnostic stage.
    Analyze {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Run a closed-form oracle scenario.
    Oracle {
        #[arg(value_enum)]
        kind: OracleKind,
        /// Aspect parameter of the affine oracle.
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        /// Site count.
        #[arg(long, default_value_t = 4096)]
        n: usize,
        /// Constant density for the radial oracle instead of (2/3)(1 + r²).
        #[arg(long)]
        constant: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Convergence verdicts across reports of one config at several N.
    Compare {
        reports: Vec<PathBuf>,
        /// JSON file with comparator options (stability bands).
        #[arg(long)]
        bands: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scenario at several N and compare the reports.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated site counts.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Directory for the per-N reports and the comparison table.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        bands: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    schema_version: u32,
    config: &'a ScenarioConfig,
    iterations: usize,
    residual: f64,
    max_mass_error: f64,
    seconds: f64,
    sites: &'a [Point],
    weights: &'a [f64],
    masses: &'a [f64],
}

fn read_config(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::from_json(&std::fs::read_to_string(path)?)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn svg_path(out: Option<&Path>) -> PathBuf {
    out.map(|p| p.with_extension("svg")).unwrap_or_else(|| PathBuf::from("sbvp.svg"))
}

/// Analyze a config and emit the report; exit 4 when a stage failed.
fn analyze(cfg: &ScenarioConfig, output: &Output) -> Result<ExitCode> {
    let solved = solve_scenario(cfg)?;
    let report = analyze_solved(cfg, &solved);
    write_text(output.out.as_deref(), &report.to_json()?)?;
    if let Some(dir) = &output.csv_dir {
        report.write_csv(dir)?;
    }
    if output.svg {
        std::fs::write(svg_path(output.out.as_deref()), scenario_svg(&solved, &report, 800.0))?;
    }
    for f in &report.failures {
        eprintln!("stage {} failed [{}]: {}", f.stage, f.code, f.message);
    }
    Ok(if report.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(4) })
}

fn compare_options(bands: Option<&Path>) -> Result<CompareOptions> {
    match bands {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?).map_err(|e| Error::InvalidConfig(e.to_string())),
        None => Ok(CompareOptions::default()),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { scenario, output } => {
            let cfg = read_config(&scenario)?;
            let s = solve_scenario(&cfg)?;
            let out = SolveOutput {
                schema_version: SCHEMA_VERSION,
                config: &cfg,
                iterations: s.stats.iterations,
                residual: s.stats.residual,
                max_mass_error: sbvp::harness::mass_error(&s.field),
                seconds: s.seconds,
                sites: s.field.u.sites(),
                weights: s.field.u.weights(),
                masses: s.field.u.masses(),
            };
            write_text(output.out.as_deref(), &serde_json::to_string_pretty(&out)?)?;
            if let Some(dir) = &output.csv_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("solver.csv"), s.stats.to_csv())?;
            }
            if output.svg {
                use sbvp::geometry::svg::{to_svg, Shape};
                let cells: Vec<_> = s.field.diagram.cells.iter().filter(|c| !c.is_empty()).map(|c| c.to_polygon()).collect();
                let mut shapes: Vec<Shape> = cells.iter().map(|c| Shape::Polygon(c, "#888888")).collect();
                shapes.push(Shape::Polygon(s.field.source.polygon(), "#000000"));
                std::fs::write(svg_path(output.out.as_deref()), to_svg(&shapes, 800.0))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { scenario, output } => analyze(&read_config(&scenario)?, &output),
        Command::Oracle {
            kind,
            a,
            n,
            constant,
            output,
        } => {
            let (mut cfg, _) = match kind {
                OracleKind::Affine => oracle_affine(a)?,
                OracleKind::Radial => oracle_radial(if constant {
                    DensityDescriptor::Constant
                } else {
                    quadratic_radial_density()
                })?,
            };
            cfg.n = n;
            analyze(&cfg, &output)
        }
        Command::Compare { reports, bands, out } => {
            let opts = compare_options(bands.as_deref())?;
            let mut rs = Vec::new();
            for p in &reports {
                rs.push(ScenarioReport::from_json(&std::fs::read_to_string(p)?)?);
            }
            let table = compare_reports(&rs, &opts)?;
            write_text(out.as_deref(), &table.to_csv())?;
            Ok(if table.pass { ExitCode::SUCCESS } else { ExitCode::from(4) })
        }
        Command::Sweep {
            scenario,
            n,
            out_dir,
            bands,
        } => {
            let base = read_config(&scenario)?;
            let opts = compare_options(bands.as_deref())?;
            std::fs::create_dir_all(&out_dir)?;
            let mut reports = Vec::new();
            let mut failed = false;
            for &k in &n {
                let cfg = ScenarioConfig { n: k, ..base.clone() };
                let solved = solve_scenario(&cfg)?;
                let r = analyze_solved(&cfg, &solved);
                failed |= !r.failures.is_empty();
                std::fs::write(out_dir.join(format!("report_n{k}.json")), r.to_json()?)?;
                reports.push(r);
            }
            let table = compare_reports(&reports, &opts)?;
            std::fs::write(out_dir.join("compare.csv"), table.to_csv())?;
            print!("{}", table.to_csv());
            Ok(if table.pass && !failed { ExitCode::SUCCESS } else { ExitCode::from(4) })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("SBVP_THREADS").ok().and_then(|s| s.parse().ok()));
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
