//! Scenario configuration, closed-form oracles, experiment orchestration and
//! report emission.

pub mod config;
pub mod oracle;
pub mod pipeline;
pub mod report;

pub use config::{Instance, OracleSpec, RigidMotion, ScenarioConfig};
pub use oracle::{oracle_affine, oracle_radial, quadratic_radial_density, Oracle, RadialOracle};
pub use pipeline::{analyze_solved, build_ladder, map_error, mass_error, run_scenario, scenario_svg, solve_scenario, Solved};
pub use report::{compare_reports, CompareOptions, ConvergenceTable, ScenarioReport, SCHEMA_VERSION};
