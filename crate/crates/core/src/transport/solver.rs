//! Damped Newton solver for the semi-discrete transport problem.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::density::DensityField;
use super::laguerre::{cell_masses, compute_cells, edge_weights};
use super::maxaffine::MaxAffine;
use super::potential::SemiDiscretePotential;
use crate::error::{Error, Result};
use crate::geometry::domain::ConvexDomain;
use crate::geometry::polygon::TaggedPolygon;
use crate::numerics::{pcg, Csr};
use crate::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Max relative cell-mass error at convergence.
    pub tol: f64,
    pub max_iterations: usize,
    /// Fraction of the damping floor below which a step is halved.
    pub damping_fraction: f64,
    /// Relative residual for the conjugate-gradient solve.
    pub cg_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iterations: 200,
            damping_fraction: 0.3,
            cg_tol: 1e-10,
        }
    }
}

/// One row of the solver log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub residual: f64,
    pub step: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<IterationLog>,
}

impl SolveStats {
    /// CSV with header `iteration,residual,step`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,residual,step\n");
        for r in &self.history {
            s.push_str(&format!("{},{:e},{}\n", r.iteration, r.residual, r.step));
        }
        s
    }
}

/// Initial weights: the conjugate of a diagonal quadratic whose gradient
/// maps `Ω` into itself around its centroid and onto the sites' bounding
/// box, scaled so that every site's preimage lies strictly inside `Ω`.
/// Each cell then contains that preimage and is nonempty.
pub fn initial_weights(source: &ConvexDomain, sites: &[Point]) -> Vec<f64> {
    let poly = source.polygon();
    let c = poly.centroid();
    let (lo, hi) = poly.bounding_box();
    let mut slo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut shi = -slo;
    for s in sites {
        slo = slo.inf(s);
        shi = shi.sup(s);
    }
    let cs = sites.iter().fold(Point::zeros(), |a, p| a + p) / sites.len() as f64;
    let w = hi - lo;
    let ws = (shi - slo).map(|v| v.max(1e-12 * (w.x + w.y)));
    let d = Point::new(ws.x / w.x, ws.y / w.y);
    let hps = poly.half_planes();
    let gauge = |v: Point| {
        hps.iter()
            .map(|hp| hp.normal.dot(&v) / (hp.offset - hp.normal.dot(&c)))
            .fold(0.0, f64::max)
    };
    let pre = |y: &Point| Point::new((y.x - cs.x) / d.x, (y.y - cs.y) / d.y);
    let g = sites.iter().map(|y| gauge(pre(y))).fold(0.0, f64::max);
    let s = (g / 0.9).max(1e-12);
    // u0(x) = cs·(x−c) + ½ s (x−c)ᵀ D (x−c);  ψ_i = u0*(y_i)
    sites
        .iter()
        .map(|y| {
            let q = y - cs;
            c.dot(y) + 0.5 * (q.x * q.x / (s * d.x) + q.y * q.y / (s * d.y))
        })
        .collect()
}

fn max_relative_error(m: &[f64], target: &[f64]) -> f64 {
    m.iter()
        .zip(target)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max)
}

struct State {
    cells: Vec<TaggedPolygon>,
    masses: Vec<f64>,
}

fn evaluate(ma: &MaxAffine, source: &ConvexDomain, f: &DensityField) -> State {
    let cells = compute_cells(ma, source.polygon());
    let masses = cell_masses(&cells, f);
    State { cells, masses }
}

/// Solve for weights so that every Laguerre cell carries its target mass.
pub fn solve_potential(
    source: &ConvexDomain,
    f: &DensityField,
    sites: &[Point],
    masses: &[f64],
    opts: &SolverOptions,
) -> Result<(SemiDiscretePotential, SolveStats)> {
    let n = sites.len();
    if n == 0 || masses.len() != n {
        return Err(Error::InvalidSpec("sites and masses must be nonempty and of equal length".into()));
    }
    if masses.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::InvalidSpec("masses must be positive".into()));
    }
    let total: f64 = masses.iter().sum();
    let available = f.integrate(source.polygon().vertices());
    if ((total - available) / available).abs() > 1e-6 {
        return Err(Error::InvalidSpec(format!(
            "mass balance violated: sites carry {total}, density integrates to {available}"
        )));
    }
    let gauge = n - 1;
    let mut pinned = vec![false; n];
    pinned[gauge] = true;
    let mut stats = SolveStats::default();
    if n == 1 {
        let m = f.integrate(source.polygon().vertices());
        let r = ((m - masses[0]) / masses[0]).abs();
        stats.residual = r;
        stats.history.push(IterationLog { iteration: 0, residual: r, step: 0.0 });
        let u = SemiDiscretePotential::new(sites.to_vec(), masses.to_vec(), vec![0.0], 0, r)?;
        return Ok((u, stats));
    }

    let mut psi = initial_weights(source, sites);
    let mut ma = MaxAffine::new(sites.to_vec(), psi.clone());
    let mut state = evaluate(&ma, source, f);
    if let Some(i) = state.masses.iter().position(|m| !(*m > 0.0)) {
        return Err(Error::DegenerateConfiguration(format!("cell {i} is empty at the initial weights")));
    }
    let floor = state
        .masses
        .iter()
        .chain(masses.iter())
        .copied()
        .fold(f64::INFINITY, f64::min);
    let min_mass = opts.damping_fraction * floor;

    let mut residuals = Vec::new();
    for it in 0..=opts.max_iterations {
        let g: Vec<f64> = state.masses.iter().zip(masses).map(|(m, t)| m - t).collect();
        let err = max_relative_error(&state.masses, masses);
        residuals.push(err);
        if it == 0 {
            stats.history.push(IterationLog { iteration: 0, residual: err, step: 0.0 });
        }
        debug!("newton iteration {it}: residual {err:.3e}");
        if err <= opts.tol {
            stats.iterations = it;
            stats.residual = err;
            let shift = psi[gauge];
            let weights: Vec<f64> = psi.iter().map(|p| p - shift).collect();
            let u = SemiDiscretePotential::new(sites.to_vec(), masses.to_vec(), weights, gauge, err)?;
            info!("transport solve converged in {it} iterations, residual {err:.3e}");
            return Ok((u, stats));
        }
        if it == opts.max_iterations {
            break;
        }
        let pairs = edge_weights(&state.cells, sites, f);
        let a = Csr::laplacian(n, &pairs, &pinned);
        let mut rhs = g.clone();
        rhs[gauge] = 0.0;
        let delta = pcg(&a, &rhs, opts.cg_tol, 20 * n + 100);
        let g_norm: f64 = g.iter().map(|v| v.abs()).sum();

        let mut tau = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = psi.iter().zip(&delta).map(|(p, d)| p + tau * d).collect();
            ma.set_offsets(&trial);
            let st = evaluate(&ma, source, f);
            let min_m = st.masses.iter().copied().fold(f64::INFINITY, f64::min);
            let g_new: f64 = st.masses.iter().zip(masses).map(|(m, t)| (m - t).abs()).sum();
            if min_m >= min_mass && g_new <= (1.0 - 0.5 * tau) * g_norm {
                psi = trial;
                state = st;
                break true;
            }
            tau *= 0.5;
            if tau < 1e-10 {
                break false;
            }
        };
        if !accepted {
            ma.set_offsets(&psi);
            residuals.push(err);
            return Err(Error::NonConvergence { residuals });
        }
        let new_err = max_relative_error(&state.masses, masses);
        stats.history.push(IterationLog {
            iteration: it + 1,
            residual: new_err,
            step: tau,
        });
    }
    Err(Error::NonConvergence { residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::{make_domain, DomainDescriptor};
    use crate::transport::sampling::sample_target;

    fn square() -> ConvexDomain {
        make_domain(&DomainDescriptor::Square { side: 2.0, corner_radius: 0.0 }).unwrap()
    }

    #[test]
    fn single_site() {
        let sq = square();
        let f = DensityField::new(Default::default(), sq.polygon(), 4.0).unwrap();
        let (u, st) = solve_potential(&sq, &f, &[Point::new(0.2, 0.1)], &[4.0], &Default::default()).unwrap();
        assert_eq!(u.weights(), &[0.0]);
        assert!(st.residual < 1e-14);
    }

    #[test]
    fn symmetric_pair() {
        let sq = square();
        let f = DensityField::new(Default::default(), sq.polygon(), 4.0).unwrap();
        let sites = [Point::new(1.0, 0.0), Point::new(-1.0, 0.0)];
        let (u, _) = solve_potential(&sq, &f, &sites, &[2.0, 2.0], &Default::default()).unwrap();
        assert!(u.weights()[0].abs() < 1e-7 && u.weights()[1] == 0.0);
    }

    #[test]
    fn converges_on_identity() {
        let sq = square();
        let f = DensityField::new(Default::default(), sq.polygon(), 4.0).unwrap();
        let (sites, masses) = sample_target(&sq, 256, 1);
        let (u, st) = solve_potential(&sq, &f, &sites, &masses, &Default::default()).unwrap();
        assert!(u.residual() <= 1e-7);
        assert!(st.iterations < 50);
        let d = u.laguerre_diagram(sq.polygon());
        let m = cell_masses(&d.cells, &f);
        assert!(max_relative_error(&m, &masses) <= 1e-7);
        assert!(st.to_csv().starts_with("iteration,residual,step\n"));
    }

    #[test]
    fn mass_imbalance_is_rejected() {
        let sq = square();
        let f = DensityField::new(Default::default(), sq.polygon(), 4.0).unwrap();
        let r = solve_potential(&sq, &f, &[Point::zeros(), Point::new(1.0, 0.0)], &[1.0, 1.0], &Default::default());
        assert!(matches!(r, Err(Error::InvalidSpec(_))));
    }
}
