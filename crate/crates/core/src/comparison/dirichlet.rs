//! Oliker–Prussner discretization of `det D²w = rhs` with Dirichlet data.
//!
//! Nodes are lattice points inside the domain plus samples of its boundary.
//! The subdifferential of the convex envelope at node `i` is the cell of
//! piece `i` of the Legendre transform `p ↦ max_j (p·x_j − w_j)`, so the
//! same max-affine kernel as the transport solver computes it. The nodal
//! equations `|∂w(x_i)| = rhs·δx²` are solved by damped Newton (default) or
//! by the classical Gauss–Seidel lowering sweeps.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::polygon::{ConvexPolygon, TaggedPolygon, BOUNDARY_TAG};
use crate::numerics::{pcg, Csr};
use crate::transport::laguerre::{collect_pairs, compute_cells};
use crate::transport::maxaffine::MaxAffine;
use crate::Point;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirichletMethod {
    #[default]
    Newton,
    GaussSeidel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DirichletOptions {
    /// Max relative nodal measure residual.
    pub tol: f64,
    /// Cap on Newton iterations or Gauss–Seidel sweeps.
    pub max_sweeps: usize,
    pub method: DirichletMethod,
    /// Interior nodes closer than this fraction of `δx` to the boundary are dropped.
    pub margin: f64,
}

impl Default for DirichletOptions {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_sweeps: 50_000,
            method: DirichletMethod::Newton,
            margin: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletSolution {
    pub spacing: f64,
    pub rhs: f64,
    pub nodes: Vec<Point>,
    pub values: Vec<f64>,
    pub boundary_nodes: Vec<Point>,
    pub boundary_values: Vec<f64>,
    /// Subdifferential areas at the interior nodes.
    pub masses: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl DirichletSolution {
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Interior lattice `origin + δx·Z²` and boundary samples at spacing at most `δx`.
pub fn lattice(domain: &ConvexPolygon, dx: f64, origin: Point, margin: f64) -> (Vec<Point>, Vec<Point>) {
    let (lo, hi) = domain.bounding_box();
    let i0 = ((lo.x - origin.x) / dx).floor() as i64;
    let i1 = ((hi.x - origin.x) / dx).ceil() as i64;
    let j0 = ((lo.y - origin.y) / dx).floor() as i64;
    let j1 = ((hi.y - origin.y) / dx).ceil() as i64;
    let mut interior = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let x = origin + Point::new(i as f64 * dx, j as f64 * dx);
            if domain.inner_distance(x) > margin * dx {
                interior.push(x);
            }
        }
    }
    let mut boundary = Vec::new();
    for (a, b) in domain.edges() {
        let m = ((b - a).norm() / dx).ceil().max(1.0) as usize;
        for k in 0..m {
            boundary.push(a + (b - a) * (k as f64 / m as f64));
        }
    }
    (interior, boundary)
}

struct Problem<'a> {
    nodes: Vec<Point>,
    m: usize,
    target: f64,
    region: ConvexPolygon,
    _d: std::marker::PhantomData<&'a ()>,
}

impl Problem<'_> {
    fn cells(&self, values: &[f64]) -> (MaxAffine, Vec<TaggedPolygon>) {
        let ma = MaxAffine::new(self.nodes.clone(), values.to_vec());
        let cells = compute_cells(&ma, &self.region);
        (ma, cells)
    }

    fn areas(&self, cells: &[TaggedPolygon]) -> Vec<f64> {
        cells[..self.m].iter().map(|c| if c.is_empty() { 0.0 } else { c.area() }).collect()
    }

    fn residual(&self, areas: &[f64]) -> f64 {
        areas.iter().map(|a| (a - self.target).abs() / self.target).fold(0.0, f64::max)
    }
}

/// Solve `det D²w = rhs` in `domain` with `w = g` on the boundary at lattice
/// spacing `dx` (lattice anchored at `origin`).
pub fn solve_dirichlet(
    domain: &ConvexPolygon,
    g: &dyn Fn(Point) -> f64,
    rhs: f64,
    dx: f64,
    origin: Point,
    opts: &DirichletOptions,
) -> Result<DirichletSolution> {
    if !(rhs > 0.0) || !(dx > 0.0) {
        return Err(Error::InvalidSpec("Dirichlet problem needs positive rhs and spacing".into()));
    }
    let (interior, boundary) = lattice(domain, dx, origin, opts.margin);
    if interior.len() < 4 {
        return Err(Error::InvalidSpec(format!(
            "spacing {dx:.3e} leaves only {} interior nodes",
            interior.len()
        )));
    }
    let m = interior.len();
    let bvals: Vec<f64> = boundary.iter().map(|x| g(*x)).collect();
    let gmax = bvals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gmin = bvals.iter().copied().fold(f64::INFINITY, f64::min);
    let c = domain.centroid();
    let big_r2 = boundary.iter().map(|b| (b - c).norm_squared()).fold(0.0, f64::max);
    // w0 = gmin + s(|x − c|² − R²) lies below the data and is strictly
    // convex, so every interior node starts on the lower envelope.
    let s = 0.5 * rhs.sqrt();
    let mut values: Vec<f64> = interior.iter().map(|x| gmin + s * ((x - c).norm_squared() - big_r2)).collect();
    let range = gmax - values.iter().copied().fold(f64::INFINITY, f64::min);
    let pmax = 8.0 * (range / (opts.margin * dx)).max(rhs.sqrt() * domain.diameter());
    let mut nodes = interior.clone();
    nodes.extend(boundary.iter().copied());
    let problem = Problem {
        nodes,
        m,
        target: rhs * dx * dx,
        region: ConvexPolygon::from_box(Point::new(-pmax, -pmax), Point::new(pmax, pmax)),
        _d: std::marker::PhantomData,
    };
    let mut all: Vec<f64> = values.clone();
    all.extend(bvals.iter().copied());
    let (masses, residual, iterations) = match opts.method {
        DirichletMethod::Newton => newton(&problem, &mut all, opts)?,
        DirichletMethod::GaussSeidel => gauss_seidel(&problem, &mut all, opts)?,
    };
    values.copy_from_slice(&all[..m]);
    Ok(DirichletSolution {
        spacing: dx,
        rhs,
        nodes: interior,
        values,
        boundary_nodes: boundary,
        boundary_values: bvals,
        masses,
        residual,
        iterations,
    })
}

fn newton(p: &Problem, w: &mut [f64], opts: &DirichletOptions) -> Result<(Vec<f64>, f64, usize)> {
    let n = p.nodes.len();
    let (_, mut cells) = p.cells(w);
    let mut areas = p.areas(&cells);
    if areas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::DegenerateConfiguration("empty subdifferential at the initial guess".into()));
    }
    let floor = areas.iter().copied().fold(p.target, f64::min) * 0.3;
    let pinned: Vec<bool> = (0..n).map(|i| i >= p.m).collect();
    let mut history = Vec::new();
    for it in 0..=opts.max_sweeps {
        let res = p.residual(&areas);
        history.push(res);
        debug!("dirichlet newton {it}: residual {res:.3e}");
        if res <= opts.tol {
            return Ok((areas, res, it));
        }
        if it == opts.max_sweeps {
            break;
        }
        let nodes = &p.nodes;
        let pairs = collect_pairs(&cells, |a, b, (i, j)| {
            let d = (nodes[i] - nodes[j]).norm();
            if d == 0.0 {
                0.0
            } else {
                (b - a).norm() / d
            }
        });
        let lap = Csr::laplacian(n, &pairs, &pinned);
        let mut rhs = vec![0.0; n];
        for i in 0..p.m {
            rhs[i] = areas[i] - p.target;
        }
        let delta = pcg(&lap, &rhs, 1e-12, 20 * n + 100);
        let g_norm: f64 = rhs.iter().map(|v| v.abs()).sum();
        let mut tau = 1.0;
        loop {
            let trial: Vec<f64> = w.iter().zip(&delta).map(|(a, d)| a + tau * d).collect();
            let (_, c2) = p.cells(&trial);
            let a2 = p.areas(&c2);
            let min_a = a2.iter().copied().fold(f64::INFINITY, f64::min);
            let g_new: f64 = a2.iter().map(|a| (a - p.target).abs()).sum();
            if min_a >= floor && g_new <= (1.0 - 0.5 * tau) * g_norm {
                w.copy_from_slice(&trial);
                cells = c2;
                areas = a2;
                break;
            }
            tau *= 0.5;
            if tau < 1e-10 {
                return Err(Error::DirichletNonConvergence { residuals: history });
            }
        }
    }
    Err(Error::DirichletNonConvergence { residuals: history })
}

/// Area of the subdifferential at node `i` by direct clipping against every
/// other node.
fn local_area(p: &Problem, w: &[f64], i: usize) -> f64 {
    let mut cell = TaggedPolygon::from_polygon(&p.region, BOUNDARY_TAG);
    let xi = p.nodes[i];
    for (j, xj) in p.nodes.iter().enumerate() {
        if j == i {
            continue;
        }
        // p·(x_j − x_i) ≤ w_j − w_i
        if !cell.clip(xj - xi, w[j] - w[i], j as i64) {
            return 0.0;
        }
    }
    cell.area()
}

fn gauss_seidel(p: &Problem, w: &mut [f64], opts: &DirichletOptions) -> Result<(Vec<f64>, f64, usize)> {
    let mut history = Vec::new();
    for sweep in 0..=opts.max_sweeps {
        let areas: Vec<f64> = (0..p.m).map(|i| local_area(p, w, i)).collect();
        let res = p.residual(&areas);
        history.push(res);
        if res <= opts.tol {
            return Ok((areas, res, sweep));
        }
        if sweep == opts.max_sweeps {
            break;
        }
        for i in 0..p.m {
            // the measure at i decreases as w_i rises; bracket and bisect
            let area_at = |v: f64, w: &mut [f64]| {
                let old = w[i];
                w[i] = v;
                let a = local_area(p, w, i);
                w[i] = old;
                a
            };
            let mut hi = w[i];
            let mut step = p.target.sqrt().max(1e-12);
            let mut lo = hi - step;
            while area_at(lo, w) < p.target {
                step *= 2.0;
                lo = hi - step;
            }
            while area_at(hi, w) > p.target {
                hi += step;
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if area_at(mid, w) > p.target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            w[i] = 0.5 * (lo + hi);
        }
    }
    Err(Error::DirichletNonConvergence { residuals: history })
}
