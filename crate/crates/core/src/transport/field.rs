//! A solved transport problem bundled with its Laguerre diagram and
//! neighbourhood queries over the cells.

use super::density::DensityField;
use super::laguerre::LaguerreDiagram;
use super::potential::SemiDiscretePotential;
use crate::geometry::domain::ConvexDomain;
use crate::{Mat2, Point};

/// Uniform bucket grid over points for radius queries.
#[derive(Clone, Debug)]
pub struct PointGrid {
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
    points: Vec<Point>,
}

impl PointGrid {
    pub fn new(points: Vec<Point>, cell: f64) -> Self {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in &points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        if points.is_empty() {
            lo = Point::zeros();
            hi = Point::zeros();
        }
        let cell = cell.max(1e-12);
        let nx = (((hi.x - lo.x) / cell).floor() as usize + 1).min(4096);
        let ny = (((hi.y - lo.y) / cell).floor() as usize + 1).min(4096);
        let mut buckets = vec![Vec::new(); nx * ny];
        let mut g = Self { lo, cell, nx, ny, buckets: Vec::new(), points };
        for (i, p) in g.points.iter().enumerate() {
            let (bx, by) = g.bucket(*p);
            buckets[by * nx + bx].push(i as u32);
        }
        g.buckets = buckets;
        g
    }

    fn bucket(&self, p: Point) -> (usize, usize) {
        let bx = ((p.x - self.lo.x) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let by = ((p.y - self.lo.y) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (bx, by)
    }

    /// Indices of points within distance `r` of `x`, ascending.
    pub fn within(&self, x: Point, r: f64) -> Vec<usize> {
        let (x0, y0) = self.bucket(x - Point::new(r, r));
        let (x1, y1) = self.bucket(x + Point::new(r, r));
        let r2 = r * r;
        let mut out = Vec::new();
        for by in y0..=y1 {
            for bx in x0..=x1 {
                for &i in &self.buckets[by * self.nx + bx] {
                    if (self.points[i as usize] - x).norm_squared() <= r2 {
                        out.push(i as usize);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Index of the nearest point.
    pub fn nearest(&self, x: Point) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let mut r = self.cell;
        loop {
            let c = self.within(x, r);
            if let Some(best) = c.iter().copied().min_by(|&a, &b| {
                (self.points[a] - x)
                    .norm_squared()
                    .total_cmp(&(self.points[b] - x).norm_squared())
                    .then(a.cmp(&b))
            }) {
                return Some(best);
            }
            r *= 2.0;
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }
}

/// Local affine fit `T(z) ≈ p + H (z − x)` of the Brenier map.
#[derive(Clone, Debug)]
pub struct MapFit {
    pub gradient: Point,
    /// Symmetrized linear part.
    pub hessian: Mat2,
    /// Weighted RMS residual of the fit.
    pub residual: f64,
    pub count: usize,
}

/// Solved potential with its diagram on the source.
#[derive(Clone, Debug)]
pub struct TransportField {
    pub u: SemiDiscretePotential,
    pub source: ConvexDomain,
    pub target: ConvexDomain,
    pub density: DensityField,
    pub diagram: LaguerreDiagram,
    pub centroids: Vec<Point>,
    pub areas: Vec<f64>,
    grid: PointGrid,
}

impl TransportField {
    pub fn new(u: SemiDiscretePotential, source: ConvexDomain, target: ConvexDomain, density: DensityField) -> Self {
        let diagram = u.laguerre_diagram(source.polygon());
        let areas = diagram.areas();
        let centroids: Vec<Point> = diagram
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| if c.is_empty() { u.sites()[i] } else { c.centroid() })
            .collect();
        let spacing = (source.area() / u.len() as f64).sqrt();
        let grid = PointGrid::new(centroids.clone(), 2.0 * spacing);
        Self {
            u,
            source,
            target,
            density,
            diagram,
            centroids,
            areas,
            grid,
        }
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// Typical cell width `sqrt(area(Ω)/N)`.
    pub fn spacing(&self) -> f64 {
        (self.source.area() / self.n() as f64).sqrt()
    }

    /// Cells whose centroid lies within `r` of `x` (nonempty cells only).
    pub fn cells_near(&self, x: Point, r: f64) -> Vec<usize> {
        self.grid
            .within(x, r)
            .into_iter()
            .filter(|&i| self.areas[i] > 0.0)
            .collect()
    }

    /// Area-weighted least-squares affine fit of `centroid_j ↦ site_j` over
    /// the cells within `r` of `x`. `None` with fewer than `min_cells` cells.
    pub fn fit_map(&self, x: Point, r: f64, min_cells: usize) -> Option<MapFit> {
        let idx = self.cells_near(x, r);
        if idx.len() < min_cells.max(3) {
            return None;
        }
        let mut m = nalgebra::Matrix3::<f64>::zeros();
        let mut rx = nalgebra::Vector3::<f64>::zeros();
        let mut ry = nalgebra::Vector3::<f64>::zeros();
        for &j in &idx {
            let d = (self.centroids[j] - x) / r;
            let w = self.areas[j];
            let row = nalgebra::Vector3::new(1.0, d.x, d.y);
            m += w * row * row.transpose();
            let y = self.u.sites()[j];
            rx += w * y.x * row;
            ry += w * y.y * row;
        }
        let ch = m.cholesky()?;
        let cx = ch.solve(&rx);
        let cy = ch.solve(&ry);
        let lin = Mat2::new(cx[1], cx[2], cy[1], cy[2]) / r;
        let sym = 0.5 * (lin + lin.transpose());
        let gradient = Point::new(cx[0], cy[0]);
        let mut ss = 0.0;
        let mut ws = 0.0;
        for &j in &idx {
            let pred = gradient + lin * (self.centroids[j] - x);
            ss += self.areas[j] * (self.u.sites()[j] - pred).norm_squared();
            ws += self.areas[j];
        }
        Some(MapFit {
            gradient,
            hessian: sym,
            residual: (ss / ws).sqrt(),
            count: idx.len(),
        })
    }

    /// Gradient at `x` from a local fit of the map, widening the radius until
    /// enough cells are found; falls back to the active site.
    pub fn fitted_gradient(&self, x: Point) -> Point {
        let mut r = 4.0 * self.spacing();
        for _ in 0..6 {
            if let Some(fit) = self.fit_map(x, r, 12) {
                return fit.gradient;
            }
            r *= 2.0;
        }
        self.u.brenier_map(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_queries_match_brute_force() {
        let pts: Vec<Point> = (0..400)
            .map(|k| {
                let t = k as f64 * 0.618_033_988_75;
                Point::new(t.fract() * 2.0 - 1.0, ((k as f64) / 400.0) * 2.0 - 1.0)
            })
            .collect();
        let g = PointGrid::new(pts.clone(), 0.1);
        let x = Point::new(0.13, -0.27);
        let got = g.within(x, 0.3);
        let want: Vec<usize> = (0..pts.len()).filter(|&i| (pts[i] - x).norm() <= 0.3).collect();
        assert_eq!(got, want);
        let near = g.nearest(x).unwrap();
        let bf = (0..pts.len())
            .min_by(|&a, &b| (pts[a] - x).norm().total_cmp(&(pts[b] - x).norm()))
            .unwrap();
        assert_eq!(near, bf);
    }
}
