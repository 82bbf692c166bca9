//! Laguerre (power) diagrams of max-affine potentials restricted to a convex
//! polygon.

use rayon::prelude::*;

use super::density::DensityField;
use super::maxaffine::MaxAffine;
use crate::geometry::polygon::{ConvexPolygon, TaggedPolygon, BOUNDARY_TAG};
use crate::Point;

/// Cells of a max-affine function inside a convex region.
#[derive(Clone, Debug)]
pub struct LaguerreDiagram {
    /// Cell `i` belongs to piece `i`; empty cells have no points.
    pub cells: Vec<TaggedPolygon>,
    /// `(i, j, shared edge length)` with `i < j`, sorted.
    pub adjacency: Vec<(usize, usize, f64)>,
}

impl LaguerreDiagram {
    /// Build the diagram of `ma` clipped to `region`.
    pub fn new(ma: &MaxAffine, region: &ConvexPolygon) -> Self {
        let cells = compute_cells(ma, region);
        let adjacency = collect_pairs(&cells, |a, b, _| (b - a).norm());
        Self { cells, adjacency }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_polygon(&self, i: usize) -> Option<ConvexPolygon> {
        let c = &self.cells[i];
        if c.is_empty() {
            None
        } else {
            Some(c.to_polygon())
        }
    }

    pub fn areas(&self) -> Vec<f64> {
        self.cells.iter().map(|c| if c.is_empty() { 0.0 } else { c.area() }).collect()
    }

    /// All cell vertices (with repetitions across neighbouring cells removed
    /// only when they coincide bitwise).
    pub fn vertices(&self) -> Vec<Point> {
        let mut v: Vec<Point> = self.cells.iter().flat_map(|c| c.points.iter().copied()).collect();
        v.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        v.dedup();
        v
    }

    /// Cells touching the region boundary.
    pub fn boundary_cells(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.tags.contains(&BOUNDARY_TAG))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Cells of every piece of `ma` inside `region`, computed in parallel with
/// the output in index order.
pub fn compute_cells(ma: &MaxAffine, region: &ConvexPolygon) -> Vec<TaggedPolygon> {
    let (lo, hi) = region.bounding_box();
    let pad = 1e-6 * (hi - lo).norm();
    let bbox = ConvexPolygon::from_box(lo - Point::new(pad, pad), hi + Point::new(pad, pad));
    let start = TaggedPolygon::from_polygon(&bbox, BOUNDARY_TAG);
    let hps = region.half_planes();
    (0..ma.len())
        .into_par_iter()
        .map(|i| {
            let mut c = ma.cell(i, &start);
            if c.is_empty() {
                return c;
            }
            for hp in &hps {
                if !c.clip(hp.normal, hp.offset, BOUNDARY_TAG) {
                    break;
                }
            }
            c
        })
        .collect()
}

/// Sum a per-edge quantity over interior edges, symmetrized over the two
/// sides: every `(i, j)` value is the mean of what cells `i` and `j` report.
pub fn collect_pairs<F>(cells: &[TaggedPolygon], weight: F) -> Vec<(usize, usize, f64)>
where
    F: Fn(Point, Point, (usize, usize)) -> f64 + Sync,
{
    let mut raw: Vec<(usize, usize, f64)> = cells
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, c)| {
            let w = &weight;
            c.edges()
                .filter(|&(_, _, t)| t >= 0 && t as usize != i)
                .map(move |(a, b, t)| {
                    let j = t as usize;
                    let key = if i < j { (i, j) } else { (j, i) };
                    (key.0, key.1, 0.5 * w(a, b, (i, j)))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    raw.sort_by_key(|a| (a.0, a.1));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(raw.len() / 2 + 1);
    for (i, j, w) in raw {
        match out.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += w,
            _ => out.push((i, j, w)),
        }
    }
    out
}

/// Cell masses `∫_{cell_i} f` in index order.
pub fn cell_masses(cells: &[TaggedPolygon], f: &DensityField) -> Vec<f64> {
    cells
        .par_iter()
        .map(|c| if c.is_empty() { 0.0 } else { f.integrate(&c.points) })
        .collect()
}

/// Newton weights `w_ij = ∫_{edge ij} f / |s_i − s_j|`.
pub fn edge_weights(cells: &[TaggedPolygon], slopes: &[Point], f: &DensityField) -> Vec<(usize, usize, f64)> {
    collect_pairs(cells, |a, b, (i, j)| {
        let d = (slopes[i] - slopes[j]).norm();
        if d == 0.0 {
            0.0
        } else {
            f.integrate_segment(a, b) / d
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexPolygon {
        ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0))
    }

    #[test]
    fn two_sites_bisector() {
        let ma = MaxAffine::new(vec![Point::new(1.0, 0.0), Point::new(-1.0, 0.0)], vec![0.0, 0.0]);
        let d = LaguerreDiagram::new(&ma, &square());
        let a = d.areas();
        assert!((a[0] - 2.0).abs() < 1e-12 && (a[1] - 2.0).abs() < 1e-12);
        assert_eq!(d.adjacency.len(), 1);
        assert!((d.adjacency[0].2 - 2.0).abs() < 1e-12);
        let c = d.cell_polygon(0).unwrap();
        assert!(c.vertices().iter().all(|v| v.x >= -1e-12));
    }

    #[test]
    fn weighted_interface() {
        // x·(1,0) − 0.2 = x·(−1,0)  ⇒  x₁ = 0.1
        let ma = MaxAffine::new(vec![Point::new(1.0, 0.0), Point::new(-1.0, 0.0)], vec![0.2, 0.0]);
        let d = LaguerreDiagram::new(&ma, &square());
        let c = d.cell_polygon(0).unwrap();
        let xmin = c.vertices().iter().map(|v| v.x).fold(f64::INFINITY, f64::min);
        assert!((xmin - 0.1).abs() < 1e-14);
    }

    #[test]
    fn single_cell_is_region() {
        let ma = MaxAffine::new(vec![Point::new(0.3, 0.1)], vec![0.0]);
        let d = LaguerreDiagram::new(&ma, &square());
        assert!((d.areas()[0] - 4.0).abs() < 1e-14);
        assert!(d.adjacency.is_empty());
    }
}
