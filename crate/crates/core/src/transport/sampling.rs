//! Deterministic target sampling: shifted Halton points relaxed by Lloyd
//! iterations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::maxaffine::MaxAffine;
use crate::geometry::domain::ConvexDomain;
use crate::geometry::polygon::{ConvexPolygon, TaggedPolygon, BOUNDARY_TAG};
use crate::Point;

/// Default number of centroidal relaxation steps.
pub const DEFAULT_LLOYD_ITERATIONS: usize = 30;

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// `N` sites in the target with equal masses `area / N`.
pub fn sample_target(target: &ConvexDomain, n: usize, seed: u64) -> (Vec<Point>, Vec<f64>) {
    sample_target_with(target, n, seed, DEFAULT_LLOYD_ITERATIONS)
}

pub fn sample_target_with(target: &ConvexDomain, n: usize, seed: u64, lloyd: usize) -> (Vec<Point>, Vec<f64>) {
    assert!(n >= 1, "need at least one site");
    let poly = target.polygon();
    let (lo, hi) = poly.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: (f64, f64) = (rng.gen(), rng.gen());
    let mut sites = Vec::with_capacity(n);
    let mut k: u64 = 1;
    while sites.len() < n {
        let u = (radical_inverse(k, 2) + shift.0).fract();
        let v = (radical_inverse(k, 3) + shift.1).fract();
        k += 1;
        let p = Point::new(lo.x + u * (hi.x - lo.x), lo.y + v * (hi.y - lo.y));
        if poly.contains(p) {
            sites.push(p);
        }
    }
    for _ in 0..lloyd {
        sites = lloyd_step(poly, &sites);
    }
    let m = target.area() / n as f64;
    (sites, vec![m; n])
}

/// One centroidal Voronoi step inside `poly`.
pub fn lloyd_step(poly: &ConvexPolygon, sites: &[Point]) -> Vec<Point> {
    let offsets: Vec<f64> = sites.iter().map(|p| 0.5 * p.norm_squared()).collect();
    let ma = MaxAffine::new(sites.to_vec(), offsets);
    let region = TaggedPolygon::from_polygon(poly, BOUNDARY_TAG);
    (0..sites.len())
        .into_par_iter()
        .map(|i| {
            let c = ma.cell(i, &region);
            if c.is_empty() || c.area() <= 0.0 {
                sites[i]
            } else {
                c.centroid()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::{make_domain, DomainDescriptor};

    fn square() -> ConvexDomain {
        make_domain(&DomainDescriptor::Square { side: 2.0, corner_radius: 0.0 }).unwrap()
    }

    #[test]
    fn single_site_goes_to_centroid() {
        let d = make_domain(&DomainDescriptor::Disk { radius: 1.0 }).unwrap();
        let (s, m) = sample_target(&d, 1, 7);
        assert!(s[0].norm() < 1e-12);
        assert!((m[0] - d.area()).abs() < 1e-15);
    }

    #[test]
    fn four_sites_on_square() {
        let (s, m) = sample_target_with(&square(), 4, 3, 200);
        for p in &s {
            assert!((p.x.abs() - 0.5).abs() < 0.02 && (p.y.abs() - 0.5).abs() < 0.02, "{p:?}");
        }
        assert!(m.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn deterministic() {
        let a = sample_target(&square(), 200, 11);
        let b = sample_target(&square(), 200, 11);
        assert_eq!(a.0, b.0);
        let c = sample_target(&square(), 200, 12);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn halton() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(2, 3) - 2.0 / 3.0).abs() < 1e-15);
    }
}
