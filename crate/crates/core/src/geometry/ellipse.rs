//! Maximum-area inscribed (John) ellipses and affine normalizing maps.

use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use super::polygon::ConvexPolygon;
use crate::error::{Error, Result};
use crate::{Mat2, Point};

/// `E = {x : (x - c)ᵀ M (x - c) <= 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: Point,
    pub shape: Mat2,
}

impl Ellipse {
    pub fn new(center: Point, shape: Mat2) -> Result<Self> {
        if (shape[(0, 1)] - shape[(1, 0)]).abs() > 1e-12 * shape.norm() {
            return Err(Error::InvalidSpec("ellipse shape matrix is not symmetric".into()));
        }
        let eig = shape.symmetric_eigenvalues();
        if !(eig[0] > 0.0 && eig[1] > 0.0) {
            return Err(Error::InvalidSpec("ellipse shape matrix is not positive definite".into()));
        }
        Ok(Self { center, shape })
    }

    /// Semi-axis lengths, ascending.
    pub fn semi_axes(&self) -> (f64, f64) {
        let e = self.shape.symmetric_eigenvalues();
        let (a, b) = (1.0 / e[0].sqrt(), 1.0 / e[1].sqrt());
        (a.min(b), a.max(b))
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI / self.shape.determinant().sqrt()
    }

    pub fn contains(&self, x: Point) -> bool {
        let d = x - self.center;
        d.dot(&(self.shape * d)) <= 1.0
    }

    /// Boundary point at angle `t` of the parameterization `c + B (cos t, sin t)`.
    pub fn point_at(&self, t: f64) -> Point {
        self.center + sqrt_inv(&self.shape) * Point::new(t.cos(), t.sin())
    }
}

/// `M^{-1/2}` of a symmetric positive-definite matrix.
fn sqrt_inv(m: &Mat2) -> Mat2 {
    let eig = m.symmetric_eigen();
    let d = Mat2::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Affine map `T(x) = linear · x + translation`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizingMap {
    pub linear: Mat2,
    pub translation: Point,
}

impl NormalizingMap {
    pub fn new(linear: Mat2, translation: Point) -> Result<Self> {
        let det = linear.determinant();
        if !(det.abs() > 1e-300) || !det.is_finite() {
            return Err(Error::SingularMap { det });
        }
        Ok(Self { linear, translation })
    }

    pub fn identity() -> Self {
        Self {
            linear: Mat2::identity(),
            translation: Point::zeros(),
        }
    }

    /// `T(x) = L (x - base)`.
    pub fn centered(linear: Mat2, base: Point) -> Result<Self> {
        Self::new(linear, -(linear * base))
    }

    pub fn apply(&self, x: Point) -> Point {
        self.linear * x + self.translation
    }

    /// The point sent to the origin.
    pub fn base_point(&self) -> Point {
        self.linear
            .try_inverse()
            .map(|li| -(li * self.translation))
            .unwrap_or_else(Point::zeros)
    }

    pub fn determinant(&self) -> f64 {
        self.linear.determinant()
    }

    pub fn inverse(&self) -> Result<NormalizingMap> {
        let li = self
            .linear
            .try_inverse()
            .ok_or(Error::SingularMap { det: self.linear.determinant() })?;
        NormalizingMap::new(li, -(li * self.translation))
    }

    pub fn compose(&self, inner: &NormalizingMap) -> NormalizingMap {
        NormalizingMap {
            linear: self.linear * inner.linear,
            translation: self.linear * inner.translation + self.translation,
        }
    }
}

/// Dual normalizing map `T* = (Tᵀ)⁻¹`.
///
/// The linear part is the inverse transpose, so `(L x)·(L⁻ᵀ y) = x·y`.
/// Translations follow a shared base point: if `T(x) = L(x - x_c)` then
/// `T*(y) = L⁻ᵀ(y - x_c)`. With this convention `dual_map` is an involution.
pub fn dual_map(t: &NormalizingMap) -> Result<NormalizingMap> {
    let det = t.linear.determinant();
    let li = t.linear.try_inverse().filter(|_| det.abs() > 1e-300 && det.is_finite());
    let li = li.ok_or(Error::SingularMap { det })?;
    let lit = li.transpose();
    NormalizingMap::new(lit, lit * li * t.translation)
}

/// Tolerance on the barrier optimality gap (log det units) required for
/// a normalization to be accepted.
pub const JOHN_TOLERANCE: f64 = 1e-6;

/// Maximum-area inscribed ellipse of `body` and the map `T` sending it to
/// the unit disk.
///
/// Solved by a primal log-barrier method over `(c, B)` with `E = c + B·disk`,
/// maximizing `log det B` subject to `‖B a_k‖ + a_k·c <= b_k` for every edge
/// half-plane `a_k·x <= b_k`. The unit disk lies in `T(body)` and `T(body)`
/// lies in the disk of radius 2 (√2 for centrally symmetric bodies).
pub fn john_normalize(body: &ConvexPolygon) -> Result<(Ellipse, NormalizingMap)> {
    // Work in coordinates centred at the centroid and scaled by the diameter.
    let centroid = body.centroid();
    let scale = body.diameter();
    if !(scale > 0.0) {
        return Err(Error::NormalizationFailure { gap: f64::INFINITY });
    }
    let hps: Vec<(Point, f64)> = body
        .half_planes()
        .into_iter()
        .map(|hp| (hp.normal, (hp.offset - hp.normal.dot(&centroid)) / scale))
        .collect();
    let m = hps.len();
    let r0 = hps.iter().map(|h| h.1).fold(f64::INFINITY, f64::min);
    if !(r0 > 0.0) {
        return Err(Error::NormalizationFailure { gap: f64::INFINITY });
    }
    let mut z = Vector5::new(0.0, 0.0, 0.5 * r0, 0.0, 0.5 * r0);

    let nu = 2.0 * m as f64 + 2.0;
    let mut t = 1.0;
    let target_gap = 1e-9;
    let mut gap = f64::INFINITY;
    for _outer in 0..80 {
        let centred = center_barrier(&hps, &mut z, t);
        if centred {
            gap = nu / t;
            if gap <= target_gap {
                break;
            }
        } else if gap.is_infinite() {
            gap = nu / t;
        }
        if !centred {
            break;
        }
        t *= 8.0;
    }
    if !(gap <= JOHN_TOLERANCE) {
        return Err(Error::NormalizationFailure { gap });
    }

    let c = centroid + scale * Point::new(z[0], z[1]);
    let b = scale * Mat2::new(z[2], z[3], z[3], z[4]);
    let bi = b.try_inverse().ok_or(Error::SingularMap { det: b.determinant() })?;
    let shape = bi * bi;
    let shape = 0.5 * (shape + shape.transpose());
    let ellipse = Ellipse { center: c, shape };
    let map = NormalizingMap::centered(bi, c)?;
    Ok((ellipse, map))
}

fn feasible(hps: &[(Point, f64)], z: &Vector5<f64>) -> bool {
    let det = z[2] * z[4] - z[3] * z[3];
    if !(det > 0.0 && z[2] > 0.0) {
        return false;
    }
    hps.iter().all(|(a, b)| {
        let s = b - a.x * z[0] - a.y * z[1];
        let w1 = z[2] * a.x + z[3] * a.y;
        let w2 = z[3] * a.x + z[4] * a.y;
        s > 0.0 && s * s - w1 * w1 - w2 * w2 > 0.0
    })
}

fn barrier_value(hps: &[(Point, f64)], z: &Vector5<f64>, t: f64) -> f64 {
    let det = z[2] * z[4] - z[3] * z[3];
    let mut f = -t * det.ln();
    for (a, b) in hps {
        let s = b - a.x * z[0] - a.y * z[1];
        let w1 = z[2] * a.x + z[3] * a.y;
        let w2 = z[3] * a.x + z[4] * a.y;
        f -= (s * s - w1 * w1 - w2 * w2).ln();
    }
    f
}

/// Newton centering for fixed `t`; returns `false` if it stalls.
fn center_barrier(hps: &[(Point, f64)], z: &mut Vector5<f64>, t: f64) -> bool {
    for _ in 0..200 {
        let (g, h) = barrier_derivatives(hps, z, t);
        let Some(chol) = h.cholesky() else {
            return false;
        };
        let dz = -chol.solve(&g);
        let decrement2 = -g.dot(&dz);
        if decrement2 * 0.5 <= 1e-10 {
            return true;
        }
        let mut step = 1.0;
        if decrement2 < 0.25 {
            // quadratic region: full Newton steps, backtracking on feasibility only
            // (the barrier value is at its rounding floor for large t)
            while !feasible(hps, &(*z + step * dz)) {
                step *= 0.5;
                if step < 1e-12 {
                    return false;
                }
            }
            *z += step * dz;
            continue;
        }
        let f0 = barrier_value(hps, z, t);
        loop {
            let trial = *z + step * dz;
            if feasible(hps, &trial) && barrier_value(hps, &trial, t) <= f0 - 0.25 * step * decrement2 {
                *z = trial;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                // rounding floor of the barrier value
                return decrement2 * 0.5 <= 1e-6;
            }
        }
    }
    false
}

fn barrier_derivatives(hps: &[(Point, f64)], z: &Vector5<f64>, t: f64) -> (Vector5<f64>, Matrix5<f64>) {
    let mut g = Vector5::zeros();
    let mut h = Matrix5::zeros();
    let (b11, b12, b22) = (z[2], z[3], z[4]);
    let det = b11 * b22 - b12 * b12;
    let gd = Vector5::new(0.0, 0.0, b22, -2.0 * b12, b11);
    let mut hd = Matrix5::zeros();
    hd[(2, 4)] = 1.0;
    hd[(4, 2)] = 1.0;
    hd[(3, 3)] = -2.0;
    g -= t * gd / det;
    h += t * (gd * gd.transpose() / (det * det) - hd / det);

    for (a, b) in hps {
        let s = b - a.x * z[0] - a.y * z[1];
        let w1 = b11 * a.x + b12 * a.y;
        let w2 = b12 * a.x + b22 * a.y;
        let q = s * s - w1 * w1 - w2 * w2;
        let ds = Vector5::new(-a.x, -a.y, 0.0, 0.0, 0.0);
        let dw1 = Vector5::new(0.0, 0.0, a.x, a.y, 0.0);
        let dw2 = Vector5::new(0.0, 0.0, 0.0, a.x, a.y);
        let dq = 2.0 * s * ds - 2.0 * w1 * dw1 - 2.0 * w2 * dw2;
        let hq = 2.0 * (ds * ds.transpose() - dw1 * dw1.transpose() - dw2 * dw2.transpose());
        g -= dq / q;
        h += dq * dq.transpose() / (q * q) - hq / q;
    }
    (g, h)
}

/// Largest `|T(v)|` over the polygon vertices (outer containment radius).
pub fn outer_radius(body: &ConvexPolygon, map: &NormalizingMap) -> f64 {
    body.vertices().iter().map(|v| map.apply(*v).norm()).fold(0.0, f64::max)
}

/// Smallest distance from the origin to an edge line of `T(body)`
/// (inner containment radius).
pub fn inner_radius(body: &ConvexPolygon, map: &NormalizingMap) -> f64 {
    let img = body.map(|v| map.apply(v));
    img.inner_distance(Point::zeros())
}

/// Central symmetry test: `body` equals its reflection through `center`.
pub fn is_centrally_symmetric(body: &ConvexPolygon, center: Point, tol: f64) -> bool {
    let refl = body.map(|v| 2.0 * center - v);
    let scale = body.diameter();
    refl.vertices()
        .iter()
        .all(|v| body.contains_with(*v, tol * scale))
        && body.vertices().iter().all(|v| refl.contains_with(*v, tol * scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexPolygon {
        ConvexPolygon::from_box(Point::new(-1.0, -1.0), Point::new(1.0, 1.0))
    }

    #[test]
    fn square_gives_unit_disk() {
        let (e, t) = john_normalize(&square()).unwrap();
        assert!(e.center.norm() < 1e-6);
        assert!((e.shape - Mat2::identity()).norm() < 1e-5);
        assert!((t.linear - Mat2::identity()).norm() < 1e-5);
        let r = outer_radius(&square(), &t);
        assert!((r - 2f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn disk_polygon_near_identity() {
        let poly = ConvexPolygon::regular(256, 1.0, Point::zeros());
        let (e, t) = john_normalize(&poly).unwrap();
        let (a, b) = e.semi_axes();
        let inr = (std::f64::consts::PI / 256.0).cos();
        assert!((a - inr).abs() < 1e-5 && (b - inr).abs() < 1e-5);
        assert!(outer_radius(&poly, &t) <= 1.01);
    }

    #[test]
    fn triangle_center() {
        let tri = ConvexPolygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap();
        let (e, _) = john_normalize(&tri).unwrap();
        assert!((e.center - Point::new(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-5);
        // Steiner inellipse area = π / (3√3) · triangle area
        let expected = std::f64::consts::PI / (3.0 * 3f64.sqrt()) * 0.5;
        assert!((e.area() - expected).abs() < 1e-6);
    }

    #[test]
    fn dual_map_examples() {
        let id = NormalizingMap::identity();
        assert_eq!(dual_map(&id).unwrap(), id);
        let d = NormalizingMap::new(Mat2::new(2.0, 0.0, 0.0, 0.5), Point::zeros()).unwrap();
        let dd = dual_map(&d).unwrap();
        assert!((dd.linear - Mat2::new(0.5, 0.0, 0.0, 2.0)).norm() < 1e-15);
        let th: f64 = 0.7;
        let r = Mat2::new(th.cos(), -th.sin(), th.sin(), th.cos());
        let rd = dual_map(&NormalizingMap::new(r, Point::zeros()).unwrap()).unwrap();
        assert!((rd.linear - r).norm() < 1e-15);
        assert!(matches!(
            dual_map(&NormalizingMap { linear: Mat2::zeros(), translation: Point::zeros() }),
            Err(Error::SingularMap { .. })
        ));
    }

    #[test]
    fn dual_pairing_and_involution() {
        let t = NormalizingMap::new(Mat2::new(1.3, 0.4, -0.2, 0.9), Point::new(0.3, -0.7)).unwrap();
        let ts = dual_map(&t).unwrap();
        let x = Point::new(0.2, 1.1);
        let y = Point::new(-0.5, 0.4);
        assert!(((t.linear * x).dot(&(ts.linear * y)) - x.dot(&y)).abs() < 1e-14);
        assert!((ts.base_point() - t.base_point()).norm() < 1e-14);
        let back = dual_map(&ts).unwrap();
        assert!((back.linear - t.linear).norm() < 1e-12);
        assert!((back.translation - t.translation).norm() < 1e-12);
    }
}
