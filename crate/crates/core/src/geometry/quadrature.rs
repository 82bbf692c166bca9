//! Quadrature over triangles, convex polygons and segments.

use crate::Point;

const W_A: f64 = 0.223_381_589_678_011;
const A1: f64 = 0.445_948_490_915_965;
const A2: f64 = 0.108_103_018_168_070;
const W_B: f64 = 0.109_951_743_655_322;
const B1: f64 = 0.091_576_213_509_771;
const B2: f64 = 0.816_847_572_980_459;

/// Degree-4 six-point rule on the triangle `(a, b, c)`.
pub fn triangle_deg4<F: Fn(Point) -> f64>(a: Point, b: Point, c: Point, f: &F) -> f64 {
    let area = 0.5 * ((b - a).perp(&(c - a))).abs();
    let pt = |l1: f64, l2: f64, l3: f64| a * l1 + b * l2 + c * l3;
    let sa = f(pt(A1, A1, A2)) + f(pt(A1, A2, A1)) + f(pt(A2, A1, A1));
    let sb = f(pt(B1, B1, B2)) + f(pt(B1, B2, B1)) + f(pt(B2, B1, B1));
    area * (W_A * sa + W_B * sb)
}

const MAX_DEPTH: u32 = 12;

/// Adaptive degree-4 integration on a triangle: a triangle is accepted when
/// its value agrees with the sum over its four midpoint children within
/// `tol · area`.
pub fn triangle_adaptive<F: Fn(Point) -> f64>(a: Point, b: Point, c: Point, f: &F, tol: f64) -> f64 {
    let coarse = triangle_deg4(a, b, c, f);
    adapt(a, b, c, f, tol, coarse, 0)
}

fn adapt<F: Fn(Point) -> f64>(a: Point, b: Point, c: Point, f: &F, tol: f64, coarse: f64, depth: u32) -> f64 {
    let ab = 0.5 * (a + b);
    let bc = 0.5 * (b + c);
    let ca = 0.5 * (c + a);
    let kids = [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)];
    let vals = kids.map(|(p, q, r)| triangle_deg4(p, q, r, f));
    let fine: f64 = vals.iter().sum();
    let area = 0.5 * ((b - a).perp(&(c - a))).abs();
    if (fine - coarse).abs() <= (tol * area).max(1e-14 * fine.abs()) || depth >= MAX_DEPTH || area == 0.0 {
        return fine;
    }
    kids.iter()
        .zip(vals.iter())
        .map(|(&(p, q, r), &v)| adapt(p, q, r, f, tol, v, depth + 1))
        .sum()
}

/// Integral over a convex polygon (fan triangulation from the vertex mean).
pub fn polygon_integral<F: Fn(Point) -> f64>(vertices: &[Point], f: &F, tol: f64) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    if n == 3 {
        return triangle_adaptive(vertices[0], vertices[1], vertices[2], f, tol);
    }
    let o = vertices.iter().fold(Point::zeros(), |s, p| s + p) / n as f64;
    let mut s = 0.0;
    for k in 0..n {
        s += triangle_adaptive(o, vertices[k], vertices[(k + 1) % n], f, tol);
    }
    s
}

/// Three-point Gauss–Legendre rule on the segment `[a, b]` (arclength measure).
pub fn segment_gauss3<F: Fn(Point) -> f64>(a: Point, b: Point, f: &F) -> f64 {
    const X: f64 = 0.774_596_669_241_483_4;
    let len = (b - a).norm();
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    len * (5.0 * f(m - X * h) + 8.0 * f(m) + 5.0 * f(m + X * h)) / 18.0
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth >= 50 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_four_is_exact() {
        let (a, b, c) = (Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0));
        // ∫ x^4 over the unit right triangle = 4! 0! 2! / 6! ... = 1/30
        let v = triangle_deg4(a, b, c, &|p: Point| p.x.powi(4));
        assert!((v - 1.0 / 30.0).abs() < 1e-14);
        // ∫ x² y² = 2!2!/6! · 2 = 1/180
        let v = triangle_deg4(a, b, c, &|p: Point| p.x * p.x * p.y * p.y);
        assert!((v - 1.0 / 180.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let sq = [Point::new(-1.0, -1.0), Point::new(1.0, -1.0), Point::new(1.0, 1.0), Point::new(-1.0, 1.0)];
        // ∫ sqrt|x| over [-1,1]² = 2 · 2 · 2/3
        let v = polygon_integral(&sq, &|p: Point| p.x.abs().sqrt(), 1e-9);
        assert!((v - 8.0 / 3.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn simpson() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
    }
}
