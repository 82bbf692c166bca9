//! Small numerical helpers shared by the analyses.

use serde::{Deserialize, Serialize};

/// Least-squares line `y = slope·x + intercept` with the 95% half-width of
/// the slope (normal approximation).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub half_width: f64,
    pub points: usize,
}

pub fn line_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let half_width = if n > 2 {
        let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        1.96 * (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        half_width,
        points: n,
    })
}

/// Slope of `log y` against `log x` over the positive pairs.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    line_fit(&lx, &ly)
}

/// Linear-interpolated percentile (`q` in `[0, 100]`) of unsorted data.
pub fn percentile(data: &[f64], q: f64) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (q / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Sparse symmetric matrix for the reduced Laplacian.
pub(crate) struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// `L = Σ w_ij (e_i − e_j)(e_i − e_j)ᵀ` with pinned rows replaced by the
    /// identity and pinned columns dropped.
    pub(crate) fn laplacian(n: usize, pairs: &[(usize, usize, f64)], pinned: &[bool]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut diag = vec![0.0; n];
        for &(i, j, w) in pairs {
            diag[i] += w;
            diag[j] += w;
            rows[i].push((j, -w));
            rows[j].push((i, -w));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            if pinned[i] {
                cols.push(i);
                vals.push(1.0);
            } else {
                cols.push(i);
                vals.push(diag[i]);
                for &(j, v) in &rows[i] {
                    if !pinned[j] {
                        cols.push(j);
                        vals.push(v);
                    }
                }
            }
            row_ptr.push(cols.len());
        }
        Csr { row_ptr, cols, vals }
    }

    pub(crate) fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    fn diag(&self) -> Vec<f64> {
        (0..self.row_ptr.len() - 1)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map(|k| self.vals[k])
                    .unwrap_or(1.0)
            })
            .collect()
    }
}

/// Jacobi-preconditioned conjugate gradients.
pub(crate) fn pcg(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let n = b.len();
    let d: Vec<f64> = a.diag().iter().map(|&v| if v > 0.0 { 1.0 / v } else { 1.0 }).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return x;
    }
    let mut z: Vec<f64> = r.iter().zip(&d).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= tol * bnorm {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * d[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_solves_path_laplacian() {
        // path 0-1-2, pin 2: [[1,-1],[-1,2]] x = [1, 0] → x = [2, 1]
        let a = Csr::laplacian(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[false, false, true]);
        let x = pcg(&a, &[1.0, 0.0, 0.0], 1e-14, 100);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12 && x[2].abs() < 1e-14);
    }

    #[test]
    fn exact_power_law() {
        let x = [1.0, 0.25, 0.0625, 0.015625];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.5)).collect();
        let f = loglog_fit(&x, &y).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!(f.half_width < 1e-6);
    }

    #[test]
    fn percentiles() {
        let d = [3.0, 1.0, 2.0, 4.0, 5.0];
        assert_eq!(percentile(&d, 0.0), 1.0);
        assert_eq!(percentile(&d, 50.0), 3.0);
        assert_eq!(percentile(&d, 25.0), 2.0);
    }
}
