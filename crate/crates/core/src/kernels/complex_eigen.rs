use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Householder reduction to upper Hessenberg form (similarity transform).
pub fn hessenberg_reduce(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        let norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // Left: rows k+1.., H <- (I - 2 v v^H) H.
        for j in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(r, vr)| vr.conj() * h[(k + 1 + r, j)]).sum();
            for (r, vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= *vr * dot * 2.0;
            }
        }
        // Right: columns k+1.., H <- H (I - 2 v v^H).
        for i in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(c, vc)| h[(i, k + 1 + c)] * *vc).sum();
            for (c, vc) in v.iter().enumerate() {
                h[(i, k + 1 + c)] -= dot * vc.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    h
}

fn givens(a: C64, b: C64) -> (C64, C64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    } else {
        (a.conj() / r, b.conj() / r)
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// All eigenvalues of a general complex matrix by shifted QR on the
/// Hessenberg form. The result is sorted by real then imaginary part.
pub fn complex_eigenvalues(a: &DMatrix<C64>) -> Result<Vec<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid("a", "matrix must be square"));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("a", "entries must be finite"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg_reduce(a);
    let mut eig = vec![C64::new(0.0, 0.0); n];
    let cap = 30 * n;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * scale {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > cap {
            return Err(Error::NoConvergence { what: "complex Hessenberg QR", iterations: cap });
        }
        let mu = if since_deflation.is_multiple_of(11) {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + C64::new(0.75, 0.5) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (g, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = g * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + g.conj() * y;
            }
            rots.push((g, s));
        }
        for (idx, k) in (lo..hi).enumerate() {
            let (g, s) = rots[idx];
            for i in lo..=(k + 2).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * g.conj() + y * s.conj();
                h[(i, k + 1)] = -x * s + y * g;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hessenberg_is_similar() {
        let n = 6;
        let a = DMatrix::from_fn(n, n, |i, j| c((i + 2 * j) as f64 * 0.3, (i as f64 - j as f64).sin()));
        let h = hessenberg_reduce(&a);
        for i in 0..n {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[(i, j)], c(0.0, 0.0));
            }
        }
        let ta: C64 = (0..n).map(|i| a[(i, i)]).sum();
        let th: C64 = (0..n).map(|i| h[(i, i)]).sum();
        assert!((ta - th).norm() < 1e-12);
        let fa: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let fh: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        assert!((fa - fh).abs() < 1e-11 * fa);
    }

    #[test]
    fn triangular_eigenvalues_are_diagonal() {
        let a = DMatrix::from_row_slice(3, 3, &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, 3.0), c(0.0, 0.0), c(-2.0, 0.5), c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, -4.0)]);
        let eig = complex_eigenvalues(&a).unwrap();
        let want = [c(-2.0, 0.5), c(0.5, -4.0), c(1.0, 1.0)];
        for (g, w) in eig.iter().zip(want.iter()) {
            assert!((g - w).norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_matrix_has_unit_circle_spectrum() {
        let t = 0.7f64;
        let a = DMatrix::from_row_slice(2, 2, &[c(t.cos(), 0.0), c(-t.sin(), 0.0), c(t.sin(), 0.0), c(t.cos(), 0.0)]);
        let eig = complex_eigenvalues(&a).unwrap();
        assert!((eig[0] - c(t.cos(), -t.sin())).norm() < 1e-14);
        assert!((eig[1] - c(t.cos(), t.sin())).norm() < 1e-14);
    }

    #[test]
    fn smallest_singular_value_vanishes_at_each_eigenvalue() {
        let n = 12;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let x = (i * 7 + j * 3) as f64;
            c((x * 0.37).sin(), (x * 0.11).cos() * 0.5)
        });
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let eig = complex_eigenvalues(&a).unwrap();
        assert_eq!(eig.len(), n);
        for e in eig {
            let shifted = &a - DMatrix::from_diagonal_element(n, n, e);
            let sv = shifted.singular_values();
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(smin < 1e-10 * scale, "sigma_min {smin:e} at {e}");
        }
    }

    #[test]
    fn complex_symmetric_matrix() {
        let n = 30;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let d = (i as f64 - j as f64).abs();
            c((-d).exp() * (1.0 + i.min(j) as f64), -0.2 * (-d * 0.5).exp())
        });
        let eig = complex_eigenvalues(&a).unwrap();
        let ta: C64 = (0..n).map(|i| a[(i, i)]).sum();
        let te: C64 = eig.iter().sum();
        assert!((ta - te).norm() < 1e-10 * ta.norm());
    }
}
