use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootFindReport {
    pub root: C64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

const MAX_PERTURBATIONS: usize = 5;

/// Muller's method on three distinct seeds. Converged means `|f(root)| < tol`.
/// A degenerate parabola or a failed evaluation perturbs the newest iterate
/// and retries a bounded number of times.
pub fn muller_find_root<F>(mut f: F, seeds: [C64; 3], tol: f64, max_iter: usize) -> Result<RootFindReport>
where
    F: FnMut(C64) -> Result<C64>,
{
    let [mut x0, mut x1, mut x2] = seeds;
    if x0 == x1 || x1 == x2 || x0 == x2 {
        return Err(Error::invalid("seeds", "Muller seeds must be distinct"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "tolerance must be positive"));
    }
    let mut f0 = f(x0)?;
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut perturbations = 0usize;
    let mut best = (x2, f2.norm());
    for &(x, r) in &[(x0, f0.norm()), (x1, f1.norm())] {
        if r < best.1 {
            best = (x, r);
        }
    }
    if best.1 < tol {
        return Ok(RootFindReport { root: best.0, iterations: 0, residual: best.1, converged: true });
    }

    for iter in 1..=max_iter {
        let h1 = x1 - x0;
        let h2 = x2 - x1;
        let d1 = (f1 - f0) / h1;
        let d2 = (f2 - f1) / h2;
        let a = (d2 - d1) / (h2 + h1);
        let b = a * h2 + d2;
        let disc = (b * b - a * f2 * 4.0).sqrt();
        let den = if (b + disc).norm() >= (b - disc).norm() { b + disc } else { b - disc };
        let step = -f2 * 2.0 / den;
        let x3 = x2 + step;
        let f3 = if step.re.is_finite() && step.im.is_finite() && den.norm() > 0.0 {
            f(x3).ok()
        } else {
            None
        };
        let Some(f3) = f3.filter(|v| v.re.is_finite() && v.im.is_finite()) else {
            perturbations += 1;
            if perturbations > MAX_PERTURBATIONS {
                break;
            }
            let nudge = C64::new(1e-7, 0.7e-7 * perturbations as f64) * x2.norm().max(1e-300);
            x2 += nudge;
            f2 = f(x2)?;
            continue;
        };
        let r3 = f3.norm();
        if r3 < best.1 {
            best = (x3, r3);
        }
        if r3 < tol {
            return Ok(RootFindReport { root: x3, iterations: iter, residual: r3, converged: true });
        }
        if step.norm() <= 4.0 * f64::EPSILON * x3.norm() {
            return Ok(RootFindReport { root: best.0, iterations: iter, residual: best.1, converged: false });
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        x2 = x3;
        f2 = f3;
    }
    Ok(RootFindReport { root: best.0, iterations: max_iter, residual: best.1, converged: false })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentReport {
    pub root: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Brent's bracketing root finder. The bracket must straddle a sign change.
pub fn brent_root<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Result<BrentReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(BrentReport { root: a, iterations: 0, residual: 0.0 });
    }
    if fb == 0.0 {
        return Ok(BrentReport { root: b, iterations: 0, residual: 0.0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::invalid("bracket", format!("f({a:e}) and f({b:e}) share a sign")));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for iter in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(BrentReport { root: b, iterations: iter, residual: fb.abs() });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::NoConvergence { what: "Brent root finder", iterations: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn muller_finds_complex_root_of_real_quadratic() {
        let rep = muller_find_root(|z| Ok(z * z + 1.0), [c(0.1, 0.5), c(0.2, 0.6), c(0.3, 0.8)], 1e-14, 100).unwrap();
        assert!(rep.converged);
        assert!((rep.root - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn muller_cubic() {
        let f = |z: C64| Ok((z - 2.0) * (z + c(1.0, 3.0)) * (z - c(0.5, -0.25)));
        let rep = muller_find_root(f, [c(0.4, -0.2), c(0.45, -0.3), c(0.6, -0.2)], 1e-13, 100).unwrap();
        assert!(rep.converged);
        assert!((rep.root - c(0.5, -0.25)).norm() < 1e-12);
    }

    #[test]
    fn muller_reports_failure_without_root() {
        let rep = muller_find_root(|z| Ok(z.exp()), [c(0.0, 0.0), c(0.1, 0.0), c(0.2, 0.1)], 1e-14, 30).unwrap();
        assert!(!rep.converged);
        assert!(rep.iterations <= 30);
    }

    #[test]
    fn muller_rejects_repeated_seeds() {
        assert!(muller_find_root(Ok, [c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)], 1e-12, 10).is_err());
    }

    #[test]
    fn brent_cubic() {
        let rep = brent_root(|x| Ok(x * x * x - 2.0 * x - 5.0), 2.0, 3.0, 1e-15, 100).unwrap();
        assert!((rep.root - 2.094_551_481_542_326_6).abs() < 1e-14);
    }

    #[test]
    fn brent_requires_bracket() {
        assert!(brent_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 50).is_err());
    }
}
