use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use super::tridiag::SymmetricEigen;
use crate::{Error, Result};

/// Lower Cholesky factor of a symmetric positive-definite matrix. The error
/// names the first pivot that fails to be positive.
pub fn cholesky_lower(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid("a", "matrix must be square"));
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: diag });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// `L^{-1} H L^{-T}` for a lower-triangular `L`.
pub fn reduce_to_standard<T: ComplexField + Copy>(h: &DMatrix<T>, l: &DMatrix<T>) -> Result<DMatrix<T>> {
    let y = l
        .solve_lower_triangular(h)
        .ok_or_else(|| Error::Singular("triangular factor has a zero pivot".into()))?;
    let yt = y.transpose();
    let c = l
        .solve_lower_triangular(&yt)
        .ok_or_else(|| Error::Singular("triangular factor has a zero pivot".into()))?;
    Ok(c.transpose())
}

/// Solves `H v = eps S v` for symmetric `H` and SPD `S`. Eigenvalues ascend
/// and the columns satisfy `V^T S V = I`.
pub fn generalized_symmetric_eigen(h: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = h.nrows();
    if h.ncols() != n || s.shape() != (n, n) {
        return Err(Error::invalid("h", "pencil matrices must be square and equal in size"));
    }
    let l = cholesky_lower(s)?;
    let mut c = reduce_to_standard(h, &l)?;
    // Symmetrise away the rounding of the two triangular solves.
    c = (&c + c.transpose()) * 0.5;
    let cap = 30 * n.max(1);
    let eig = nalgebra::SymmetricEigen::try_new(c, f64::EPSILON, cap)
        .ok_or(Error::NoConvergence { what: "dense symmetric eigensolver", iterations: cap })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let w = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let vectors = l
        .transpose()
        .solve_upper_triangular(&w)
        .ok_or_else(|| Error::Singular("triangular factor has a zero pivot".into()))?;
    Ok(SymmetricEigen { values, vectors })
}

/// Dense complex solve by partial-pivot LU.
pub fn solve_complex(a: DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::invalid("a", "system dimensions disagree"));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let lu = a.lu();
    let u = lu.u();
    let smallest = u.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.norm()));
    if !(smallest > 1e-300 && smallest >= f64::EPSILON * 1e-4 * scale) {
        return Err(Error::Singular(format!("pivot {smallest:e} relative to scale {scale:e}")));
    }
    lu.solve(b).ok_or_else(|| Error::Singular("LU solve failed".into()))
}
