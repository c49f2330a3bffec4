use nalgebra::DMatrix;

use crate::{Error, Result};

/// Real symmetric tridiagonal matrix stored by bands.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSymmetric {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalSymmetric {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid("diag", "matrix must have at least one row"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::invalid(
                "offdiag",
                format!("expected {} entries, got {}", diag.len() - 1, offdiag.len()),
            ));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(Error::invalid("diag", "entries must be finite"));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Leading `k x k` block.
    pub fn leading(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.dim() {
            return Err(Error::invalid("k", format!("block size {k} out of range")));
        }
        Self::new(self.diag[..k].to_vec(), self.offdiag[..k - 1].to_vec())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &b) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = b;
            m[(i + 1, i)] = b;
        }
        m
    }
}

/// Ascending eigenvalues with eigenvectors stored column-wise.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Implicit QL with Wilkinson shifts. Gives up after `30 * dim` sweeps.
pub fn sym_tridiag_eigen(m: &TridiagonalSymmetric) -> Result<SymmetricEigen> {
    let n = m.dim();
    let mut d = m.diag.clone();
    let mut e = m.offdiag.clone();
    e.push(0.0);
    let mut z = DMatrix::<f64>::identity(n, n);
    let cap = 30 * n.max(1);
    let mut sweeps = 0usize;

    for l in 0..n {
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            sweeps += 1;
            if sweeps > cap {
                return Err(Error::NoConvergence { what: "tridiagonal QL", iterations: cap });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = mm;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| z[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        let m = TridiagonalSymmetric::new(vec![2.0, -1.0], vec![3.0]).unwrap();
        let eig = sym_tridiag_eigen(&m).unwrap();
        let mid = 0.5;
        let rad = (1.5f64.powi(2) + 9.0).sqrt();
        assert!((eig.values[0] - (mid - rad)).abs() < 1e-14);
        assert!((eig.values[1] - (mid + rad)).abs() < 1e-14);
    }

    #[test]
    fn rejects_wrong_band_length() {
        assert!(TridiagonalSymmetric::new(vec![1.0, 2.0], vec![]).is_err());
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        // Dirichlet second difference: eigenvalues 2 - 2 cos(k pi / (n + 1)).
        let n = 40;
        let m = TridiagonalSymmetric::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        let eig = sym_tridiag_eigen(&m).unwrap();
        for (k, v) in eig.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "k={k}");
        }
        let dense = m.to_dense();
        let vt_v = eig.vectors.transpose() * &eig.vectors;
        assert!((vt_v - DMatrix::identity(n, n)).amax() < 1e-13);
        let recon = &eig.vectors * DMatrix::from_diagonal(&eig.values.clone().into()) * eig.vectors.transpose();
        assert!((recon - dense).amax() < 1e-13);
    }

    #[test]
    fn one_by_one() {
        let m = TridiagonalSymmetric::new(vec![4.5], vec![]).unwrap();
        let eig = sym_tridiag_eigen(&m).unwrap();
        assert_eq!(eig.values, vec![4.5]);
        assert_eq!(eig.vectors[(0, 0)], 1.0);
    }
}
