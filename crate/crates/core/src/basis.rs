//! Laguerre basis `phi_n(r) ~ x^(l+1) e^(-x/2) L_n^(2l+1)(x)` with `x = lambda r`,
//! its overlap matrix and the Gauss rule obtained by diagonalising it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::kernels::{sym_tridiag_eigen, TridiagonalSymmetric};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    ell: u32,
    lambda: f64,
    n_basis: usize,
}

impl BasisSpec {
    pub fn new(ell: u32, lambda: f64, n_basis: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("lambda", format!("must be positive and finite, got {lambda}")));
        }
        if n_basis == 0 {
            return Err(Error::invalid("N", "basis size must be at least 1"));
        }
        Ok(Self { ell, lambda, n_basis })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn alpha(&self) -> f64 {
        self.ell as f64 + 1.0
    }

    pub fn nu(&self) -> f64 {
        2.0 * self.ell as f64 + 1.0
    }

    pub fn with_size(&self, n_basis: usize) -> Result<Self> {
        Self::new(self.ell, self.lambda, n_basis)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.ell, lambda, self.n_basis)
    }
}

/// `sqrt((n+1)(n+nu+1))`, the magnitude shared by every off-diagonal band.
pub(crate) fn band_coupling(n: usize, nu: f64) -> f64 {
    (((n + 1) as f64) * (n as f64 + nu + 1.0)).sqrt()
}

/// Dimensionless overlap `<phi_n|phi_m>`.
pub fn build_overlap(spec: &BasisSpec) -> TridiagonalSymmetric {
    let nu = spec.nu();
    let n = spec.n_basis;
    let diag = (0..n).map(|k| 2.0 * k as f64 + nu + 1.0).collect();
    let off = (0..n.saturating_sub(1)).map(|k| -band_coupling(k, nu)).collect();
    TridiagonalSymmetric::new(diag, off).expect("overlap bands are consistent by construction")
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_k L_nk L_mk w(x_k)` for a weight evaluated at the nodes.
    pub fn matrix_from_weights<T>(&self, weights: &[T]) -> DMatrix<T>
    where
        T: nalgebra::Scalar + Copy + num_complex::ComplexFloat + std::ops::Mul<f64, Output = T>,
    {
        let n = self.len();
        let zero = weights[0] * 0.0;
        let mut m = DMatrix::from_element(n, n, zero);
        for (k, &w) in weights.iter().enumerate() {
            for i in 0..n {
                let wi = w * self.vectors[(i, k)];
                for j in 0..=i {
                    m[(i, j)] = m[(i, j)] + wi * self.vectors[(j, k)];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                m[(j, i)] = m[(i, j)];
            }
        }
        m
    }
}

/// Nodes and eigenvectors of the overlap matrix, columns signed so the first
/// component is positive.
pub fn quadrature_rule(spec: &BasisSpec) -> Result<QuadratureRule> {
    let eig = sym_tridiag_eigen(&build_overlap(spec))?;
    let mut vectors = eig.vectors;
    for k in 0..vectors.ncols() {
        if vectors[(0, k)] < 0.0 {
            vectors.column_mut(k).neg_mut();
        }
    }
    Ok(QuadratureRule { nodes: eig.values, vectors })
}
