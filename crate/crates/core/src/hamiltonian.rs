//! Finite-basis operators: the tridiagonal reference `H0`, the quadrature
//! matrix of the regular remainder `U`, Harris spectra of the pencil
//! `(H, Omega)` and the corner of its resolvent.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::basis::{band_coupling, build_overlap, quadrature_rule, BasisSpec};
use crate::kernels::{
    cholesky_lower, complex_eigenvalues, generalized_symmetric_eigen, reduce_to_standard, solve_complex,
    TridiagonalSymmetric,
};
use crate::potentials::PotentialModel;
use crate::{Error, Result};

/// Complex symmetric tridiagonal matrix (the possibly rotated `H0`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOperator {
    pub diag: Vec<C64>,
    pub offdiag: Vec<C64>,
}

impl ReferenceOperator {
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.diag.len();
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
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

/// Reference operator: kinetic band times `e^{-2i theta}`, Coulomb term
/// `z_tilde * lambda` times `e^{-i theta}`.
pub fn build_h0(spec: &BasisSpec, z_tilde: f64, theta_rot: f64) -> ReferenceOperator {
    let (lam, nu, n) = (spec.lambda(), spec.nu(), spec.n_basis());
    let kin = C64::from_polar(lam * lam / 8.0, -2.0 * theta_rot);
    let coul = C64::from_polar(z_tilde * lam, -theta_rot);
    let diag = (0..n).map(|k| kin * (2.0 * k as f64 + nu + 1.0) + coul).collect();
    let offdiag = (0..n.saturating_sub(1)).map(|k| kin * band_coupling(k, nu)).collect();
    ReferenceOperator { diag, offdiag }
}

/// Gauss-rule matrix of an arbitrary real radial function.
pub fn u_matrix_from_fn(spec: &BasisSpec, u: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let rule = quadrature_rule(spec)?;
    let w: Vec<f64> = rule.nodes().iter().map(|&x| x * u(x / spec.lambda())).collect();
    Ok(rule.matrix_from_weights(&w))
}

/// Quadrature matrix of `U`, evaluated at the rotated radius `r e^{i theta}`.
pub fn build_u_matrix(spec: &BasisSpec, model: &PotentialModel, theta_rot: f64) -> Result<DMatrix<C64>> {
    let rule = quadrature_rule(spec)?;
    let phase = C64::from_polar(1.0 / spec.lambda(), theta_rot);
    let w = if theta_rot == 0.0 {
        rule.nodes()
            .iter()
            .map(|&x| C64::new(x * model.effective_potential(x / spec.lambda()), 0.0))
            .collect::<Vec<_>>()
    } else {
        rule.nodes()
            .iter()
            .map(|&x| model.effective_potential_complex(phase * x).map(|u| u * x))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(rule.matrix_from_weights(&w))
}

#[derive(Debug, Clone)]
pub struct OperatorSet {
    spec: BasisSpec,
    model: PotentialModel,
    theta_rot: f64,
    omega: TridiagonalSymmetric,
    h0: ReferenceOperator,
    u: DMatrix<C64>,
    h: DMatrix<C64>,
}

impl OperatorSet {
    pub fn assemble(spec: &BasisSpec, model: &PotentialModel) -> Result<Self> {
        Self::assemble_rotated(spec, model, 0.0)
    }

    pub fn assemble_rotated(spec: &BasisSpec, model: &PotentialModel, theta_rot: f64) -> Result<Self> {
        if !theta_rot.is_finite() || theta_rot.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::invalid("theta", format!("rotation angle {theta_rot} outside (-pi/2, pi/2)")));
        }
        if theta_rot != 0.0 && !model.envelope().is_analytic() {
            return Err(Error::Capability("complex rotation needs an analytic envelope".into()));
        }
        let omega = build_overlap(spec);
        let h0 = build_h0(spec, model.effective_charge(), theta_rot);
        let u = build_u_matrix(spec, model, theta_rot)?;
        let h = h0.to_dense() + &u;
        Ok(Self { spec: *spec, model: model.clone(), theta_rot, omega, h0, u, h })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn model(&self) -> &PotentialModel {
        &self.model
    }

    pub fn theta_rot(&self) -> f64 {
        self.theta_rot
    }

    pub fn is_rotated(&self) -> bool {
        self.theta_rot != 0.0
    }

    pub fn omega(&self) -> &TridiagonalSymmetric {
        &self.omega
    }

    pub fn h0(&self) -> &ReferenceOperator {
        &self.h0
    }

    pub fn u(&self) -> &DMatrix<C64> {
        &self.u
    }

    pub fn h(&self) -> &DMatrix<C64> {
        &self.h
    }

    /// Real part of `H`; exact for an unrotated set.
    pub fn h_real(&self) -> DMatrix<f64> {
        self.h.map(|z| z.re)
    }

    /// `H - z Omega` as a dense complex matrix.
    pub fn shifted(&self, z: C64) -> DMatrix<C64> {
        let mut m = self.h.clone();
        let om = &self.omega;
        for i in 0..om.dim() {
            m[(i, i)] -= z * om.diag()[i];
        }
        for (i, &b) in om.offdiag().iter().enumerate() {
            m[(i, i + 1)] -= z * b;
            m[(i + 1, i)] -= z * b;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarrisSpectrum {
    pub eps: Vec<f64>,
    pub eps_trunc: Vec<f64>,
}

pub fn harris_spectrum(ops: &OperatorSet) -> Result<HarrisSpectrum> {
    if ops.is_rotated() {
        return Err(Error::invalid("ops", "Harris spectra need an unrotated operator set"));
    }
    let h = ops.h_real();
    let s = ops.omega().to_dense();
    let eps = generalized_symmetric_eigen(&h, &s)?.values;
    let n = ops.spec().n_basis();
    let eps_trunc = if n > 1 {
        let ht = h.view((0, 0), (n - 1, n - 1)).into_owned();
        let st = s.view((0, 0), (n - 1, n - 1)).into_owned();
        generalized_symmetric_eigen(&ht, &st)?.values
    } else {
        Vec::new()
    };
    Ok(HarrisSpectrum { eps, eps_trunc })
}

fn corner_prefactor(spec: &BasisSpec) -> f64 {
    1.0 / (spec.n_basis() as f64 + spec.nu())
}

fn check_pole(harris: &HarrisSpectrum, z: C64) -> Result<()> {
    for &e in &harris.eps {
        let d = (C64::new(e, 0.0) - z).norm();
        if d <= 1e-14 * e.abs().max(1.0) {
            return Err(Error::NearHarrisPole { energy: z.re, distance: d });
        }
    }
    Ok(())
}

/// `[(H - z Omega)^{-1}]_{N-1,N-1}` from the Harris product, paired factor by factor.
pub fn green_corner_product(spec: &BasisSpec, harris: &HarrisSpectrum, z: C64) -> Result<C64> {
    check_pole(harris, z)?;
    let n = harris.eps.len();
    let mut g = C64::new(corner_prefactor(spec), 0.0) / (harris.eps[n - 1] - z);
    for m in 0..n - 1 {
        g *= (harris.eps_trunc[m] - z) / (harris.eps[m] - z);
    }
    Ok(g)
}

/// `(eps_j - z) g(z)`: the corner element with its pole at Harris level `j` removed.
pub fn green_corner_deflated(spec: &BasisSpec, harris: &HarrisSpectrum, z: C64, j: usize) -> Result<C64> {
    let n = harris.eps.len();
    if j >= n {
        return Err(Error::invalid("anchor", format!("Harris index {j} out of range for N = {n}")));
    }
    let mut g = C64::new(corner_prefactor(spec), 0.0);
    let others = (0..n).filter(|&m| m != j);
    for (num, m) in harris.eps_trunc.iter().zip(others) {
        let den = harris.eps[m] - z;
        if den.norm() == 0.0 {
            return Err(Error::NearHarrisPole { energy: z.re, distance: 0.0 });
        }
        g *= (num - z) / den;
    }
    Ok(g)
}

/// Reciprocal of [`green_corner_product`], finite at the Harris energies.
pub fn inverse_green_corner_product(spec: &BasisSpec, harris: &HarrisSpectrum, z: C64) -> Result<C64> {
    let n = harris.eps.len();
    let mut inv = (harris.eps[n - 1] - z) / corner_prefactor(spec);
    for m in 0..n - 1 {
        let den = harris.eps_trunc[m] - z;
        if den.norm() == 0.0 {
            return Err(Error::NearHarrisPole { energy: z.re, distance: 0.0 });
        }
        inv *= (harris.eps[m] - z) / den;
    }
    Ok(inv)
}

/// Corner element by a dense solve. Works for rotated sets.
pub fn green_corner_direct(ops: &OperatorSet, z: C64) -> Result<C64> {
    let n = ops.spec().n_basis();
    let mut rhs = DVector::from_element(n, C64::new(0.0, 0.0));
    rhs[n - 1] = C64::new(1.0, 0.0);
    let x = solve_complex(ops.shifted(z), &rhs)?;
    Ok(x[n - 1])
}

/// Product form for an unrotated set with Harris data, dense solve otherwise.
pub fn green_corner(ops: &OperatorSet, harris: Option<&HarrisSpectrum>, z: C64) -> Result<C64> {
    match harris {
        Some(h) if !ops.is_rotated() => green_corner_product(ops.spec(), h, z),
        _ => green_corner_direct(ops, z),
    }
}

/// Eigenvalues of the rotated pencil `(H(theta), Omega)`.
pub fn rotated_spectrum(spec: &BasisSpec, model: &PotentialModel, theta_rot: f64) -> Result<Vec<C64>> {
    let ops = OperatorSet::assemble_rotated(spec, model, theta_rot)?;
    rotated_spectrum_of(&ops)
}

pub fn rotated_spectrum_of(ops: &OperatorSet) -> Result<Vec<C64>> {
    let l = cholesky_lower(&ops.omega().to_dense())?.map(|v| C64::new(v, 0.0));
    let m = reduce_to_standard(ops.h(), &l)?;
    let m = (&m + m.transpose()) * C64::new(0.5, 0.0);
    complex_eigenvalues(&m)
}
