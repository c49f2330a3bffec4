use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::hamiltonian::{green_corner_deflated, green_corner_direct, green_corner_product, harris_spectrum, HarrisSpectrum, OperatorSet};
use crate::kinematics::{
    kinematic_point, kinematic_point_scaled, minimal_solution, outgoing_ratio, reference_chain, KinematicPoint, R1Form,
    Sheet,
};
use crate::potentials::PotentialModel;
use crate::{Error, Result};

/// How the outer region beyond the basis is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KinematicsMode {
    /// Free outer region; the whole `(Z-A)/r + U` sits in the finite block.
    Table1Free,
    /// The `(Z-A)/r` tail is kept in the outer recursion.
    Coulomb,
}

impl KinematicsMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            KinematicsMode::Table1Free => "table1-free",
            KinematicsMode::Coulomb => "coulomb",
        }
    }
}

impl std::str::FromStr for KinematicsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1-free" => Ok(Self::Table1Free),
            "coulomb" => Ok(Self::Coulomb),
            other => Err(Error::invalid("mode", format!("unknown mode `{other}` (table1-free | coulomb)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOptions {
    pub muller_tol: f64,
    pub max_iter: usize,
    /// Bound states are searched below `-threshold`.
    pub threshold: f64,
    /// States shallower than this are recomputed in a doubled, compressed basis.
    pub near_critical: f64,
    pub retry_near_critical: bool,
    pub r1_form: R1Form,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            muller_tol: 1e-12,
            max_iter: 100,
            threshold: 1e-12,
            near_critical: 1e-6,
            retry_near_critical: true,
            r1_form: R1Form::Normalized,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralEngine {
    ops: OperatorSet,
    harris: HarrisSpectrum,
    mode: KinematicsMode,
    options: EngineOptions,
}

impl SpectralEngine {
    pub fn new(spec: &BasisSpec, model: &PotentialModel, mode: KinematicsMode) -> Result<Self> {
        Self::with_options(spec, model, mode, EngineOptions::default())
    }

    pub fn with_options(spec: &BasisSpec, model: &PotentialModel, mode: KinematicsMode, options: EngineOptions) -> Result<Self> {
        if !(options.muller_tol > 0.0 && options.threshold > 0.0 && options.max_iter > 0) {
            return Err(Error::invalid("options", "tolerances and iteration caps must be positive"));
        }
        let ops = OperatorSet::assemble(spec, model)?;
        let harris = harris_spectrum(&ops)?;
        Ok(Self { ops, harris, mode, options })
    }

    pub fn spec(&self) -> &BasisSpec {
        self.ops.spec()
    }

    pub fn model(&self) -> &PotentialModel {
        self.ops.model()
    }

    pub fn ops(&self) -> &OperatorSet {
        &self.ops
    }

    pub fn harris(&self) -> &HarrisSpectrum {
        &self.harris
    }

    pub fn mode(&self) -> KinematicsMode {
        self.mode
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    /// Same problem in a different basis.
    pub fn rebuild(&self, spec: &BasisSpec) -> Result<Self> {
        Self::with_options(spec, self.model(), self.mode, self.options.clone())
    }

    pub(crate) fn outer_charge(&self) -> f64 {
        match self.mode {
            KinematicsMode::Table1Free => 0.0,
            KinematicsMode::Coulomb => self.model().effective_charge(),
        }
    }

    pub fn point(&self, energy: C64, sheet: Sheet) -> Result<KinematicPoint> {
        kinematic_point(energy, self.spec(), self.outer_charge(), sheet)
    }

    pub fn green(&self, z: C64) -> Result<C64> {
        green_corner_product(self.spec(), &self.harris, z)
    }

    /// `J_{N-1,N} R_N^+` at the given energy.
    pub fn closure(&self, energy: C64, sheet: Sheet) -> Result<C64> {
        let p = self.point(energy, sheet)?;
        Ok(p.j_corner(self.spec()) * outgoing_ratio(&p, self.spec())?)
    }

    /// Real matching matrix `H - E Omega + J R e e^T` below threshold.
    pub fn matching_matrix(&self, energy: f64) -> Result<DMatrix<f64>> {
        if !(energy < 0.0) {
            return Err(Error::invalid("E", "matching matrix is real only for E < 0"));
        }
        // At -lambda^2/8 the closure is a removable 0 * infinity; step off it.
        let edge = -self.spec().lambda().powi(2) / 8.0;
        let at = if (energy - edge).abs() <= 1e-13 * edge.abs() { energy * (1.0 + 1e-12) } else { energy };
        let closure = self.closure(C64::new(at, 0.0), Sheet::Physical)?;
        let mut s = self.ops.shifted(C64::new(energy, 0.0)).map(|z| z.re);
        let n = self.spec().n_basis();
        s[(n - 1, n - 1)] += closure.re;
        Ok(s)
    }

    /// Ascending eigenvalues of the matching matrix.
    pub fn matching_eigenvalues(&self, energy: f64) -> Result<Vec<f64>> {
        let s = self.matching_matrix(energy)?;
        let cap = 30 * s.nrows();
        let eig = nalgebra::SymmetricEigen::try_new(s, f64::EPSILON, cap)
            .ok_or(Error::NoConvergence { what: "matching-matrix eigenvalues", iterations: cap })?;
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        Ok(v)
    }

    /// Number of bound states of the model below `energy` (free mode).
    pub fn count_below(&self, energy: f64) -> Result<usize> {
        Ok(self.matching_eigenvalues(energy)?.iter().filter(|&&v| v < 0.0).count())
    }

    /// S-matrix denominator `1 + g J R^+` multiplied by `(eps_j - E)/eps_j`
    /// for the Harris level `j` nearest the real part of `energy`. Its zeros
    /// are the poles of `S`, including levels that coincide with a Harris value.
    pub fn pole_function(&self, energy: C64, sheet: Sheet) -> Result<C64> {
        let eps = &self.harris.eps;
        let j = (0..eps.len()).min_by(|&a, &b| (eps[a] - energy.re).abs().total_cmp(&(eps[b] - energy.re).abs())).expect("N >= 1");
        let deflated = green_corner_deflated(self.spec(), &self.harris, energy, j)?;
        let anchor = eps[j];
        Ok(((anchor - energy) + deflated * self.closure(energy, sheet)?) / anchor)
    }

    /// S-matrix denominator `1 + g J R` for the basis scaled by
    /// `lambda e^{-i theta}`, on the second sheet. With an `anchor` at a
    /// rotated eigenvalue the pole of `g` there is cancelled.
    pub(crate) fn scaled_denominator(&self, ops: &OperatorSet, energy: C64, anchor: Option<C64>) -> Result<C64> {
        let g = green_corner_direct(ops, energy)?;
        let scale = C64::from_polar(self.spec().lambda(), -ops.theta_rot());
        let p = kinematic_point_scaled(energy, scale, 0.0, Sheet::Second)?;
        let jr = p.j_corner(self.spec()) * outgoing_ratio(&p, self.spec())?;
        let d = 1.0 + g * jr;
        Ok(match anchor {
            Some(c) => (c - energy) * d / c,
            None => d,
        })
    }
}

/// S-matrix on the physical sheet (free mode).
pub fn smatrix(engine: &SpectralEngine, energy: C64) -> Result<C64> {
    smatrix_on_sheet(engine, energy, Sheet::Physical)
}

pub fn smatrix_on_sheet(engine: &SpectralEngine, energy: C64, sheet: Sheet) -> Result<C64> {
    if engine.mode != KinematicsMode::Table1Free {
        return Err(Error::ModeMismatch { required: "table1-free" });
    }
    let g = engine.green(energy)?;
    let p = engine.point(energy, sheet)?;
    let chain = reference_chain(&p, engine.spec(), engine.options.r1_form)?;
    let gj = g * chain.j_corner;
    Ok(chain.t_last * (1.0 + gj * chain.r_minus) / (1.0 + gj * chain.r_plus))
}

/// `m_{N-1} + g J m_N` with `m` the decaying outer solution; vanishes at bound states.
pub fn bound_condition(engine: &SpectralEngine, energy: f64) -> Result<f64> {
    if !(energy < 0.0) {
        return Err(Error::invalid("E", "bound condition needs E < 0"));
    }
    for &e in &engine.harris.eps {
        let d = (e - energy).abs();
        if d <= 1e-12 * e.abs().max(1.0) {
            return Err(Error::NearHarrisPole { energy, distance: d });
        }
    }
    let z = C64::new(energy, 0.0);
    let n = engine.spec().n_basis();
    let p = engine.point(z, Sheet::Physical)?;
    let m = minimal_solution(&p, engine.spec().ell(), n)?;
    let g = engine.green(z)?;
    Ok((m.values[n - 1] + g * p.j_corner(engine.spec()) * m.values[n]).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Envelope;

    fn free_model() -> PotentialModel {
        PotentialModel::new(Envelope::Unscreened, 1.0, 1.0).unwrap().with_bare_charge(1.0).unwrap()
    }

    #[test]
    fn free_identity() {
        let spec = BasisSpec::new(2, 0.8, 12).unwrap();
        let eng = SpectralEngine::new(&spec, &free_model(), KinematicsMode::Table1Free).unwrap();
        // Far from the real axis rounding grows like |e^{i theta}|^{2N}; these points stay close.
        for e in [C64::new(0.3, 0.0), C64::new(0.05, 0.0), C64::new(0.5, 0.2), C64::new(1.5, -0.3)] {
            let s = smatrix(&eng, e).unwrap();
            assert!((s - 1.0).norm() < 1e-10, "E={e} S={s}");
        }
    }

    #[test]
    fn smatrix_needs_free_mode() {
        let spec = BasisSpec::new(0, 1.0, 5).unwrap();
        let m = PotentialModel::new(Envelope::Yukawa, 1.0, 0.5).unwrap();
        let eng = SpectralEngine::new(&spec, &m, KinematicsMode::Coulomb).unwrap();
        assert!(matches!(smatrix(&eng, C64::new(0.2, 0.0)), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn hydrogen_bound_condition() {
        let spec = BasisSpec::new(0, 1.0, 5).unwrap();
        let h = PotentialModel::new(Envelope::Unscreened, 1.0, 1.0).unwrap();
        let eng = SpectralEngine::new(&spec, &h, KinematicsMode::Coulomb).unwrap();
        assert!(bound_condition(&eng, -0.5).unwrap().abs() < 1e-10);
        assert!(bound_condition(&eng, -0.3).unwrap().abs() > 1e-3);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("coulomb".parse::<KinematicsMode>().unwrap(), KinematicsMode::Coulomb);
        assert_eq!("table1-free".parse::<KinematicsMode>().unwrap(), KinematicsMode::Table1Free);
        assert!("free".parse::<KinematicsMode>().is_err());
    }
}
