//! S-matrix assembly and pole searches.
//!
//! Bound states are counted through the inertia of the real matching matrix
//! `S(E) = H - E Omega + J R e e^T`, whose eigenvalues fall monotonically
//! with `E`. Resonances are seeded by complex rotation and refined as roots
//! of the S-matrix denominator of the complex-scaled problem.

mod bound;
mod critical;
mod engine;
mod plateau;
mod resonance;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use bound::{find_bound_states, refine_bound_pole};
pub use critical::{critical_screening_numeric, CriticalSearch};
pub use engine::{bound_condition, smatrix, smatrix_on_sheet, EngineOptions, KinematicsMode, SpectralEngine};
pub use plateau::{plateau_scan, truncate_significant, PlateauReport, PlateauSample, PlateauTarget, ProblemSpec};
pub use resonance::{find_resonances, refine_resonance, ResonanceOptions};

use crate::kernels::RootFindReport;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleKind {
    Bound,
    Resonance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedProvenance {
    Harris,
    Rotation,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleResult {
    pub energy: C64,
    pub kind: PoleKind,
    pub gamma: f64,
    pub seed: SeedProvenance,
    pub report: RootFindReport,
    pub digits_stable: Option<u32>,
    /// Basis actually used, which differs from the request after a near-threshold retry.
    pub n_basis: usize,
    pub lambda: f64,
    /// Rotation angle of the refinement, for resonances.
    pub theta: Option<f64>,
}

impl PoleResult {
    pub fn validate(&self) -> Result<()> {
        let e = self.energy;
        let ok = match self.kind {
            PoleKind::Bound => e.im == 0.0 && e.re < 0.0,
            PoleKind::Resonance => e.re > 0.0 && e.im < 0.0,
        };
        if !ok {
            return Err(Error::invalid("pole", format!("{:?} classification inconsistent with E = {e}", self.kind)));
        }
        if (self.gamma - 2.0 * e.im.abs()).abs() > 1e-15 * self.gamma.abs() {
            return Err(Error::invalid("pole", "width must equal 2|Im E|"));
        }
        Ok(())
    }
}

pub(crate) fn sort_poles(poles: &mut [PoleResult]) {
    poles.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re).then(a.energy.im.total_cmp(&b.energy.im)));
}
