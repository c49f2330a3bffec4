use super::{find_bound_states, EngineOptions, KinematicsMode, SpectralEngine};
use crate::basis::BasisSpec;
use crate::potentials::{CriticalMethod, CriticalScreeningResult, Envelope, PotentialModel};
use crate::{Error, Result};

/// Screening family `mu -> V(A, mu)` and the state to follow.
#[derive(Debug, Clone)]
pub struct CriticalSearch {
    pub envelope: Envelope,
    pub strength: f64,
    pub bare_charge: f64,
    pub ell: u32,
    /// Counted from the bottom: 0 is the lowest state of this `ell`.
    pub state_index: usize,
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub n_basis: usize,
    pub lambda: f64,
    pub mode: KinematicsMode,
    pub tol: f64,
}

fn bound_count(search: &CriticalSearch, mu: f64) -> Result<usize> {
    let model = PotentialModel::new(search.envelope.clone(), search.strength, mu)?.with_bare_charge(search.bare_charge)?;
    let spec = BasisSpec::new(search.ell, search.lambda, search.n_basis)?;
    let opts = EngineOptions { retry_near_critical: false, ..EngineOptions::default() };
    let engine = SpectralEngine::with_options(&spec, &model, search.mode, opts)?;
    match search.mode {
        KinematicsMode::Table1Free => engine.count_below(-engine.options().threshold),
        KinematicsMode::Coulomb => Ok(find_bound_states(&engine, None)?.len()),
    }
}

/// Bisection on the existence of the tracked state.
pub fn critical_screening_numeric(search: &CriticalSearch) -> Result<CriticalScreeningResult> {
    if !(search.mu_lo > 0.0 && search.mu_hi > search.mu_lo) {
        return Err(Error::invalid("mu_lo", "need 0 < mu_lo < mu_hi"));
    }
    if !(search.tol > 0.0) {
        return Err(Error::invalid("tol", "tolerance must be positive"));
    }
    let exists = |mu: f64| -> Result<bool> { Ok(bound_count(search, mu)? > search.state_index) };
    let (mut lo, mut hi) = (search.mu_lo, search.mu_hi);
    let (at_lo, at_hi) = (exists(lo)?, exists(hi)?);
    if !at_lo || at_hi {
        return Err(Error::invalid(
            "mu_lo",
            format!("bracket [{lo}, {hi}] does not isolate the threshold: bound at mu_lo = {at_lo}, bound at mu_hi = {at_hi}"),
        ));
    }
    while hi - lo > search.tol {
        let mid = 0.5 * (lo + hi);
        if exists(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalScreeningResult {
        mu_c: 0.5 * (lo + hi),
        method: CriticalMethod::Bisection,
        principal: search.state_index as u32 + search.ell + 1,
        ell: search.ell,
        tolerance: search.tol,
    })
}
