use num_complex::Complex64 as C64;

use super::{sort_poles, KinematicsMode, PoleKind, PoleResult, SeedProvenance, SpectralEngine};
use crate::kernels::{brent_root, muller_find_root, RootFindReport};
use crate::kinematics::Sheet;
use crate::{Error, Result};

const BRENT_MAX_ITER: usize = 200;

/// Bound states in `(e_lo, -threshold)`, sorted ascending. Without `e_lo`
/// the window is widened until it holds every state.
pub fn find_bound_states(engine: &SpectralEngine, e_lo: Option<f64>) -> Result<Vec<PoleResult>> {
    let hi = -engine.options().threshold;
    let lo = match e_lo {
        Some(v) if v < hi => v,
        Some(v) => return Err(Error::invalid("E_lo", format!("window bottom {v:e} must lie below {hi:e}"))),
        None => auto_floor(engine)?,
    };
    let mut out = match engine.mode() {
        KinematicsMode::Table1Free => free_states(engine, lo, hi)?,
        KinematicsMode::Coulomb => coulomb_states(engine, lo, hi)?,
    };
    if engine.options().retry_near_critical {
        retry_shallow(engine, &mut out, lo, hi)?;
    }
    sort_poles(&mut out);
    Ok(out)
}

fn auto_floor(engine: &SpectralEngine) -> Result<f64> {
    let mut lo = 2.0 * engine.harris().eps[0].min(-1.0) - 1.0;
    for _ in 0..60 {
        let below = match engine.mode() {
            KinematicsMode::Table1Free => engine.count_below(lo)?,
            // The Coulomb matching matrix is not monotone across outer poles; use the variational floor.
            KinematicsMode::Coulomb => 0,
        };
        if below == 0 {
            return Ok(lo);
        }
        lo *= 2.0;
    }
    Err(Error::NoConvergence { what: "bound-state window search", iterations: 60 })
}

fn bound_pole(engine: &SpectralEngine, energy: f64, iterations: usize, residual: f64, converged: bool) -> PoleResult {
    PoleResult {
        energy: C64::new(energy, 0.0),
        kind: PoleKind::Bound,
        gamma: 0.0,
        seed: SeedProvenance::Harris,
        report: RootFindReport { root: C64::new(energy, 0.0), iterations, residual, converged },
        digits_stable: None,
        n_basis: engine.spec().n_basis(),
        lambda: engine.spec().lambda(),
        theta: None,
    }
}

fn free_states(engine: &SpectralEngine, lo: f64, hi: f64) -> Result<Vec<PoleResult>> {
    let n_hi = engine.count_below(hi)?;
    let n_lo = engine.count_below(lo)?;
    (n_lo..n_hi).map(|j| free_state(engine, j, lo, hi)).collect()
}

/// State `j` is the unique zero of the `j`-th matching eigenvalue, which
/// decreases with `E`. The Harris value bounds it from above.
fn free_state(engine: &SpectralEngine, j: usize, lo: f64, hi: f64) -> Result<PoleResult> {
    let sigma = |e: f64| -> Result<f64> { Ok(engine.matching_eigenvalues(e)?[j]) };
    let mut b = engine.harris().eps[j].min(hi);
    let mut step = (b.abs() * 1e-3).max(1e-13);
    // A converged basis puts the Harris value on the root itself, so rounding may need a nudge upward.
    let mut nudge = (b.abs() * 1e-12).max(1e-15);
    let mut fb = sigma(b)?;
    while fb > 0.0 && b < hi {
        b = (b + nudge).min(hi);
        nudge *= 4.0;
        fb = sigma(b)?;
    }
    if fb == 0.0 {
        return Ok(bound_pole(engine, b, 0, 0.0, true));
    }
    let mut a = (b - step).max(lo);
    while a > lo && sigma(a)? <= 0.0 {
        step *= 4.0;
        a = (b - step).max(lo);
    }
    let rep = brent_root(sigma, a, b, 1e-16 * b.abs(), BRENT_MAX_ITER)?;
    Ok(bound_pole(engine, rep.root, rep.iterations, rep.residual, true))
}

/// Eigenvalue of least magnitude, signed so that the result changes sign
/// exactly where the determinant of the matching matrix does.
fn signed_smallest(engine: &SpectralEngine, e: f64) -> Result<f64> {
    let eig = engine.matching_eigenvalues(e)?;
    let (idx, _) = eig
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty spectrum");
    let others_negative = eig.iter().enumerate().filter(|&(i, v)| i != idx && *v < 0.0).count();
    Ok(if others_negative % 2 == 0 { eig[idx] } else { -eig[idx] })
}

fn coulomb_states(engine: &SpectralEngine, lo: f64, hi: f64) -> Result<Vec<PoleResult>> {
    let mut grid = vec![lo, hi];
    grid.extend(engine.harris().eps.iter().copied().filter(|&e| e > lo && e < hi));
    grid.sort_by(f64::total_cmp);
    let mut fine = Vec::new();
    for w in grid.windows(2) {
        for k in 0..8 {
            fine.push(w[0] + (w[1] - w[0]) * k as f64 / 8.0);
        }
    }
    // Geometric fill toward threshold, where shallow states crowd.
    let top = grid[grid.len() - 2];
    let mut t = top;
    while t < hi {
        fine.push(t);
        t *= 0.7;
    }
    fine.push(hi);
    fine.sort_by(f64::total_cmp);
    fine.dedup();

    let scale = engine.ops().h().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut values = Vec::with_capacity(fine.len());
    for &e in &fine {
        values.push(signed_smallest(engine, e)?);
    }
    let mut out = Vec::new();
    for i in 0..fine.len() - 1 {
        if values[i].signum() == values[i + 1].signum() {
            continue;
        }
        let rep = brent_root(|e| signed_smallest(engine, e), fine[i], fine[i + 1], 1e-16 * fine[i].abs(), BRENT_MAX_ITER)?;
        // Sign flips at poles of the outer ratio leave a finite residual.
        if rep.residual <= 1e-8 * scale.max(1.0) {
            out.push(bound_pole(engine, rep.root, rep.iterations, rep.residual, true));
        }
    }
    Ok(out)
}

fn retry_shallow(engine: &SpectralEngine, states: &mut [PoleResult], lo: f64, hi: f64) -> Result<()> {
    let limit = engine.options().near_critical;
    if !states.iter().any(|s| s.energy.re.abs() < limit) {
        return Ok(());
    }
    let spec = engine.spec();
    let bigger = spec.with_size(2 * spec.n_basis())?.with_lambda(spec.lambda() / 2.0)?;
    let mut opts = engine.options().clone();
    opts.retry_near_critical = false;
    let retry = SpectralEngine::with_options(&bigger, engine.model(), engine.mode(), opts)?;
    let redone = match engine.mode() {
        KinematicsMode::Table1Free => free_states(&retry, lo, hi)?,
        KinematicsMode::Coulomb => coulomb_states(&retry, lo, hi)?,
    };
    // States are counted from the bottom, so index j names the same level in both bases.
    for (j, s) in states.iter_mut().enumerate() {
        if s.energy.re.abs() < limit {
            if let Some(r) = redone.get(j) {
                *s = r.clone();
            }
        }
    }
    Ok(())
}

/// Root of the S-matrix denominator near a real seed, by Muller's method.
pub fn refine_bound_pole(engine: &SpectralEngine, seed: f64) -> Result<RootFindReport> {
    let s = C64::new(seed, 0.0);
    let d = seed.abs() * 1e-6;
    let seeds = [s - d, s + C64::new(0.0, d * 0.5), s + d];
    let opts = engine.options();
    muller_find_root(|e| engine.pole_function(e, Sheet::Physical), seeds, opts.muller_tol, opts.max_iter)
}
