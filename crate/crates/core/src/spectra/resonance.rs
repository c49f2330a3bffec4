use num_complex::Complex64 as C64;

use super::plateau::digits_from_relative;
use super::{sort_poles, KinematicsMode, PoleKind, PoleResult, SeedProvenance, SpectralEngine};
use crate::hamiltonian::{rotated_spectrum_of, OperatorSet};
use crate::kernels::{muller_find_root, RootFindReport};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceOptions {
    pub theta_grid: Vec<f64>,
    /// Largest relative change between neighbouring angles for a stable eigenvalue.
    pub plateau_tol: f64,
    /// Relative distance below which two stable eigenvalues belong to one pole.
    pub cluster_tol: f64,
    /// Angular clearance (radians) above the rotated continuum `arg E = -2 theta`.
    pub continuum_margin: f64,
    /// Stable pairs needed before a trajectory counts as a resonance.
    pub min_pairs: usize,
    /// Upper bound on `Re E`.
    pub max_energy: f64,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self {
            theta_grid: (2..=12).map(|k| 0.1 * k as f64).collect(),
            plateau_tol: 1e-3,
            cluster_tol: 1e-2,
            continuum_margin: 0.02,
            min_pairs: 2,
            max_energy: f64::INFINITY,
        }
    }
}

struct StablePair {
    theta: f64,
    energy: C64,
    rel: f64,
}

fn in_gate(e: C64, theta: f64, opts: &ResonanceOptions) -> bool {
    e.re > 0.0 && e.im < 0.0 && e.re < opts.max_energy && e.arg() > -2.0 * theta + opts.continuum_margin
}

/// Resonances exposed by complex rotation, refined as S-matrix poles.
pub fn find_resonances(engine: &SpectralEngine, opts: &ResonanceOptions) -> Result<Vec<PoleResult>> {
    if !engine.model().envelope().is_analytic() {
        return Err(Error::Capability(
            "rotation seeding needs an analytic envelope; supply seeds to refine_resonance instead".into(),
        ));
    }
    let mut grid = opts.theta_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() < 2 || grid.iter().any(|&t| !(t > 0.0 && t < std::f64::consts::FRAC_PI_2)) {
        return Err(Error::invalid("theta", "need at least two angles in (0, pi/2)"));
    }
    let mut spectra = Vec::with_capacity(grid.len());
    for &t in &grid {
        let ops = OperatorSet::assemble_rotated(engine.spec(), engine.model(), t)?;
        let eig: Vec<C64> = rotated_spectrum_of(&ops)?.into_iter().filter(|&e| in_gate(e, t, opts)).collect();
        spectra.push(eig);
    }

    let mut pairs = Vec::new();
    for i in 0..grid.len() - 1 {
        for &c in &spectra[i] {
            let nearest = spectra[i + 1].iter().map(|&d| ((d - c).norm(), d)).min_by(|a, b| a.0.total_cmp(&b.0));
            if let Some((dist, d)) = nearest {
                let rel = dist / d.norm();
                if rel < opts.plateau_tol {
                    pairs.push(StablePair { theta: grid[i + 1], energy: d, rel });
                }
            }
        }
    }
    pairs.sort_by(|a, b| a.rel.total_cmp(&b.rel));

    // Greedy clustering around the most stable member.
    let mut clusters: Vec<(StablePair, usize)> = Vec::new();
    for p in pairs {
        match clusters.iter_mut().find(|(best, _)| (best.energy - p.energy).norm() < opts.cluster_tol * best.energy.norm()) {
            Some((_, count)) => *count += 1,
            None => clusters.push((p, 1)),
        }
    }

    let mut out: Vec<PoleResult> = Vec::new();
    for (best, count) in clusters {
        if count < opts.min_pairs {
            continue;
        }
        let digits = Some(digits_from_relative(best.rel));
        let mut pole = match engine.mode() {
            KinematicsMode::Table1Free => refine_resonance(engine, best.energy, best.theta, SeedProvenance::Rotation)?,
            KinematicsMode::Coulomb => rotation_only(engine, best.energy, best.theta, best.rel),
        };
        pole.digits_stable = digits;
        let duplicate = out.iter().any(|q| (q.energy - pole.energy).norm() < 1e-8 * pole.energy.norm());
        if !duplicate {
            out.push(pole);
        }
    }
    sort_poles(&mut out);
    Ok(out)
}

fn resonance_pole(engine: &SpectralEngine, energy: C64, seed: SeedProvenance, theta: f64, report: RootFindReport) -> PoleResult {
    PoleResult {
        energy,
        kind: PoleKind::Resonance,
        gamma: 2.0 * energy.im.abs(),
        seed,
        report,
        digits_stable: None,
        n_basis: engine.spec().n_basis(),
        lambda: engine.spec().lambda(),
        theta: Some(theta),
    }
}

fn rotation_only(engine: &SpectralEngine, energy: C64, theta: f64, rel: f64) -> PoleResult {
    let report = RootFindReport { root: energy, iterations: 0, residual: rel, converged: true };
    resonance_pole(engine, energy, SeedProvenance::Rotation, theta, report)
}

/// Muller refinement of a resonance seed on the S-matrix denominator of the
/// problem scaled by `e^{-i theta}` (free exterior, second sheet). At
/// `theta = 0` this is the unrotated S-matrix pole search.
pub fn refine_resonance(engine: &SpectralEngine, seed: C64, theta: f64, provenance: SeedProvenance) -> Result<PoleResult> {
    if engine.mode() != KinematicsMode::Table1Free {
        return Err(Error::ModeMismatch { required: "table1-free" });
    }
    if !(seed.re > 0.0 && seed.im < 0.0) {
        return Err(Error::invalid("seed", format!("resonance seed {seed} must have Re > 0 and Im < 0")));
    }
    let ops = if theta == 0.0 {
        OperatorSet::assemble(engine.spec(), engine.model())?
    } else {
        OperatorSet::assemble_rotated(engine.spec(), engine.model(), theta)?
    };
    // A rotated eigenvalue next to the seed is a pole of g; start there and divide it out.
    let anchor = if theta == 0.0 {
        None
    } else {
        rotated_spectrum_of(&ops)?
            .into_iter()
            .filter(|c| (c - seed).norm() < 0.1 * seed.norm())
            .min_by(|a, b| (a - seed).norm().total_cmp(&(b - seed).norm()))
    };
    let start = anchor.unwrap_or(seed);
    let d = start.norm() * 1e-5;
    let seeds = [start + d, start + C64::new(0.0, d), start - d];
    let opts = engine.options();
    let report = muller_find_root(|e| engine.scaled_denominator(&ops, e, anchor), seeds, opts.muller_tol, opts.max_iter)?;
    let mut energy = report.root;
    let mut report = report;
    if !(energy.re > 0.0 && energy.im < 0.0) {
        // Refinement wandered off the resonance sector; keep the seed and flag it.
        energy = seed;
        report.converged = false;
    }
    Ok(resonance_pole(engine, energy, provenance, theta, report))
}
