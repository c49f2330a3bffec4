use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{find_bound_states, find_resonances, EngineOptions, KinematicsMode, PoleResult, ResonanceOptions, SpectralEngine};
use crate::basis::BasisSpec;
use crate::potentials::PotentialModel;
use crate::{Error, Result};

/// Everything but the basis.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub model: PotentialModel,
    pub ell: u32,
    pub mode: KinematicsMode,
    pub options: EngineOptions,
}

#[derive(Debug, Clone)]
pub enum PlateauTarget {
    /// `index`-th bound state counted from the bottom.
    Bound { index: usize },
    /// Resonance nearest to `near`.
    Resonance { near: C64, options: ResonanceOptions },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlateauSample {
    pub n_basis: usize,
    pub lambda: f64,
    pub energy: Option<C64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlateauReport {
    pub best: Option<PoleResult>,
    pub samples: Vec<PlateauSample>,
    /// Basis size and scale range of the plateau window.
    pub n_basis: usize,
    pub window: Option<(f64, f64)>,
    pub relative_change: f64,
    pub digits_stable: u32,
    pub truncated: Option<C64>,
    pub stable: bool,
}

pub(crate) fn digits_from_relative(rel: f64) -> u32 {
    if rel <= 1e-15 {
        15
    } else {
        (-rel.log10()).floor().clamp(0.0, 15.0) as u32
    }
}

/// Keeps the first `digits` significant decimal digits of `x`, dropping the rest.
pub fn truncate_significant(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() || digits >= 17 {
        return x;
    }
    let s = format!("{:.16e}", x);
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let neg = mantissa.starts_with('-');
    let body: String = mantissa.trim_start_matches('-').chars().filter(|c| *c != '.').collect();
    let keep = (digits.max(1) as usize).min(body.len());
    let kept = &body[..keep];
    let text = format!("{}{}.{}e{}", if neg { "-" } else { "" }, &kept[..1], &kept[1..], exp);
    text.parse().expect("well-formed number")
}

fn solve_one(problem: &ProblemSpec, target: &PlateauTarget, spec: &BasisSpec) -> Result<PoleResult> {
    let engine = SpectralEngine::with_options(spec, &problem.model, problem.mode, problem.options.clone())?;
    match target {
        PlateauTarget::Bound { index } => find_bound_states(&engine, None)?
            .into_iter()
            .nth(*index)
            .ok_or_else(|| Error::invalid("state", format!("bound state {index} not found"))),
        PlateauTarget::Resonance { near, options } => find_resonances(&engine, options)?
            .into_iter()
            .min_by(|a, b| (a.energy - near).norm().total_cmp(&(b.energy - near).norm()))
            .ok_or_else(|| Error::invalid("state", "no resonance found")),
    }
}

/// Solves on every `(lambda, N)` and picks the window of `lambda` where the
/// energy changes least.
pub fn plateau_scan(problem: &ProblemSpec, target: &PlateauTarget, lambda_grid: &[f64], n_list: &[usize]) -> Result<PlateauReport> {
    if lambda_grid.is_empty() || n_list.is_empty() {
        return Err(Error::invalid("grid", "lambda and N grids must be non-empty"));
    }
    let mut samples = Vec::new();
    let mut results: Vec<Vec<Option<PoleResult>>> = Vec::new();
    for &n in n_list {
        let mut row = Vec::new();
        for &lam in lambda_grid {
            let spec = BasisSpec::new(problem.ell, lam, n)?;
            match solve_one(problem, target, &spec) {
                Ok(p) => {
                    samples.push(PlateauSample { n_basis: n, lambda: lam, energy: Some(p.energy), error: None });
                    row.push(Some(p));
                }
                Err(e) => {
                    samples.push(PlateauSample { n_basis: n, lambda: lam, energy: None, error: Some(e.to_string()) });
                    row.push(None);
                }
            }
        }
        results.push(row);
    }

    // (relative change, row, index of the right member).
    let mut best: Option<(f64, usize, usize)> = None;
    for (r, row) in results.iter().enumerate() {
        for i in 1..row.len() {
            if let (Some(a), Some(b)) = (&row[i - 1], &row[i]) {
                let rel = (b.energy - a.energy).norm() / b.energy.norm();
                if best.is_none_or(|(m, _, _)| rel <= m) {
                    best = Some((rel, r, i));
                }
            }
        }
    }

    let Some((rel, r, i)) = best else {
        let fallback = results.iter().flatten().flatten().last().cloned();
        return Ok(PlateauReport {
            truncated: fallback.as_ref().map(|p| p.energy),
            best: fallback,
            samples,
            n_basis: n_list[n_list.len() - 1],
            window: None,
            relative_change: f64::INFINITY,
            digits_stable: 0,
            stable: false,
        });
    };

    let row = &results[r];
    let step = |k: usize| -> Option<f64> {
        match (&row[k - 1], &row[k]) {
            (Some(a), Some(b)) => Some((b.energy - a.energy).norm() / b.energy.norm()),
            _ => None,
        }
    };
    let limit = (10.0 * rel).max(1e-14);
    let (mut lo, mut hi) = (i - 1, i);
    while lo > 0 && step(lo).is_some_and(|v| v <= limit) {
        lo -= 1;
    }
    while hi + 1 < row.len() && step(hi + 1).is_some_and(|v| v <= limit) {
        hi += 1;
    }

    let digits = digits_from_relative(rel);
    let mut pole = row[i].clone().expect("window member exists");
    pole.digits_stable = Some(digits);
    let truncated = C64::new(truncate_significant(pole.energy.re, digits), truncate_significant(pole.energy.im, digits));
    Ok(PlateauReport {
        best: Some(pole),
        samples,
        n_basis: n_list[r],
        window: Some((lambda_grid[lo], lambda_grid[hi])),
        relative_change: rel,
        digits_stable: digits,
        truncated: Some(truncated),
        stable: digits >= 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_drops_digits() {
        assert_eq!(truncate_significant(-1.6805555554987e-4, 10), -1.680555555e-4);
        assert_eq!(truncate_significant(0.99999, 3), 0.999);
        assert_eq!(truncate_significant(123456.0, 2), 120000.0);
        assert_eq!(truncate_significant(0.0, 4), 0.0);
    }

    #[test]
    fn digit_count() {
        assert_eq!(digits_from_relative(0.0), 15);
        assert_eq!(digits_from_relative(3e-7), 6);
        assert_eq!(digits_from_relative(2.0), 0);
    }
}
