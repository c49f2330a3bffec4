//! Screened Coulomb interactions `V(r) = Z/r - (A/r) F(mu r)` and the split
//! `V = (Z - A)/r + U(r)` with a regular remainder `U`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Piecewise-linear envelope. A repeated abscissa is a jump, and the value
/// on the right of it wins. `F = 0` past the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakpoints {
    points: Vec<(f64, f64)>,
}

impl Breakpoints {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("breakpoints", "need at least two points"));
        }
        if points.iter().any(|(x, f)| !x.is_finite() || !f.is_finite()) {
            return Err(Error::invalid("breakpoints", "coordinates must be finite"));
        }
        if points[0].0 != 0.0 {
            return Err(Error::invalid("breakpoints", "first abscissa must be 0"));
        }
        for w in points.windows(2) {
            if w[1].0 < w[0].0 {
                return Err(Error::invalid("breakpoints", "abscissae must be non-decreasing"));
            }
        }
        for w in points.windows(3) {
            if w[0].0 == w[1].0 && w[1].0 == w[2].0 {
                return Err(Error::invalid("breakpoints", "an abscissa may repeat at most once"));
            }
        }
        if points[0].0 == points[1].0 {
            return Err(Error::invalid("breakpoints", "no jump allowed at the origin"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn value(&self, x: f64) -> f64 {
        let p = &self.points;
        for w in p.windows(2).rev() {
            let ((x0, f0), (x1, f1)) = (w[0], w[1]);
            if x0 < x1 && x >= x0 {
                if x >= x1 {
                    return if x1 == p[p.len() - 1].0 { 0.0 } else { f1 };
                }
                return f0 + (f1 - f0) * (x - x0) / (x1 - x0);
            }
        }
        p[0].1
    }

    fn initial_slope(&self) -> f64 {
        let ((x0, f0), (x1, f1)) = (self.points[0], self.points[1]);
        (f1 - f0) / (x1 - x0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEnvelope {
    pub weight: f64,
    pub envelope: Envelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Envelope {
    Yukawa,
    Hulthen,
    /// `F = 1`: pure Coulomb with no remainder. Useful as a reference case.
    Unscreened,
    Piecewise(Breakpoints),
    Superposition(Vec<WeightedEnvelope>),
}

fn paper_fig1() -> Breakpoints {
    Breakpoints::new(vec![(0.0, 1.0), (1.0, 2.0), (1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (4.0, 0.0)])
        .expect("preset is well formed")
}

// Continuous variant: rise to 2, plateau, linear fall to 0.
fn paper_fig1_flat() -> Breakpoints {
    Breakpoints::new(vec![(0.0, 1.0), (1.0, 2.0), (2.0, 2.0), (4.0, 0.0)]).expect("preset is well formed")
}

pub const PRESET_NAMES: [&str; 4] = ["yukawa", "hulthen", "paper-fig1", "paper-fig1-flat"];

// Series of (1 - x/(e^x - 1))/x around 0 (Bernoulli numbers).
const HULTHEN_SERIES: [f64; 6] = [0.5, -1.0 / 12.0, 0.0, 1.0 / 720.0, 0.0, -1.0 / 30240.0];
const HULTHEN_SERIES_TAIL: [(i32, f64); 2] = [(7, 1.0 / 1_209_600.0), (9, -1.0 / 47_900_160.0)];
const SMALL_X: f64 = 0.1;

fn hulthen_q_series(x: C64) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    let mut pow = C64::new(1.0, 0.0);
    for &c in &HULTHEN_SERIES {
        sum += pow * c;
        pow *= x;
    }
    for &(p, c) in &HULTHEN_SERIES_TAIL {
        sum += x.powi(p) * c;
    }
    sum
}

fn yukawa_q_series(x: C64) -> C64 {
    // sum_j (-x)^j / (j+1)!
    let mut sum = C64::new(0.0, 0.0);
    let mut term = C64::new(1.0, 0.0);
    for j in 0..24 {
        sum += term;
        term = -term * x / (j as f64 + 2.0);
    }
    sum
}

impl Envelope {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "yukawa" => Ok(Envelope::Yukawa),
            "hulthen" => Ok(Envelope::Hulthen),
            "paper-fig1" => Ok(Envelope::Piecewise(paper_fig1())),
            "paper-fig1-flat" => Ok(Envelope::Piecewise(paper_fig1_flat())),
            other => Err(Error::invalid(
                "potential",
                format!("unknown preset `{other}` (expected one of {})", PRESET_NAMES.join(", ")),
            )),
        }
    }

    /// Whether the envelope continues analytically to complex arguments.
    pub fn is_analytic(&self) -> bool {
        match self {
            Envelope::Yukawa | Envelope::Hulthen | Envelope::Unscreened => true,
            Envelope::Piecewise(_) => false,
            Envelope::Superposition(parts) => parts.iter().all(|p| p.envelope.is_analytic()),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Envelope::Yukawa => (-x).exp(),
            Envelope::Hulthen => {
                if x.abs() < 1e-4 {
                    1.0 - x / 2.0 + x * x / 12.0
                } else {
                    x / x.exp_m1()
                }
            }
            Envelope::Unscreened => 1.0,
            Envelope::Piecewise(b) => b.value(x),
            Envelope::Superposition(parts) => parts.iter().map(|p| p.weight * p.envelope.value(x)).sum(),
        }
    }

    pub fn value_complex(&self, x: C64) -> Result<C64> {
        Ok(match self {
            Envelope::Yukawa => (-x).exp(),
            Envelope::Hulthen => {
                if x.norm() < SMALL_X {
                    C64::new(1.0, 0.0) - x * hulthen_q_series(x)
                } else if x.re > 0.0 {
                    let t = (-x).exp();
                    x * t / (1.0 - t)
                } else {
                    x / (x.exp() - 1.0)
                }
            }
            Envelope::Unscreened => C64::new(1.0, 0.0),
            Envelope::Piecewise(_) => return Err(self.capability_error()),
            Envelope::Superposition(parts) => {
                let mut s = C64::new(0.0, 0.0);
                for p in parts {
                    s += p.envelope.value_complex(x)? * p.weight;
                }
                s
            }
        })
    }

    /// `(1 - F(x))/x`, continuous at the origin.
    pub fn remainder(&self, x: f64) -> f64 {
        match self {
            Envelope::Yukawa => {
                if x == 0.0 {
                    1.0
                } else {
                    -(-x).exp_m1() / x
                }
            }
            Envelope::Hulthen => {
                if x.abs() < SMALL_X {
                    hulthen_q_series(C64::new(x, 0.0)).re
                } else {
                    (1.0 - x / x.exp_m1()) / x
                }
            }
            Envelope::Unscreened => 0.0,
            Envelope::Piecewise(b) => {
                if x == 0.0 {
                    -b.initial_slope()
                } else {
                    (1.0 - b.value(x)) / x
                }
            }
            Envelope::Superposition(parts) => {
                let total: f64 = parts.iter().map(|p| p.weight).sum();
                let mut s: f64 = parts.iter().map(|p| p.weight * p.envelope.remainder(x)).sum();
                if total != 1.0 && x != 0.0 {
                    s += (1.0 - total) / x;
                }
                s
            }
        }
    }

    pub fn remainder_complex(&self, x: C64) -> Result<C64> {
        Ok(match self {
            Envelope::Yukawa => {
                if x.norm() < 0.5 {
                    yukawa_q_series(x)
                } else {
                    (1.0 - (-x).exp()) / x
                }
            }
            Envelope::Hulthen => {
                if x.norm() < SMALL_X {
                    hulthen_q_series(x)
                } else {
                    (1.0 - self.value_complex(x)?) / x
                }
            }
            Envelope::Unscreened => C64::new(0.0, 0.0),
            Envelope::Piecewise(_) => return Err(self.capability_error()),
            Envelope::Superposition(parts) => {
                let mut total = 0.0;
                let mut s = C64::new(0.0, 0.0);
                for p in parts {
                    total += p.weight;
                    s += p.envelope.remainder_complex(x)? * p.weight;
                }
                if total != 1.0 && x.norm() != 0.0 {
                    s += (1.0 - total) / x;
                }
                s
            }
        })
    }

    fn capability_error(&self) -> Error {
        Error::Capability("piecewise envelopes have no analytic continuation to complex arguments".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    strength: f64,
    screening: f64,
    bare_charge: f64,
    envelope: Envelope,
}

impl PotentialModel {
    /// Validated model with `Z = 0`. The envelope must satisfy `F(0) = 1`.
    pub fn new(envelope: Envelope, strength: f64, screening: f64) -> Result<Self> {
        let model = Self::new_unnormalized(envelope, strength, screening)?;
        let f0 = model.envelope.value(0.0);
        if (f0 - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("envelope", format!("F(0) must be 1, got {f0}")));
        }
        Ok(model)
    }

    /// Same as [`PotentialModel::new`] without the `F(0) = 1` check.
    pub fn new_unnormalized(envelope: Envelope, strength: f64, screening: f64) -> Result<Self> {
        if !(strength.is_finite() && strength > 0.0) {
            return Err(Error::invalid("A", format!("strength must be positive, got {strength}")));
        }
        if !(screening.is_finite() && screening > 0.0) {
            return Err(Error::invalid("mu", format!("screening must be positive, got {screening}")));
        }
        if let Envelope::Superposition(parts) = &envelope {
            if parts.is_empty() || parts.iter().any(|p| !p.weight.is_finite()) {
                return Err(Error::invalid("superposition", "needs finite weights and at least one part"));
            }
        }
        Ok(Self { strength, screening, bare_charge: 0.0, envelope })
    }

    pub fn with_bare_charge(mut self, z: f64) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::invalid("Z", "bare charge must be finite"));
        }
        self.bare_charge = z;
        Ok(self)
    }

    pub fn with_screening(&self, screening: f64) -> Result<Self> {
        let mut m = Self::new_unnormalized(self.envelope.clone(), self.strength, screening)?;
        m.bare_charge = self.bare_charge;
        Ok(m)
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn screening(&self) -> f64 {
        self.screening
    }

    pub fn bare_charge(&self) -> f64 {
        self.bare_charge
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    /// Coefficient of the `1/r` term kept in the reference operator.
    pub fn effective_charge(&self) -> f64 {
        self.bare_charge - self.strength
    }

    pub fn envelope_value(&self, x: f64) -> f64 {
        self.envelope.value(x)
    }

    pub fn envelope_value_complex(&self, x: C64) -> Result<C64> {
        self.envelope.value_complex(x)
    }

    /// `U(r) = (A/r)(1 - F(mu r))`, finite at `r = 0`.
    pub fn effective_potential(&self, r: f64) -> f64 {
        self.strength * self.screening * self.envelope.remainder(self.screening * r)
    }

    pub fn effective_potential_complex(&self, r: C64) -> Result<C64> {
        Ok(self.envelope.remainder_complex(r * self.screening)? * (self.strength * self.screening))
    }

    /// Full interaction `Z/r - (A/r) F(mu r)` for `r > 0`.
    pub fn potential(&self, r: f64) -> f64 {
        (self.bare_charge - self.strength * self.envelope.value(self.screening * r)) / r
    }
}

/// Rescales to strength `target_a` keeping `A/mu` fixed. Energies scale by
/// the returned factor when the basis scale is rescaled by the same ratio.
pub fn scale_transform(model: &PotentialModel, target_a: f64) -> Result<(PotentialModel, f64)> {
    if !(target_a.is_finite() && target_a > 0.0) {
        return Err(Error::invalid("target_A", format!("must be positive, got {target_a}")));
    }
    let ratio = target_a / model.strength;
    let scaled = PotentialModel {
        strength: target_a,
        screening: model.screening * ratio,
        bare_charge: model.bare_charge * ratio,
        envelope: model.envelope.clone(),
    };
    Ok((scaled, ratio * ratio))
}

/// Fitted critical screening of the Hulthen state with principal number `k`.
pub fn critical_screening_fit(k: u32, ell: u32) -> Result<f64> {
    if k <= ell {
        return Err(Error::invalid("k", format!("principal number {k} must exceed ell = {ell}")));
    }
    let (k, l) = (k as f64, ell as f64);
    Ok((k / std::f64::consts::SQRT_2 + 0.1654 * l + 0.0983 * l / k).powi(-2))
}

/// Exact s-wave Hulthen level `n` (1-based), when it is bound.
pub fn hulthen_s_wave_energy(n: u32, strength: f64, screening: f64) -> Option<f64> {
    let n2 = (n as f64).powi(2);
    let g = 2.0 * strength / screening;
    if n == 0 || g <= n2 {
        return None;
    }
    Some(-(screening * screening / 8.0) * ((g - n2) / n as f64).powi(2))
}

/// Exact Hulthen s-wave critical screening `2A / n^2`.
pub fn hulthen_s_wave_critical(n: u32, strength: f64) -> f64 {
    2.0 * strength / (n as f64).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalMethod {
    Fit,
    Bisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalScreeningResult {
    pub mu_c: f64,
    pub method: CriticalMethod,
    /// Principal quantum number of the tracked state.
    pub principal: u32,
    pub ell: u32,
    pub tolerance: f64,
}
