//! Run configuration: an optional TOML or JSON file overlaid by command-line
//! flags, then validated against the library preconditions before any work.

use std::fmt;
use std::path::{Path, PathBuf};

use jmatrix::basis::BasisSpec;
use jmatrix::potentials::{Breakpoints, Envelope, PotentialModel};
use jmatrix::spectra::KinematicsMode;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { field: field.into(), reason: reason.into() }
    }

    fn missing(field: &str) -> Self {
        Self::new(field, "required but not set (config file or flag)")
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

impl From<jmatrix::Error> for ConfigError {
    fn from(e: jmatrix::Error) -> Self {
        match e {
            jmatrix::Error::InvalidInput { field, reason } => Self::new(field, reason),
            other => Self::new("config", other.to_string()),
        }
    }
}

/// Keeps `self` where `other` is unset.
trait Overlay {
    fn overlay(self, other: Self) -> Self;
}

impl<T: Overlay> Overlay for Option<T> {
    fn overlay(self, other: Self) -> Self {
        match (self, other) {
            (Some(a), Some(b)) => Some(a.overlay(b)),
            (a, b) => b.or(a),
        }
    }
}

macro_rules! overlay_fields {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl Overlay for $ty {
            fn overlay(self, other: Self) -> Self {
                Self { $($field: other.$field.or(self.$field)),* }
            }
        }
    };
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    pub name: Option<String>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub mu: Option<f64>,
    #[serde(rename = "Z")]
    pub z: Option<f64>,
    pub breakpoints: Option<Vec<[f64; 2]>>,
}
overlay_fields!(PotentialBlock { name, a, mu, z, breakpoints });

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisBlock {
    pub ell: Option<u32>,
    pub lambda: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
}
overlay_fields!(BasisBlock { ell, lambda, n });

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundBlock {
    pub e_lo: Option<f64>,
}
overlay_fields!(BoundBlock { e_lo });

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceBlock {
    pub theta: Option<Vec<f64>>,
    pub max_energy: Option<f64>,
    /// User seeds `[re, im]`, refined alongside the rotation search.
    pub seeds: Option<Vec<[f64; 2]>>,
    pub seed_theta: Option<f64>,
}
overlay_fields!(ResonanceBlock { theta, max_energy, seeds, seed_theta });

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    pub lambda: Option<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: Option<Vec<usize>>,
    /// Bound level, counted from the bottom.
    pub state: Option<usize>,
    /// Track the resonance nearest `[re, im]` instead of a bound level.
    pub near: Option<[f64; 2]>,
}
overlay_fields!(ScanBlock { lambda, n, state, near });

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalBlock {
    pub state: Option<usize>,
    pub mu_lo: Option<f64>,
    pub mu_hi: Option<f64>,
    pub tol: Option<f64>,
}
overlay_fields!(CriticalBlock { state, mu_lo, mu_hi, tol });

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmatrixBlock {
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
    pub points: Option<usize>,
}
overlay_fields!(SmatrixBlock { e_min, e_max, points });

/// Raw, unvalidated configuration as read from a file or assembled from flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub potential: Option<PotentialBlock>,
    pub basis: Option<BasisBlock>,
    pub mode: Option<String>,
    pub format: Option<String>,
    pub output: Option<PathBuf>,
    pub bound: Option<BoundBlock>,
    pub resonances: Option<ResonanceBlock>,
    pub scan: Option<ScanBlock>,
    pub critical: Option<CriticalBlock>,
    pub smatrix: Option<SmatrixBlock>,
}

impl RawConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.extension().is_some_and(|x| x == "json"))
    }

    pub fn parse(text: &str, json: bool) -> Result<Self, ConfigError> {
        if json || text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| ConfigError::new("config", e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| ConfigError::new("config", e.to_string().trim_end().to_string()))
        }
    }

    /// `other` wins wherever it sets a value.
    pub fn overlay(self, other: RawConfig) -> RawConfig {
        RawConfig {
            potential: self.potential.overlay(other.potential),
            basis: self.basis.overlay(other.basis),
            mode: other.mode.or(self.mode),
            format: other.format.or(self.format),
            output: other.output.or(self.output),
            bound: self.bound.overlay(other.bound),
            resonances: self.resonances.overlay(other.resonances),
            scan: self.scan.overlay(other.scan),
            critical: self.critical.overlay(other.critical),
            smatrix: self.smatrix.overlay(other.smatrix),
        }
    }

    pub fn output(&self) -> Result<OutputTarget, ConfigError> {
        let format = match self.format.as_deref().unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(ConfigError::new("format", format!("unknown format `{other}` (csv | json)"))),
        };
        Ok(OutputTarget { format, path: self.output.clone() })
    }

    pub fn mode(&self) -> Result<KinematicsMode, ConfigError> {
        Ok(self.mode.as_deref().unwrap_or("table1-free").parse()?)
    }

    /// Everything a single-potential command needs. `mu` stays optional
    /// for commands that sweep it.
    pub fn problem(&self) -> Result<Problem, ConfigError> {
        let pot = self.potential.clone().unwrap_or_default();
        let basis = self.basis.clone().unwrap_or_default();
        let name = pot.name.ok_or_else(|| ConfigError::missing("potential"))?;
        let envelope = envelope_for(&name, pot.breakpoints.as_deref())?;
        let strength = pot.a.unwrap_or(1.0);
        let bare_charge = pot.z.unwrap_or(0.0);
        let spec = BasisSpec::new(
            basis.ell.ok_or_else(|| ConfigError::missing("ell"))?,
            basis.lambda.ok_or_else(|| ConfigError::missing("lambda"))?,
            basis.n.ok_or_else(|| ConfigError::missing("N"))?,
        )?;
        let problem = Problem { name, envelope, strength, bare_charge, mu: pot.mu, spec, mode: self.mode()? };
        // Checks A, Z and the envelope even when mu comes later.
        problem.model_at(pot.mu.unwrap_or(1.0))?;
        Ok(problem)
    }
}

fn envelope_for(name: &str, breakpoints: Option<&[[f64; 2]]>) -> Result<Envelope, ConfigError> {
    match (name, breakpoints) {
        ("piecewise", Some(points)) => Ok(Envelope::Piecewise(Breakpoints::new(points.iter().map(|p| (p[0], p[1])).collect())?)),
        ("piecewise", None) => Err(ConfigError::new("breakpoints", "potential `piecewise` needs breakpoints")),
        ("coulomb", None) => Ok(Envelope::Unscreened),
        (other, None) => Ok(Envelope::preset(other)?),
        (other, Some(_)) => Err(ConfigError::new("breakpoints", format!("only valid with potential `piecewise`, not `{other}`"))),
    }
}

/// Parses `x0:f0,x1:f1,...`.
pub fn parse_breakpoints(text: &str) -> Result<Vec<[f64; 2]>, ConfigError> {
    text.split(',')
        .map(|pair| {
            let (x, f) = pair.split_once(':').ok_or_else(|| ConfigError::new("breakpoints", format!("`{pair}` is not x:F")))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|e| ConfigError::new("breakpoints", format!("`{s}`: {e}")));
            Ok([num(x)?, num(f)?])
        })
        .collect()
}

/// Parses `re,im`.
pub fn parse_complex(field: &str, text: &str) -> Result<[f64; 2], ConfigError> {
    let (re, im) = text.split_once(',').ok_or_else(|| ConfigError::new(field, format!("`{text}` is not re,im")))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| ConfigError::new(field, format!("`{s}`: {e}")));
    Ok([num(re)?, num(im)?])
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub envelope: Envelope,
    pub strength: f64,
    pub bare_charge: f64,
    pub mu: Option<f64>,
    pub spec: BasisSpec,
    pub mode: KinematicsMode,
}

impl Problem {
    pub fn model_at(&self, mu: f64) -> Result<PotentialModel, ConfigError> {
        Ok(PotentialModel::new(self.envelope.clone(), self.strength, mu)?.with_bare_charge(self.bare_charge)?)
    }

    pub fn model(&self) -> Result<PotentialModel, ConfigError> {
        self.model_at(self.mu.ok_or_else(|| ConfigError::missing("mu"))?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputTarget {
    pub format: Format,
    pub path: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(mu: f64) -> RawConfig {
        RawConfig {
            potential: Some(PotentialBlock { name: Some("hulthen".into()), a: Some(1.0), mu: Some(mu), ..Default::default() }),
            basis: Some(BasisBlock { ell: Some(0), lambda: Some(0.8), n: Some(50) }),
            ..Default::default()
        }
    }

    #[test]
    fn flags_make_a_valid_problem() {
        let p = flags(0.21).problem().unwrap();
        assert_eq!(p.spec.n_basis(), 50);
        assert_eq!(p.mode, KinematicsMode::Table1Free);
        assert!(p.model().is_ok());
    }

    #[test]
    fn negative_screening_names_the_field() {
        let err = flags(-1.0).problem().unwrap_err();
        assert_eq!(err.field, "mu");
    }

    #[test]
    fn flags_override_file() {
        let file = RawConfig::parse("[potential]\nname = \"yukawa\"\nmu = 0.3\n[basis]\nell = 2\nlambda = 0.3\nN = 40\n", false).unwrap();
        let merged = file.overlay(RawConfig { basis: Some(BasisBlock { n: Some(60), ..Default::default() }), ..Default::default() });
        let p = merged.problem().unwrap();
        assert_eq!((p.spec.n_basis(), p.spec.ell(), p.name.as_str()), (60, 2, "yukawa"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RawConfig::parse("[basis]\nell = 0\nsize = 3\n", false).unwrap_err();
        assert!(err.reason.contains("size"), "{err}");
        let err = RawConfig::parse(r#"{"potential": {"name": "hulthen", "nu": 1}}"#, true).unwrap_err();
        assert!(err.reason.contains("nu"), "{err}");
    }

    #[test]
    fn presets_and_breakpoints() {
        let mut raw = flags(0.2);
        raw.potential.as_mut().unwrap().name = Some("paper-fig1".into());
        assert!(matches!(raw.problem().unwrap().envelope, Envelope::Piecewise(_)));
        raw.potential.as_mut().unwrap().breakpoints = Some(parse_breakpoints("0:1,1:2,2:2,4:0").unwrap());
        assert_eq!(raw.problem().unwrap_err().field, "breakpoints");
        raw.potential.as_mut().unwrap().name = Some("piecewise".into());
        assert!(raw.problem().is_ok());
        assert!(parse_breakpoints("0:1,2").is_err());
    }

    #[test]
    fn format_and_mode_checked() {
        let mut raw = flags(0.2);
        raw.format = Some("xml".into());
        assert_eq!(raw.output().unwrap_err().field, "format");
        raw.mode = Some("free".into());
        assert_eq!(raw.problem().unwrap_err().field, "mode");
    }
}
