use std::io::Write;

use jmatrix::spectra::{truncate_significant, PoleKind, PoleResult, SeedProvenance};
use serde::Serialize;
use serde_json::Value;

use crate::config::{ConfigError, Format, OutputTarget};

pub const POLE_HEADER: &str = "potential,ell,A,mu,N,lambda,mode,kind,re_energy,im_energy,gamma,digits_stable,seed,iterations";

/// One pole, as written.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub potential: String,
    pub ell: u32,
    #[serde(rename = "A")]
    pub a: f64,
    pub mu: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub lambda: f64,
    pub mode: String,
    pub kind: PoleKind,
    pub re_energy: f64,
    pub im_energy: f64,
    pub gamma: f64,
    pub digits_stable: Option<u32>,
    pub seed: SeedProvenance,
    pub iterations: usize,
    pub converged: bool,
}

pub struct PoleContext<'a> {
    pub potential: &'a str,
    pub ell: u32,
    pub strength: f64,
    pub mu: f64,
    pub mode: &'a str,
}

impl ResultRecord {
    /// Fails when the pole breaks its own invariants.
    pub fn from_pole(ctx: &PoleContext, pole: &PoleResult) -> jmatrix::Result<Self> {
        pole.validate()?;
        Ok(Self {
            potential: ctx.potential.to_string(),
            ell: ctx.ell,
            a: ctx.strength,
            mu: ctx.mu,
            n: pole.n_basis,
            lambda: pole.lambda,
            mode: ctx.mode.to_string(),
            kind: pole.kind,
            re_energy: pole.energy.re,
            im_energy: pole.energy.im,
            gamma: pole.gamma,
            digits_stable: pole.digits_stable,
            seed: pole.seed,
            iterations: pole.report.iterations,
            converged: pole.report.converged,
        })
    }

    pub fn csv_row(&self) -> Vec<String> {
        let trunc = |x: f64| self.digits_stable.map_or(x, |d| truncate_significant(x, d));
        let (re, im) = (trunc(self.re_energy), trunc(self.im_energy));
        let kind = match self.kind {
            PoleKind::Bound => "bound",
            PoleKind::Resonance => "resonance",
        };
        let seed = match self.seed {
            SeedProvenance::Harris => "harris",
            SeedProvenance::Rotation => "rotation",
            SeedProvenance::User => "user",
        };
        vec![
            self.potential.clone(),
            self.ell.to_string(),
            num(self.a),
            num(self.mu),
            self.n.to_string(),
            num(self.lambda),
            self.mode.clone(),
            kind.to_string(),
            sci(re),
            sci(im),
            sci(2.0 * im.abs()),
            self.digits_stable.map_or(String::new(), |d| d.to_string()),
            seed.to_string(),
            self.iterations.to_string(),
        ]
    }
}

/// Twelve significant digits in scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// Input parameters, echoed in their shortest exact form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_sci(x: Option<f64>) -> String {
    x.map_or(String::new(), sci)
}

/// A finished command result: CSV rows and the JSON document.
pub struct Table {
    pub header: String,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

impl Table {
    pub fn new(header: &str) -> Self {
        Self { header: header.to_string(), rows: Vec::new(), json: Value::Null }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::with_capacity(64 * (self.rows.len() + 1));
                out.push_str(&self.header);
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
                s.push('\n');
                s
            }
        }
    }
}

pub fn write(target: &OutputTarget, table: &Table) -> Result<(), ConfigError> {
    let text = table.render(target.format);
    match &target.path {
        Some(path) => std::fs::write(path, text).map_err(|e| ConfigError::new("output", format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| ConfigError::new("output", e.to_string()))
        }
    }
}
