use jmatrix::potentials::critical_screening_fit;
use jmatrix::spectra::{
    critical_screening_numeric, find_bound_states, find_resonances, plateau_scan, refine_resonance, smatrix, CriticalSearch,
    EngineOptions, KinematicsMode, PlateauTarget, PoleResult, ProblemSpec, ResonanceOptions, SeedProvenance, SpectralEngine,
};
use jmatrix::tables::{golden_rows, reproduce_row, RowOutcome, TableId};
use jmatrix::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{ConfigError, Problem, RawConfig};
use crate::output::{num, opt_sci, sci, PoleContext, ResultRecord, Table, POLE_HEADER};

/// Output plus the problems met on the way. Any problem maps to exit code 3.
pub struct Outcome {
    pub table: Table,
    pub failures: Vec<String>,
}

fn engine(problem: &Problem) -> Result<SpectralEngine, ConfigError> {
    Ok(SpectralEngine::new(&problem.spec, &problem.model()?, problem.mode)?)
}

/// Rows for every pole that passes validation; the rest become failures.
fn pole_table(problem: &Problem, mu: f64, poles: &[PoleResult], failures: &mut Vec<String>) -> Table {
    let ctx = PoleContext {
        potential: &problem.name,
        ell: problem.spec.ell(),
        strength: problem.strength,
        mu,
        mode: problem.mode.as_str(),
    };
    let mut records = Vec::with_capacity(poles.len());
    for p in poles {
        match ResultRecord::from_pole(&ctx, p) {
            Ok(r) => {
                if !r.converged {
                    failures.push(format!("pole near {} did not converge", p.energy));
                }
                records.push(r);
            }
            Err(e) => failures.push(format!("dropped pole {}: {e}", p.energy)),
        }
    }
    let mut table = Table::new(POLE_HEADER);
    table.rows = records.iter().map(ResultRecord::csv_row).collect();
    table.json = json!(records);
    table
}

pub fn bound(raw: &RawConfig) -> Result<Outcome, ConfigError> {
    let problem = raw.problem()?;
    let eng = engine(&problem)?;
    let e_lo = raw.bound.as_ref().and_then(|b| b.e_lo);
    let mut failures = Vec::new();
    let poles = find_bound_states(&eng, e_lo).unwrap_or_else(|e| {
        failures.push(format!("bound-state search: {e}"));
        Vec::new()
    });
    let table = pole_table(&problem, problem.mu.unwrap_or_default(), &poles, &mut failures);
    Ok(Outcome { table, failures })
}

fn resonance_options(raw: &RawConfig) -> Result<ResonanceOptions, ConfigError> {
    let mut opts = ResonanceOptions::default();
    if let Some(block) = &raw.resonances {
        if let Some(theta) = &block.theta {
            if theta.is_empty() || theta.iter().any(|t| !(*t > 0.0 && *t < std::f64::consts::FRAC_PI_2)) {
                return Err(ConfigError::new("resonances.theta", "angles must lie in (0, pi/2)"));
            }
            opts.theta_grid = theta.clone();
        }
        if let Some(max) = block.max_energy {
            if !(max > 0.0) {
                return Err(ConfigError::new("resonances.max_energy", "must be positive"));
            }
            opts.max_energy = max;
        }
    }
    Ok(opts)
}

pub fn resonances(raw: &RawConfig) -> Result<Outcome, ConfigError> {
    let problem = raw.problem()?;
    let opts = resonance_options(raw)?;
    let block = raw.resonances.clone().unwrap_or_default();
    let seed_theta = block.seed_theta.unwrap_or(1.0);
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&seed_theta) {
        return Err(ConfigError::new("resonances.seed_theta", "must lie in [0, pi/2)"));
    }
    let seeds: Vec<Complex64> = block.seeds.unwrap_or_default().iter().map(|s| Complex64::new(s[0], s[1])).collect();
    if !seeds.is_empty() && problem.mode != KinematicsMode::Table1Free {
        return Err(ConfigError::new("resonances.seeds", "user seeds are refined in table1-free mode only"));
    }
    let eng = engine(&problem)?;
    let mut failures = Vec::new();
    let mut poles = find_resonances(&eng, &opts).unwrap_or_else(|e| {
        failures.push(format!("resonance search: {e}"));
        Vec::new()
    });
    let refined: Vec<_> = seeds.par_iter().map(|&s| (s, refine_resonance(&eng, s, seed_theta, SeedProvenance::User))).collect();
    for (s, r) in refined {
        match r {
            Ok(p) => poles.push(p),
            Err(e) => failures.push(format!("seed {s}: {e}")),
        }
    }
    poles.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re).then(a.energy.im.total_cmp(&b.energy.im)));
    let table = pole_table(&problem, problem.mu.unwrap_or_default(), &poles, &mut failures);
    Ok(Outcome { table, failures })
}

pub fn scan(raw: &RawConfig) -> Result<Outcome, ConfigError> {
    let problem = raw.problem()?;
    let block = raw.scan.clone().unwrap_or_default();
    let lambdas = block.lambda.ok_or_else(|| ConfigError::new("scan.lambda", "required: the scale grid to scan"))?;
    if lambdas.is_empty() {
        return Err(ConfigError::new("scan.lambda", "grid is empty"));
    }
    let sizes = block.n.unwrap_or_else(|| vec![problem.spec.n_basis()]);
    let target = match block.near {
        Some([re, im]) => PlateauTarget::Resonance { near: Complex64::new(re, im), options: resonance_options(raw)? },
        None => PlateauTarget::Bound { index: block.state.unwrap_or(0) },
    };
    let spec = ProblemSpec { model: problem.model()?, ell: problem.spec.ell(), mode: problem.mode, options: EngineOptions::default() };
    let mut failures = Vec::new();
    let report = match plateau_scan(&spec, &target, &lambdas, &sizes) {
        Ok(r) => r,
        Err(jmatrix::Error::InvalidInput { field, reason }) => return Err(ConfigError::new(field, reason)),
        Err(e) => {
            failures.push(format!("plateau scan: {e}"));
            return Ok(Outcome { table: Table::new(POLE_HEADER), failures });
        }
    };
    if !report.stable {
        failures.push(format!("no stable plateau (relative change {:.1e})", report.relative_change));
    }
    let best: Vec<PoleResult> = report.best.iter().cloned().collect();
    if best.is_empty() {
        failures.push("target not found in any basis".into());
    }
    let mut table = pole_table(&problem, problem.mu.unwrap_or_default(), &best, &mut failures);
    table.json = json!({ "records": table.json, "plateau": report });
    Ok(Outcome { table, failures })
}

pub fn critical(raw: &RawConfig) -> Result<Outcome, ConfigError> {
    let problem = raw.problem()?;
    let block = raw.critical.clone().unwrap_or_default();
    let search = CriticalSearch {
        envelope: problem.envelope.clone(),
        strength: problem.strength,
        bare_charge: problem.bare_charge,
        ell: problem.spec.ell(),
        state_index: block.state.unwrap_or(0),
        mu_lo: block.mu_lo.ok_or_else(|| ConfigError::new("critical.mu_lo", "required: lower end of the screening bracket"))?,
        mu_hi: block.mu_hi.ok_or_else(|| ConfigError::new("critical.mu_hi", "required: upper end of the screening bracket"))?,
        n_basis: problem.spec.n_basis(),
        lambda: problem.spec.lambda(),
        mode: problem.mode,
        tol: block.tol.unwrap_or(1e-4),
    };
    problem.model_at(search.mu_lo).map_err(|e| ConfigError::new("critical.mu_lo", e.reason))?;
    problem.model_at(search.mu_hi).map_err(|e| ConfigError::new("critical.mu_hi", e.reason))?;
    if !(search.mu_hi > search.mu_lo) {
        return Err(ConfigError::new("critical.mu_hi", "must exceed mu_lo"));
    }
    if !(search.tol > 0.0) {
        return Err(ConfigError::new("critical.tol", "must be positive"));
    }
    let mut table = Table::new("potential,ell,A,Z,state,principal,mu_c,tolerance,fit_mu_c,N,lambda,mode");
    let mut failures = Vec::new();
    match critical_screening_numeric(&search) {
        Ok(r) => {
            // The fitted column covers the Hulthen family only.
            let fit = (problem.name == "hulthen").then(|| critical_screening_fit(r.principal, r.ell).ok()).flatten();
            table.rows.push(vec![
                problem.name.clone(),
                r.ell.to_string(),
                num(problem.strength),
                num(problem.bare_charge),
                search.state_index.to_string(),
                r.principal.to_string(),
                sci(r.mu_c),
                num(r.tolerance),
                opt_sci(fit),
                search.n_basis.to_string(),
                num(search.lambda),
                problem.mode.as_str().to_string(),
            ]);
            table.json = json!({ "potential": problem.name, "A": problem.strength, "Z": problem.bare_charge, "state": search.state_index,
                "N": search.n_basis, "lambda": search.lambda, "mode": problem.mode, "result": r, "fit_mu_c": fit });
        }
        Err(e) => failures.push(format!("critical screening: {e}")),
    }
    Ok(Outcome { table, failures })
}

fn status(o: &RowOutcome) -> &'static str {
    match (o.row.advisory, o.pass) {
        (false, true) => "pass",
        (false, false) => "fail",
        (true, true) => "advisory-pass",
        (true, false) => "advisory-fail",
    }
}

pub fn reproduce(raw: &RawConfig, table_id: TableId) -> Result<Outcome, ConfigError> {
    let mode = raw.mode()?;
    let rows = golden_rows(table_id);
    let outcomes: Vec<RowOutcome> = rows.par_iter().map(|r| reproduce_row(r, mode)).collect();
    let mut table = Table::new(
        "table,potential,ell,state,mu,N,lambda,printed_re,printed_im,re_energy,im_energy,re_deviation,exact_deviation,im_ratio,status",
    );
    let mut failures = Vec::new();
    for o in &outcomes {
        let r = &o.row;
        let energy = o.computed.as_ref().map(|p| p.energy);
        table.rows.push(vec![
            r.table.as_str().to_string(),
            r.potential.to_string(),
            r.ell.to_string(),
            r.state.to_string(),
            num(r.mu),
            r.n_basis.to_string(),
            num(r.lambda),
            r.printed_re.to_string(),
            r.printed_im.unwrap_or("").to_string(),
            opt_sci(energy.map(|e| e.re)),
            opt_sci(energy.map(|e| e.im)),
            opt_sci(o.re_deviation),
            opt_sci(o.exact_deviation),
            opt_sci(o.im_ratio),
            status(o).to_string(),
        ]);
        if !o.pass && !r.advisory {
            let why = o.error.clone().unwrap_or_else(|| "outside tolerance".into());
            failures.push(format!("{} {} mu={} ({}): {why}", r.potential, r.state, r.mu, r.table.as_str()));
        }
    }
    table.json = json!({ "table": table_id.as_str(), "mode": mode, "rows": outcomes });
    Ok(Outcome { table, failures })
}

/// One-line summary per potential for the reproduce report.
pub fn reproduce_summary(table: &Table) -> Vec<String> {
    let mut groups: Vec<(String, usize, usize, usize)> = Vec::new();
    for row in &table.rows {
        let (pot, st) = (&row[1], row[14].as_str());
        let idx = match groups.iter().position(|g| &g.0 == pot) {
            Some(i) => i,
            None => {
                groups.push((pot.clone(), 0, 0, 0));
                groups.len() - 1
            }
        };
        let g = &mut groups[idx];
        g.1 += 1;
        if st.ends_with("pass") {
            g.2 += 1;
        }
        if st.starts_with("advisory") {
            g.3 += 1;
        }
    }
    groups
        .into_iter()
        .map(|(pot, total, pass, advisory)| {
            let note = if advisory > 0 { format!(" ({advisory} advisory)") } else { String::new() };
            format!("{pot}: {pass}/{total} rows within tolerance{note}")
        })
        .collect()
}

pub fn smatrix_scan(raw: &RawConfig) -> Result<Outcome, ConfigError> {
    let problem = raw.problem()?;
    if problem.mode != KinematicsMode::Table1Free {
        return Err(ConfigError::new("mode", "smatrix-scan needs table1-free mode"));
    }
    let block = raw.smatrix.clone().unwrap_or_default();
    let (lo, hi, points) = (block.e_min.unwrap_or(0.01), block.e_max.unwrap_or(2.0), block.points.unwrap_or(200));
    if !(lo > 0.0 && hi > lo) {
        return Err(ConfigError::new("smatrix.e_min", "need 0 < e_min < e_max"));
    }
    if points < 2 {
        return Err(ConfigError::new("smatrix.points", "need at least two points"));
    }
    let eng = engine(&problem)?;
    let grid: Vec<f64> = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
    let values: Vec<_> = grid.par_iter().map(|&e| smatrix(&eng, Complex64::new(e, 0.0))).collect();
    let mut table = Table::new("energy,abs_s,re_s,im_s");
    let mut failures = Vec::new();
    let mut points_json = Vec::with_capacity(points);
    for (&e, v) in grid.iter().zip(values) {
        match v {
            Ok(s) => {
                table.rows.push(vec![sci(e), sci(s.norm()), sci(s.re), sci(s.im)]);
                points_json.push(json!({ "energy": e, "abs_s": s.norm(), "re_s": s.re, "im_s": s.im }));
            }
            Err(err) => failures.push(format!("S({e:e}): {err}")),
        }
    }
    table.json = json!({ "potential": problem.name, "ell": problem.spec.ell(), "N": problem.spec.n_basis(),
        "lambda": problem.spec.lambda(), "points": points_json });
    Ok(Outcome { table, failures })
}
