//! Outer-region solutions of the reference three-term recursion
//! `D_n f_{n+1} = A_n f_n - B_n f_{n-1}` and the map `E -> (k, e^{i theta})`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::kernels::{hyp2f1_terminating, log_gamma_complex};
use crate::{Error, Result};

/// Branch of `k = sqrt(2E)`.
///
/// `Physical` takes `Im k >= 0`. `Second` takes the principal root, which
/// is the physical sheet continued downward through the positive real axis:
/// `Im k < 0` for `Im E < 0`, with its cut on the negative real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sheet {
    Physical,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicPoint {
    pub energy: C64,
    pub k: C64,
    pub exp_i_theta: C64,
    pub eta: C64,
    pub sheet: Sheet,
    /// Basis scale, complex `lambda e^{-i theta_rot}` under rotation.
    pub scale: C64,
    pub z_tilde: f64,
}

pub fn kinematic_point(energy: C64, spec: &BasisSpec, z_tilde: f64, sheet: Sheet) -> Result<KinematicPoint> {
    kinematic_point_scaled(energy, C64::new(spec.lambda(), 0.0), z_tilde, sheet)
}

pub fn kinematic_point_scaled(energy: C64, scale: C64, z_tilde: f64, sheet: Sheet) -> Result<KinematicPoint> {
    if !energy.re.is_finite() || !energy.im.is_finite() {
        return Err(Error::invalid("E", "energy must be finite"));
    }
    let mut k = (energy * 2.0).sqrt();
    if sheet == Sheet::Physical && k.im < 0.0 {
        k = -k;
    }
    let half = C64::new(0.0, 0.5) * scale;
    let (num, den) = (k + half, k - half);
    let tiny = 1e-13 * scale.norm();
    if den.norm() <= tiny || num.norm() <= tiny {
        return Err(Error::SingularKinematics(format!("E = {energy} sits at -lambda^2/8")));
    }
    let eta = if z_tilde == 0.0 {
        C64::new(0.0, 0.0)
    } else if k.norm() == 0.0 {
        return Err(Error::SingularKinematics("k = 0 with a Coulomb tail".into()));
    } else {
        z_tilde / k
    };
    Ok(KinematicPoint { energy, k, exp_i_theta: num / den, eta, sheet, scale, z_tilde })
}

impl KinematicPoint {
    pub fn cos_theta(&self) -> C64 {
        (self.exp_i_theta + 1.0 / self.exp_i_theta) * 0.5
    }

    pub fn sin_theta(&self) -> C64 {
        (self.exp_i_theta - 1.0 / self.exp_i_theta) / C64::new(0.0, 2.0)
    }

    /// `eta sin(theta)`, evaluated as `Z lambda / (2 (E + lambda^2/8))` so it stays
    /// finite as `k -> 0`.
    pub fn coulomb_term(&self) -> C64 {
        if self.z_tilde == 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.scale * self.z_tilde / ((self.energy + self.scale * self.scale / 8.0) * 2.0)
    }

    /// `J_{N-1,N} = (E + lambda^2/8) sqrt(N (N + 2l + 1))`.
    pub fn j_corner(&self, spec: &BasisSpec) -> C64 {
        let n = spec.n_basis() as f64;
        (self.energy + self.scale * self.scale / 8.0) * (n * (n + spec.nu())).sqrt()
    }
}

/// `(A_n, B_n, D_n)` of the row `D_n f_{n+1} = A_n f_n - B_n f_{n-1}`.
pub fn recursion_coeffs(n: usize, point: &KinematicPoint, ell: u32) -> (C64, f64, f64) {
    let (nf, l) = (n as f64, ell as f64);
    let a = (point.cos_theta() * (nf + l + 1.0) - point.coulomb_term()) * 2.0;
    let b = (nf * (nf + 2.0 * l + 1.0)).sqrt();
    let d = ((nf + 1.0) * (nf + 2.0 * l + 2.0)).sqrt();
    (a, b, d)
}

/// Which closed form of the first outgoing ratio to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum R1Form {
    /// Verbatim: argument `e^{-+i theta}`, prefactor `1/(l+2)`.
    Printed,
    /// Argument `e^{-+2i theta}` with the normalised-basis factor `sqrt(2l+2)`.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Initials {
    pub t0: C64,
    pub r1_plus: C64,
    pub r1_minus: C64,
}

fn f21(a: i64, b: f64, c: f64, z: C64) -> Result<C64> {
    hyp2f1_terminating(a, C64::new(b, 0.0), C64::new(c, 0.0), z)
}

/// Closed-form `T_0 = h_0^-/h_0^+` and `R_1^{+-} = h_1^{+-}/h_0^{+-}` of the free reference.
pub fn table1_initials(point: &KinematicPoint, ell: u32, form: R1Form) -> Result<Table1Initials> {
    if point.z_tilde != 0.0 {
        return Err(Error::ModeMismatch { required: "table1-free" });
    }
    let e = point.exp_i_theta;
    let (a, l) = (-(ell as i64), ell as f64);
    let e2 = e * e;
    let t0 = e2 * f21(a, 1.0, l + 2.0, e2)? / f21(a, 1.0, l + 2.0, 1.0 / e2)?;
    let r1 = |phase: C64| -> Result<C64> {
        let (arg, pref) = match form {
            R1Form::Printed => (phase, 1.0 / (l + 2.0)),
            R1Form::Normalized => (phase * phase, (2.0 * l + 2.0).sqrt() / (l + 2.0)),
        };
        Ok(phase * pref * f21(a, 2.0, l + 3.0, arg)? / f21(a, 1.0, l + 2.0, arg)?)
    };
    Ok(Table1Initials { t0, r1_plus: r1(1.0 / e)?, r1_minus: r1(e)? })
}

/// Ratios `R_1..R_{n_max}` by forward recursion from `R_1`.
pub fn forward_ratios(r1: C64, point: &KinematicPoint, ell: u32, n_max: usize) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(n_max);
    if n_max == 0 {
        return Ok(out);
    }
    out.push(r1);
    for n in 1..n_max {
        let prev = out[n - 1];
        if prev.norm() == 0.0 || !prev.re.is_finite() || !prev.im.is_finite() {
            return Err(Error::SingularKinematics(format!("reference solution vanishes at n = {n}")));
        }
        let (a, b, d) = recursion_coeffs(n, point, ell);
        out.push((a - b / prev) / d);
    }
    Ok(out)
}

/// Values `h_0..h_{n_max}` of both free families, `h_0^+ = 1`, `h_0^- = T_0`.
pub fn propagate_values(initials: &Table1Initials, point: &KinematicPoint, ell: u32, n_max: usize) -> Result<(Vec<C64>, Vec<C64>)> {
    let build = |h0: C64, r1: C64| -> Result<Vec<C64>> {
        let mut h = vec![h0, h0 * r1];
        for n in 1..n_max {
            let (a, b, d) = recursion_coeffs(n, point, ell);
            let next = (a * h[n] - h[n - 1] * b) / d;
            h.push(next);
        }
        h.truncate(n_max + 1);
        Ok(h)
    };
    Ok((build(C64::new(1.0, 0.0), initials.r1_plus)?, build(initials.t0, initials.r1_minus)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicChain {
    pub t_last: C64,
    pub r_plus: C64,
    pub r_minus: C64,
    pub j_corner: C64,
}

fn chain_from_ratios(t0: C64, plus: &[C64], minus: &[C64], point: &KinematicPoint, spec: &BasisSpec) -> Result<KinematicChain> {
    let n = spec.n_basis();
    let mut t = t0;
    for i in 0..n - 1 {
        if plus[i].norm() == 0.0 {
            return Err(Error::SingularKinematics(format!("h+ vanishes at n = {}", i + 1)));
        }
        t *= minus[i] / plus[i];
    }
    Ok(KinematicChain { t_last: t, r_plus: plus[n - 1], r_minus: minus[n - 1], j_corner: point.j_corner(spec) })
}

/// Forward recursion of both families from the closed-form initials.
pub fn propagate_chain(initials: &Table1Initials, point: &KinematicPoint, spec: &BasisSpec) -> Result<KinematicChain> {
    let n = spec.n_basis();
    let plus = forward_ratios(initials.r1_plus, point, spec.ell(), n)?;
    let minus = forward_ratios(initials.r1_minus, point, spec.ell(), n)?;
    chain_from_ratios(initials.t0, &plus, &minus, point, spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalSolution {
    /// `m_0..m_N` with `m_0 = 1`.
    pub values: Vec<C64>,
    /// `m_N / m_{N-1}`.
    pub tail_ratio: C64,
}

const CF_TOL: f64 = 1e-13;
const CF_MAX_EXTRA: usize = 1 << 22;

fn cf_pass(point: &KinematicPoint, ell: u32, n_needed: usize, depth: usize) -> Vec<C64> {
    let mut rho = C64::new(0.0, 0.0);
    let mut out = vec![C64::new(0.0, 0.0); n_needed];
    for n in (1..=depth).rev() {
        let (a, b, d) = recursion_coeffs(n, point, ell);
        rho = b / (a - rho * d);
        if n <= n_needed {
            out[n - 1] = rho;
        }
    }
    out
}

/// Ratios `rho_n = m_{n+1}/m_n`, `n = 0..n_needed-1`, of the minimal solution
/// by a backward continued fraction whose depth doubles until stable.
pub fn minimal_ratios(point: &KinematicPoint, ell: u32, n_needed: usize) -> Result<Vec<C64>> {
    if n_needed == 0 {
        return Err(Error::invalid("n_needed", "need at least one ratio"));
    }
    let growth = point.exp_i_theta.norm().ln().abs();
    if growth < 1e-12 {
        return Err(Error::invalid(
            "E",
            "|e^{i theta}| = 1 on the real positive axis: no minimal solution, use forward recursion",
        ));
    }
    let mut extra = ((16.2 / growth).ceil() as usize).clamp(16, CF_MAX_EXTRA);
    let mut prev = cf_pass(point, ell, n_needed, n_needed + extra);
    loop {
        extra = extra.saturating_mul(2);
        if extra > CF_MAX_EXTRA {
            return Err(Error::NoConvergence { what: "minimal-solution continued fraction", iterations: CF_MAX_EXTRA });
        }
        let next = cf_pass(point, ell, n_needed, n_needed + extra);
        let stable = [0, n_needed - 1].iter().all(|&i| {
            let scale = next[i].norm().max(1e-300);
            (next[i] - prev[i]).norm() <= CF_TOL * scale
        });
        if stable {
            return Ok(next);
        }
        prev = next;
    }
}

pub fn minimal_solution(point: &KinematicPoint, ell: u32, n_needed: usize) -> Result<MinimalSolution> {
    let rho = minimal_ratios(point, ell, n_needed)?;
    let mut values = vec![C64::new(1.0, 0.0)];
    for r in &rho {
        let last = *values.last().expect("non-empty");
        values.push(last * r);
    }
    Ok(MinimalSolution { values, tail_ratio: rho[n_needed - 1] })
}

/// Above this error growth the forward route hands over to the continued fraction.
const FORWARD_GROWTH_LIMIT: f64 = 1e3;

/// Ratios `R_1..R_n` of one reference family, choosing forward recursion or
/// the continued fraction by stability.
fn routed_ratios(point: &KinematicPoint, ell: u32, n: usize, r1: Option<C64>, minimal: bool) -> Result<Vec<C64>> {
    let log_growth = 2.0 * n as f64 * point.exp_i_theta.norm().ln().abs();
    match r1 {
        Some(r1) if !minimal || log_growth < FORWARD_GROWTH_LIMIT.ln() => forward_ratios(r1, point, ell, n),
        _ if minimal => minimal_ratios(point, ell, n),
        _ => Err(Error::ModeMismatch { required: "table1-free" }),
    }
}

/// `R_N^+`, the outgoing ratio that closes the finite problem.
pub fn outgoing_ratio(point: &KinematicPoint, spec: &BasisSpec) -> Result<C64> {
    let minimal = point.exp_i_theta.norm() > 1.0;
    let r1 = if point.z_tilde == 0.0 {
        Some(table1_initials(point, spec.ell(), R1Form::Normalized)?.r1_plus)
    } else {
        None
    };
    Ok(*routed_ratios(point, spec.ell(), spec.n_basis(), r1, minimal)?.last().expect("n_basis >= 1"))
}

/// Full free-reference chain with stability routing for each family.
pub fn reference_chain(point: &KinematicPoint, spec: &BasisSpec, form: R1Form) -> Result<KinematicChain> {
    let init = table1_initials(point, spec.ell(), form)?;
    let n = spec.n_basis();
    let mag = point.exp_i_theta.norm();
    let plus = routed_ratios(point, spec.ell(), n, Some(init.r1_plus), mag > 1.0)?;
    let minus = routed_ratios(point, spec.ell(), n, Some(init.r1_minus), mag < 1.0)?;
    chain_from_ratios(init.t0, &plus, &minus, point, spec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoulombS {
    Value(C64),
    /// A bound state of the pure Coulomb reference.
    Pole,
}

/// `Gamma(l+1+i eta) / Gamma(l+1-i eta)`.
pub fn coulomb_reference_smatrix(point: &KinematicPoint, ell: u32) -> Result<CoulombS> {
    if point.k.norm() == 0.0 {
        return Err(Error::SingularKinematics("k = 0".into()));
    }
    let i_eta = C64::new(0.0, 1.0) * point.eta;
    let l1 = ell as f64 + 1.0;
    let near_pole = |z: C64| z.re.round() <= 0.0 && (z - C64::new(z.re.round(), 0.0)).norm() < 1e-10;
    let (up, down) = (i_eta + l1, -i_eta + l1);
    if near_pole(up) {
        return Ok(CoulombS::Pole);
    }
    if near_pole(down) {
        return Ok(CoulombS::Value(C64::new(0.0, 0.0)));
    }
    Ok(CoulombS::Value((log_gamma_complex(up)? - log_gamma_complex(down)?).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn spec(ell: u32, lambda: f64, n: usize) -> BasisSpec {
        BasisSpec::new(ell, lambda, n).unwrap()
    }

    #[test]
    fn point_examples() {
        let s = spec(0, 1.0, 4);
        let p = kinematic_point(c(0.125, 0.0), &s, 0.0, Sheet::Physical).unwrap();
        assert!(p.cos_theta().norm() < 1e-15);
        assert!((p.exp_i_theta - c(0.0, 1.0)).norm() < 1e-15);
        let p = kinematic_point(c(-0.5, 0.0), &s, 0.0, Sheet::Physical).unwrap();
        assert!((p.k - c(0.0, 1.0)).norm() < 1e-15);
        assert!((p.exp_i_theta - c(3.0, 0.0)).norm() < 1e-14);
        assert!((p.cos_theta() - c(5.0 / 3.0, 0.0)).norm() < 1e-14);
        let p = kinematic_point(c(-0.5, 0.0), &s, -1.0, Sheet::Physical).unwrap();
        assert!((p.eta - c(0.0, 1.0)).norm() < 1e-15);
        assert!((p.eta * p.sin_theta() - c(4.0 / 3.0, 0.0)).norm() < 1e-14);
        assert!((p.coulomb_term() - c(4.0 / 3.0, 0.0)).norm() < 1e-14);
        let (a0, b0, _) = recursion_coeffs(0, &p, 0);
        assert!((a0 - c(2.0 / 3.0, 0.0)).norm() < 1e-14);
        assert_eq!(b0, 0.0);
    }

    #[test]
    fn singular_point_rejected() {
        let s = spec(0, 2.0, 4);
        assert!(kinematic_point(c(-0.5, 0.0), &s, 0.0, Sheet::Physical).is_err());
        assert!(kinematic_point(c(-0.5, 0.0), &s, 0.0, Sheet::Second).is_err());
    }

    #[test]
    fn cos_theta_closed_form_both_sheets() {
        let s = spec(1, 0.7, 4);
        for (i, sheet) in [Sheet::Physical, Sheet::Second].into_iter().enumerate() {
            for j in 0..10 {
                let e = c(-1.0 + 0.23 * j as f64, 0.3 * (j as f64 - 4.5) + i as f64 * 0.01);
                let p = kinematic_point(e, &s, 0.0, sheet).unwrap();
                let lam2 = 0.49;
                let want = (e * 8.0 - lam2) / (e * 8.0 + lam2);
                assert!((p.cos_theta() - want).norm() < 1e-12 * want.norm().max(1.0));
            }
        }
    }

    #[test]
    fn sheets_differ_in_lower_half_plane() {
        let s = spec(0, 1.0, 4);
        let e = c(0.3, -0.1);
        let phys = kinematic_point(e, &s, 0.0, Sheet::Physical).unwrap();
        let second = kinematic_point(e, &s, 0.0, Sheet::Second).unwrap();
        assert!(phys.k.im > 0.0 && second.k.im < 0.0);
        assert!(phys.exp_i_theta.norm() > 1.0 && second.exp_i_theta.norm() < 1.0);
    }

    #[test]
    fn coulomb_identity() {
        let s = spec(2, 0.9, 4);
        for j in 0..8 {
            let e = c(0.4 * j as f64 - 1.3, 0.17 * j as f64 - 0.5);
            let p = kinematic_point(e, &s, -1.3, Sheet::Physical).unwrap();
            let lhs = p.eta * p.sin_theta() * 2.0;
            let rhs = -1.3 * 0.9 / (e + 0.81 / 8.0);
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        }
    }

    #[test]
    fn table1_printed_s_wave() {
        let s = spec(0, 1.0, 4);
        let p = kinematic_point(c(0.31, 0.07), &s, 0.0, Sheet::Physical).unwrap();
        let init = table1_initials(&p, 0, R1Form::Printed).unwrap();
        let e = p.exp_i_theta;
        assert!((init.t0 - e * e).norm() < 1e-14);
        assert!((init.r1_plus - 0.5 / e).norm() < 1e-14);
        assert!((init.r1_minus - e * 0.5).norm() < 1e-14);
        let p = kinematic_point(c(0.125, 0.0), &s, 0.0, Sheet::Physical).unwrap();
        let init = table1_initials(&p, 0, R1Form::Printed).unwrap();
        assert!((init.t0 + 1.0).norm() < 1e-14);
        assert!((init.r1_plus - c(0.0, -0.5)).norm() < 1e-14);
        assert!((init.r1_minus - c(0.0, 0.5)).norm() < 1e-14);
        let norm = table1_initials(&p, 0, R1Form::Normalized).unwrap();
        assert!((norm.r1_plus - c(0.0, -std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-14);
    }

    #[test]
    fn table1_p_wave_t0() {
        let s = spec(1, 1.0, 4);
        let p = kinematic_point(c(0.2, 0.03), &s, 0.0, Sheet::Physical).unwrap();
        let e2 = p.exp_i_theta * p.exp_i_theta;
        let want = e2 * (1.0 - e2 / 3.0) / (1.0 - 1.0 / e2 / 3.0);
        let init = table1_initials(&p, 1, R1Form::Printed).unwrap();
        assert!((init.t0 - want).norm() < 1e-14);
    }

    #[test]
    fn table1_needs_free_point() {
        let s = spec(0, 1.0, 4);
        let p = kinematic_point(c(0.2, 0.0), &s, -1.0, Sheet::Physical).unwrap();
        assert!(matches!(table1_initials(&p, 0, R1Form::Normalized), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn normalized_initials_solve_row_zero() {
        // The regular combination h+ - h- must satisfy the n = 0 row.
        for ell in 0..5u32 {
            let s = spec(ell, 0.8, 6);
            for e in [c(0.4, 0.0), c(-0.3, 0.0), c(0.2, -0.05), c(1.7, 0.4)] {
                let p = kinematic_point(e, &s, 0.0, Sheet::Physical).unwrap();
                let init = table1_initials(&p, ell, R1Form::Normalized).unwrap();
                let s0 = C64::new(1.0, 0.0) - init.t0;
                let s1 = init.r1_plus - init.t0 * init.r1_minus;
                let (a0, _, d0) = recursion_coeffs(0, &p, ell);
                assert!((s1 * d0 - a0 * s0).norm() < 1e-12 * s0.norm().max(1.0), "ell={ell} E={e}");
            }
        }
    }

    #[test]
    fn free_s_wave_sine_closed_form() {
        let s = spec(0, 1.0, 20);
        for e in [0.05, 0.3, 1.1] {
            let p = kinematic_point(c(e, 0.0), &s, 0.0, Sheet::Physical).unwrap();
            let init = table1_initials(&p, 0, R1Form::Normalized).unwrap();
            let (hp, hm) = propagate_values(&init, &p, 0, 20).unwrap();
            let theta = p.exp_i_theta.arg();
            let s_hat: Vec<C64> = hp.iter().zip(&hm).map(|(a, b)| a - b).collect();
            for n in 0..=20 {
                let want = ((n + 1) as f64 * theta).sin() / (((n + 1) as f64).sqrt() * theta.sin());
                let got = s_hat[n] / s_hat[0];
                assert!((got - want).norm() < 1e-12 * want.abs().max(1.0), "E={e} n={n}");
            }
        }
    }

    fn gegenbauer(n: usize, alpha: f64, x: C64) -> C64 {
        let (mut prev, mut cur) = (c(1.0, 0.0), x * 2.0 * alpha);
        if n == 0 {
            return prev;
        }
        for k in 2..=n {
            let kf = k as f64;
            let next = (x * 2.0 * (kf + alpha - 1.0) * cur - prev * (kf + 2.0 * alpha - 2.0)) / kf;
            prev = cur;
            cur = next;
        }
        cur
    }

    fn ln_factorial_ratio(n: usize, ell: u32) -> f64 {
        // ln sqrt(n! Gamma(2l+2) / Gamma(n+2l+2))
        let lg = |x: f64| log_gamma_complex(c(x, 0.0)).unwrap().re;
        0.5 * (lg(n as f64 + 1.0) + lg(2.0 * ell as f64 + 2.0) - lg(n as f64 + 2.0 * ell as f64 + 2.0))
    }

    #[test]
    fn free_sine_is_normalized_gegenbauer() {
        for ell in 0..4u32 {
            let s = spec(ell, 1.3, 15);
            for e in [0.07, 0.5, 2.3] {
                let p = kinematic_point(c(e, 0.0), &s, 0.0, Sheet::Physical).unwrap();
                let init = table1_initials(&p, ell, R1Form::Normalized).unwrap();
                let (hp, hm) = propagate_values(&init, &p, ell, 15).unwrap();
                let x = p.cos_theta();
                let s_hat: Vec<C64> = hp.iter().zip(&hm).map(|(a, b)| a - b).collect();
                let scale = s_hat[0];
                for (n, &v) in s_hat.iter().enumerate() {
                    let want = gegenbauer(n, ell as f64 + 1.0, x) * ln_factorial_ratio(n, ell).exp();
                    assert!((v / scale - want).norm() < 1e-11 * want.norm().max(1.0), "ell={ell} n={n}");
                }
            }
        }
    }

    fn closed_outgoing(n: usize, ell: u32, e: C64) -> C64 {
        // sqrt(n! Gamma(n+2l+2)) / Gamma(n+l+2) e^{-i(n+1)theta} 2F1(-l, n+1; n+l+2; e^{-2i theta})
        let lg = |x: f64| log_gamma_complex(c(x, 0.0)).unwrap().re;
        let (nf, l) = (n as f64, ell as f64);
        let pref = (0.5 * (lg(nf + 1.0) + lg(nf + 2.0 * l + 2.0)) - lg(nf + l + 2.0)).exp();
        let f = hyp2f1_terminating(-(ell as i64), c(nf + 1.0, 0.0), c(nf + l + 2.0, 0.0), 1.0 / (e * e)).unwrap();
        e.powi(-(n as i32 + 1)) * pref * f
    }

    #[test]
    fn outgoing_ratio_matches_closed_form() {
        for ell in [0u32, 2, 4] {
            for (energy, sheet) in [(c(-0.3, 0.0), Sheet::Physical), (c(0.5, 0.0), Sheet::Physical), (c(0.2, -0.04), Sheet::Second), (c(0.2, 0.1), Sheet::Physical)] {
                for n in [1usize, 10, 50] {
                    let s = spec(ell, 0.9, n);
                    let p = kinematic_point(energy, &s, 0.0, sheet).unwrap();
                    let got = outgoing_ratio(&p, &s).unwrap();
                    let want = closed_outgoing(n, ell, p.exp_i_theta) / closed_outgoing(n - 1, ell, p.exp_i_theta);
                    assert!((got - want).norm() < 1e-10 * want.norm(), "ell={ell} E={energy} n={n}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn minimal_ratio_asymptote() {
        let s = spec(0, 1.0, 400);
        let p = kinematic_point(c(-0.5, 0.0), &s, 0.0, Sheet::Physical).unwrap();
        let rho = minimal_ratios(&p, 0, 400).unwrap();
        assert!((rho[399] - c(1.0 / 3.0, 0.0)).norm() < 1e-3);
        let sol = minimal_solution(&p, 0, 30).unwrap();
        for n in 1..30 {
            let (a, b, d) = recursion_coeffs(n, &p, 0);
            let r = sol.values[n + 1] * d - a * sol.values[n] + sol.values[n - 1] * b;
            assert!(r.norm() < 1e-12, "row {n}");
        }
        assert!(sol.tail_ratio.norm() <= 1.0);
    }

    #[test]
    fn minimal_solution_rejects_real_axis() {
        let s = spec(0, 1.0, 10);
        let p = kinematic_point(c(0.3, 0.0), &s, 0.0, Sheet::Physical).unwrap();
        assert!(minimal_solution(&p, 0, 10).is_err());
    }

    #[test]
    fn hydrogen_regular_solution_is_minimal() {
        let s = spec(0, 1.0, 5);
        let p = kinematic_point(c(-0.5, 0.0), &s, -1.0, Sheet::Physical).unwrap();
        let m = minimal_solution(&p, 0, 6).unwrap();
        let (a0, _, d0) = recursion_coeffs(0, &p, 0);
        let mut sreg = vec![c(1.0, 0.0), a0 / d0];
        for n in 1..6 {
            let (a, b, d) = recursion_coeffs(n, &p, 0);
            sreg.push((a * sreg[n] - sreg[n - 1] * b) / d);
        }
        for n in 0..6 {
            let det = m.values[n] * sreg[n + 1] - m.values[n + 1] * sreg[n];
            assert!(det.norm() < 1e-8, "n={n} det={det}");
        }
    }

    #[test]
    fn chain_unitarity_on_real_axis() {
        let s = spec(1, 0.6, 40);
        for e in [0.01, 0.4, 2.0] {
            let p = kinematic_point(c(e, 0.0), &s, 0.0, Sheet::Physical).unwrap();
            let chain = reference_chain(&p, &s, R1Form::Normalized).unwrap();
            assert!((chain.t_last.norm() - 1.0).abs() < 1e-10);
        }
        let s1 = spec(0, 1.0, 1);
        let p = kinematic_point(c(0.125, 0.0), &s1, 0.0, Sheet::Physical).unwrap();
        let chain = propagate_chain(&table1_initials(&p, 0, R1Form::Normalized).unwrap(), &p, &s1).unwrap();
        assert!((chain.j_corner - c(0.25 * 2f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn coulomb_smatrix_cases() {
        let s = spec(0, 1.0, 4);
        let p = kinematic_point(c(0.7, 0.0), &s, 0.0, Sheet::Physical).unwrap();
        assert_eq!(coulomb_reference_smatrix(&p, 0).unwrap(), CoulombS::Value(c(1.0, 0.0)));
        let p = kinematic_point(c(0.7, 0.0), &s, -1.0, Sheet::Physical).unwrap();
        match coulomb_reference_smatrix(&p, 2).unwrap() {
            CoulombS::Value(v) => assert!((v.norm() - 1.0).abs() < 1e-12),
            CoulombS::Pole => panic!("unexpected pole"),
        }
        let p = kinematic_point(c(-0.5, 0.0), &s, -1.0, Sheet::Physical).unwrap();
        assert_eq!(coulomb_reference_smatrix(&p, 0).unwrap(), CoulombS::Pole);
    }
}
