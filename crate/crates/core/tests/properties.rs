use jmatrix::basis::{build_overlap, quadrature_rule, BasisSpec};
use jmatrix::hamiltonian::{green_corner_deflated, green_corner_direct, green_corner_product, harris_spectrum, u_matrix_from_fn, OperatorSet};
use jmatrix::kernels::{generalized_symmetric_eigen, hyp2f1_terminating, log_gamma_complex, sym_tridiag_eigen, TridiagonalSymmetric};
use jmatrix::potentials::{Envelope, PotentialModel};
use jmatrix::spectra::{smatrix, smatrix_on_sheet, KinematicsMode, SpectralEngine};
use jmatrix::kinematics::Sheet;
use jmatrix::Complex64 as C64;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn spec() -> impl Strategy<Value = BasisSpec> {
    (0u32..5, 0.1f64..3.0, 2usize..30).prop_map(|(l, lam, n)| BasisSpec::new(l, lam, n).unwrap())
}

fn det(m: DMatrix<f64>) -> f64 {
    m.lu().determinant()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_potential_reproduces_overlap(s in spec(), c in -3.0f64..3.0) {
        let u = u_matrix_from_fn(&s, |_| c).unwrap();
        let omega = build_overlap(&s).to_dense() * c;
        prop_assert!((u - omega).amax() <= 1e-12 * c.abs().max(1.0) * (s.n_basis() as f64));
    }

    #[test]
    fn coulomb_potential_is_diagonal(s in spec(), c in -3.0f64..3.0) {
        let u = u_matrix_from_fn(&s, |r| c / r).unwrap();
        let want = DMatrix::<f64>::identity(s.n_basis(), s.n_basis()) * (c * s.lambda());
        prop_assert!((u - want).amax() <= 1e-12 * c.abs().max(1.0) * s.lambda().max(1.0) * 4.0);
    }

    #[test]
    fn overlap_cofactor_ratio(l in 0u32..5, n in 1usize..30) {
        let s = BasisSpec::new(l, 1.0, n).unwrap();
        let full = build_overlap(&s);
        let lead = if n > 1 { det(full.leading(n - 1).unwrap().to_dense()) } else { 1.0 };
        let ratio = lead / det(full.to_dense());
        prop_assert!((ratio - 1.0 / (n as f64 + s.nu())).abs() < 1e-12, "{ratio}");
    }

    #[test]
    fn offdiagonal_signs_do_not_move_eigenvalues(d in prop::collection::vec(-5.0f64..5.0, 2..20), seed in any::<u64>()) {
        let n = d.len();
        let e: Vec<f64> = (0..n - 1).map(|i| ((i as f64 + 1.0) * 0.37).sin()).collect();
        let flipped: Vec<f64> = e.iter().enumerate().map(|(i, v)| if (seed >> (i % 64)) & 1 == 1 { -v } else { *v }).collect();
        let a = sym_tridiag_eigen(&TridiagonalSymmetric::new(d.clone(), e).unwrap()).unwrap();
        let b = sym_tridiag_eigen(&TridiagonalSymmetric::new(d, flipped).unwrap()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-11 * x.abs().max(1.0));
        }
    }

    #[test]
    fn tridiagonal_residuals(d in prop::collection::vec(-5.0f64..5.0, 1..25)) {
        let n = d.len();
        let e: Vec<f64> = (0..n.saturating_sub(1)).map(|i| 1.0 + (i as f64).cos()).collect();
        let m = TridiagonalSymmetric::new(d, e).unwrap();
        let eig = sym_tridiag_eigen(&m).unwrap();
        let dense = m.to_dense();
        for k in 0..n {
            let v = eig.vectors.column(k);
            let r = &dense * v - v * eig.values[k];
            prop_assert!(r.norm() < 1e-11 * dense.norm().max(1.0));
        }
    }

    #[test]
    fn log_gamma_recurrence(re in -8.0f64..8.0, im in -8.0f64..8.0) {
        let z = C64::new(re, im);
        prop_assume!((z - z.re.round()).norm() > 1e-3 || z.re > 0.5);
        let lhs = log_gamma_complex(z + 1.0).unwrap();
        let rhs = log_gamma_complex(z).unwrap() + z.ln();
        let diff = lhs - rhs;
        let turns = diff.im / (2.0 * std::f64::consts::PI);
        prop_assert!(diff.re.abs() < 1e-10 * lhs.norm().max(1.0));
        prop_assert!((turns - turns.round()).abs() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn hyp2f1_closed_forms(x in -0.9f64..0.9, m in 0i64..8) {
        // 2F1(-m, b; b; z) = (1 - z)^m
        let z = C64::new(x, 0.3 * x);
        let b = C64::new(1.7, 0.0);
        let got = hyp2f1_terminating(-m, b, b, z).unwrap();
        let want = (C64::new(1.0, 0.0) - z).powi(m as i32);
        prop_assert!((got - want).norm() < 1e-12 * want.norm().max(1.0));
    }

    #[test]
    fn generalized_eigen_residuals(s in spec(), mu in 0.05f64..1.0) {
        let model = PotentialModel::new(Envelope::Yukawa, 1.0, mu).unwrap();
        let ops = OperatorSet::assemble(&s, &model).unwrap();
        let h = ops.h_real();
        let o = ops.omega().to_dense();
        let eig = generalized_symmetric_eigen(&h, &o).unwrap();
        for k in 0..s.n_basis() {
            let v = eig.vectors.column(k);
            let r = &h * v - (&o * v) * eig.values[k];
            prop_assert!(r.norm() < 1e-9 * h.norm().max(1.0), "{}", r.norm());
        }
        let gram = eig.vectors.transpose() * &o * &eig.vectors;
        prop_assert!((gram - DMatrix::<f64>::identity(s.n_basis(), s.n_basis())).amax() < 1e-9);
    }

    #[test]
    fn harris_levels_interlace(s in spec(), mu in 0.05f64..1.0) {
        let model = PotentialModel::new(Envelope::Hulthen, 1.0, mu).unwrap();
        let h = harris_spectrum(&OperatorSet::assemble(&s, &model).unwrap()).unwrap();
        for (m, t) in h.eps_trunc.iter().enumerate() {
            let slack = 1e-10 * t.abs().max(1.0);
            prop_assert!(h.eps[m] <= t + slack && *t <= h.eps[m + 1] + slack);
        }
    }

    #[test]
    fn corner_product_matches_solve(s in spec(), mu in 0.05f64..1.0, re in -1.0f64..1.0, im in 0.05f64..1.0) {
        let model = PotentialModel::new(Envelope::Yukawa, 1.0, mu).unwrap();
        let ops = OperatorSet::assemble(&s, &model).unwrap();
        let h = harris_spectrum(&ops).unwrap();
        let z = C64::new(re, im);
        let a = green_corner_product(&s, &h, z).unwrap();
        let b = green_corner_direct(&ops, z).unwrap();
        prop_assert!((a - b).norm() < 1e-10 * b.norm().max(1e-3), "{a} {b}");
        let j = s.n_basis() / 2;
        let c = green_corner_deflated(&s, &h, z, j).unwrap();
        prop_assert!((c - a * (h.eps[j] - z)).norm() < 1e-10 * c.norm().max(1e-3));
    }

    #[test]
    fn operators_are_symmetric(s in spec(), mu in 0.05f64..1.0, theta in 0.0f64..1.2) {
        let model = PotentialModel::new(Envelope::Yukawa, 1.0, mu).unwrap();
        let ops = OperatorSet::assemble_rotated(&s, &model, theta).unwrap();
        let h = ops.h();
        prop_assert!((h - h.transpose()).iter().all(|z| z.norm() < 1e-13 * h.norm().max(1.0)));
    }

    #[test]
    fn smatrix_schwarz_reflection(mu in 0.1f64..1.0, re in 0.05f64..1.5, im in 0.01f64..0.3) {
        let s = BasisSpec::new(1, 0.8, 20).unwrap();
        let model = PotentialModel::new(Envelope::Yukawa, 1.0, mu).unwrap();
        let eng = SpectralEngine::new(&s, &model, KinematicsMode::Table1Free).unwrap();
        let e = C64::new(re, im);
        // Same sheet: k goes to -conj(k), so S reflects to its conjugate.
        let up = smatrix(&eng, e).unwrap();
        let down = smatrix(&eng, e.conj()).unwrap();
        prop_assert!((down - up.conj()).norm() < 1e-8 * up.norm().max(1.0), "{up} {down}");
        // Across the cut k goes to conj(k), and unitarity continues to S(conj E) conj(S(E)) = 1.
        let other = smatrix_on_sheet(&eng, e.conj(), Sheet::Second).unwrap();
        prop_assert!((other * up.conj() - 1.0).norm() < 1e-8 * (other.norm() * up.norm()).max(1.0), "{up} {other}");
    }
}

#[test]
fn quadrature_nodes_are_positive() {
    let s = BasisSpec::new(2, 0.5, 40).unwrap();
    let q = quadrature_rule(&s).unwrap();
    assert!(q.nodes().iter().all(|&x| x > 0.0));
    assert!(q.nodes().windows(2).all(|w| w[0] < w[1]));
}
