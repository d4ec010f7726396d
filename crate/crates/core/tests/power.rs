mod common;

use homcone::dual::phi_big;
use homcone::linalg::{self, max_abs};
use homcone::power::{self, big_delta, log_big_delta, log_small_delta, phi, phi_check, small_delta};
use homcone::triangular::{log_chi, rho, rho_star};
use homcone::{random, ShapeVector, SymElement};
use proptest::prelude::*;
use rand::Rng;

fn random_shape(r: usize, rng: &mut impl Rng) -> ShapeVector {
    ShapeVector::new((0..r).map(|_| rng.random_range(-2.0..2.0)).collect())
}

fn close_log(a: f64, b: f64, tol: f64) -> bool {
    (a - b).exp_m1().abs() <= tol
}

#[test]
fn power_functions_are_one_at_identity() {
    for (name, s) in common::structures() {
        let i = SymElement::identity(s.total_size());
        let shape = ShapeVector::new((0..s.rank()).map(|k| 0.3 + k as f64).collect());
        assert!((big_delta(&s, &shape, &i).unwrap() - 1.0).abs() < 1e-13, "{name}");
        assert!((small_delta(&s, &shape, &i).unwrap() - 1.0).abs() < 1e-13, "{name}");
    }
}

#[test]
fn vinberg_phi_big_display() {
    let v = homcone::preset("vinberg").unwrap();
    let xi = SymElement::from_rows(&[vec![1.0, 0.0, 4.0], vec![0.0, 2.0, 5.0], vec![4.0, 5.0, 3.0]]).unwrap();
    let p = phi_big(&v, &xi).unwrap();
    let expect = nalgebra::DMatrix::from_row_slice(
        5,
        5,
        &[
            1.0, 4.0, 0.0, 0.0, 0.0, //
            4.0, 3.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 2.0, 5.0, 0.0, //
            0.0, 0.0, 5.0, 3.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, 3.0,
        ],
    );
    assert_eq!(p, expect);
    let at_identity = phi_big(&v, &SymElement::identity(3)).unwrap();
    assert_eq!(at_identity, nalgebra::DMatrix::identity(5, 5));
}

proptest! {
    #![proptest_config(common::config(100))]

    #[test]
    fn big_delta_is_relatively_invariant((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let shape = random_shape(s.rank(), &mut rng);
        let t = random::triangular(s, &mut rng);
        let x = random::point_p(s, &mut rng);
        let lhs = log_big_delta(s, &shape, &rho(&t, &x)).unwrap();
        let rhs = log_chi(s, &shape, &t).unwrap() + log_big_delta(s, &shape, &x).unwrap();
        prop_assert!(close_log(lhs, rhs, 1e-11));
    }

    #[test]
    fn small_delta_is_relatively_invariant((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let shape = random_shape(s.rank(), &mut rng);
        let t = random::triangular(s, &mut rng);
        let xi = random::point_q(s, &mut rng);
        let lhs = log_small_delta(s, &shape, &rho_star(s, &t, &xi)).unwrap();
        let rhs = log_chi(s, &shape, &t).unwrap() + log_small_delta(s, &shape, &xi).unwrap();
        prop_assert!(close_log(lhs, rhs, 1e-11));
    }

    #[test]
    fn big_delta_through_inverse((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let shape = random_shape(s.rank(), &mut rng);
        let x = random::point_p(s, &mut rng);
        let inv = SymElement::from_matrix(linalg::spd_inverse(x.matrix()).unwrap()).unwrap();
        let lhs = log_big_delta(s, &shape, &x).unwrap();
        let rhs = log_small_delta(s, &shape.negated(), &s.project(&inv).unwrap()).unwrap();
        prop_assert!(close_log(lhs, rhs, 1e-11));
    }

    #[test]
    fn phi_determinants_transform_by_characters((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let t = random::triangular(s, &mut rng);
        let i_n = SymElement::identity(s.total_size());
        let xi = rho_star(s, &t, &i_n);
        let r = s.rank();
        for i in 0..r.saturating_sub(1) {
            let mut m = vec![0.0; r];
            m[i] = 1.0;
            for l in i + 1..r {
                m[l] = s.block_dim(l, i) as f64;
            }
            let m_check = ShapeVector::new(m.iter().enumerate().map(|(k, &v)| if k == i { 0.0 } else { v }).collect());
            let m = ShapeVector::new(m);
            let lhs = linalg::det(&phi(s, i, &xi).unwrap()).ln();
            let rhs = log_chi(s, &m, &t).unwrap() + linalg::det(&phi(s, i, &i_n).unwrap()).ln();
            prop_assert!(close_log(lhs, rhs, 1e-11));
            let lhs = linalg::det(&phi_check(s, i, &xi).unwrap()).ln();
            let rhs = log_chi(s, &m_check, &t).unwrap() + linalg::det(&phi_check(s, i, &i_n).unwrap()).ln();
            prop_assert!(close_log(lhs, rhs, 1e-11));
        }
    }

    #[test]
    fn phi_trace_identity((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let a = random::point_z(s, &mut rng);
        let b = random::point_z(s, &mut rng);
        let i_n = SymElement::identity(s.total_size());
        let quad = |p: nalgebra::DMatrix<f64>, q: nalgebra::DMatrix<f64>, base: &nalgebra::DMatrix<f64>| {
            if base.nrows() == 0 {
                return 0.0;
            }
            let inv = linalg::spd_inverse(base).unwrap();
            (p * &inv * q * &inv).trace()
        };
        for i in 0..s.rank().saturating_sub(1) {
            let full = quad(phi(s, i, &a).unwrap(), phi(s, i, &b).unwrap(), &phi(s, i, &i_n).unwrap());
            let check = quad(
                phi_check(s, i, &a).unwrap(),
                phi_check(s, i, &b).unwrap(),
                &phi_check(s, i, &i_n).unwrap(),
            );
            let o = s.offset(i);
            let mut rhs = a.matrix()[(o, o)] * b.matrix()[(o, o)];
            for l in i + 1..s.rank() {
                let w = s.sizes()[l] as f64 / s.sizes()[i] as f64;
                rhs += 2.0 * w * s.block_inner(l, &s.block_of(a.matrix(), l, i), &s.block_of(b.matrix(), l, i));
            }
            prop_assert!((full - check - rhs).abs() < 1e-11 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn phi_big_is_positive_exactly_on_dual_cone((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let xi = random::point_q(s, &mut rng);
        prop_assert!(linalg::min_eigenvalue(&phi_big(s, &xi).unwrap()) > 0.0);
        let z = random::point_z(s, &mut rng);
        let pd = linalg::min_eigenvalue(&phi_big(s, &z).unwrap()) > 1e-12;
        prop_assert_eq!(pd, power::in_dual_cone(s, &z));
        let pairing_positive = (0..20).all(|_| random::point_p(s, &mut rng).trace_inner(&z) > 0.0);
        if pd {
            prop_assert!(pairing_positive);
        }
    }

    #[test]
    fn gradient_routes_agree((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let shape = random_shape(s.rank(), &mut rng);
        let xi = random::point_q(s, &mut rng);
        let g = power::grad_log_small_delta(s, &shape.negated(), &xi).unwrap();
        let formula = power::psi_formula(s, &shape, &xi).unwrap();
        prop_assert!(max_abs(&(g.matrix() + formula.matrix())) < 1e-9 * (1.0 + max_abs(formula.matrix())));
    }
}
