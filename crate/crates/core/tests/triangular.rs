mod common;

use homcone::linalg::{self, max_abs};
use homcone::random;
use homcone::triangular::{cholesky_p, decompose_q, hat, rho, rho_star};
use homcone::SymElement;
use proptest::prelude::*;

proptest! {
    #![proptest_config(common::config(64))]

    #[test]
    fn cholesky_is_simply_transitive((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let x = random::point_p(s, &mut rng);
        let t = cholesky_p(s, &x).unwrap();
        let back = rho(&t, &SymElement::identity(s.total_size()));
        prop_assert!(max_abs(&(back.matrix() - x.matrix())) < 1e-10 * (1.0 + max_abs(x.matrix())));
    }

    #[test]
    fn hat_is_consistent_with_projection((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let xi = random::point_q(s, &mut rng);
        let h = hat(s, &xi).unwrap();
        let proj = s.project(&h).unwrap();
        prop_assert!(max_abs(&(proj.matrix() - xi.matrix())) < 1e-9 * (1.0 + max_abs(xi.matrix())));
        let hinv = SymElement::from_matrix(linalg::symmetrize(&linalg::spd_inverse(h.matrix()).unwrap())).unwrap();
        prop_assert!(s.membership_residual(&hinv).unwrap() < 1e-9 * (1.0 + max_abs(hinv.matrix())));
    }

    #[test]
    fn dual_decomposition_recovers_point((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let xi = random::point_q(s, &mut rng);
        let t = decompose_q(s, &xi).unwrap();
        let back = rho_star(s, &t, &SymElement::identity(s.total_size()));
        prop_assert!(max_abs(&(back.matrix() - xi.matrix())) < 1e-9 * (1.0 + max_abs(xi.matrix())));
    }

    #[test]
    fn leading_block_identity((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let t = random::triangular(s, &mut rng);
        let tm = t.matrix();
        let y = tm.transpose() * tm;
        let n = s.total_size();
        for k in 0..s.rank() {
            let nk = s.cumulative_size(k);
            let mut jk = nalgebra::DMatrix::zeros(n, n);
            for i in nk..n {
                jk[(i, i)] = 1.0;
            }
            let lhs = tm.transpose() * jk * tm;
            let inv = linalg::spd_inverse(&y).unwrap();
            let lead = linalg::spd_inverse(&linalg::leading(&inv, nk)).unwrap();
            let rhs = &y - linalg::zero_pad(&lead, n);
            prop_assert!(max_abs(&(lhs - rhs)) < 1e-10 * (1.0 + max_abs(&y)));
        }
    }
}
