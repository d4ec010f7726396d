mod common;

use homcone::linalg;
use homcone::power::psi_formula;
use homcone::validation::{default_step, fd_gradient, fd_jacobian, run_all};
use homcone::wishart;
use homcone::{preset, random, SymElement};

#[test]
fn all_fixtures_pass() {
    for rep in run_all() {
        assert!(rep.passed, "{rep}");
        assert!(rep.max_deviation <= rep.tolerance);
    }
}

#[test]
fn fd_error_is_second_order() {
    let s = preset("sym(3)").unwrap();
    let x = SymElement::from_rows(&[vec![2.0, 0.3, 0.1], vec![0.3, 1.5, -0.2], vec![0.1, -0.2, 1.0]]).unwrap();
    let exact = linalg::spd_inverse(x.matrix()).unwrap();
    let f = |y: &SymElement| Ok(linalg::det(y.matrix()).ln());
    let err = |h: f64| linalg::max_abs(&(fd_gradient(&s, f, &x, h).unwrap().into_matrix() - &exact));
    let ratio = err(1e-2) / err(5e-3);
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn jacobian_of_inverse_mean_is_negated_inverse_variance() {
    for name in ["vinberg", "sym(3)", "dual_vinberg"] {
        let s = preset(name).unwrap();
        let mut rng = common::rng(9);
        for _ in 0..5 {
            let shape = random::shape_q(&s, &mut rng);
            let m = random::point_q(&s, &mut rng);
            let jac = fd_jacobian(&s, |y| psi_formula(&s, &shape, y), &m, default_step(&m)).unwrap();
            let from_fd = jac.inverse().unwrap().scaled(-1.0);
            let v = wishart::variance_q(&s, &shape, &m).unwrap();
            assert!(from_fd.rel_diff(&v) < 1e-4, "{name}: {}", from_fd.rel_diff(&v));
        }
    }
}
