//! Finite-difference oracles and the counterexample fixtures.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::element::SymElement;
use crate::error::{ConeError, Result};
use crate::linalg;
use crate::operator::ZOperator;
use crate::power::ShapeVector;
use crate::structure::{preset, BlockStructure};
use crate::wishart;

/// Absolute tolerance for the integer-valued fixture targets.
pub const FIXTURE_TOL: f64 = 1e-12;

/// Default central-difference step at `x`: `1e-5·(1 + max |x_ij|)`.
pub fn default_step(x: &SymElement) -> f64 {
    1e-5 * (1.0 + linalg::max_abs(x.matrix()))
}

/// Central-difference gradient of `f` along the orthonormal `z_basis`.
pub fn fd_gradient<F>(s: &BlockStructure, f: F, x: &SymElement, h: f64) -> Result<SymElement>
where
    F: Fn(&SymElement) -> Result<f64>,
{
    s.ensure_in_z(x)?;
    let mut g = DVector::zeros(s.dim_z());
    for (a, e) in s.z_basis().iter().enumerate() {
        let plus = f(&(x.clone() + e.clone() * h))?;
        let minus = f(&(x.clone() - e.clone() * h))?;
        g[a] = (plus - minus) / (2.0 * h);
    }
    Ok(s.from_coords_unchecked(&g))
}

/// Central-difference Jacobian of `g: Z_V → Z_V` in `z_basis` coordinates.
pub fn fd_jacobian<G>(s: &BlockStructure, g: G, x: &SymElement, h: f64) -> Result<ZOperator>
where
    G: Fn(&SymElement) -> Result<SymElement>,
{
    s.ensure_in_z(x)?;
    let d = s.dim_z();
    let mut j = DMatrix::zeros(d, d);
    for (a, e) in s.z_basis().iter().enumerate() {
        let plus = s.coords(&g(&(x.clone() + e.clone() * h))?)?;
        let minus = s.coords(&g(&(x.clone() - e.clone() * h))?)?;
        j.set_column(a, &((plus - minus) / (2.0 * h)));
    }
    ZOperator::from_matrix(j)
}

/// `X △ Y = X̲Y + YX̲ᵀ`, where `X̲` is the lower triangle of `X` with its diagonal halved.
pub fn triangle_product(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let low = DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => x[(i, j)],
        std::cmp::Ordering::Equal => 0.5 * x[(i, j)],
        std::cmp::Ordering::Less => 0.0,
    });
    &low * y + y * low.transpose()
}

/// `π_A`: zeroes the `(2,3)` and `(3,2)` entries of a 3×3 matrix.
pub fn algebra_projection(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    out[(1, 2)] = 0.0;
    out[(2, 1)] = 0.0;
    out
}

/// `A·B = π_A(AB)` on the 3×3 algebra with `a_23 = a_32 = 0`.
pub fn algebra_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.shape() != (3, 3) || b.shape() != (3, 3) {
        return Err(ConeError::DimensionMismatch("the algebra consists of 3x3 matrices".into()));
    }
    Ok(algebra_projection(&(a * b)))
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureCheck {
    pub label: String,
    pub computed: Vec<Vec<f64>>,
    pub expected: Vec<Vec<f64>>,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureReport {
    pub name: String,
    pub tolerance: f64,
    pub checks: Vec<FixtureCheck>,
    pub max_deviation: f64,
    pub passed: bool,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

struct ReportBuilder {
    name: String,
    checks: Vec<FixtureCheck>,
}

impl ReportBuilder {
    fn new(name: &str) -> Self {
        ReportBuilder {
            name: name.into(),
            checks: Vec::new(),
        }
    }

    fn matrix(&mut self, label: &str, computed: &DMatrix<f64>, expected: &DMatrix<f64>) {
        let deviation = if computed.shape() == expected.shape() {
            linalg::max_abs(&(computed - expected))
        } else {
            f64::INFINITY
        };
        self.checks.push(FixtureCheck {
            label: label.into(),
            computed: rows(computed),
            expected: rows(expected),
            deviation,
        });
    }

    fn scalar(&mut self, label: &str, computed: f64, expected: f64) {
        self.matrix(label, &DMatrix::from_element(1, 1, computed), &DMatrix::from_element(1, 1, expected));
    }

    fn finish(self) -> FixtureReport {
        let max_deviation = self.checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
        FixtureReport {
            name: self.name,
            tolerance: FIXTURE_TOL,
            checks: self.checks,
            max_deviation,
            passed: max_deviation <= FIXTURE_TOL,
        }
    }
}

impl FixtureReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for FixtureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "fixture {}: {}", self.name, if self.passed { "PASS" } else { "FAIL" })?;
        for c in &self.checks {
            let show = |m: &[Vec<f64>]| {
                m.iter()
                    .map(|r| r.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" "))
                    .collect::<Vec<_>>()
                    .join("; ")
            };
            writeln!(
                f,
                "  {:<28} computed [{}] expected [{}] deviation {:.3e}",
                c.label,
                show(&c.computed),
                show(&c.expected),
                c.deviation
            )?;
        }
        write!(f, "  max deviation {:.3e} (tolerance {:.0e})", self.max_deviation, self.tolerance)
    }
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

fn m3(v: [f64; 9]) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &v)
}

/// The 4-element poset `1≺3, 2≺3, 3≺4`: the proposed decomposition of `X = I_4` does not sum to `X`.
pub fn fixture_poset_decomposition() -> FixtureReport {
    let mut rep = ReportBuilder::new("poset-decomposition");
    // below[i][j]: i ≺ j, transitively closed
    let mut below = [[false; 4]; 4];
    for (i, j) in [(0, 2), (1, 2), (2, 3)] {
        below[i][j] = true;
    }
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                below[i][j] |= below[i][k] && below[k][j];
            }
        }
    }
    let minimal: Vec<f64> = (0..4)
        .filter(|&j| !(0..4).any(|i| below[i][j]))
        .map(|j| (j + 1) as f64)
        .collect();
    rep.matrix(
        "minimal elements",
        &DMatrix::from_row_slice(1, minimal.len(), &minimal),
        &DMatrix::from_row_slice(1, 2, &[1.0, 2.0]),
    );
    for i in 0..2 {
        let sep: Vec<f64> = (0..4).filter(|&j| below[i][j]).map(|j| (j + 1) as f64).collect();
        rep.matrix(
            &format!("separator S_{}", i + 1),
            &DMatrix::from_row_slice(1, sep.len(), &sep),
            &DMatrix::from_row_slice(1, 2, &[3.0, 4.0]),
        );
    }
    // the algebra has a_12 = a_21 = 0: 1 and 2 are incomparable
    let incomparable = !below[0][1] && !below[1][0];
    rep.scalar("1 and 2 incomparable", f64::from(u8::from(incomparable)), 1.0);

    let x = DMatrix::<f64>::identity(4, 4);
    let parts = [
        diag(&[1.0, 0.0, 0.0, -1.0]),
        diag(&[0.0, 1.0, 0.0, -1.0]),
        diag(&[0.0, 0.0, 1.0, 1.0]),
        diag(&[0.0, 0.0, 0.0, 1.0]),
    ];
    let sum = parts.iter().fold(DMatrix::zeros(4, 4), |acc, p| acc + p);
    rep.matrix("sum of X_i", &sum, &diag(&[1.0, 1.0, 1.0, 0.0]));
    rep.scalar("(4,4) entry of sum", sum[(3, 3)], 0.0);
    rep.scalar("(4,4) entry of X", x[(3, 3)], 1.0);
    rep.scalar("max |sum - X|", linalg::max_abs(&(&sum - &x)), 1.0);
    rep.finish()
}

/// `X = T^{-1}·(Tᵀ)^{-1}` is not an inverse of `θ = Tᵀ·T` in the 3×3 algebra with `a_23 = a_32 = 0`.
pub fn fixture_non_inverse() -> FixtureReport {
    let mut rep = ReportBuilder::new("non-inverse");
    let t = m3([1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    let u = m3([2.0, 0.0, 0.0, -1.0, 0.5, 0.0, 3.0, 0.0, 1.5]);
    let prod = |a: &DMatrix<f64>, b: &DMatrix<f64>| algebra_product(a, b).expect("3x3 operands");

    rep.matrix("T.U = TU on T_l", &prod(&t, &u), &(&t * &u));
    let theta = prod(&t.transpose(), &t);
    rep.matrix("theta = T'.T", &theta, &m3([3.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0]));
    let t_inv = linalg::lower_triangular_inverse(&t).expect("unit triangular");
    let x = prod(&t_inv, &t_inv.transpose());
    rep.matrix("X = T^-1.(T')^-1", &x, &m3([1.0, -1.0, -1.0, -1.0, 2.0, 0.0, -1.0, 0.0, 2.0]));
    let x_theta = prod(&x, &theta);
    rep.matrix("X.theta", &x_theta, &m3([1.0, 0.0, 0.0, -1.0, 1.0, 0.0, -1.0, 0.0, 1.0]));
    let theta_x = prod(&theta, &x);
    rep.matrix("theta.X", &theta_x, &m3([1.0, -1.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]));
    let i3 = DMatrix::identity(3, 3);
    rep.scalar("max |X.theta - I|", linalg::max_abs(&(x_theta - i3)), 1.0);
    rep.finish()
}

/// With `λ = 1`: the true second derivative `tr(θ₀^{-1}θ₀^{-1}) = 15` against `tr(m₀²) = 13`,
/// and `15` recovered from `variance_Q` on the Vinberg structure.
pub fn fixture_variance_counterexample() -> FixtureReport {
    let mut rep = ReportBuilder::new("variance-counterexample");
    let theta0 = m3([3.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    let m0 = m3([1.0, -1.0, -1.0, -1.0, 2.0, 0.0, -1.0, 0.0, 2.0]);
    let inv = linalg::inverse(&theta0, "theta0").expect("theta0 is invertible");
    rep.matrix("theta0^-1", &inv, &m3([1.0, -1.0, -1.0, -1.0, 2.0, 1.0, -1.0, 1.0, 2.0]));
    let i3 = DMatrix::<f64>::identity(3, 3);
    let true_value = (&inv * &i3 * &inv * &i3).trace();
    rep.scalar("tr(theta0^-1 I theta0^-1 I)", true_value, 15.0);
    let claimed = (&m0 * &m0).trace();
    rep.scalar("tr(m0^2)", claimed, 13.0);
    rep.scalar("15 - 13", true_value - claimed, 2.0);

    match variance_cross_check(&m0) {
        Ok(v) => rep.scalar("<V_Q(m) I, I> on Vinberg", v, 15.0),
        Err(_) => rep.scalar("<V_Q(m) I, I> on Vinberg", f64::NAN, 15.0),
    }
    rep.finish()
}

/// `⟨V_Q(1·n⃗, W m₀ W) I, I⟩` on the Vinberg structure, `W` the antidiagonal permutation.
fn variance_cross_check(m0: &DMatrix<f64>) -> Result<f64> {
    let v = preset("vinberg")?;
    let w = m3([0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
    let m = SymElement::from_matrix(&w * m0 * &w)?;
    let op = wishart::variance_q(&v, &ShapeVector::constant(3, 1.0), &m)?;
    let i = SymElement::identity(3);
    let c = v.coords(&i)?;
    Ok(c.dot(&op.apply_coords(&c)))
}

pub fn run_all() -> Vec<FixtureReport> {
    vec![
        fixture_poset_decomposition(),
        fixture_non_inverse(),
        fixture_variance_counterexample(),
    ]
}
