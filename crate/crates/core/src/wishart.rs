//! Wishart exponential families generated by Riesz measures on `Q_V` and `P_V`.
//!
//! The family on `Q_V` has Laplace transform `Δ_{-s}` on `P_V`; its mean map is
//! `θ ↦ −(log Δ_{-s})'(θ)` and its inverse `ψ_s = −(log δ_{-s})'`. The family on
//! `P_V` swaps the roles of `Δ` and `δ`. Variance operators are materialized
//! as dense [`ZOperator`]s.

use std::fmt;

use nalgebra::DMatrix;

use crate::element::SymElement;
use crate::error::{ConeError, Result};
use crate::linalg::{self, tol};
use crate::operator::ZOperator;
use crate::power::{self, ShapeVector};
use crate::structure::BlockStructure;
use crate::triangular;

/// Largest rank for which the `2^r` Gindikin strata are scanned.
const MAX_GINDIKIN_RANK: usize = 24;

/// Which cone carries the Riesz measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Measure on `P_V` with Laplace transform `δ_{-s}`; shapes range over `Ξ`.
    P,
    /// Measure on `Q_V` with Laplace transform `Δ_{-s}`; shapes range over `𝔛`.
    Q,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::P => write!(f, "P"),
            Side::Q => write!(f, "Q"),
        }
    }
}

impl std::str::FromStr for Side {
    type Err = ConeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(Side::P),
            "Q" | "q" => Ok(Side::Q),
            _ => Err(ConeError::Parse(format!("side must be P or Q, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GindikinClass {
    pub side: Side,
    /// The stratum `ε ∈ {0,1}^r`, or `None` outside the Gindikin set.
    pub epsilon: Option<Vec<u8>>,
    /// All `s_k > 0`.
    pub nondegenerate: bool,
}

impl GindikinClass {
    pub fn in_set(&self) -> bool {
        self.epsilon.is_some()
    }

    /// `ε = (1, …, 1)`: the Riesz measure is absolutely continuous.
    pub fn absolutely_continuous(&self) -> bool {
        self.epsilon.as_ref().is_some_and(|e| e.iter().all(|&v| v == 1))
    }
}

/// `½ Σ ε_j dim V` over the blocks below (`Q`) or to the left of (`P`) the diagonal block `k`.
fn threshold(s: &BlockStructure, side: Side, eps: &[u8], k: usize) -> f64 {
    let sum: usize = match side {
        Side::Q => (k + 1..s.rank()).map(|l| eps[l] as usize * s.block_dim(l, k)).sum(),
        Side::P => (0..k).map(|i| eps[i] as usize * s.block_dim(k, i)).sum(),
    };
    0.5 * sum as f64
}

/// Every stratum `ε` whose defining conditions hold for `shape`.
///
/// The strata are disjoint, so at most one entry is returned.
pub fn gindikin_strata(s: &BlockStructure, side: Side, shape: &ShapeVector) -> Result<Vec<Vec<u8>>> {
    shape.check_rank(s)?;
    let r = s.rank();
    if r > MAX_GINDIKIN_RANK {
        return Err(ConeError::Unsupported(format!(
            "Gindikin scan is limited to r <= {MAX_GINDIKIN_RANK}"
        )));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << r) {
        let eps: Vec<u8> = (0..r).map(|k| ((mask >> k) & 1) as u8).collect();
        let ok = (0..r).all(|k| {
            let diff = shape[k] - threshold(s, side, &eps, k);
            if eps[k] == 1 {
                diff > tol::GINDIKIN
            } else {
                diff.abs() <= tol::GINDIKIN
            }
        });
        if ok {
            out.push(eps);
        }
    }
    Ok(out)
}

pub fn gindikin(s: &BlockStructure, side: Side, shape: &ShapeVector) -> Result<GindikinClass> {
    let strata = gindikin_strata(s, side, shape)?;
    Ok(GindikinClass {
        side,
        epsilon: strata.into_iter().next(),
        nondegenerate: shape.all_positive(),
    })
}

fn require_in_set(s: &BlockStructure, side: Side, shape: &ShapeVector) -> Result<()> {
    if !gindikin(s, side, shape)?.in_set() {
        return Err(ConeError::OutsideGindikin);
    }
    Ok(())
}

/// Shape must have all components positive and lie in the Gindikin set of `side`.
fn require_admissible(s: &BlockStructure, side: Side, shape: &ShapeVector) -> Result<()> {
    shape.check_rank(s)?;
    if let Some(k) = shape.iter().position(|&v| v <= 0.0) {
        return Err(ConeError::InvalidShape(format!("s_{} = {} is not positive", k + 1, shape[k])));
    }
    require_in_set(s, side, shape)
}

/// Laplace transform `Δ_{-s}(θ)` of the Riesz measure on `Q_V`.
pub fn laplace_q(s: &BlockStructure, shape: &ShapeVector, theta: &SymElement) -> Result<f64> {
    require_in_set(s, Side::Q, shape)?;
    power::big_delta(s, &shape.negated(), theta)
}

/// Laplace transform `δ_{-s}(ξ)` of the Riesz measure on `P_V`.
pub fn laplace_p(s: &BlockStructure, shape: &ShapeVector, xi: &SymElement) -> Result<f64> {
    require_in_set(s, Side::P, shape)?;
    power::small_delta(s, &shape.negated(), xi)
}

/// Mean `−(log Δ_{-s})'(θ) ∈ Q_V` of the family on `Q_V` at `θ ∈ P_V`.
pub fn mean_q(s: &BlockStructure, shape: &ShapeVector, theta: &SymElement) -> Result<SymElement> {
    require_admissible(s, Side::Q, shape)?;
    Ok(-power::grad_log_big_delta(s, &shape.negated(), theta)?)
}

/// `ψ_s(m) ∈ P_V`, the inverse of [`mean_q`].
pub fn inverse_mean_q(s: &BlockStructure, shape: &ShapeVector, m: &SymElement) -> Result<SymElement> {
    require_admissible(s, Side::Q, shape)?;
    power::psi_formula(s, shape, m)
}

/// Mean `−(log δ_{-s})'(ξ) ∈ P_V` of the family on `P_V` at `ξ ∈ Q_V`.
pub fn mean_p(s: &BlockStructure, shape: &ShapeVector, xi: &SymElement) -> Result<SymElement> {
    require_admissible(s, Side::P, shape)?;
    Ok(-power::grad_log_small_delta(s, &shape.negated(), xi)?)
}

/// `−(log Δ_{-s})'(x) ∈ Q_V`, the inverse of [`mean_p`].
pub fn inverse_mean_p(s: &BlockStructure, shape: &ShapeVector, x: &SymElement) -> Result<SymElement> {
    require_admissible(s, Side::P, shape)?;
    Ok(-power::grad_log_big_delta(s, &shape.negated(), x)?)
}

/// `m̂^{-1} ∈ P_V`: the unique `y ∈ P_V` with `π(y^{-1}) = m`.
pub fn lauritzen(s: &BlockStructure, m: &SymElement) -> Result<SymElement> {
    power::lauritzen_inverse(s, m)
}

/// `[(y)_{1:N_k}]^{-1}_0` for `y ∈ Sym_+(N)`.
fn leading_inverse_padded(y: &DMatrix<f64>, nk: usize) -> Result<DMatrix<f64>> {
    let inv = linalg::spd_inverse(&linalg::leading(y, nk)).map_err(|_| ConeError::Singular("leading block"))?;
    Ok(linalg::zero_pad(&inv, y.nrows()))
}

/// `π ∘ Σ_j c_j ρ(A_j)` assembled on `z_basis`.
fn quadratic_sum(s: &BlockStructure, terms: &[(f64, DMatrix<f64>)]) -> ZOperator {
    ZOperator::assemble(s, |e| {
        let mut acc = DMatrix::zeros(e.nrows(), e.ncols());
        for (c, a) in terms {
            if *c != 0.0 {
                acc += a * e.matrix() * a.transpose() * *c;
            }
        }
        acc
    })
}

/// Variance function of the family on `Q_V`:
/// `π∘{(n_1/s_1)ρ(m̂) + Σ_{i≥2} (n_i/s_i − n_{i−1}/s_{i−1}) ρ(m̂ − [(m̂^{-1})_{1:N_{i−1}}]^{-1}_0)}`.
pub fn variance_q(s: &BlockStructure, shape: &ShapeVector, m: &SymElement) -> Result<ZOperator> {
    require_admissible(s, Side::Q, shape)?;
    let minv = power::lauritzen_inverse(s, m)?;
    let mhat = linalg::spd_inverse(minv.matrix())?;
    let n: Vec<f64> = s.sizes().iter().map(|&v| v as f64).collect();
    let mut terms = vec![(n[0] / shape[0], mhat.clone())];
    for i in 1..s.rank() {
        let c = n[i] / shape[i] - n[i - 1] / shape[i - 1];
        let k = leading_inverse_padded(minv.matrix(), s.cumulative_size(i))?;
        terms.push((c, &mhat - k));
    }
    Ok(quadratic_sum(s, &terms))
}

/// The two explicit Vinberg-cone displays of the variance function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VinbergForm {
    /// `(1/s_1)ρ(m̂) + (1/s_2 − 1/s_1)ρ(m̂ − M_1) + (1/s_3 − 1/s_2)ρ(m̂ − M_1 − M_2)`.
    Cascade,
    /// `(1/s_1 + 1/s_2 − 1/s_3)ρ(m̂) + (1/s_3 − 1/s_1)ρ(m̂ − M_1) + (1/s_3 − 1/s_2)ρ(m̂ − M_2)`.
    Rearranged,
}

fn is_vinberg(s: &BlockStructure) -> bool {
    s.sizes() == [1, 1, 1] && s.block_dim(1, 0) == 0 && s.block_dim(2, 0) == 1 && s.block_dim(2, 1) == 1
}

/// Completion `m̂` and the matrices `M_i = (|m_{i,3}|/m_33) E_ii` written out entrywise.
fn vinberg_pieces(m: &SymElement) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (m11, m22, m33, m31, m32) = (m[(0, 0)], m[(1, 1)], m[(2, 2)], m[(2, 0)], m[(2, 1)]);
    let c = m31 * m32 / m33;
    let mut mhat = m.matrix().clone();
    mhat[(0, 1)] = c;
    mhat[(1, 0)] = c;
    let mut m1 = DMatrix::zeros(3, 3);
    m1[(0, 0)] = (m11 * m33 - m31 * m31) / m33;
    let mut m2 = DMatrix::zeros(3, 3);
    m2[(1, 1)] = (m22 * m33 - m32 * m32) / m33;
    (mhat, m1, m2)
}

/// Variance function on the Vinberg cone from its explicit closed forms.
pub fn variance_q_vinberg(s: &BlockStructure, shape: &ShapeVector, m: &SymElement, form: VinbergForm) -> Result<ZOperator> {
    if !is_vinberg(s) {
        return Err(ConeError::StructureMismatch("the explicit forms require the Vinberg structure".into()));
    }
    require_admissible(s, Side::Q, shape)?;
    power::ensure_in_q(s, m)?;
    let (mhat, m1, m2) = vinberg_pieces(m);
    let (s1, s2, s3) = (shape[0], shape[1], shape[2]);
    let terms = match form {
        VinbergForm::Cascade => vec![
            (1.0 / s1, mhat.clone()),
            (1.0 / s2 - 1.0 / s1, &mhat - &m1),
            (1.0 / s3 - 1.0 / s2, &mhat - &m1 - &m2),
        ],
        VinbergForm::Rearranged => vec![
            (1.0 / s1 + 1.0 / s2 - 1.0 / s3, mhat.clone()),
            (1.0 / s3 - 1.0 / s1, &mhat - &m1),
            (1.0 / s3 - 1.0 / s2, &mhat - &m2),
        ],
    };
    Ok(quadratic_sum(s, &terms))
}

/// [`variance_q_vinberg`] in the rearranged form.
pub fn variance_q_alt_vinberg(s: &BlockStructure, shape: &ShapeVector, m: &SymElement) -> Result<ZOperator> {
    variance_q_vinberg(s, shape, m, VinbergForm::Rearranged)
}

/// Variance function of the family on `P_V`, with `T = cholesky_P(x)`:
/// `(n_r/s_r)ρ(T)ρ*(T) + Σ_{k<r} (n_k/s_k − n_{k+1}/s_{k+1}) ρ(T)ρ(J_k)ρ*(T)`.
pub fn variance_p(s: &BlockStructure, shape: &ShapeVector, x: &SymElement) -> Result<ZOperator> {
    require_admissible(s, Side::P, shape)?;
    if x.matrix().clone().cholesky().is_none() {
        return Err(ConeError::NotInCone);
    }
    let t = triangular::cholesky_p(s, x)?;
    let tm = t.matrix();
    let r = s.rank();
    let n: Vec<f64> = s.sizes().iter().map(|&v| v as f64).collect();
    let weights: Vec<(f64, usize)> = (0..r - 1)
        .map(|k| (n[k] / shape[k] - n[k + 1] / shape[k + 1], s.cumulative_size(k + 1)))
        .collect();
    let last = n[r - 1] / shape[r - 1];
    Ok(ZOperator::assemble(s, |e| {
        let y = s.project_unchecked(&(tm.transpose() * e.matrix() * tm)).into_matrix();
        let mut inner = &y * last;
        for &(c, nk) in &weights {
            if c != 0.0 {
                let mut cut = DMatrix::zeros(y.nrows(), y.ncols());
                cut.view_mut((0, 0), (nk, nk)).copy_from(&y.view((0, 0), (nk, nk)));
                inner += cut * c;
            }
        }
        tm * inner * tm.transpose()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::preset;

    #[test]
    fn vinberg_gindikin_examples() {
        let v = preset("vinberg").unwrap();
        let g = gindikin(&v, Side::Q, &ShapeVector::new(vec![1.0, 1.0, 1.0])).unwrap();
        assert_eq!(g.epsilon, Some(vec![1, 1, 1]));
        let g = gindikin(&v, Side::Q, &ShapeVector::new(vec![0.5, 1.0, 1.0])).unwrap();
        assert_eq!(g.epsilon, Some(vec![0, 1, 1]));
        let g = gindikin(&v, Side::Q, &ShapeVector::new(vec![0.0, 0.0, 0.0])).unwrap();
        assert_eq!(g.epsilon, Some(vec![0, 0, 0]));
        assert!(!g.nondegenerate);
        let g = gindikin(&v, Side::Q, &ShapeVector::new(vec![0.3, 1.0, 1.0])).unwrap();
        assert_eq!(g.epsilon, None);
    }

    #[test]
    fn p_side_uses_row_dimensions() {
        let v = preset("vinberg").unwrap();
        // On the P side block 3 sees V_31 and V_32, so s_3 = 1 sits on the boundary.
        let g = gindikin(&v, Side::P, &ShapeVector::new(vec![1.0, 1.0, 1.0])).unwrap();
        assert_eq!(g.epsilon, Some(vec![1, 1, 0]));
        let g = gindikin(&v, Side::P, &ShapeVector::new(vec![1.0, 1.0, 2.0])).unwrap();
        assert_eq!(g.epsilon, Some(vec![1, 1, 1]));
        let g = gindikin(&v, Side::P, &ShapeVector::new(vec![1.0, 1.0, 0.5])).unwrap();
        assert_eq!(g.epsilon, None);
        let g = gindikin(&v, Side::P, &ShapeVector::new(vec![0.0, 1.0, 0.5])).unwrap();
        assert_eq!(g.epsilon, Some(vec![0, 1, 0]));
    }

    #[test]
    fn inverse_mean_rejects_bad_shapes() {
        let v = preset("vinberg").unwrap();
        let id = SymElement::identity(3);
        assert!(matches!(
            inverse_mean_q(&v, &ShapeVector::new(vec![0.3, 1.0, 1.0]), &id),
            Err(ConeError::OutsideGindikin)
        ));
        assert!(matches!(
            inverse_mean_q(&v, &ShapeVector::new(vec![-1.0, 1.0, 1.0]), &id),
            Err(ConeError::InvalidShape(_))
        ));
        assert!(matches!(
            inverse_mean_q(&v, &ShapeVector::new(vec![1.0, 1.0]), &id),
            Err(ConeError::InvalidShape(_))
        ));
    }

    #[test]
    fn variance_at_identity_is_block_diagonal() {
        let v = preset("vinberg").unwrap();
        let s = ShapeVector::new(vec![1.0, 2.0, 4.0]);
        let op = variance_q(&v, &s, &SymElement::identity(3)).unwrap();
        // Coordinates: d1, v31, d2, v32, d3.
        let expect = [1.0, 1.0, 0.5, 0.5, 0.25];
        for (a, &e) in expect.iter().enumerate() {
            assert!((op.matrix()[(a, a)] - e).abs() < 1e-14);
        }
        assert!(linalg::max_abs(&(op.matrix() - DMatrix::from_diagonal(&op.matrix().diagonal()))) < 1e-14);
    }
}
