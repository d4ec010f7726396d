//! Basic quadratic maps and generalized power functions.
//!
//! For each block column `i` the space `W_i ⊂ Mat(N, n_i)` has basis `v_1, …, v_{m_i}`:
//! `v_1` carries `I_{n_i}` in block row `i`, the remaining vectors carry the
//! orthonormal basis matrices of `V_{i+1,i}, …, V_{r,i}` in their block rows.
//! The map `φ_i: Z_V → Sym(m_i)` is `φ_i(ξ)_{ab} = tr(v_aᵀ ξ v_b)`, and `φ̌_i` is
//! its lower-right `(m_i−1)×(m_i−1)` corner (empty for `i = r`, with determinant 1).
//!
//! `Δ_s` is evaluated from leading principal minors on `P_V`; `δ_s` from the
//! determinants of `φ_i` and `φ̌_i` on `Q_V`, normalized so that `δ_s(I_N) = 1`.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};

use crate::element::SymElement;
use crate::error::{ConeError, Result};
use crate::linalg::{self, tol};
use crate::structure::BlockStructure;

/// A shape parameter `s ∈ R^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeVector(Vec<f64>);

impl ShapeVector {
    pub fn new(values: Vec<f64>) -> Self {
        ShapeVector(values)
    }

    pub fn constant(r: usize, p: f64) -> Self {
        ShapeVector(vec![p; r])
    }

    /// `n⃗ = (n_1, …, n_r)`.
    pub fn block_sizes(s: &BlockStructure) -> Self {
        ShapeVector(s.sizes().iter().map(|&n| n as f64).collect())
    }

    /// Parses a comma-separated list of reals.
    pub fn parse(text: &str) -> Result<Self> {
        text.split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ConeError::Parse(format!("bad shape component '{t}'")))
            })
            .collect::<Result<Vec<_>>>()
            .map(ShapeVector)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// `s* = (s_r, …, s_1)`.
    pub fn reversed(&self) -> Self {
        ShapeVector(self.0.iter().rev().copied().collect())
    }

    pub fn negated(&self) -> Self {
        ShapeVector(self.0.iter().map(|v| -v).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        ShapeVector(self.0.iter().map(|v| c * v).collect())
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(|&v| v > 0.0)
    }

    pub(crate) fn check_rank(&self, s: &BlockStructure) -> Result<()> {
        if self.0.len() != s.rank() {
            return Err(ConeError::InvalidShape(format!(
                "expected {} components, got {}",
                s.rank(),
                self.0.len()
            )));
        }
        Ok(())
    }
}

impl Deref for ShapeVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// One basis vector of `W_i`: block row `row` carries `block` (`n_row × n_i`).
#[derive(Debug, Clone)]
struct WVector {
    row: usize,
    block: DMatrix<f64>,
}

/// The column space `W_i` with its ordered basis.
#[derive(Debug, Clone)]
pub struct QuadraticDomain {
    index: usize,
    n_rows: usize,
    offsets: Vec<usize>,
    basis: Vec<WVector>,
}

impl QuadraticDomain {
    pub fn new(s: &BlockStructure, i: usize) -> Result<Self> {
        if i >= s.rank() {
            return Err(ConeError::DimensionMismatch(format!("block index {} exceeds r = {}", i + 1, s.rank())));
        }
        let ni = s.sizes()[i];
        let mut basis = vec![WVector {
            row: i,
            block: DMatrix::identity(ni, ni),
        }];
        for l in i + 1..s.rank() {
            for a in s.block_basis(l, i) {
                basis.push(WVector { row: l, block: a.clone() });
            }
        }
        Ok(QuadraticDomain {
            index: i,
            n_rows: s.total_size(),
            offsets: (0..s.rank()).map(|k| s.offset(k)).collect(),
            basis,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// `m_i = dim W_i`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The `N×n_i` matrix of basis vector `a`.
    pub fn basis_matrix(&self, a: usize) -> DMatrix<f64> {
        let v = &self.basis[a];
        let mut m = DMatrix::zeros(self.n_rows, v.block.ncols());
        m.view_mut((self.offsets[v.row], 0), v.block.shape()).copy_from(&v.block);
        m
    }

    /// The element `Σ_a w_a v_a` of `W_i`.
    pub fn element(&self, w: &DVector<f64>) -> Result<DMatrix<f64>> {
        if w.len() != self.dim() {
            return Err(ConeError::DimensionMismatch(format!("expected {} coordinates", self.dim())));
        }
        let mut m = DMatrix::zeros(self.n_rows, self.basis[0].block.ncols());
        for (a, &c) in w.iter().enumerate() {
            m += self.basis_matrix(a) * c;
        }
        Ok(m)
    }

    fn phi_full(&self, xi: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        for a in 0..m {
            let va = &self.basis[a];
            for b in a..m {
                let vb = &self.basis[b];
                let blk = xi.view(
                    (self.offsets[va.row], self.offsets[vb.row]),
                    (va.block.nrows(), vb.block.nrows()),
                );
                let prod = blk * &vb.block;
                let v = linalg::frob(&va.block, &prod);
                out[(a, b)] = v;
                out[(b, a)] = v;
            }
        }
        out
    }

    /// `Σ_{a,b ≥ first} X_{a−first, b−first} v_b v_aᵀ` as a full symmetric matrix.
    fn adjoint_raw(&self, x: &DMatrix<f64>, first: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n_rows, self.n_rows);
        for a in first..self.dim() {
            let va = &self.basis[a];
            for b in first..self.dim() {
                let c = x[(a - first, b - first)];
                if c == 0.0 {
                    continue;
                }
                let vb = &self.basis[b];
                let blk = &vb.block * va.block.transpose() * c;
                let mut view = out.view_mut(
                    (self.offsets[vb.row], self.offsets[va.row]),
                    (vb.block.nrows(), va.block.nrows()),
                );
                view += blk;
            }
        }
        out
    }
}

fn domains(s: &BlockStructure) -> Vec<QuadraticDomain> {
    (0..s.rank())
        .map(|i| QuadraticDomain::new(s, i).expect("index in range"))
        .collect()
}

fn check_size(s: &BlockStructure, x: &DMatrix<f64>) -> Result<()> {
    let n = s.total_size();
    if x.nrows() != n || x.ncols() != n {
        return Err(ConeError::DimensionMismatch(format!(
            "expected a {n}x{n} matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}

/// `q_i(w) = wwᵀ` for `w = Σ_a w_a v_a`.
pub fn q(s: &BlockStructure, i: usize, w: &DVector<f64>) -> Result<SymElement> {
    let x = QuadraticDomain::new(s, i)?.element(w)?;
    Ok(SymElement::symmetrized(&x * x.transpose()))
}

pub fn phi(s: &BlockStructure, i: usize, xi: &SymElement) -> Result<DMatrix<f64>> {
    check_size(s, xi)?;
    Ok(QuadraticDomain::new(s, i)?.phi_full(xi))
}

pub fn phi_check(s: &BlockStructure, i: usize, xi: &SymElement) -> Result<DMatrix<f64>> {
    let p = phi(s, i, xi)?;
    let m = p.nrows();
    Ok(p.view((1, 1), (m - 1, m - 1)).into_owned())
}

/// `φ_i*(X)`, characterized by `⟨ξ, φ_i*(X)⟩ = tr(φ_i(ξ)X)` on `Z_V`.
pub fn phi_adjoint(s: &BlockStructure, i: usize, x: &DMatrix<f64>) -> Result<SymElement> {
    let dom = QuadraticDomain::new(s, i)?;
    let m = dom.dim();
    if x.nrows() != m || x.ncols() != m {
        return Err(ConeError::DimensionMismatch(format!("expected a {m}x{m} matrix")));
    }
    Ok(s.project_unchecked(&linalg::symmetrize(&dom.adjoint_raw(x, 0))))
}

pub fn phi_check_adjoint(s: &BlockStructure, i: usize, x: &DMatrix<f64>) -> Result<SymElement> {
    let dom = QuadraticDomain::new(s, i)?;
    let m = dom.dim() - 1;
    if x.nrows() != m || x.ncols() != m {
        return Err(ConeError::DimensionMismatch(format!("expected a {m}x{m} matrix")));
    }
    Ok(s.project_unchecked(&linalg::symmetrize(&dom.adjoint_raw(x, 1))))
}

/// `φ_i(ξ)` for all `i`, after checking `ξ ∈ Q_V`.
///
/// Membership requires every `φ_i(ξ)` to be positive definite with
/// `det φ_i(ξ) > tol_pd · scale^{m_i}`, where `scale` is the largest entry of `φ_i(ξ)`.
fn phis_in_q(s: &BlockStructure, xi: &SymElement) -> Result<Vec<DMatrix<f64>>> {
    check_size(s, xi)?;
    s.ensure_in_z(xi)?;
    let mut out = Vec::with_capacity(s.rank());
    for dom in domains(s) {
        let p = dom.phi_full(xi);
        let scale = linalg::max_abs(&p);
        let det = linalg::det(&p);
        if scale == 0.0 || det <= tol::PD * scale.powi(p.nrows() as i32) || p.clone().cholesky().is_none() {
            return Err(ConeError::NotInDualCone);
        }
        out.push(p);
    }
    Ok(out)
}

fn corner(p: &DMatrix<f64>) -> DMatrix<f64> {
    let m = p.nrows();
    p.view((1, 1), (m - 1, m - 1)).into_owned()
}

pub fn in_dual_cone(s: &BlockStructure, xi: &SymElement) -> bool {
    phis_in_q(s, xi).is_ok()
}

pub fn ensure_in_q(s: &BlockStructure, xi: &SymElement) -> Result<()> {
    phis_in_q(s, xi).map(|_| ())
}

/// Leading minors `det x_{1:N_k}` of `x ∈ P_V`, `k = 1..r`.
fn leading_minors(s: &BlockStructure, x: &SymElement) -> Result<Vec<f64>> {
    check_size(s, x)?;
    s.ensure_in_z(x)?;
    if x.matrix().clone().cholesky().is_none() {
        return Err(ConeError::NotInCone);
    }
    let scale = linalg::max_abs(x);
    (1..=s.rank())
        .map(|k| {
            let nk = s.cumulative_size(k);
            let d = linalg::det(&linalg::leading(x, nk));
            if d > tol::PD * scale.powi(nk as i32) {
                Ok(d)
            } else {
                Err(ConeError::NotInCone)
            }
        })
        .collect()
}

/// Exponents `c_k` with `Δ_s(x) = Π_k (det x_{1:N_k})^{c_k}`.
fn minor_exponents(s: &BlockStructure, shape: &ShapeVector) -> Vec<f64> {
    let r = s.rank();
    let n: Vec<f64> = s.sizes().iter().map(|&v| v as f64).collect();
    (0..r)
        .map(|k| {
            if k + 1 < r {
                shape[k] / n[k] - shape[k + 1] / n[k + 1]
            } else {
                shape[k] / n[k]
            }
        })
        .collect()
}

pub fn log_big_delta(s: &BlockStructure, shape: &ShapeVector, x: &SymElement) -> Result<f64> {
    shape.check_rank(s)?;
    let minors = leading_minors(s, x)?;
    Ok(minor_exponents(s, shape).iter().zip(&minors).map(|(c, d)| c * d.ln()).sum())
}

/// `Δ_s(x)` on `P_V`.
pub fn big_delta(s: &BlockStructure, shape: &ShapeVector, x: &SymElement) -> Result<f64> {
    Ok(log_big_delta(s, shape, x)?.exp())
}

/// `(log Δ_s)'(x) = Σ_k c_k π([x_{1:N_k}^{-1}]_0)`.
pub fn grad_log_big_delta(s: &BlockStructure, shape: &ShapeVector, x: &SymElement) -> Result<SymElement> {
    shape.check_rank(s)?;
    leading_minors(s, x)?;
    let n = s.total_size();
    let mut acc = DMatrix::zeros(n, n);
    for (k, c) in minor_exponents(s, shape).into_iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let nk = s.cumulative_size(k + 1);
        let inv = linalg::spd_inverse(&linalg::leading(x, nk)).map_err(|_| ConeError::NotInCone)?;
        acc += linalg::zero_pad(&inv, n) * c;
    }
    Ok(s.project_unchecked(&acc))
}

pub fn log_small_delta(s: &BlockStructure, shape: &ShapeVector, xi: &SymElement) -> Result<f64> {
    shape.check_rank(s)?;
    let phis = phis_in_q(s, xi)?;
    let mut acc = 0.0;
    for (i, p) in phis.iter().enumerate() {
        let dc = linalg::det(&corner(p));
        if dc <= 0.0 {
            return Err(ConeError::NotInDualCone);
        }
        let ratio = linalg::det(p) / dc / s.sizes()[i] as f64;
        acc += shape[i] * ratio.ln();
    }
    Ok(acc)
}

/// `δ_s(ξ) = Π_i (n_i^{-1} det φ_i(ξ) / det φ̌_i(ξ))^{s_i}` on `Q_V`.
pub fn small_delta(s: &BlockStructure, shape: &ShapeVector, xi: &SymElement) -> Result<f64> {
    Ok(log_small_delta(s, shape, xi)?.exp())
}

/// `(log δ_s)'(ξ)`, assembled from the directional derivatives
/// `D_a log δ_s(ξ) = Σ_i s_i (tr φ_i(e_a)φ_i(ξ)^{-1} − tr φ̌_i(e_a)φ̌_i(ξ)^{-1})` along `z_basis`.
pub fn grad_log_small_delta(s: &BlockStructure, shape: &ShapeVector, xi: &SymElement) -> Result<SymElement> {
    shape.check_rank(s)?;
    let phis = phis_in_q(s, xi)?;
    let doms = domains(s);
    let mut invs = Vec::with_capacity(s.rank());
    for p in &phis {
        let full = linalg::spd_inverse(p).map_err(|_| ConeError::NotInDualCone)?;
        let c = corner(p);
        let check = if c.nrows() == 0 {
            c
        } else {
            linalg::spd_inverse(&c).map_err(|_| ConeError::NotInDualCone)?
        };
        invs.push((full, check));
    }
    let mut grad = DVector::zeros(s.dim_z());
    for (a, e) in s.z_basis().iter().enumerate() {
        let mut d = 0.0;
        for (i, dom) in doms.iter().enumerate() {
            let pe = dom.phi_full(e);
            let (full, check) = &invs[i];
            d += shape[i] * (linalg::frob(&pe, full) - linalg::frob(&corner(&pe), check));
        }
        grad[a] = d;
    }
    Ok(s.from_coords_unchecked(&grad))
}

/// `Σ_i s_i (φ_i*(φ_i(m)^{-1}) − φ̌_i*(φ̌_i(m)^{-1}))`, the inverse mean map on `Q_V`.
pub fn psi_formula(s: &BlockStructure, shape: &ShapeVector, m: &SymElement) -> Result<SymElement> {
    shape.check_rank(s)?;
    let phis = phis_in_q(s, m)?;
    let n = s.total_size();
    let mut acc = DMatrix::zeros(n, n);
    for (i, (dom, p)) in domains(s).iter().zip(&phis).enumerate() {
        let inv = linalg::spd_inverse(p).map_err(|_| ConeError::NotInDualCone)?;
        let mut term = dom.adjoint_raw(&inv, 0);
        let c = corner(p);
        if c.nrows() > 0 {
            let cinv = linalg::spd_inverse(&c).map_err(|_| ConeError::NotInDualCone)?;
            term -= dom.adjoint_raw(&cinv, 1);
        }
        acc += term * shape[i];
    }
    Ok(s.project_unchecked(&linalg::symmetrize(&acc)))
}

/// `m̂^{-1} = ψ_n(m)`, the inverse of `y ↦ π(y^{-1})` from `P_V` onto `Q_V`.
pub fn lauritzen_inverse(s: &BlockStructure, m: &SymElement) -> Result<SymElement> {
    psi_formula(s, &ShapeVector::block_sizes(s), m)
}

/// `Φ(ξ) = diag(φ_1(ξ), …, φ_r(ξ))`, a `d×d` matrix.
pub fn phi_big(s: &BlockStructure, xi: &SymElement) -> Result<DMatrix<f64>> {
    check_size(s, xi)?;
    let d = s.dim_z();
    let mut out = DMatrix::zeros(d, d);
    let mut o = 0;
    for dom in domains(s) {
        let p = dom.phi_full(xi);
        let m = p.nrows();
        out.view_mut((o, o), (m, m)).copy_from(&p);
        o += m;
    }
    Ok(out)
}

/// For each `z_basis` coordinate, the index `i` of the `W_i` it belongs to and
/// the block `k` whose diagonal scalar it is weighted by in `Φ(diagonal ξ)`.
pub(crate) fn phi_slots(s: &BlockStructure) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(s.dim_z());
    for dom in domains(s) {
        for v in &dom.basis {
            out.push((dom.index, v.row));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::structure::preset;
    use crate::triangular;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vinberg_xi() -> SymElement {
        SymElement::from_rows(&[vec![2.0, 0.0, 0.5], vec![0.0, 3.0, -0.7], vec![0.5, -0.7, 1.5]]).unwrap()
    }

    #[test]
    fn vinberg_phi_blocks() {
        let v = preset("vinberg").unwrap();
        let xi = vinberg_xi();
        let p1 = phi(&v, 0, &xi).unwrap();
        assert_eq!(p1, DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.5]));
        let p2 = phi(&v, 1, &xi).unwrap();
        assert_eq!(p2, DMatrix::from_row_slice(2, 2, &[3.0, -0.7, -0.7, 1.5]));
        assert_eq!(phi(&v, 2, &xi).unwrap()[(0, 0)], 1.5);
        assert_eq!(phi_check(&v, 0, &xi).unwrap()[(0, 0)], 1.5);
    }

    #[test]
    fn vinberg_phi_adjoint() {
        let v = preset("vinberg").unwrap();
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        let a = phi_adjoint(&v, 0, &x).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 3.0]);
        assert!(linalg::max_abs(&(a.into_matrix() - expect)) < 1e-15);
    }

    #[test]
    fn vinberg_q_of_first_column() {
        let v = preset("vinberg").unwrap();
        let w = DVector::from_vec(vec![2.0, 3.0]);
        let x = q(&v, 0, &w).unwrap();
        assert_eq!(x[(0, 0)], 4.0);
        assert_eq!(x[(2, 0)], 6.0);
        assert_eq!(x[(2, 2)], 9.0);
        assert_eq!(x[(1, 1)], 0.0);
    }

    #[test]
    fn phi_of_identity_is_diagonal() {
        let v = preset("dual_vinberg").unwrap();
        let p = phi(&v, 0, &SymElement::identity(4)).unwrap();
        assert_eq!(p, DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 1.0])));
    }

    #[test]
    fn power_functions_at_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for name in ["vinberg", "dual_vinberg", "sym(3)", "lorentz(3)"] {
            let v = preset(name).unwrap();
            let shape = random::shape_q(&v, &mut rng);
            let id = SymElement::identity(v.total_size());
            assert!((big_delta(&v, &shape, &id).unwrap() - 1.0).abs() < 1e-14);
            assert!((small_delta(&v, &shape, &id).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn full_cone_big_delta_is_determinant() {
        let v = preset("sym(3)").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random::point_p(&v, &mut rng);
        let d = big_delta(&v, &ShapeVector::block_sizes(&v), &x).unwrap();
        assert!((d / x.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_delta_matches_chi() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for name in ["vinberg", "dual_vinberg", "lorentz(2)"] {
            let v = preset(name).unwrap();
            for _ in 0..10 {
                let t = random::triangular(&v, &mut rng);
                let shape = random::shape_q(&v, &mut rng);
                let xi = triangular::rho_star(&v, &t, &SymElement::identity(v.total_size()));
                let lhs = log_small_delta(&v, &shape, &xi).unwrap();
                let rhs = triangular::log_chi(&v, &shape, &t).unwrap();
                assert!((lhs - rhs).abs() < 1e-11, "{name}");
            }
        }
    }

    #[test]
    fn outside_cones_rejected() {
        let v = preset("vinberg").unwrap();
        let bad = SymElement::from_rows(&[vec![1.0, 0.0, 2.0], vec![0.0, 1.0, 0.0], vec![2.0, 0.0, 1.0]]).unwrap();
        let shape = ShapeVector::constant(3, 1.0);
        assert!(matches!(small_delta(&v, &shape, &bad), Err(ConeError::NotInDualCone)));
        assert!(matches!(big_delta(&v, &shape, &bad), Err(ConeError::NotInCone)));
        let not_z = SymElement::from_rows(&[vec![1.0, 0.5, 0.0], vec![0.5, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(big_delta(&v, &shape, &not_z), Err(ConeError::NotInZ(_))));
    }

    #[test]
    fn shape_parsing() {
        assert_eq!(ShapeVector::parse("1, 2.5,-3").unwrap().values(), &[1.0, 2.5, -3.0]);
        assert!(ShapeVector::parse("1,,2").is_err());
        assert!(ShapeVector::parse("nan").is_err());
    }
}
