//! A matrix realization of the dual cone `Q_V`.
//!
//! `Φ(ξ) = diag(φ_1(ξ), …, φ_r(ξ))` is positive definite exactly on `Q_V`.
//! With `D = Φ(I_N)^{-1/2}` and a permutation `w` that sorts the `d`
//! coordinates by the diagonal block weighting them (block `r` first), the
//! image `{wDΦ(ξ)Dwᵀ}` is a space `Z_Ṽ` on the partition `(ν_r, …, ν_1)`
//! with `ν_k = 1 + Σ_{i<k} dim V_ki`, and `Q_V = l(P_Ṽ)`.
//!
//! `l: Z_Ṽ → Z_V` and its adjoint `l*: Z_V → Z_Ṽ` are stored as `d×d`
//! matrices between the two orthonormal `z_basis` coordinate systems; the
//! matrix of `l*` is the transpose of the matrix of `l`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::element::SymElement;
use crate::error::{ConeError, Result};
use crate::linalg::{self, tol};
use crate::operator::ZOperator;
use crate::power::{self, ShapeVector};
use crate::structure::{BlockStructure, ConeSpecFile};
use crate::wishart::{self, Side};

pub use crate::power::phi_big;

#[derive(Debug, Clone)]
pub struct DualRealization {
    source: BlockStructure,
    target: BlockStructure,
    /// `permutation[p]` is the source coordinate placed at position `p`; `None` for hand-built maps.
    permutation: Option<Vec<usize>>,
    /// Matrix of `l`: target coordinates to source coordinates.
    l: DMatrix<f64>,
    /// Matrix of `l^{-1}`.
    l_inv: DMatrix<f64>,
}

/// Builds the canonical `d`-dimensional realization of `Q_V`.
pub fn dualize(s: &BlockStructure) -> Result<DualRealization> {
    let slots = power::phi_slots(s);
    let d = slots.len();
    let r = s.rank();

    let mut permutation: Vec<usize> = (0..d).collect();
    permutation.sort_by_key(|&a| std::cmp::Reverse(slots[a].1));

    let mut sizes = Vec::with_capacity(r);
    for k in (0..r).rev() {
        let nu = slots.iter().filter(|slot| slot.1 == k).count();
        if nu == 0 {
            return Err(ConeError::PermutationNotFound);
        }
        sizes.push(nu);
    }

    let scale = DVector::from_iterator(d, slots.iter().map(|&(_, row)| 1.0 / (s.sizes()[row] as f64).sqrt()));
    let images: Vec<DMatrix<f64>> = s
        .z_basis()
        .iter()
        .map(|e| realize_with(s, &permutation, &scale, e))
        .collect::<Result<_>>()?;

    // Off-diagonal target blocks are spanned by the corresponding blocks of the images.
    let mut offsets = Vec::with_capacity(r);
    let mut acc = 0;
    for &nu in &sizes {
        offsets.push(acc);
        acc += nu;
    }
    let mut blocks = BTreeMap::new();
    for big_k in 0..r {
        for big_l in big_k + 1..r {
            let (nl, nk) = (sizes[big_l], sizes[big_k]);
            let candidates: Vec<DMatrix<f64>> = images
                .iter()
                .map(|x| x.view((offsets[big_l], offsets[big_k]), (nl, nk)).into_owned())
                .collect();
            let (basis, _) = linalg::gram_schmidt(&candidates, |a, b| linalg::frob(a, b) / nl as f64);
            if !basis.is_empty() {
                blocks.insert((big_l, big_k), basis);
            }
        }
    }
    let target = BlockStructure::new_validated(sizes, blocks)?;
    if target.dim_z() != d {
        return Err(ConeError::StructureMismatch(format!(
            "dual realization has dimension {}, expected {d}",
            target.dim_z()
        )));
    }

    let mut l_inv = DMatrix::zeros(d, d);
    for (a, x) in images.iter().enumerate() {
        let xs = SymElement::symmetrized(x.clone());
        let res = target.membership_residual(&xs)?;
        if res > tol::MEMBERSHIP * linalg::max_abs(x).max(1.0) {
            return Err(ConeError::NotInZ(res));
        }
        l_inv.set_column(a, &target.coords_unchecked(x));
    }
    let l = linalg::inverse(&l_inv, "dual isomorphism")?;
    Ok(DualRealization {
        source: s.clone(),
        target,
        permutation: Some(permutation),
        l,
        l_inv,
    })
}

/// `wDΦ(ξ)Dwᵀ`.
fn realize_with(s: &BlockStructure, permutation: &[usize], scale: &DVector<f64>, xi: &SymElement) -> Result<DMatrix<f64>> {
    let p = phi_big(s, xi)?;
    let d = p.nrows();
    Ok(DMatrix::from_fn(d, d, |i, j| {
        let (a, b) = (permutation[i], permutation[j]);
        scale[a] * p[(a, b)] * scale[b]
    }))
}

impl DualRealization {
    /// A realization given by an explicit linear map `l^{-1}: Z_V → Z_Ṽ`.
    pub fn from_inverse_map<F>(source: &BlockStructure, target: &BlockStructure, l_inv_map: F) -> Result<Self>
    where
        F: Fn(&SymElement) -> DMatrix<f64>,
    {
        if source.dim_z() != target.dim_z() {
            return Err(ConeError::DimensionMismatch("source and target dimensions differ".into()));
        }
        let l_inv = ZOperator::assemble_between(source, target, l_inv_map).into_matrix();
        let l = linalg::inverse(&l_inv, "dual isomorphism")?;
        Ok(DualRealization {
            source: source.clone(),
            target: target.clone(),
            permutation: None,
            l,
            l_inv,
        })
    }

    pub fn source(&self) -> &BlockStructure {
        &self.source
    }

    /// The structure `Ṽ` with `P_Ṽ ≅ Q_V`.
    pub fn target(&self) -> &BlockStructure {
        &self.target
    }

    pub fn permutation(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }

    /// Matrix of `l` (target coordinates → source coordinates).
    pub fn l_matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn l_inv_matrix(&self) -> &DMatrix<f64> {
        &self.l_inv
    }

    /// Matrix of `l*` (source coordinates → target coordinates).
    pub fn l_star_matrix(&self) -> DMatrix<f64> {
        self.l.transpose()
    }

    /// `l: Z_Ṽ → Z_V`.
    pub fn l(&self, x: &SymElement) -> Result<SymElement> {
        let c = self.target.coords(x)?;
        Ok(self.source.from_coords_unchecked(&(&self.l * c)))
    }

    pub fn l_inv(&self, xi: &SymElement) -> Result<SymElement> {
        let c = self.source.coords(xi)?;
        Ok(self.target.from_coords_unchecked(&(&self.l_inv * c)))
    }

    /// `l*: Z_V → Z_Ṽ`.
    pub fn l_star(&self, x: &SymElement) -> Result<SymElement> {
        let c = self.source.coords(x)?;
        Ok(self.target.from_coords_unchecked(&(self.l.transpose() * c)))
    }

    pub fn l_star_inv(&self, y: &SymElement) -> Result<SymElement> {
        let c = self.target.coords(y)?;
        Ok(self.source.from_coords_unchecked(&(self.l_inv.transpose() * c)))
    }

    /// `ρ(wΦ(I_N)^{-1/2})Φ(ξ)` as a full `d×d` matrix; only for computed realizations.
    pub fn realize(&self, xi: &SymElement) -> Result<DMatrix<f64>> {
        let perm = self
            .permutation
            .as_ref()
            .ok_or_else(|| ConeError::Unsupported("hand-built realizations carry no permutation".into()))?;
        let slots = power::phi_slots(&self.source);
        let scale = DVector::from_iterator(
            slots.len(),
            slots.iter().map(|&(_, row)| 1.0 / (self.source.sizes()[row] as f64).sqrt()),
        );
        realize_with(&self.source, perm, &scale, xi)
    }

    /// `max |ρ(wD)Φ(ξ) − diag(ξ_rr I_{ν_r}, …, ξ_11 I_{ν_1})|` for a diagonal `ξ`, given by its block scalars.
    pub fn diagonal_condition_residual(&self, diag: &[f64]) -> Result<f64> {
        let s = &self.source;
        if diag.len() != s.rank() {
            return Err(ConeError::DimensionMismatch(format!("expected {} diagonal values", s.rank())));
        }
        let n = s.total_size();
        let mut xi = DMatrix::zeros(n, n);
        for (k, &v) in diag.iter().enumerate() {
            for j in 0..s.sizes()[k] {
                xi[(s.offset(k) + j, s.offset(k) + j)] = v;
            }
        }
        let img = self.realize(&SymElement::symmetrized(xi))?;
        let mut expect = Vec::with_capacity(img.nrows());
        for (jt, &nu) in self.target.sizes().iter().enumerate() {
            let k = s.rank() - 1 - jt;
            expect.extend(std::iter::repeat_n(diag[k], nu));
        }
        let expect = DMatrix::from_diagonal(&DVector::from_vec(expect));
        Ok(linalg::max_abs(&(img - expect)))
    }

    /// `|Δ^Ṽ_{s*}(x) − δ^V_s(l(x))| / |δ^V_s(l(x))|` for `x ∈ P_Ṽ`.
    pub fn check_strange(&self, shape: &ShapeVector, x: &SymElement) -> Result<f64> {
        let lhs = power::log_big_delta(&self.target, &shape.reversed(), x)?;
        let lx = self.l(x)?;
        let rhs = power::log_small_delta(&self.source, shape, &lx)?;
        Ok((lhs - rhs).exp_m1().abs())
    }

    /// Variance function of the family on `P_V` through the realization:
    /// `(l*)^{-1} ∘ V^Ṽ_Q(s*, l*(x)) ∘ l^{-1}`.
    pub fn variance_p(&self, shape: &ShapeVector, x: &SymElement) -> Result<ZOperator> {
        shape.check_rank(&self.source)?;
        if !shape.all_positive() {
            return Err(ConeError::InvalidShape("all components must be positive".into()));
        }
        if !wishart::gindikin(&self.source, Side::P, shape)?.in_set() {
            return Err(ConeError::OutsideGindikin);
        }
        if !self.source.contains_p(x) {
            return Err(ConeError::NotInCone);
        }
        let m = self.l_star(x)?;
        let inner = wishart::variance_q(&self.target, &shape.reversed(), &m)?;
        ZOperator::from_matrix(self.l_inv.transpose() * inner.matrix() * &self.l_inv)
    }

    pub fn to_bundle(&self) -> DualBundle {
        let rows = |m: &DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        DualBundle {
            spec: ConeSpecFile::from_structure(&self.target),
            source: ConeSpecFile::from_structure(&self.source),
            permutation: self.permutation.clone(),
            l: rows(&self.l),
            l_star: rows(&self.l.transpose()),
        }
    }
}

/// [`variance_p_via_dual`] as a free function.
pub fn variance_p_via_dual(real: &DualRealization, shape: &ShapeVector, x: &SymElement) -> Result<ZOperator> {
    real.variance_p(shape, x)
}

/// Serialized form of a realization: the target cone spec plus the maps.
///
/// The spec fields are flattened, so a bundle reads as an ordinary cone spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualBundle {
    #[serde(flatten)]
    pub spec: ConeSpecFile,
    pub source: ConeSpecFile,
    pub permutation: Option<Vec<usize>>,
    /// Matrix of `l` in `z_basis` coordinates, row-major.
    pub l: Vec<Vec<f64>>,
    /// Matrix of `l*`, row-major.
    pub l_star: Vec<Vec<f64>>,
}

impl DualBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_realization(self) -> Result<DualRealization> {
        let source = self.source.to_structure()?;
        let target = self.spec.to_structure()?;
        let d = source.dim_z();
        if target.dim_z() != d || self.l.len() != d || self.l.iter().any(|r| r.len() != d) {
            return Err(ConeError::DimensionMismatch("bundle matrices do not match the structures".into()));
        }
        let l = DMatrix::from_row_iterator(d, d, self.l.into_iter().flatten());
        let l_inv = linalg::inverse(&l, "dual isomorphism")?;
        Ok(DualRealization {
            source,
            target,
            permutation: self.permutation,
            l,
            l_inv,
        })
    }
}

/// The optimal 4×4 realization of the Vinberg dual cone on partition `(2, 1, 1)`:
/// `l^{-1}(ξ) = [[ξ_33, 0, ξ_32, 0], [0, ξ_33, 0, ξ_31], [ξ_32, 0, ξ_22, 0], [0, ξ_31, 0, ξ_11]]`.
pub fn vinberg_optimal_realization() -> Result<DualRealization> {
    let v = crate::structure::preset("vinberg")?;
    let t = crate::structure::preset("dual_vinberg")?;
    DualRealization::from_inverse_map(&v, &t, |xi| {
        let (x1, x2, x3, x4, x5) = (xi[(0, 0)], xi[(1, 1)], xi[(2, 2)], xi[(2, 0)], xi[(2, 1)]);
        DMatrix::from_row_slice(
            4,
            4,
            &[
                x3, 0.0, x5, 0.0, //
                0.0, x3, 0.0, x4, //
                x5, 0.0, x2, 0.0, //
                0.0, x4, 0.0, x1,
            ],
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::preset;

    #[test]
    fn vinberg_realization_shape() {
        let v = preset("vinberg").unwrap();
        let real = dualize(&v).unwrap();
        assert_eq!(real.target().sizes(), &[3, 1, 1]);
        assert_eq!(real.target().block_dim(1, 0), 1);
        assert_eq!(real.target().block_dim(2, 0), 1);
        assert_eq!(real.target().block_dim(2, 1), 0);
        assert_eq!(real.permutation().unwrap(), &[1, 3, 4, 2, 0]);
    }

    #[test]
    fn diagonal_condition_holds() {
        let v = preset("dual_vinberg").unwrap();
        let real = dualize(&v).unwrap();
        assert!(real.diagonal_condition_residual(&[2.0, 3.0, 5.0]).unwrap() < 1e-14);
    }

    #[test]
    fn bundle_round_trip() {
        let real = dualize(&preset("sym(3)").unwrap()).unwrap();
        let back = DualBundle::from_json(&real.to_bundle().to_json())
            .unwrap()
            .into_realization()
            .unwrap();
        assert!(back.target().same_as(real.target()));
        assert_eq!(back.l_matrix(), real.l_matrix());
    }

    #[test]
    fn bundle_reads_as_cone_spec() {
        let real = dualize(&preset("vinberg").unwrap()).unwrap();
        let s = crate::structure::read_cone_spec(&real.to_bundle().to_json()).unwrap();
        assert!(s.validate().passed());
    }

    #[test]
    fn optimal_vinberg_l_star_display() {
        let real = vinberg_optimal_realization().unwrap();
        let theta = SymElement::from_rows(&[vec![1.0, 0.0, 4.0], vec![0.0, 2.0, 5.0], vec![4.0, 5.0, 3.0]]).unwrap();
        let got = real.l_star(&theta).unwrap();
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[1.5, 0.0, 5.0, 0.0, 0.0, 1.5, 0.0, 4.0, 5.0, 0.0, 2.0, 0.0, 0.0, 4.0, 0.0, 1.0],
        );
        assert!(linalg::max_abs(&(got.into_matrix() - expect)) < 1e-14);
    }

    fn random_cases() -> Vec<BlockStructure> {
        ["vinberg", "dual_vinberg", "sym(3)", "lorentz(3)"].iter().map(|n| preset(n).unwrap()).collect()
    }

    #[test]
    fn strange_identity() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for v in random_cases() {
            let real = dualize(&v).unwrap();
            let shape = crate::random::shape_p(&v, &mut rng);
            let x = crate::random::point_p(real.target(), &mut rng);
            assert!(real.check_strange(&shape, &x).unwrap() < 1e-10);
        }
    }

    #[test]
    fn variance_through_dual_matches_direct() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for v in random_cases() {
            let real = dualize(&v).unwrap();
            let shape = crate::random::shape_p(&v, &mut rng);
            let x = crate::random::point_p(&v, &mut rng);
            let direct = wishart::variance_p(&v, &shape, &x).unwrap();
            let via = real.variance_p(&shape, &x).unwrap();
            assert!(via.rel_diff(&direct) < 1e-9, "{}", via.rel_diff(&direct));
        }
    }

    #[test]
    fn optimal_vinberg_l_star_inverse_display() {
        let real = vinberg_optimal_realization().unwrap();
        let (x, y, z, u, v) = (1.3, 2.1, 0.7, 0.4, -0.2);
        let m = SymElement::from_rows(&[
            vec![x, 0.0, u, 0.0],
            vec![0.0, x, 0.0, v],
            vec![u, 0.0, y, 0.0],
            vec![0.0, v, 0.0, z],
        ])
        .unwrap();
        let got = real.l_star_inv(&m).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[z, 0.0, v, 0.0, y, u, v, u, 2.0 * x]);
        assert!(linalg::max_abs(&(got.into_matrix() - expect)) < 1e-14);
    }

    #[test]
    fn dual_vinberg_hat_display() {
        let t = preset("dual_vinberg").unwrap();
        let (m1, m2, m3, m4, m5) = (1.7, 2.2, 3.1, 0.6, -0.9);
        let m = SymElement::from_rows(&[
            vec![m3, 0.0, m5, 0.0],
            vec![0.0, m3, 0.0, m4],
            vec![m5, 0.0, m2, 0.0],
            vec![0.0, m4, 0.0, m1],
        ])
        .unwrap();
        let c = 0.5 * (m4 * m4 / m1 - m5 * m5 / m2);
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[m3 - c, 0.0, m5, 0.0, 0.0, m3 + c, 0.0, m4, m5, 0.0, m2, 0.0, 0.0, m4, 0.0, m1],
        );
        let got = crate::triangular::hat(&t, &m).unwrap();
        assert!(linalg::max_abs(&(got.into_matrix() - expect)) < 1e-12);
    }

    #[test]
    fn optimal_vinberg_constant_shape() {
        let real = vinberg_optimal_realization().unwrap();
        let t = real.target().clone();
        let p = 1.6;
        let shape = ShapeVector::constant(3, p);
        let theta = SymElement::from_rows(&[vec![2.0, 0.0, 0.4], vec![0.0, 1.5, -0.3], vec![0.4, -0.3, 1.2]]).unwrap();
        let m = real.l_star(&theta).unwrap();
        let mh = crate::triangular::hat(&t, &m).unwrap().into_matrix();
        let inv = linalg::spd_inverse(&mh).unwrap();
        let m_first = linalg::zero_pad(&linalg::spd_inverse(&linalg::leading(&inv, 2)).unwrap(), 4);
        let rest = &mh - &m_first;
        let inner = ZOperator::assemble(&t, |e| {
            (&mh * e.matrix() * &mh) * 2.0 - &rest * e.matrix() * &rest
        })
        .scaled(1.0 / p);
        let expect = real.l_inv_matrix().transpose() * inner.matrix() * real.l_inv_matrix();
        let got = real.variance_p(&shape, &theta).unwrap();
        assert!(linalg::rel_diff(got.matrix(), &expect) < 1e-10);
        let direct = wishart::variance_p(real.source(), &shape, &theta).unwrap();
        assert!(got.rel_diff(&direct) < 1e-9);
        let canonical = dualize(real.source()).unwrap().variance_p(&shape, &theta).unwrap();
        assert!(canonical.rel_diff(&direct) < 1e-9);
    }
}
