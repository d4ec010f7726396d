//! The triangular group `H_V` and its actions on `Z_V`.
//!
//! `H_V` consists of lower block-triangular `N×N` matrices whose diagonal
//! blocks are `t_kk·I_{n_k}` with `t_kk > 0` and whose off-diagonal blocks lie
//! in `V_lk`. It acts simply transitively on `P_V` by `ρ(T)x = TxTᵀ` and on
//! `Q_V` by `ρ*(T)ξ = π(TᵀξT)`.

use nalgebra::DMatrix;

use crate::element::SymElement;
use crate::error::{ConeError, Result};
use crate::linalg::{self, tol};
use crate::power::{self, ShapeVector};
use crate::structure::BlockStructure;

#[derive(Debug, Clone, PartialEq)]
pub struct TriangularFactor {
    t: DMatrix<f64>,
}

impl TriangularFactor {
    /// Checks that `t` lies in `H_V`.
    pub fn new(s: &BlockStructure, t: DMatrix<f64>) -> Result<Self> {
        let n = s.total_size();
        if t.nrows() != n || t.ncols() != n {
            return Err(ConeError::DimensionMismatch(format!(
                "expected a {n}x{n} matrix, got {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        let scale = linalg::max_abs(&t).max(1.0);
        let bound = tol::MEMBERSHIP * scale;
        for j in 0..n {
            for i in 0..j {
                if t[(i, j)].abs() > bound {
                    return Err(ConeError::StructureMismatch("factor is not lower triangular".into()));
                }
            }
        }
        // Strictly lower part must be a V-element; the diagonal blocks must be positive scalars.
        let mut sym = &t + t.transpose();
        for k in 0..s.rank() {
            let o = s.offset(k);
            let nk = s.sizes()[k];
            let d = t[(o, o)];
            if d <= 0.0 {
                return Err(ConeError::NotPositiveDefinite);
            }
            for i in 0..nk {
                for j in 0..nk {
                    let target = if i == j { d } else { 0.0 };
                    if (t[(o + i, o + j)] - target).abs() > bound {
                        return Err(ConeError::StructureMismatch(format!(
                            "diagonal block {} is not a scalar matrix",
                            k + 1
                        )));
                    }
                }
            }
            for i in 0..nk {
                sym[(o + i, o + i)] = 0.0;
            }
        }
        let lower = SymElement::symmetrized(sym);
        let res = s.membership_residual(&lower)?;
        if res > bound {
            return Err(ConeError::NotInZ(res));
        }
        Ok(TriangularFactor { t })
    }

    pub(crate) fn from_matrix_unchecked(t: DMatrix<f64>) -> Self {
        TriangularFactor { t }
    }

    pub fn identity(s: &BlockStructure) -> Self {
        let n = s.total_size();
        TriangularFactor {
            t: DMatrix::identity(n, n),
        }
    }

    /// Diagonal factor with `t_kk = d[k]`.
    pub fn diagonal(s: &BlockStructure, d: &[f64]) -> Result<Self> {
        if d.len() != s.rank() {
            return Err(ConeError::DimensionMismatch(format!("expected {} diagonal values", s.rank())));
        }
        let mut t = DMatrix::zeros(s.total_size(), s.total_size());
        for (k, &v) in d.iter().enumerate() {
            for j in 0..s.sizes()[k] {
                t[(s.offset(k) + j, s.offset(k) + j)] = v;
            }
        }
        Self::new(s, t)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.t
    }

    /// The scalars `t_kk`.
    pub fn diag(&self, s: &BlockStructure) -> Vec<f64> {
        (0..s.rank()).map(|k| self.t[(s.offset(k), s.offset(k))]).collect()
    }

    /// Group product `TU`.
    pub fn compose(&self, other: &TriangularFactor) -> TriangularFactor {
        TriangularFactor { t: &self.t * &other.t }
    }

    pub fn inverse(&self) -> Result<TriangularFactor> {
        Ok(TriangularFactor {
            t: linalg::lower_triangular_inverse(&self.t)?,
        })
    }
}

/// `χ_s(T) = Π t_kk^{2 s_k}`.
pub fn chi(s: &BlockStructure, shape: &ShapeVector, t: &TriangularFactor) -> Result<f64> {
    Ok(log_chi(s, shape, t)?.exp())
}

pub fn log_chi(s: &BlockStructure, shape: &ShapeVector, t: &TriangularFactor) -> Result<f64> {
    shape.check_rank(s)?;
    Ok(t.diag(s).iter().zip(shape.iter()).map(|(d, sk)| 2.0 * sk * d.ln()).sum())
}

/// `ρ(T)x = TxTᵀ`.
pub fn rho(t: &TriangularFactor, x: &SymElement) -> SymElement {
    x.congruence(&t.t)
}

/// `ρ*(T)ξ = π(TᵀξT)`.
pub fn rho_star(s: &BlockStructure, t: &TriangularFactor, xi: &SymElement) -> SymElement {
    s.project_unchecked(&(t.t.transpose() * xi.matrix() * &t.t))
}

/// The unique `T ∈ H_V` with `TTᵀ = x`.
pub fn cholesky_p(s: &BlockStructure, x: &SymElement) -> Result<TriangularFactor> {
    s.ensure_in_z(x)?;
    let chol = x.matrix().clone().cholesky().ok_or(ConeError::NotPositiveDefinite)?;
    Ok(TriangularFactor { t: chol.unpack() })
}

/// `ξ̂ = TᵀT` for `ξ = ρ*(T)I_N`, computed as the inverse of the Lauritzen completion `ψ_n(ξ)`.
pub fn hat(s: &BlockStructure, xi: &SymElement) -> Result<SymElement> {
    let inv = power::lauritzen_inverse(s, xi)?;
    Ok(SymElement::symmetrized(linalg::spd_inverse(inv.matrix())?))
}

/// The unique `T ∈ H_V` with `ρ*(T)I_N = ξ`.
pub fn decompose_q(s: &BlockStructure, xi: &SymElement) -> Result<TriangularFactor> {
    let inv = power::lauritzen_inverse(s, xi)?;
    let chol = inv.matrix().clone().cholesky().ok_or(ConeError::NotInDualCone)?;
    Ok(TriangularFactor {
        t: linalg::lower_triangular_inverse(&chol.unpack())?,
    })
}

/// Matrix of `ρ(T)` restricted to `Z_V` in `z_basis` coordinates.
pub fn rho_matrix(s: &BlockStructure, t: &TriangularFactor) -> DMatrix<f64> {
    let d = s.dim_z();
    let mut m = DMatrix::zeros(d, d);
    for (a, e) in s.z_basis().iter().enumerate() {
        let img = t.t.clone() * e.matrix() * t.t.transpose();
        m.set_column(a, &s.coords_unchecked(&img));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::structure::preset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chi_of_diagonal_factor() {
        let v = preset("vinberg").unwrap();
        let t = TriangularFactor::diagonal(&v, &[2.0, 3.0, 5.0]).unwrap();
        let c = chi(&v, &ShapeVector::new(vec![1.0, 1.0, 1.0]), &t).unwrap();
        assert!((c - 900.0).abs() < 1e-10);
    }

    #[test]
    fn cholesky_of_diagonal() {
        let v = preset("vinberg").unwrap();
        let t = cholesky_p(&v, &SymElement::diagonal(&[4.0, 9.0, 1.0])).unwrap();
        assert_eq!(t.diag(&v), vec![2.0, 3.0, 1.0]);
    }

    #[test]
    fn rejects_factor_outside_group() {
        let v = preset("vinberg").unwrap();
        let mut t = DMatrix::identity(3, 3);
        t[(1, 0)] = 1.0;
        assert!(TriangularFactor::new(&v, t).is_err());
        let mut u = DMatrix::identity(3, 3);
        u[(0, 2)] = 1.0;
        assert!(TriangularFactor::new(&v, u).is_err());
        assert!(TriangularFactor::diagonal(&v, &[1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn decompose_q_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in ["vinberg", "dual_vinberg", "sym(3)", "lorentz(2)"] {
            let v = preset(name).unwrap();
            for _ in 0..10 {
                let t0 = random::triangular(&v, &mut rng);
                let xi = rho_star(&v, &t0, &SymElement::identity(v.total_size()));
                let t = decompose_q(&v, &xi).unwrap();
                assert!(linalg::max_abs(&(t.matrix() - t0.matrix())) < 1e-9, "{name}");
                let h = hat(&v, &xi).unwrap();
                let expect = t0.matrix().transpose() * t0.matrix();
                assert!(linalg::max_abs(&(h.matrix() - expect)) < 1e-9);
            }
        }
    }

    #[test]
    fn hat_on_identity() {
        let v = preset("dual_vinberg").unwrap();
        let h = hat(&v, &SymElement::identity(4)).unwrap();
        assert!(linalg::max_abs(&(h.into_matrix() - DMatrix::identity(4, 4))) < 1e-14);
    }
}
