//! Small dense linear-algebra helpers shared by the cone modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{ConeError, Result};

/// Numerical tolerances used throughout the crate.
pub mod tol {
    /// Structure conditions V1–V3, relative to the squared basis-entry scale.
    pub const STRUCT: f64 = 1e-9;
    /// Strict positivity of minors and determinants, relative to the scale.
    pub const PD: f64 = 1e-12;
    /// Membership in Z_V, relative to the entry scale.
    pub const MEMBERSHIP: f64 = 1e-9;
    /// Equalities defining the Gindikin strata (half-integers).
    pub const GINDIKIN: f64 = 1e-12;
    /// Already-orthonormal bases are kept bit-for-bit when the Gram matrix is this close to I.
    pub const ORTHONORMAL_KEEP: f64 = 1e-14;
    /// Relative norm below which a Gram–Schmidt remainder counts as linearly dependent.
    pub const RANK: f64 = 1e-10;
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Frobenius inner product tr(A Bᵀ).
pub fn frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Leading principal `k×k` submatrix.
pub fn leading(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    m.view((0, 0), (k, k)).into_owned()
}

/// Embeds a `k×k` matrix in the top-left corner of an `n×n` zero matrix.
pub fn zero_pad(m: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let k = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((0, 0), (k, k)).copy_from(m);
    out
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = m.clone().cholesky().ok_or(ConeError::NotPositiveDefinite)?;
    Ok(symmetrize(&chol.inverse()))
}

pub fn inverse(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    m.clone().try_inverse().ok_or(ConeError::Singular(what))
}

/// Inverse of a nonsingular lower-triangular matrix by forward substitution.
pub fn lower_triangular_inverse(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    let mut id = DMatrix::identity(n, n);
    if !l.solve_lower_triangular_mut(&mut id) {
        return Err(ConeError::Singular("triangular inverse"));
    }
    // Entries above the diagonal are exactly zero in theory.
    for j in 0..n {
        for i in 0..j {
            id[(i, j)] = 0.0;
        }
    }
    Ok(id)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone().symmetric_eigen().eigenvalues.min()
}

/// Determinant with the convention det of the empty matrix is 1.
pub fn det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        1.0
    } else {
        m.determinant()
    }
}

/// Modified Gram–Schmidt under the inner product `ip`.
///
/// Returns the orthonormal family and the indices of inputs found linearly
/// dependent on their predecessors.
pub fn gram_schmidt<F>(vectors: &[DMatrix<f64>], ip: F) -> (Vec<DMatrix<f64>>, Vec<usize>)
where
    F: Fn(&DMatrix<f64>, &DMatrix<f64>) -> f64,
{
    let mut basis: Vec<DMatrix<f64>> = Vec::with_capacity(vectors.len());
    let mut dependent = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let norm0 = ip(v, v).sqrt();
        let mut w = v.clone();
        for q in &basis {
            let c = ip(&w, q);
            w -= q * c;
        }
        let norm = ip(&w, &w).sqrt();
        if norm0 == 0.0 || norm <= tol::RANK * norm0.max(1.0) {
            dependent.push(idx);
            continue;
        }
        basis.push(w / norm);
    }
    (basis, dependent)
}

/// Relative difference ‖a−b‖_max / max(‖b‖_max, floor).
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1e-300)
}

pub fn vec_max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_flags_dependent_inputs() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DMatrix::from_row_slice(1, 2, &[2.0, 2.0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let (basis, dep) = gram_schmidt(&[a, b, c], frob);
        assert_eq!(basis.len(), 2);
        assert_eq!(dep, vec![1]);
        assert!(frob(&basis[0], &basis[1]).abs() < 1e-15);
    }

    #[test]
    fn triangular_inverse_roundtrip() {
        let l = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 1.0, 3.0, 0.0, -1.0, 0.5, 1.5]);
        let inv = lower_triangular_inverse(&l).unwrap();
        let id = &l * &inv;
        assert!(max_abs(&(id - DMatrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn empty_determinant_is_one() {
        assert_eq!(det(&DMatrix::zeros(0, 0)), 1.0);
    }
}
