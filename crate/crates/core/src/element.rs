use std::ops::{Add, AddAssign, Deref, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{ConeError, Result};

/// A real symmetric `N×N` matrix.
///
/// Symmetry holds by construction: every constructor symmetrizes its input.
/// Elements of `Z_V`, `P_V` and `Q_V` are all stored in this full matricial form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymElement(DMatrix<f64>);

impl SymElement {
    /// Wraps `m`, replacing it by `(m + mᵀ)/2`.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(ConeError::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SymElement((m + t) * 0.5)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(ConeError::DimensionMismatch(
                "matrix rows must all have length equal to the row count".into(),
            ));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_matrix(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn identity(n: usize) -> Self {
        SymElement(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        SymElement(DMatrix::zeros(n, n))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SymElement(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Trace inner product ⟨x, y⟩ = tr(xy).
    pub fn trace_inner(&self, other: &SymElement) -> f64 {
        crate::linalg::frob(&self.0, &other.0)
    }

    /// `A x Aᵀ`.
    pub fn congruence(&self, a: &DMatrix<f64>) -> SymElement {
        SymElement::symmetrized(a * &self.0 * a.transpose())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }
}

impl Deref for SymElement {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl Add for &SymElement {
    type Output = SymElement;
    fn add(self, rhs: &SymElement) -> SymElement {
        SymElement(&self.0 + &rhs.0)
    }
}

impl Add for SymElement {
    type Output = SymElement;
    fn add(self, rhs: SymElement) -> SymElement {
        SymElement(self.0 + rhs.0)
    }
}

impl AddAssign<&SymElement> for SymElement {
    fn add_assign(&mut self, rhs: &SymElement) {
        self.0 += &rhs.0;
    }
}

impl Sub for &SymElement {
    type Output = SymElement;
    fn sub(self, rhs: &SymElement) -> SymElement {
        SymElement(&self.0 - &rhs.0)
    }
}

impl Sub for SymElement {
    type Output = SymElement;
    fn sub(self, rhs: SymElement) -> SymElement {
        SymElement(self.0 - rhs.0)
    }
}

impl Mul<f64> for &SymElement {
    type Output = SymElement;
    fn mul(self, rhs: f64) -> SymElement {
        SymElement(&self.0 * rhs)
    }
}

impl Mul<f64> for SymElement {
    type Output = SymElement;
    fn mul(self, rhs: f64) -> SymElement {
        SymElement(self.0 * rhs)
    }
}

impl Neg for SymElement {
    type Output = SymElement;
    fn neg(self) -> SymElement {
        SymElement(-self.0)
    }
}
