use nalgebra::{DMatrix, DVector};

use crate::element::SymElement;
use crate::error::{ConeError, Result};
use crate::linalg;
use crate::structure::BlockStructure;

/// A linear operator on `Z_V`, stored as its `d×d` matrix in `z_basis` coordinates.
///
/// Column `a` holds the coordinates of the image of `e_a`, so entry `(b, a)` is `⟨e_b, A e_a⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZOperator {
    matrix: DMatrix<f64>,
}

impl ZOperator {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(ConeError::DimensionMismatch("operator matrix must be square".into()));
        }
        Ok(ZOperator { matrix })
    }

    /// Materializes `f` column by column on `z_basis`.
    pub fn assemble<F>(s: &BlockStructure, f: F) -> Self
    where
        F: Fn(&SymElement) -> DMatrix<f64>,
    {
        let d = s.dim_z();
        let mut matrix = DMatrix::zeros(d, d);
        for (a, e) in s.z_basis().iter().enumerate() {
            matrix.set_column(a, &s.coords_unchecked(&f(e)));
        }
        ZOperator { matrix }
    }

    /// Materializes `f: Z_V → Z_W` on the `z_basis` of `from`, in the coordinates of `to`.
    pub fn assemble_between<F>(from: &BlockStructure, to: &BlockStructure, f: F) -> Self
    where
        F: Fn(&SymElement) -> DMatrix<f64>,
    {
        let mut matrix = DMatrix::zeros(to.dim_z(), from.dim_z());
        for (a, e) in from.z_basis().iter().enumerate() {
            matrix.set_column(a, &to.coords_unchecked(&f(e)));
        }
        ZOperator { matrix }
    }

    pub fn identity(d: usize) -> Self {
        ZOperator {
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn apply_coords(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.matrix * c
    }

    pub fn apply(&self, s: &BlockStructure, x: &SymElement) -> Result<SymElement> {
        if s.dim_z() != self.dim() {
            return Err(ConeError::DimensionMismatch(format!(
                "operator acts on dimension {}, structure has {}",
                self.dim(),
                s.dim_z()
            )));
        }
        let c = s.coords(x)?;
        Ok(s.from_coords_unchecked(&self.apply_coords(&c)))
    }

    /// `max |A − Aᵀ|`.
    pub fn symmetry_residual(&self) -> f64 {
        linalg::max_abs(&(&self.matrix - self.matrix.transpose()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&linalg::symmetrize(&self.matrix))
    }

    pub fn inverse(&self) -> Result<ZOperator> {
        Ok(ZOperator {
            matrix: linalg::inverse(&self.matrix, "operator inverse")?,
        })
    }

    /// `max |A − B| / max |B|`.
    pub fn rel_diff(&self, other: &ZOperator) -> f64 {
        linalg::rel_diff(&self.matrix, &other.matrix)
    }

    /// `A ∘ B`.
    pub fn compose(&self, other: &ZOperator) -> ZOperator {
        ZOperator {
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn transpose(&self) -> ZOperator {
        ZOperator {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn scaled(&self, c: f64) -> ZOperator {
        ZOperator {
            matrix: &self.matrix * c,
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.matrix.row(i).iter().copied().collect()).collect()
    }
}
