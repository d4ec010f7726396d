//! Random instances for property tests and the acceptance suite.
//!
//! Draws are kept moderately conditioned: diagonal scalars lie in `[e^{-1/2}, e^{1/2}]`
//! and off-diagonal coefficients are standard normal scaled by `0.6`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::element::SymElement;
use crate::power::ShapeVector;
use crate::structure::BlockStructure;
use crate::triangular::{self, TriangularFactor};

const OFF_DIAGONAL_SCALE: f64 = 0.6;

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn triangular<R: Rng + ?Sized>(s: &BlockStructure, rng: &mut R) -> TriangularFactor {
    let n = s.total_size();
    let mut t = DMatrix::zeros(n, n);
    for k in 0..s.rank() {
        let d = rng.random_range(-0.5..0.5_f64).exp();
        for j in 0..s.sizes()[k] {
            t[(s.offset(k) + j, s.offset(k) + j)] = d;
        }
    }
    for (&(l, k), basis) in s.blocks() {
        let mut blk = DMatrix::zeros(s.sizes()[l], s.sizes()[k]);
        for a in basis {
            blk += a * (OFF_DIAGONAL_SCALE * normal(rng));
        }
        t.view_mut((s.offset(l), s.offset(k)), (s.sizes()[l], s.sizes()[k]))
            .copy_from(&blk);
    }
    TriangularFactor::from_matrix_unchecked(t)
}

/// `TTᵀ` for a random `T ∈ H_V`.
pub fn point_p<R: Rng + ?Sized>(s: &BlockStructure, rng: &mut R) -> SymElement {
    triangular::rho(&triangular(s, rng), &SymElement::identity(s.total_size()))
}

/// `ρ*(T)I_N` for a random `T ∈ H_V`.
pub fn point_q<R: Rng + ?Sized>(s: &BlockStructure, rng: &mut R) -> SymElement {
    triangular::rho_star(s, &triangular(s, rng), &SymElement::identity(s.total_size()))
}

/// An element of `Z_V` with standard normal coordinates.
pub fn point_z<R: Rng + ?Sized>(s: &BlockStructure, rng: &mut R) -> SymElement {
    let c = DVector::from_fn(s.dim_z(), |_, _| normal(rng));
    s.from_coords_unchecked(&c)
}

/// A symmetric `n×n` matrix with standard normal entries.
pub fn sym<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymElement {
    SymElement::symmetrized(DMatrix::from_fn(n, n, |_, _| normal(rng)))
}

/// A shape strictly inside the absolutely continuous Q-side stratum:
/// `s_k = ½ Σ_{l>k} dim V_lk + u`, `u ∈ (0.05, 3)`.
pub fn shape_q<R: Rng + ?Sized>(s: &BlockStructure, rng: &mut R) -> ShapeVector {
    ShapeVector::new(
        (0..s.rank())
            .map(|k| {
                let base: usize = (k + 1..s.rank()).map(|l| s.block_dim(l, k)).sum();
                0.5 * base as f64 + rng.random_range(0.05..3.0)
            })
            .collect(),
    )
}

/// A shape strictly inside the absolutely continuous P-side stratum:
/// `s_k = ½ Σ_{i<k} dim V_ki + u`, `u ∈ (0.05, 3)`.
pub fn shape_p<R: Rng + ?Sized>(s: &BlockStructure, rng: &mut R) -> ShapeVector {
    ShapeVector::new(
        (0..s.rank())
            .map(|k| {
                let base: usize = (0..k).map(|i| s.block_dim(k, i)).sum();
                0.5 * base as f64 + rng.random_range(0.05..3.0)
            })
            .collect(),
    )
}
