//! Wishart exponential families on homogeneous cones in matrix realization.
//!
//! A homogeneous cone is presented as `P_V = Z_V ∩ Sym_+(N)` for a
//! [`BlockStructure`] `V`; its dual `Q_V` lives in the same space under the
//! trace inner product. The crate provides the triangular group action,
//! generalized power functions, mean and inverse-mean maps, the generalized
//! Lauritzen completion, closed-form variance operators on both cones, a
//! matrix realization of the dual cone, exact Monte Carlo sampling for
//! integer shapes, and finite-difference oracles.
//!
//! ```
//! use homcone::{preset, ShapeVector, SymElement, wishart};
//!
//! let v = preset("vinberg").unwrap();
//! let s = ShapeVector::new(vec![1.0, 1.0, 1.0]);
//! let theta = SymElement::identity(3);
//! let m = wishart::mean_q(&v, &s, &theta).unwrap();
//! let back = wishart::inverse_mean_q(&v, &s, &m).unwrap();
//! assert!((back.matrix() - theta.matrix()).amax() < 1e-12);
//! ```

pub mod dual;
pub mod element;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod operator;
pub mod power;
pub mod random;
pub mod structure;
pub mod triangular;
pub mod validation;
pub mod wishart;

pub use element::SymElement;
pub use error::{ConeError, Result, Witness};
pub use operator::ZOperator;
pub use power::ShapeVector;
pub use structure::{graph_to_structure, preset, BasisLabel, BlockStructure, Graph, GraphRealization, ValidationReport};
pub use triangular::TriangularFactor;
