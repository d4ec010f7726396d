//! Block structures `V = {V_lk}` and the ambient space `Z_V`.
//!
//! A structure fixes a partition `N = n_1 + … + n_r` and, for every pair
//! `k < l`, a subspace `V_lk ⊂ Mat(n_l, n_k)`. Elements of `Z_V` are symmetric
//! matrices whose diagonal blocks are scalar multiples of the identity and
//! whose lower off-diagonal blocks lie in `V_lk`. The cone `P_V` is
//! `Z_V ∩ Sym_+(N)`; its dual `Q_V` is taken with respect to the trace inner
//! product `⟨x, y⟩ = tr(xy)`.
//!
//! Block indices in this API are 0-based; the JSON and graph file formats use
//! 1-based labels.

mod graph;
mod io;
mod presets;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::element::SymElement;
use crate::error::{ConeError, Result};
use crate::linalg::{self, tol};

pub use graph::{graph_to_structure, Graph, GraphRealization};
pub use io::{read_cone_spec, write_cone_spec, ConeSpecFile, MatrixRepr};
pub use presets::preset;

/// What a `z_basis` vector represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    /// `I_{n_k}/√n_k` in diagonal block `k`.
    Diagonal(usize),
    /// The `idx`-th orthonormal basis matrix of `V_lk`, symmetrized and scaled to unit trace norm.
    OffDiagonal { l: usize, k: usize, idx: usize },
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            BasisLabel::Diagonal(k) => write!(f, "d{}", k + 1),
            BasisLabel::OffDiagonal { l, k, idx } => write!(f, "v{},{}#{}", l + 1, k + 1, idx + 1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockStructure {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    blocks: BTreeMap<(usize, usize), Vec<DMatrix<f64>>>,
    z_basis: Vec<SymElement>,
    z_labels: Vec<BasisLabel>,
}

/// Outcome of checking one structure condition over all basis tuples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub passed: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub v1: ConditionCheck,
    pub v2: ConditionCheck,
    pub v3: ConditionCheck,
    /// Orthonormality of `z_basis` under the trace inner product.
    pub orthonormal: ConditionCheck,
    pub tolerance: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.v1.passed && self.v2.passed && self.v3.passed && self.orthonormal.passed
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows = [("V1", self.v1), ("V2", self.v2), ("V3", self.v3), ("orthonormal basis", self.orthonormal)];
        for (name, c) in rows {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{name:<18} {verdict} residual {:.3e}", c.residual)?;
        }
        write!(f, "tolerance {:.1e}: {}", self.tolerance, if self.passed() { "valid" } else { "invalid" })
    }
}

impl BlockStructure {
    /// Builds a structure from block sizes and spanning sets of each `V_lk`.
    ///
    /// Keys of `blocks` are 0-based `(l, k)` with `l > k`; missing keys and
    /// empty lists both mean `V_lk = {0}`. Spanning sets are orthonormalized
    /// with respect to `(A|B) = tr(ABᵀ)/n_l`; linearly dependent inputs are
    /// rejected. The conditions V1–V3 are not checked here, see
    /// [`BlockStructure::validate`].
    pub fn new(sizes: Vec<usize>, blocks: BTreeMap<(usize, usize), Vec<DMatrix<f64>>>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(ConeError::DimensionMismatch("at least one block is required".into()));
        }
        if let Some(k) = sizes.iter().position(|&n| n == 0) {
            return Err(ConeError::DimensionMismatch(format!("block {} has size zero", k + 1)));
        }
        let r = sizes.len();
        let mut clean = BTreeMap::new();
        for (&(l, k), mats) in &blocks {
            if !(k < l && l < r) {
                return Err(ConeError::DimensionMismatch(format!(
                    "block index ({},{}) is not a strictly lower pair for r = {r}",
                    l + 1,
                    k + 1
                )));
            }
            for m in mats {
                if m.nrows() != sizes[l] || m.ncols() != sizes[k] {
                    return Err(ConeError::DimensionMismatch(format!(
                        "basis matrix for V_{},{} is {}x{}, expected {}x{}",
                        l + 1,
                        k + 1,
                        m.nrows(),
                        m.ncols(),
                        sizes[l],
                        sizes[k]
                    )));
                }
            }
            if mats.is_empty() {
                continue;
            }
            let basis = orthonormalize_block(mats, sizes[l]).ok_or(ConeError::RankDeficient { l: l + 1, k: k + 1 })?;
            clean.insert((l, k), basis);
        }

        let mut offsets = Vec::with_capacity(r);
        let mut acc = 0;
        for &n in &sizes {
            offsets.push(acc);
            acc += n;
        }

        let mut s = BlockStructure {
            sizes,
            offsets,
            blocks: clean,
            z_basis: Vec::new(),
            z_labels: Vec::new(),
        };
        s.build_z_basis();
        Ok(s)
    }

    /// Like [`BlockStructure::new`] but also requires V1–V3 to hold.
    pub fn new_validated(sizes: Vec<usize>, blocks: BTreeMap<(usize, usize), Vec<DMatrix<f64>>>) -> Result<Self> {
        let s = Self::new(sizes, blocks)?;
        let report = s.validate();
        if !report.passed() {
            return Err(ConeError::StructureMismatch(format!(
                "conditions V1/V2/V3 residuals {:e}/{:e}/{:e} exceed {:e}",
                report.v1.residual, report.v2.residual, report.v3.residual, report.tolerance
            )));
        }
        Ok(s)
    }

    fn build_z_basis(&mut self) {
        let n = self.total_size();
        let mut basis = Vec::new();
        let mut labels = Vec::new();
        for k in 0..self.rank() {
            let nk = self.sizes[k];
            let mut e = DMatrix::zeros(n, n);
            let o = self.offsets[k];
            let c = 1.0 / (nk as f64).sqrt();
            for j in 0..nk {
                e[(o + j, o + j)] = c;
            }
            basis.push(SymElement::symmetrized(e));
            labels.push(BasisLabel::Diagonal(k));
            for l in k + 1..self.rank() {
                for (idx, a) in self.block_basis(l, k).iter().enumerate() {
                    let scale = 1.0 / (2.0 * self.sizes[l] as f64).sqrt();
                    let mut e = DMatrix::zeros(n, n);
                    e.view_mut((self.offsets[l], o), (self.sizes[l], nk)).copy_from(&(a * scale));
                    e.view_mut((o, self.offsets[l]), (nk, self.sizes[l])).copy_from(&(a.transpose() * scale));
                    basis.push(SymElement::symmetrized(e));
                    labels.push(BasisLabel::OffDiagonal { l, k, idx });
                }
            }
        }
        self.z_basis = basis;
        self.z_labels = labels;
    }

    /// Number of blocks `r`.
    pub fn rank(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Row offset of block `k`, i.e. `N_{k}` in 1-based terms (`n_1 + … + n_k`) for the 0-based index.
    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    /// `N_k = n_1 + … + n_k` for `k` counted from 1; `cumulative_size(0) = 0`.
    pub fn cumulative_size(&self, k: usize) -> usize {
        self.sizes[..k].iter().sum()
    }

    /// Ambient size `N`.
    pub fn total_size(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Orthonormal basis of `V_lk` (0-based, `l > k`); empty when `V_lk = {0}`.
    pub fn block_basis(&self, l: usize, k: usize) -> &[DMatrix<f64>] {
        self.blocks.get(&(l, k)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn block_dim(&self, l: usize, k: usize) -> usize {
        self.block_basis(l, k).len()
    }

    pub fn blocks(&self) -> &BTreeMap<(usize, usize), Vec<DMatrix<f64>>> {
        &self.blocks
    }

    /// `dim Z_V = r + Σ dim V_lk`.
    pub fn dim_z(&self) -> usize {
        self.z_basis.len()
    }

    pub fn z_basis(&self) -> &[SymElement] {
        &self.z_basis
    }

    pub fn z_labels(&self) -> &[BasisLabel] {
        &self.z_labels
    }

    /// Inner product `(A|B)` on `V_lk`, defined by `(ABᵀ+BAᵀ)/2 = (A|B) I_{n_l}`.
    pub fn block_inner(&self, l: usize, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        linalg::frob(a, b) / self.sizes[l] as f64
    }

    /// Block `(l, k)` of a full `N×N` matrix.
    pub fn block_of(&self, x: &DMatrix<f64>, l: usize, k: usize) -> DMatrix<f64> {
        x.view((self.offsets[l], self.offsets[k]), (self.sizes[l], self.sizes[k])).into_owned()
    }

    fn check_size(&self, x: &DMatrix<f64>) -> Result<()> {
        let n = self.total_size();
        if x.nrows() != n || x.ncols() != n {
            return Err(ConeError::DimensionMismatch(format!(
                "expected a {n}x{n} matrix, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Coordinates `c_a = tr(x e_a)` of a symmetric matrix in `z_basis`.
    pub fn coords(&self, x: &SymElement) -> Result<DVector<f64>> {
        self.check_size(x)?;
        Ok(self.coords_unchecked(x))
    }

    pub(crate) fn coords_unchecked(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim_z());
        for (a, label) in self.z_labels.iter().enumerate() {
            c[a] = match *label {
                BasisLabel::Diagonal(k) => {
                    let o = self.offsets[k];
                    let tr: f64 = (0..self.sizes[k]).map(|j| x[(o + j, o + j)]).sum();
                    tr / (self.sizes[k] as f64).sqrt()
                }
                BasisLabel::OffDiagonal { l, k, idx } => {
                    let blk = x.view((self.offsets[l], self.offsets[k]), (self.sizes[l], self.sizes[k]));
                    let a_mat = &self.blocks[&(l, k)][idx];
                    let dot: f64 = blk.iter().zip(a_mat.iter()).map(|(p, q)| p * q).sum();
                    dot * (2.0 / self.sizes[l] as f64).sqrt()
                }
            };
        }
        c
    }

    /// The element `Σ_a c_a e_a` of `Z_V`.
    pub fn from_coords(&self, c: &DVector<f64>) -> Result<SymElement> {
        if c.len() != self.dim_z() {
            return Err(ConeError::DimensionMismatch(format!(
                "expected {} coordinates, got {}",
                self.dim_z(),
                c.len()
            )));
        }
        Ok(self.from_coords_unchecked(c))
    }

    pub(crate) fn from_coords_unchecked(&self, c: &DVector<f64>) -> SymElement {
        let n = self.total_size();
        let mut x = DMatrix::zeros(n, n);
        for (a, label) in self.z_labels.iter().enumerate() {
            match *label {
                BasisLabel::Diagonal(k) => {
                    let o = self.offsets[k];
                    let v = c[a] / (self.sizes[k] as f64).sqrt();
                    for j in 0..self.sizes[k] {
                        x[(o + j, o + j)] += v;
                    }
                }
                BasisLabel::OffDiagonal { l, k, idx } => {
                    let a_mat = &self.blocks[&(l, k)][idx];
                    let v = c[a] / (2.0 * self.sizes[l] as f64).sqrt();
                    let (ol, ok) = (self.offsets[l], self.offsets[k]);
                    for i in 0..self.sizes[l] {
                        for j in 0..self.sizes[k] {
                            let w = v * a_mat[(i, j)];
                            x[(ol + i, ok + j)] += w;
                            x[(ok + j, ol + i)] += w;
                        }
                    }
                }
            }
        }
        SymElement::symmetrized(x)
    }

    /// The projection `π: Sym(N) → Z_V`, characterized by `⟨π(x), a⟩ = tr(xa)` for all `a ∈ Z_V`.
    pub fn project(&self, x: &SymElement) -> Result<SymElement> {
        self.check_size(x)?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &DMatrix<f64>) -> SymElement {
        self.from_coords_unchecked(&self.coords_unchecked(x))
    }

    /// `max |x − π(x)|`.
    pub fn membership_residual(&self, x: &SymElement) -> Result<f64> {
        let p = self.project(x)?;
        Ok(linalg::max_abs(&(x.matrix() - p.matrix())))
    }

    pub fn ensure_in_z(&self, x: &SymElement) -> Result<()> {
        let res = self.membership_residual(x)?;
        if res > tol::MEMBERSHIP * linalg::max_abs(x).max(1.0) {
            return Err(ConeError::NotInZ(res));
        }
        Ok(())
    }

    pub fn contains_z(&self, x: &SymElement) -> bool {
        self.ensure_in_z(x).is_ok()
    }

    /// `x ∈ P_V`: `x ∈ Z_V` and positive definite.
    pub fn contains_p(&self, x: &SymElement) -> bool {
        self.contains_z(x) && x.matrix().clone().cholesky().is_some()
    }

    /// `J_k = (I_{N_k})_0`, `k` counted from 1.
    pub fn j_matrix(&self, k: usize) -> DMatrix<f64> {
        let n = self.total_size();
        let nk = self.cumulative_size(k);
        let mut j = DMatrix::zeros(n, n);
        for i in 0..nk {
            j[(i, i)] = 1.0;
        }
        j
    }

    /// Checks V1–V3 on basis tuples and orthonormality of `z_basis`.
    pub fn validate(&self) -> ValidationReport {
        let r = self.rank();
        let scale = self
            .blocks
            .values()
            .flatten()
            .map(linalg::max_abs)
            .fold(1.0_f64, f64::max);
        let tolerance = tol::STRUCT * scale * scale;

        let mut v1 = 0.0_f64;
        let mut v2 = 0.0_f64;
        for i in 0..r {
            for k in i + 1..r {
                for l in k + 1..r {
                    // V1: V_lk · V_ki ⊂ V_li
                    for a in self.block_basis(l, k) {
                        for b in self.block_basis(k, i) {
                            v1 = v1.max(self.span_residual(&(a * b), l, i));
                        }
                    }
                    // V2: V_li · V_kiᵀ ⊂ V_lk
                    for a in self.block_basis(l, i) {
                        for b in self.block_basis(k, i) {
                            v2 = v2.max(self.span_residual(&(a * b.transpose()), l, k));
                        }
                    }
                }
            }
        }

        let mut v3 = 0.0_f64;
        for (&(l, _), basis) in &self.blocks {
            let nl = self.sizes[l];
            for a in basis {
                for b in basis {
                    let s = a * b.transpose() + b * a.transpose();
                    let c = s.trace() / nl as f64;
                    let dev = s - DMatrix::identity(nl, nl) * c;
                    v3 = v3.max(linalg::max_abs(&dev));
                }
            }
        }

        let mut ortho = 0.0_f64;
        for (a, ea) in self.z_basis.iter().enumerate() {
            for (b, eb) in self.z_basis.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                ortho = ortho.max((ea.trace_inner(eb) - target).abs());
            }
        }

        let check = |res: f64| ConditionCheck {
            passed: res <= tolerance,
            residual: res,
        };
        ValidationReport {
            v1: check(v1),
            v2: check(v2),
            v3: check(v3),
            orthonormal: check(ortho),
            tolerance,
        }
    }

    /// Distance (max-abs) from `m ∈ Mat(n_l, n_k)` to `span V_lk`.
    fn span_residual(&self, m: &DMatrix<f64>, l: usize, k: usize) -> f64 {
        let mut rem = m.clone();
        for q in self.block_basis(l, k) {
            let c = self.block_inner(l, m, q);
            rem -= q * c;
        }
        linalg::max_abs(&rem)
    }

    /// Structural equality: same sizes and bit-identical block bases.
    pub fn same_as(&self, other: &BlockStructure) -> bool {
        self.sizes == other.sizes && self.blocks == other.blocks
    }
}

/// Orthonormalizes a spanning set of `V_lk` under `(A|B) = tr(ABᵀ)/n_l`.
///
/// Returns `None` on linear dependence. Inputs that are already orthonormal
/// are returned unchanged so that serialized structures round-trip exactly.
fn orthonormalize_block(mats: &[DMatrix<f64>], nl: usize) -> Option<Vec<DMatrix<f64>>> {
    let ip = |a: &DMatrix<f64>, b: &DMatrix<f64>| linalg::frob(a, b) / nl as f64;
    let already = mats.iter().enumerate().all(|(i, a)| {
        mats.iter().enumerate().all(|(j, b)| {
            let target = if i == j { 1.0 } else { 0.0 };
            (ip(a, b) - target).abs() <= tol::ORTHONORMAL_KEEP
        })
    });
    if already {
        return Some(mats.to_vec());
    }
    let (basis, dependent) = linalg::gram_schmidt(mats, ip);
    if dependent.is_empty() {
        Some(basis)
    } else {
        None
    }
}
