//! Exact sampling of Wishart laws on `Q_V` with shape `(k/2)·n⃗`.
//!
//! A draw is `π(Σ_{j≤k} z_j z_jᵀ)` with `z_j ~ N(0, ½θ^{-1})` in `R^N`.
//! Draws are generated in fixed chunks of [`CHUNK`] samples; chunk `c` uses
//! the ChaCha8 stream `c` of the seed, so batches do not depend on the
//! number of worker threads.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::element::SymElement;
use crate::error::{ConeError, Result};
use crate::linalg;
use crate::operator::ZOperator;
use crate::power::{self, ShapeVector};
use crate::structure::{write_cone_spec, BlockStructure};
use crate::wishart;

pub const CHUNK: usize = 4096;

/// Standard errors allowed between an empirical mean coordinate and its closed form.
pub const MEAN_SE_LIMIT: f64 = 4.0;
/// Standard errors allowed between an empirical covariance entry and its closed form.
pub const COV_SE_LIMIT: f64 = 5.0;
/// Standard errors allowed for the empirical Laplace transform.
pub const LAPLACE_SE_LIMIT: f64 = 4.0;

#[derive(Debug, Clone)]
pub struct SampleBatch {
    structure: BlockStructure,
    theta: SymElement,
    k: usize,
    seed: u64,
    /// `z_basis` coordinates of each draw.
    samples: Vec<DVector<f64>>,
}

pub fn sample(s: &BlockStructure, theta: &SymElement, k: usize, count: usize, seed: u64) -> Result<SampleBatch> {
    if k == 0 {
        return Err(ConeError::InvalidShape("degree k must be at least 1".into()));
    }
    if !s.contains_p(theta) {
        return Err(ConeError::NotInCone);
    }
    let cov = linalg::spd_inverse(theta.matrix())? * 0.5;
    let l = cov.cholesky().ok_or(ConeError::NotPositiveDefinite)?.unpack();
    let n = s.total_size();
    let chunks = count.div_ceil(CHUNK);
    let samples: Vec<DVector<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len)
                .map(|_| {
                    let mut acc = DMatrix::zeros(n, n);
                    for _ in 0..k {
                        let g = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                        let z = &l * g;
                        acc.ger(1.0, &z, &z, 1.0);
                    }
                    s.coords_unchecked(&acc)
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    Ok(SampleBatch {
        structure: s.clone(),
        theta: theta.clone(),
        k,
        seed,
        samples,
    })
}

impl SampleBatch {
    pub fn structure(&self) -> &BlockStructure {
        &self.structure
    }

    pub fn theta(&self) -> &SymElement {
        &self.theta
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn coords(&self) -> &[DVector<f64>] {
        &self.samples
    }

    pub fn element(&self, i: usize) -> SymElement {
        self.structure.from_coords_unchecked(&self.samples[i])
    }

    /// `(k/2)·n⃗`.
    pub fn shape(&self) -> ShapeVector {
        ShapeVector::block_sizes(&self.structure).scaled(0.5 * self.k as f64)
    }

    /// Text export: a header line, then one sample per line in `z_basis` coordinates.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# homcone-batch structure={} theta={} k={} M={} seed={}\n",
            structure_hash(&self.structure),
            theta_hash(&self.theta),
            self.k,
            self.samples.len(),
            self.seed
        );
        for c in &self.samples {
            let line: Vec<String> = c.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Reads a batch written by [`SampleBatch::to_text`]; the structure and `θ` must match the header hashes.
    pub fn from_text(text: &str, s: &BlockStructure, theta: &SymElement) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| ConeError::Parse("empty batch file".into()))?;
        let fields = header
            .strip_prefix("# homcone-batch ")
            .ok_or_else(|| ConeError::Parse("missing batch header".into()))?;
        let get = |key: &str| -> Result<String> {
            fields
                .split_whitespace()
                .find_map(|f| f.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .map(str::to_owned)
                .ok_or_else(|| ConeError::Parse(format!("batch header lacks {key}")))
        };
        let parse_num = |key: &str, v: String| -> Result<u64> {
            v.parse().map_err(|_| ConeError::Parse(format!("bad {key} in batch header")))
        };
        if get("structure")? != structure_hash(s) {
            return Err(ConeError::StructureMismatch("batch was drawn for a different structure".into()));
        }
        if get("theta")? != theta_hash(theta) {
            return Err(ConeError::StructureMismatch("batch was drawn for a different theta".into()));
        }
        let k = parse_num("k", get("k")?)? as usize;
        let m = parse_num("M", get("M")?)? as usize;
        let seed = parse_num("seed", get("seed")?)?;
        let d = s.dim_z();
        let mut samples = Vec::with_capacity(m);
        for (i, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let vals = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| ConeError::Parse(format!("sample {}: {e}", i + 1)))?;
            if vals.len() != d {
                return Err(ConeError::DimensionMismatch(format!(
                    "sample {} has {} coordinates, expected {d}",
                    i + 1,
                    vals.len()
                )));
            }
            samples.push(DVector::from_vec(vals));
        }
        if samples.len() != m {
            return Err(ConeError::Parse(format!("header says M={m}, found {} samples", samples.len())));
        }
        Ok(SampleBatch {
            structure: s.clone(),
            theta: theta.clone(),
            k,
            seed,
            samples,
        })
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the canonical cone-spec serialization.
pub fn structure_hash(s: &BlockStructure) -> String {
    hex_digest(write_cone_spec(s).as_bytes())
}

/// SHA-256 of the row-major little-endian `f64` entries of `θ`.
pub fn theta_hash(theta: &SymElement) -> String {
    let m = theta.matrix();
    let mut bytes = Vec::with_capacity(8 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            bytes.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    hex_digest(&bytes)
}

#[derive(Debug, Clone)]
pub struct EmpiricalMoments {
    pub mean: SymElement,
    /// Standard error of each mean coordinate.
    pub mean_se: DVector<f64>,
    /// Sample covariance of the coordinates (divisor `M − 1`).
    pub cov: ZOperator,
    /// Standard error of each covariance entry.
    pub cov_se: DMatrix<f64>,
}

pub fn empirical_moments(batch: &SampleBatch) -> Result<EmpiricalMoments> {
    let m = batch.len();
    if m < 2 {
        return Err(ConeError::InsufficientSamples(format!("need at least 2 samples, got {m}")));
    }
    let d = batch.structure.dim_z();
    let mf = m as f64;
    let mean = batch.samples.iter().fold(DVector::zeros(d), |acc, c| acc + c) / mf;
    let centered: Vec<DVector<f64>> = batch.samples.iter().map(|c| c - &mean).collect();

    let mut sum = DMatrix::<f64>::zeros(d, d);
    let mut sum_sq = DMatrix::<f64>::zeros(d, d);
    for c in &centered {
        let p = c * c.transpose();
        sum_sq += p.component_mul(&p);
        sum += p;
    }
    let cov = &sum / (mf - 1.0);
    let prod_mean = &sum / mf;
    let prod_var = (sum_sq / mf - prod_mean.component_mul(&prod_mean)) * (mf / (mf - 1.0));
    let cov_se = prod_var.map(|v| (v.max(0.0) / mf).sqrt());
    let mean_se = DVector::from_fn(d, |a, _| (cov[(a, a)].max(0.0) / mf).sqrt());

    Ok(EmpiricalMoments {
        mean: batch.structure.from_coords_unchecked(&mean),
        mean_se,
        cov: ZOperator::from_matrix(cov)?,
        cov_se,
    })
}

/// Sample mean and standard error of `exp(−⟨θ', W⟩)`.
pub fn empirical_laplace(batch: &SampleBatch, theta_prime: &SymElement) -> Result<(f64, f64)> {
    let m = batch.len();
    if m < 2 {
        return Err(ConeError::InsufficientSamples(format!("need at least 2 samples, got {m}")));
    }
    let t = batch.structure.coords(theta_prime)?;
    let vals: Vec<f64> = batch.samples.iter().map(|c| (-t.dot(c)).exp()).collect();
    let mf = m as f64;
    let mean = vals.iter().sum::<f64>() / mf;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (mf - 1.0);
    Ok((mean, (var / mf).sqrt()))
}

/// `Δ_{−s}(θ+θ')/Δ_{−s}(θ)` for the batch shape.
pub fn laplace_ratio(batch: &SampleBatch, theta_prime: &SymElement) -> Result<f64> {
    let s = &batch.structure;
    let neg = batch.shape().negated();
    let sum = batch.theta.clone() + theta_prime.clone();
    Ok((power::log_big_delta(s, &neg, &sum)? - power::log_big_delta(s, &neg, &batch.theta)?).exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub name: String,
    pub empirical: f64,
    pub expected: f64,
    pub standard_error: f64,
    pub limit: f64,
}

impl Comparison {
    /// `|empirical − expected| / SE`; zero when both the gap and the SE vanish.
    pub fn z_score(&self) -> f64 {
        let gap = (self.empirical - self.expected).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.standard_error
        }
    }

    pub fn passed(&self) -> bool {
        self.z_score() <= self.limit
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub k: usize,
    pub samples: usize,
    pub comparisons: Vec<Comparison>,
}

impl MomentReport {
    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(Comparison::passed)
    }

    pub fn max_z(&self, prefix: &str) -> f64 {
        self.comparisons
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .map(Comparison::z_score)
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for MomentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k = {}, M = {}", self.k, self.samples)?;
        writeln!(
            f,
            "note: {} entries compared individually; no multiplicity (Bonferroni) correction applied",
            self.comparisons.len()
        )?;
        for c in &self.comparisons {
            writeln!(
                f,
                "{:<16} empirical {:>24.16e} expected {:>24.16e} se {:.3e} z {:6.2} / {:.0} {}",
                c.name,
                c.empirical,
                c.expected,
                c.standard_error,
                c.z_score(),
                c.limit,
                if c.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Compares the empirical mean and covariance with `mean_Q((k/2)n⃗, θ)` and `variance_Q`,
/// and optionally the empirical Laplace transform at `θ'`.
pub fn check_moments(batch: &SampleBatch, theta_prime: Option<&SymElement>) -> Result<MomentReport> {
    let s = &batch.structure;
    let shape = batch.shape();
    let emp = empirical_moments(batch)?;
    let mean = wishart::mean_q(s, &shape, &batch.theta)?;
    let var = wishart::variance_q(s, &shape, &mean)?;
    let expect_mean = s.coords(&mean)?;
    let got_mean = s.coords(&emp.mean)?;
    let labels = s.z_labels();
    let d = s.dim_z();

    let mut comparisons = Vec::new();
    for a in 0..d {
        comparisons.push(Comparison {
            name: format!("mean[{}]", labels[a]),
            empirical: got_mean[a],
            expected: expect_mean[a],
            standard_error: emp.mean_se[a],
            limit: MEAN_SE_LIMIT,
        });
    }
    for a in 0..d {
        for b in a..d {
            comparisons.push(Comparison {
                name: format!("cov[{},{}]", labels[a], labels[b]),
                empirical: emp.cov.matrix()[(a, b)],
                expected: var.matrix()[(a, b)],
                standard_error: emp.cov_se[(a, b)],
                limit: COV_SE_LIMIT,
            });
        }
    }
    if let Some(tp) = theta_prime {
        let (est, se) = empirical_laplace(batch, tp)?;
        comparisons.push(Comparison {
            name: "laplace".into(),
            empirical: est,
            expected: laplace_ratio(batch, tp)?,
            standard_error: se,
            limit: LAPLACE_SE_LIMIT,
        });
    }
    Ok(MomentReport {
        k: batch.k,
        samples: batch.len(),
        comparisons,
    })
}
