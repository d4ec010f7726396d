//! JSON cone-spec files.
//!
//! ```text
//! { "sizes": [n1, ..., nr], "blocks": { "l,k": [[row-major matrix], ...] } }
//! ```
//!
//! Keys are 1-based with `l > k`. Each basis matrix is written as a flat
//! row-major list of `n_l·n_k` numbers; a list of rows is also accepted on input.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::BlockStructure;
use crate::error::{ConeError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRepr {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpecFile {
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub blocks: BTreeMap<String, Vec<MatrixRepr>>,
}

impl MatrixRepr {
    fn to_matrix(&self, rows: usize, cols: usize, key: &str) -> Result<DMatrix<f64>> {
        let flat: Vec<f64> = match self {
            MatrixRepr::Flat(v) => v.clone(),
            MatrixRepr::Rows(r) => {
                if r.len() != rows || r.iter().any(|row| row.len() != cols) {
                    return Err(ConeError::DimensionMismatch(format!(
                        "block {key}: expected {rows}x{cols} rows"
                    )));
                }
                r.iter().flatten().copied().collect()
            }
        };
        if flat.len() != rows * cols {
            return Err(ConeError::DimensionMismatch(format!(
                "block {key}: expected {} entries, got {}",
                rows * cols,
                flat.len()
            )));
        }
        Ok(DMatrix::from_row_slice(rows, cols, &flat))
    }
}

fn parse_key(key: &str) -> Result<(usize, usize)> {
    let bad = || ConeError::Parse(format!("block key '{key}' is not of the form \"l,k\""));
    let (l, k) = key.split_once(',').ok_or_else(bad)?;
    let l: usize = l.trim().parse().map_err(|_| bad())?;
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    if k == 0 || l <= k {
        return Err(ConeError::Parse(format!("block key '{key}' must satisfy l > k >= 1")));
    }
    Ok((l - 1, k - 1))
}

impl ConeSpecFile {
    pub fn to_structure(&self) -> Result<BlockStructure> {
        let r = self.sizes.len();
        let mut blocks = BTreeMap::new();
        for (key, mats) in &self.blocks {
            let (l, k) = parse_key(key)?;
            if l >= r {
                return Err(ConeError::DimensionMismatch(format!("block key '{key}' exceeds r = {r}")));
            }
            let m = mats
                .iter()
                .map(|m| m.to_matrix(self.sizes[l], self.sizes[k], key))
                .collect::<Result<Vec<_>>>()?;
            if blocks.insert((l, k), m).is_some() {
                return Err(ConeError::Parse(format!("duplicate block key '{key}'")));
            }
        }
        BlockStructure::new(self.sizes.clone(), blocks)
    }

    pub fn from_structure(s: &BlockStructure) -> Self {
        let blocks = s
            .blocks()
            .iter()
            .map(|(&(l, k), mats)| {
                let reprs = mats
                    .iter()
                    .map(|m| {
                        let mut flat = Vec::with_capacity(m.len());
                        for i in 0..m.nrows() {
                            for j in 0..m.ncols() {
                                flat.push(m[(i, j)]);
                            }
                        }
                        MatrixRepr::Flat(flat)
                    })
                    .collect();
                (format!("{},{}", l + 1, k + 1), reprs)
            })
            .collect();
        ConeSpecFile {
            sizes: s.sizes().to_vec(),
            blocks,
        }
    }
}

pub fn read_cone_spec(text: &str) -> Result<BlockStructure> {
    let spec: ConeSpecFile = serde_json::from_str(text)?;
    spec.to_structure()
}

pub fn write_cone_spec(s: &BlockStructure) -> String {
    serde_json::to_string_pretty(&ConeSpecFile::from_structure(s)).expect("cone spec serializes")
}

impl BlockStructure {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        read_cone_spec(&std::fs::read_to_string(path)?)
    }
}
