use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::BlockStructure;
use crate::error::{ConeError, Result};

/// Named structures.
///
/// * `sym(n)`: all `n_i = 1` and every `V_lk = R`, so `Z_V = Sym(n)`.
/// * `vinberg`: `n = (1,1,1)`, `V_21 = {0}`, `V_31 = V_32 = R`.
/// * `dual_vinberg`: the 4×4 realization of the Vinberg cone on partition `(2,1,1)`
///   with `V_21 = R·(1 0)`, `V_31 = R·(0 1)`, `V_32 = {0}`.
/// * `lorentz(k)`: `n = (k, 1)` with `V_21 = Mat(1, k)`; `P_V` is a Lorentz cone of dimension `k + 2`.
pub fn preset(name: &str) -> Result<BlockStructure> {
    let name = name.trim();
    let unknown = || ConeError::Parse(format!("unknown preset '{name}'"));
    if let Some(arg) = parse_call(name, "sym") {
        let n = arg.ok_or_else(unknown)?;
        return sym(n);
    }
    if let Some(arg) = parse_call(name, "lorentz") {
        let k = arg.ok_or_else(unknown)?;
        return lorentz(k);
    }
    match name {
        "vinberg" => vinberg(),
        "dual_vinberg" => dual_vinberg(),
        _ => Err(unknown()),
    }
}

/// Parses `prefix(n)` or `prefixN`; `Some(None)` when the prefix matches but the argument does not.
fn parse_call(name: &str, prefix: &str) -> Option<Option<usize>> {
    let rest = name.strip_prefix(prefix)?;
    let arg = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(rest);
    Some(arg.trim().parse::<usize>().ok().filter(|&n| n > 0))
}

fn one() -> DMatrix<f64> {
    DMatrix::from_element(1, 1, 1.0)
}

pub(crate) fn sym(n: usize) -> Result<BlockStructure> {
    let mut blocks = BTreeMap::new();
    for k in 0..n {
        for l in k + 1..n {
            blocks.insert((l, k), vec![one()]);
        }
    }
    BlockStructure::new(vec![1; n], blocks)
}

pub(crate) fn vinberg() -> Result<BlockStructure> {
    let mut blocks = BTreeMap::new();
    blocks.insert((2, 0), vec![one()]);
    blocks.insert((2, 1), vec![one()]);
    BlockStructure::new(vec![1, 1, 1], blocks)
}

pub(crate) fn dual_vinberg() -> Result<BlockStructure> {
    let mut blocks = BTreeMap::new();
    blocks.insert((1, 0), vec![DMatrix::from_row_slice(1, 2, &[1.0, 0.0])]);
    blocks.insert((2, 0), vec![DMatrix::from_row_slice(1, 2, &[0.0, 1.0])]);
    BlockStructure::new(vec![2, 1, 1], blocks)
}

pub(crate) fn lorentz(k: usize) -> Result<BlockStructure> {
    let basis = (0..k)
        .map(|j| {
            let mut m = DMatrix::zeros(1, k);
            m[(0, j)] = 1.0;
            m
        })
        .collect();
    let mut blocks = BTreeMap::new();
    blocks.insert((1, 0), basis);
    BlockStructure::new(vec![k, 1], blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in ["sym(1)", "sym(3)", "sym4", "vinberg", "dual_vinberg", "lorentz(3)"] {
            let s = preset(name).unwrap();
            assert!(s.validate().passed(), "{name}");
        }
    }

    #[test]
    fn dimensions() {
        assert_eq!(preset("sym(4)").unwrap().dim_z(), 10);
        assert_eq!(preset("vinberg").unwrap().dim_z(), 5);
        assert_eq!(preset("dual_vinberg").unwrap().dim_z(), 5);
        assert_eq!(preset("lorentz(3)").unwrap().dim_z(), 5);
    }

    #[test]
    fn unknown_names_rejected() {
        assert!(preset("sym()").is_err());
        assert!(preset("sym(0)").is_err());
        assert!(preset("vinburg").is_err());
    }
}
