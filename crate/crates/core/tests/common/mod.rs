#![allow(dead_code)]

use homcone::dual::dualize;
use homcone::{graph_to_structure, preset, BlockStructure, Graph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Presets, graph-derived structures, and computed dual realizations (which have `n_k > 1`).
pub fn structures() -> Vec<(String, BlockStructure)> {
    let mut out: Vec<(String, BlockStructure)> = ["sym(1)", "sym(2)", "sym(3)", "sym(4)", "vinberg", "dual_vinberg", "lorentz(1)", "lorentz(3)"]
        .iter()
        .map(|n| (n.to_string(), preset(n).unwrap()))
        .collect();
    let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    out.push(("star4".into(), graph_to_structure(&star).unwrap().structure));
    let split = Graph::from_edges(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4)]).unwrap();
    out.push(("triangle+pendants".into(), graph_to_structure(&split).unwrap().structure));
    for name in ["vinberg", "lorentz(2)", "sym(3)"] {
        let real = dualize(&preset(name).unwrap()).unwrap();
        out.push((format!("dual of {name}"), real.target().clone()));
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(structure index, rng seed)` pairs.
pub fn case() -> impl Strategy<Value = (usize, u64)> {
    (0..structures().len(), any::<u64>())
}

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}
