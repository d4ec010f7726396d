mod common;

use homcone::random;
use homcone::{graph_to_structure, preset, ConeError, Graph, SymElement, Witness};
use proptest::prelude::*;

#[test]
fn every_pool_structure_validates() {
    for (name, s) in common::structures() {
        assert!(s.validate().passed(), "{name}");
    }
}

#[test]
fn complete_graphs_give_full_symmetric_cones() {
    for n in 1..=6 {
        let real = graph_to_structure(&Graph::complete(n)).unwrap();
        assert!(real.structure.validate().passed());
        assert_eq!(real.structure.dim_z(), n * (n + 1) / 2);
    }
}

#[test]
fn z_labels_cover_basis() {
    let v = preset("vinberg").unwrap();
    let labels: Vec<String> = v.z_labels().iter().map(|l| l.to_string()).collect();
    assert_eq!(labels.len(), 5);
    assert_eq!(labels[0], "d1");
}

fn is_induced_cycle(g: &Graph, c: &[usize]) -> bool {
    let k = c.len();
    (0..k).all(|i| {
        (0..k).all(|j| {
            let adjacent = (i + 1) % k == j || (j + 1) % k == i;
            i == j || g.has_edge(c[i], c[j]) == adjacent
        })
    })
}

fn is_induced_path(g: &Graph, p: &[usize]) -> bool {
    (0..p.len()).all(|i| (0..p.len()).all(|j| i == j || g.has_edge(p[i], p[j]) == (i.abs_diff(j) == 1)))
}

proptest! {
    #![proptest_config(common::config(64))]

    #[test]
    fn projection_is_orthogonal_and_idempotent((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let x = random::sym(s.total_size(), &mut rng);
        let px = s.project(&x).unwrap();
        prop_assert!(s.membership_residual(&px).unwrap() < 1e-10);
        let ppx = s.project(&px).unwrap();
        prop_assert!(homcone::linalg::max_abs(&(ppx.matrix() - px.matrix())) < 1e-10);
        for e in s.z_basis() {
            prop_assert!((px.trace_inner(e) - x.trace_inner(e)).abs() < 1e-10);
        }
    }

    #[test]
    fn coordinates_round_trip((idx, seed) in common::case()) {
        let (_, s) = &common::structures()[idx];
        let mut rng = common::rng(seed);
        let z = random::point_z(s, &mut rng);
        let back = s.from_coords(&s.coords(&z).unwrap()).unwrap();
        prop_assert!(homcone::linalg::max_abs(&(back.into_matrix() - z.into_matrix())) < 1e-12);
    }

    #[test]
    fn graph_gate_accepts_or_witnesses(edges in proptest::collection::vec((0usize..6, 0usize..6), 0..12)) {
        let edges: Vec<_> = edges.into_iter().filter(|(a, b)| a != b).collect();
        let g = Graph::from_edges(6, &edges).unwrap();
        match graph_to_structure(&g) {
            Ok(real) => {
                prop_assert!(real.structure.validate().passed());
                prop_assert!(g.is_chordal());
                prop_assert!(g.induced_a4().is_none());
            }
            Err(ConeError::NotHomogeneous(Witness::ChordlessCycle(c))) => {
                let c: Vec<usize> = c.iter().map(|v| v - 1).collect();
                prop_assert!(c.len() >= 4);
                prop_assert!(is_induced_cycle(&g, &c));
            }
            Err(ConeError::NotHomogeneous(Witness::InducedPath(p))) => {
                let p: Vec<usize> = p.iter().map(|v| v - 1).collect();
                prop_assert_eq!(p.len(), 4);
                prop_assert!(is_induced_path(&g, &p));
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn element_symmetrizes_and_rejects_ragged_rows() {
    let x = SymElement::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
    assert_eq!(x.matrix()[(0, 1)], 1.0);
    assert!(SymElement::from_rows(&[vec![1.0, 2.0], vec![0.0]]).is_err());
}
