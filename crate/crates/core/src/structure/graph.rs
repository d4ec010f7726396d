//! Graphical structures: `n_i = 1` and `V_lk = R` exactly when `{k, l}` is an edge.
//!
//! A decomposable graph gives a homogeneous cone iff it has no induced path on
//! four vertices. For such graphs the closed neighbourhoods of adjacent
//! vertices are nested, so listing vertices by increasing closed-neighbourhood
//! size yields an ordering for which V1–V3 hold.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::BlockStructure;
use crate::error::{ConeError, Result, Witness};

/// Backtracking search over vertex orderings is only attempted up to this many vertices.
const MAX_SEARCH_VERTICES: usize = 12;

/// A simple undirected graph on vertices `0..r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<bool>>,
}

impl Graph {
    pub fn new(r: usize) -> Self {
        Graph {
            adj: vec![vec![false; r]; r],
        }
    }

    /// Builds a graph from 0-based edges; self-loops are rejected.
    pub fn from_edges(r: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(r);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn complete(r: usize) -> Self {
        let mut g = Graph::new(r);
        for a in 0..r {
            for b in 0..r {
                g.adj[a][b] = a != b;
            }
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        let r = self.order();
        if a >= r || b >= r {
            return Err(ConeError::DimensionMismatch(format!("edge ({a},{b}) out of range")));
        }
        if a == b {
            return Err(ConeError::Parse(format!("self-loop at vertex {}", a + 1)));
        }
        self.adj[a][b] = true;
        self.adj[b][a] = true;
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.adj.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let r = self.order();
        let mut out = Vec::new();
        for a in 0..r {
            for b in a + 1..r {
                if self.adj[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().filter(|&&e| e).count()
    }

    /// Parses a whitespace-separated edge list with 1-based labels.
    ///
    /// A line holding a single label declares a (possibly isolated) vertex.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut r = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let labels = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .ok()
                        .filter(|&v| v >= 1)
                        .ok_or_else(|| ConeError::Parse(format!("line {}: bad vertex label '{t}'", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            match labels.as_slice() {
                [v] => r = r.max(*v),
                [a, b] => {
                    r = r.max(*a).max(*b);
                    edges.push((a - 1, b - 1));
                }
                _ => {
                    return Err(ConeError::Parse(format!(
                        "line {}: expected \"i j\" or a single vertex label",
                        lineno + 1
                    )))
                }
            }
        }
        Graph::from_edges(r, &edges)
    }

    /// Serializes to the edge-list format; isolated vertices get their own line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in 0..self.order() {
            if self.degree(v) == 0 {
                writeln!(out, "{}", v + 1).unwrap();
            }
        }
        for (a, b) in self.edges() {
            writeln!(out, "{} {}", a + 1, b + 1).unwrap();
        }
        out
    }

    /// Maximum-cardinality search; returns vertices in elimination order
    /// (reverse of the visiting order).
    fn mcs_order(&self) -> Vec<usize> {
        let r = self.order();
        let mut weight = vec![0usize; r];
        let mut visited = vec![false; r];
        let mut visit = Vec::with_capacity(r);
        for _ in 0..r {
            let v = (0..r)
                .filter(|&v| !visited[v])
                .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
                .expect("unvisited vertex");
            visited[v] = true;
            visit.push(v);
            for u in 0..r {
                if self.adj[v][u] && !visited[u] {
                    weight[u] += 1;
                }
            }
        }
        visit.reverse();
        visit
    }

    fn is_perfect_elimination(&self, order: &[usize]) -> bool {
        let mut pos = vec![0; order.len()];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        order.iter().all(|&v| {
            let later: Vec<usize> = (0..self.order()).filter(|&u| self.adj[v][u] && pos[u] > pos[v]).collect();
            later
                .iter()
                .enumerate()
                .all(|(i, &a)| later[i + 1..].iter().all(|&b| self.adj[a][b]))
        })
    }

    pub fn is_chordal(&self) -> bool {
        self.is_perfect_elimination(&self.mcs_order())
    }

    /// Some induced cycle of length ≥ 4, if one exists.
    pub fn chordless_cycle(&self) -> Option<Vec<usize>> {
        let r = self.order();
        for s in 0..r {
            let mut path = vec![s];
            if let Some(c) = self.extend_induced(&mut path) {
                return Some(c);
            }
        }
        None
    }

    fn extend_induced(&self, path: &mut Vec<usize>) -> Option<Vec<usize>> {
        let s = path[0];
        let last = *path.last().unwrap();
        for v in s + 1..self.order() {
            if path.contains(&v) || !self.adj[last][v] {
                continue;
            }
            // v may touch only the last vertex, and the start when closing a long enough cycle.
            let inner: &[usize] = if path.len() > 2 { &path[1..path.len() - 1] } else { &[] };
            let inner_ok = inner.iter().all(|&p| !self.adj[p][v]);
            if !inner_ok {
                continue;
            }
            if path.len() > 1 && self.adj[s][v] {
                if path.len() >= 3 {
                    let mut cycle = path.clone();
                    cycle.push(v);
                    return Some(cycle);
                }
                continue;
            }
            path.push(v);
            if let Some(c) = self.extend_induced(path) {
                return Some(c);
            }
            path.pop();
        }
        None
    }

    /// An induced path on four vertices, in path order.
    pub fn induced_a4(&self) -> Option<Vec<usize>> {
        let r = self.order();
        for a in 0..r {
            for b in a + 1..r {
                for c in b + 1..r {
                    for d in c + 1..r {
                        if let Some(p) = self.as_path(&[a, b, c, d]) {
                            return Some(p);
                        }
                    }
                }
            }
        }
        None
    }

    fn as_path(&self, quad: &[usize; 4]) -> Option<Vec<usize>> {
        let deg = |v: usize| quad.iter().filter(|&&u| u != v && self.adj[v][u]).count();
        let edges: usize = quad.iter().map(|&v| deg(v)).sum::<usize>() / 2;
        if edges != 3 {
            return None;
        }
        let ends: Vec<usize> = quad.iter().copied().filter(|&v| deg(v) == 1).collect();
        if ends.len() != 2 || quad.iter().any(|&v| deg(v) == 0 || deg(v) == 3) {
            return None;
        }
        let mut path = vec![ends[0]];
        while path.len() < 4 {
            let last = *path.last().unwrap();
            let next = quad.iter().copied().find(|&u| !path.contains(&u) && self.adj[last][u])?;
            path.push(next);
        }
        Some(path)
    }

    /// Checks V1 and V2 for the graphical structure under `order` (position → vertex).
    pub fn ordering_satisfies_conditions(&self, order: &[usize]) -> bool {
        let e = |p: usize, q: usize| self.adj[order[p]][order[q]];
        let r = order.len();
        for i in 0..r {
            for k in i + 1..r {
                for l in k + 1..r {
                    if e(l, k) && e(k, i) && !e(l, i) {
                        return false;
                    }
                    if e(l, i) && e(k, i) && !e(l, k) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn search_ordering(&self) -> Option<Vec<usize>> {
        let r = self.order();
        let mut order = Vec::with_capacity(r);
        let mut used = vec![false; r];
        if self.backtrack(&mut order, &mut used) {
            Some(order)
        } else {
            None
        }
    }

    fn backtrack(&self, order: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let r = self.order();
        if order.len() == r {
            return true;
        }
        for v in 0..r {
            if used[v] {
                continue;
            }
            order.push(v);
            let l = order.len() - 1;
            let e = |p: usize, q: usize| self.adj[order[p]][order[q]];
            let ok = (0..l).all(|i| {
                (i + 1..l).all(|k| !(e(l, k) && e(k, i) && !e(l, i)) && !(e(l, i) && e(k, i) && !e(l, k)))
            });
            if ok {
                used[v] = true;
                if self.backtrack(order, used) {
                    return true;
                }
                used[v] = false;
            }
            order.pop();
        }
        false
    }
}

/// A graphical structure together with the vertex ordering used to build it.
#[derive(Debug, Clone)]
pub struct GraphRealization {
    pub structure: BlockStructure,
    /// `order[p]` is the (0-based) graph vertex placed at block `p`.
    pub order: Vec<usize>,
}

/// Builds the graphical structure of a decomposable, A4-free graph.
///
/// Fails with [`ConeError::NotHomogeneous`] carrying a chordless cycle or an
/// induced A4 path as witness.
pub fn graph_to_structure(g: &Graph) -> Result<GraphRealization> {
    let r = g.order();
    if r == 0 {
        return Err(ConeError::DimensionMismatch("graph has no vertices".into()));
    }
    let one_based = |v: Vec<usize>| v.into_iter().map(|x| x + 1).collect::<Vec<_>>();
    if !g.is_chordal() {
        let cycle = g
            .chordless_cycle()
            .expect("a non-chordal graph has an induced cycle of length at least four");
        return Err(ConeError::NotHomogeneous(Witness::ChordlessCycle(one_based(cycle))));
    }
    if let Some(path) = g.induced_a4() {
        return Err(ConeError::NotHomogeneous(Witness::InducedPath(one_based(path))));
    }

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by_key(|&v| g.degree(v));
    if !g.ordering_satisfies_conditions(&order) {
        if r > MAX_SEARCH_VERTICES {
            return Err(ConeError::Unsupported(format!(
                "ordering search is limited to {MAX_SEARCH_VERTICES} vertices"
            )));
        }
        order = g.search_ordering().ok_or(ConeError::PermutationNotFound)?;
    }

    let mut blocks = BTreeMap::new();
    for k in 0..r {
        for l in k + 1..r {
            if g.has_edge(order[l], order[k]) {
                blocks.insert((l, k), vec![DMatrix::from_element(1, 1, 1.0)]);
            }
        }
    }
    let structure = BlockStructure::new_validated(vec![1; r], blocks)?;
    Ok(GraphRealization { structure, order })
}
