use std::collections::HashSet;

use nalgebra::Vector3;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CorrespondenceSet, RegistrationError};

/// Edges with ‖a_i − a_j‖ below this many meters are dropped.
pub const DEGENERACY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    /// a_i − a_j
    pub a: Vector3<f64>,
    /// b_i − b_j
    pub b: Vector3<f64>,
    /// δ_i + δ_j
    pub delta: f64,
}

/// Undirected pair graph over correspondence indices, with the
/// translation-invariant differences stored per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGraph {
    n: usize,
    edges: Vec<Edge>,
    /// adjacency[v] = (neighbor, edge index)
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl PairGraph {
    /// Builds a graph from explicit pairs. Pairs are normalized to `i < j`
    /// and sorted; duplicates, self-loops and degenerate pairs are rejected.
    pub fn from_pairs(
        c: &CorrespondenceSet,
        pairs: &[(usize, usize)],
    ) -> Result<Self, RegistrationError> {
        let n = c.len();
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(pairs.len());
        for &(i, j) in pairs {
            if i == j || i >= n || j >= n {
                return Err(RegistrationError::InvalidInput(format!(
                    "bad edge ({i}, {j}) for {n} points"
                )));
            }
            norm.push((i.min(j), i.max(j)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(RegistrationError::InvalidInput("duplicate edge".into()));
        }
        let edges: Vec<Edge> = norm.iter().map(|&(i, j)| make_edge(c, i, j)).collect();
        if let Some(e) = edges.iter().find(|e| e.a.norm() < DEGENERACY_FLOOR) {
            return Err(RegistrationError::InvalidInput(format!(
                "edge ({}, {}) is below the degeneracy floor",
                e.i, e.j
            )));
        }
        Ok(Self::assemble(n, edges))
    }

    fn assemble(n: usize, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.i].push((e.j, k));
            adjacency[e.j].push((e.i, k));
        }
        Self { n, edges, adjacency }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Graph restricted to the listed edge indices.
    pub fn subgraph(&self, edge_indices: &[usize]) -> Self {
        let edges = edge_indices.iter().map(|&k| self.edges[k].clone()).collect();
        Self::assemble(self.n, edges)
    }
}

fn make_edge(c: &CorrespondenceSet, i: usize, j: usize) -> Edge {
    Edge {
        i,
        j,
        a: c.a()[i] - c.a()[j],
        b: c.b()[i] - c.b()[j],
        delta: c.delta()[i] + c.delta()[j],
    }
}

/// Maps a linear index in `0..n(n-1)/2` to the pair `(i, j)`, `i < j`,
/// enumerated row by row.
fn unrank(mut k: usize, n: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

/// Samples ⌈f·N(N−1)/2⌉ distinct edges uniformly without replacement,
/// replacing any that fall under the degeneracy floor while unused pairs
/// remain.
pub fn build_pair_graph(
    c: &CorrespondenceSet,
    fraction: f64,
    rng_seed: u64,
) -> Result<PairGraph, RegistrationError> {
    let n = c.len();
    if n < 4 {
        return Err(RegistrationError::InvalidInput(format!(
            "need at least 4 correspondences, got {n}"
        )));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(RegistrationError::InvalidInput(format!(
            "graph fraction {fraction} outside (0, 1]"
        )));
    }
    let total = n * (n - 1) / 2;
    let target = ((fraction * total as f64).ceil() as usize).min(total);
    if target < 3 {
        return Err(RegistrationError::InvalidInput(format!(
            "graph fraction {fraction} yields only {target} edges"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(target);
    let degenerate = |i: usize, j: usize| (c.a()[i] - c.a()[j]).norm() < DEGENERACY_FLOOR;

    if 2 * target > total {
        let mut all: Vec<usize> = (0..total).collect();
        all.shuffle(&mut rng);
        for k in all {
            if chosen.len() == target {
                break;
            }
            let (i, j) = unrank(k, n);
            if !degenerate(i, j) {
                chosen.push((i, j));
            }
        }
    } else {
        let mut seen: HashSet<usize> = HashSet::with_capacity(2 * target);
        // Rejection sampling; the draw budget keeps pathological inputs
        // (nearly all points coincident) from spinning forever.
        let mut budget = 64 * total.max(target);
        while chosen.len() < target && seen.len() < total && budget > 0 {
            budget -= 1;
            let k = rng.random_range(0..total);
            if !seen.insert(k) {
                continue;
            }
            let (i, j) = unrank(k, n);
            if !degenerate(i, j) {
                chosen.push((i, j));
            }
        }
    }

    if chosen.len() < 3 {
        return Err(RegistrationError::DegenerateGraph {
            available: chosen.len(),
        });
    }
    chosen.sort_unstable();
    let edges = chosen.iter().map(|&(i, j)| make_edge(c, i, j)).collect();
    Ok(PairGraph::assemble(n, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points(n: usize) -> CorrespondenceSet {
        let a: Vec<_> = (0..n)
            .map(|i| {
                let t = i as f64;
                Vector3::new(t.sin(), (1.3 * t).cos(), 2.0 + 0.01 * t)
            })
            .collect();
        CorrespondenceSet::new(a.clone(), a, vec![0.01; n]).unwrap()
    }

    #[test]
    fn unrank_enumerates_all_pairs() {
        let n = 7;
        let pairs: Vec<_> = (0..n * (n - 1) / 2).map(|k| unrank(k, n)).collect();
        let mut expect = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                expect.push((i, j));
            }
        }
        assert_eq!(pairs, expect);
    }

    #[test]
    fn complete_graph_on_four() {
        let g = build_pair_graph(&points(4), 1.0, 0).unwrap();
        assert_eq!(g.num_edges(), 6);
    }

    #[test]
    fn operating_point_edge_count() {
        let g = build_pair_graph(&points(300), 0.05, 1).unwrap();
        assert_eq!(g.num_edges(), 2243);
        let mut seen = HashSet::new();
        for e in g.edges() {
            assert!(e.i < e.j && e.j < 300);
            assert!(seen.insert((e.i, e.j)));
        }
        let degree_sum: usize = (0..300).map(|v| g.neighbors(v).len()).sum();
        assert_eq!(degree_sum, 2 * 2243);
    }

    #[test]
    fn deterministic() {
        let c = points(50);
        assert_eq!(
            build_pair_graph(&c, 0.2, 9).unwrap(),
            build_pair_graph(&c, 0.2, 9).unwrap()
        );
        assert_ne!(
            build_pair_graph(&c, 0.2, 9).unwrap(),
            build_pair_graph(&c, 0.2, 10).unwrap()
        );
    }

    #[test]
    fn degenerate_edges_are_replaced() {
        let mut a: Vec<_> = points(10).a().to_vec();
        a[1] = a[0];
        let c = CorrespondenceSet::new(a.clone(), a, vec![0.01; 10]).unwrap();
        // 45 pairs, one degenerate; asking for all of them yields 44.
        let g = build_pair_graph(&c, 1.0, 3).unwrap();
        assert_eq!(g.num_edges(), 44);
        let g = build_pair_graph(&c, 0.3, 3).unwrap();
        assert_eq!(g.num_edges(), 14);
        assert!(g.edges().iter().all(|e| e.a.norm() >= DEGENERACY_FLOOR));
    }

    #[test]
    fn all_coincident_is_degenerate() {
        let a = vec![Vector3::new(1.0, 2.0, 3.0); 6];
        let c = CorrespondenceSet::new(a.clone(), a, vec![0.01; 6]).unwrap();
        assert!(matches!(
            build_pair_graph(&c, 1.0, 0),
            Err(RegistrationError::DegenerateGraph { available: 0 })
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_pair_graph(&points(3), 1.0, 0).is_err());
        assert!(build_pair_graph(&points(10), 0.0, 0).is_err());
        assert!(build_pair_graph(&points(10), 0.01, 0).is_err());
        let c = points(5);
        assert!(PairGraph::from_pairs(&c, &[(0, 1), (1, 0)]).is_err());
        assert!(PairGraph::from_pairs(&c, &[(2, 2)]).is_err());
        assert!(PairGraph::from_pairs(&c, &[(0, 5)]).is_err());
    }
}
