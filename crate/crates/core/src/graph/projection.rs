use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::BipartiteGraph;
use crate::{Error, Result};

/// Which point set a projection lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    V,
    U,
}

/// A one-mode projection in compressed sparse row form.
///
/// `shared` runs parallel to `neighbors`: the number of common groups (or
/// common vertices, on the `U` side) behind each edge.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionGraph {
    side: Side,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    shared: Vec<u32>,
}

impl IntersectionGraph {
    /// Build from undirected weighted edges. Duplicate edges add their counts.
    pub fn from_edges(side: Side, node_count: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut keyed = Vec::with_capacity(edges.len());
        for &(a, b, count) in edges {
            if a == b {
                return Err(Error::domain(format!("self-loop at node {a}")));
            }
            if a >= node_count || b >= node_count {
                return Err(Error::domain(format!("edge ({a}, {b}) out of range for {node_count} nodes")));
            }
            if count == 0 {
                return Err(Error::domain(format!("edge ({a}, {b}) with zero shared count")));
            }
            keyed.push((a.min(b), a.max(b), count));
        }
        keyed.sort_unstable_by_key(|&(a, b, _)| (a, b));
        let mut merged: Vec<(usize, usize, u32)> = Vec::with_capacity(keyed.len());
        for (a, b, c) in keyed {
            match merged.last_mut() {
                Some(last) if last.0 == a && last.1 == b => last.2 += c,
                _ => merged.push((a, b, c)),
            }
        }
        Ok(Self::from_sorted_pairs(side, node_count, &merged))
    }

    /// `pairs` must be sorted, unique and have `a < b`.
    fn from_sorted_pairs(side: Side, node_count: usize, pairs: &[(usize, usize, u32)]) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for &(a, b, _) in pairs {
            offsets[a + 1] += 1;
            offsets[b + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0; offsets[node_count]];
        let mut shared = vec![0; offsets[node_count]];
        // Lexicographic order fills every row in increasing neighbour order.
        for &(a, b, c) in pairs {
            neighbors[fill[a]] = b;
            shared[fill[a]] = c;
            fill[a] += 1;
            neighbors[fill[b]] = a;
            shared[fill[b]] = c;
            fill[b] += 1;
        }
        IntersectionGraph {
            side,
            offsets,
            neighbors,
            shared,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Sorted neighbours of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Shared counts parallel to [`neighbors`](Self::neighbors).
    pub fn shared_counts(&self, i: usize) -> &[u32] {
        &self.shared[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Number of common groups behind edge `(a, b)`, 0 when absent.
    pub fn shared_count(&self, a: usize, b: usize) -> u32 {
        match self.neighbors(a).binary_search(&b) {
            Ok(k) => self.shared_counts(a)[k],
            Err(_) => 0,
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Each undirected edge once as `(a, b, shared)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.node_count()).flat_map(move |a| {
            self.neighbors(a)
                .iter()
                .zip(self.shared_counts(a))
                .filter(move |(&b, _)| b > a)
                .map(move |(&b, &c)| (a, b, c))
        })
    }

    /// Edge list `source,target,shared_count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source,target,shared_count\n");
        for (a, b, c) in self.edges() {
            let _ = writeln!(out, "{a},{b},{c}");
        }
        out
    }
}

/// `G_V`: vertices adjacent iff they share a group.
pub fn project_onto_vertices(bi: &BipartiteGraph) -> IntersectionGraph {
    project(Side::V, bi.vertex_count(), &bi.group_members())
}

/// `G_U`: groups adjacent iff some vertex belongs to both.
pub fn project_onto_groups(bi: &BipartiteGraph) -> IntersectionGraph {
    project(Side::U, bi.group_count(), bi.all_memberships())
}

/// Expand each hub's sorted member list into pairs, then count repeats.
fn project(side: Side, node_count: usize, hubs: &[Vec<usize>]) -> IntersectionGraph {
    let total: usize = hubs.iter().map(|m| m.len() * m.len().saturating_sub(1) / 2).sum();
    let mut pairs = Vec::with_capacity(total);
    for members in hubs {
        for (k, &a) in members.iter().enumerate() {
            for &b in &members[k + 1..] {
                pairs.push((a, b));
            }
        }
    }
    pairs.sort_unstable();
    let mut counted: Vec<(usize, usize, u32)> = Vec::new();
    for (a, b) in pairs {
        match counted.last_mut() {
            Some(last) if last.0 == a && last.1 == b => last.2 += 1,
            _ => counted.push((a, b, 1)),
        }
    }
    IntersectionGraph::from_sorted_pairs(side, node_count, &counted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BuildOptions;

    fn bi(groups: usize, lists: Vec<Vec<usize>>) -> BipartiteGraph {
        BipartiteGraph::from_memberships(groups, lists, BuildOptions::exact(0)).unwrap()
    }

    #[test]
    fn one_shared_group() {
        let g = project_onto_vertices(&bi(1, vec![vec![0], vec![0]]));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.shared_count(0, 1), 1);
        assert_eq!(g.side(), Side::V);
    }

    #[test]
    fn disjoint_groups_no_edge() {
        let g = project_onto_vertices(&bi(2, vec![vec![0], vec![1]]));
        assert_eq!(g.edge_count(), 0);
        assert!(!g.has_edge(0, 1));
    }

    #[test]
    fn multiplicity_is_counted() {
        let g = project_onto_vertices(&bi(3, vec![vec![0, 1, 2], vec![0, 1, 2]]));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.shared_count(1, 0), 3);
    }

    #[test]
    fn group_projection() {
        let g = project_onto_groups(&bi(3, vec![vec![0, 1], vec![2]]));
        assert_eq!(g.side(), Side::U);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 1)]);
        let empty = project_onto_groups(&bi(3, vec![vec![0], vec![1], vec![2], vec![]]));
        assert_eq!(empty.edge_count(), 0);
    }

    #[test]
    fn symmetric_sorted_loop_free() {
        let lists = vec![vec![0, 3], vec![1, 3], vec![0, 1, 2], vec![2], vec![3], vec![]];
        let g = project_onto_vertices(&bi(4, lists.clone()));
        let bi = bi(4, lists);
        for a in 0..g.node_count() {
            assert!(g.neighbors(a).windows(2).all(|w| w[0] < w[1]));
            for (&b, &c) in g.neighbors(a).iter().zip(g.shared_counts(a)) {
                assert_ne!(a, b);
                assert!(c >= 1);
                assert_eq!(g.shared_count(b, a), c);
                assert_eq!(c as usize, bi.shared_groups(a, b));
            }
        }
        for a in 0..6 {
            for b in 0..6 {
                if a != b {
                    assert_eq!(g.has_edge(a, b), bi.shared_groups(a, b) > 0);
                }
            }
        }
    }

    #[test]
    fn from_edges_validates_and_merges() {
        let g = IntersectionGraph::from_edges(Side::V, 3, &[(1, 0, 1), (0, 1, 2), (2, 1, 1)]).unwrap();
        assert_eq!(g.shared_count(0, 1), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(IntersectionGraph::from_edges(Side::V, 3, &[(1, 1, 1)]).is_err());
        assert!(IntersectionGraph::from_edges(Side::V, 3, &[(0, 3, 1)]).is_err());
        assert!(IntersectionGraph::from_edges(Side::V, 3, &[(0, 1, 0)]).is_err());
    }

    #[test]
    fn edge_csv() {
        let g = IntersectionGraph::from_edges(Side::V, 3, &[(2, 0, 2), (1, 2, 1)]).unwrap();
        assert_eq!(g.to_csv(), "source,target,shared_count\n0,2,2\n1,2,1\n");
    }
}
