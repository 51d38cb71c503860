use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{BipartiteGraph, IntersectionGraph};
use crate::{Error, Result};

/// Connected components with canonical ids: components are numbered in the
/// order of their smallest node index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentPartition {
    component_id: Vec<usize>,
    sizes: Vec<usize>,
}

impl ComponentPartition {
    /// Canonical partition from arbitrary per-node labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let mut sizes = Vec::new();
        let component_id = labels
            .iter()
            .map(|l| {
                let id = *remap.entry(*l).or_insert_with(|| {
                    sizes.push(0);
                    sizes.len() - 1
                });
                sizes[id] += 1;
                id
            })
            .collect();
        ComponentPartition { component_id, sizes }
    }

    pub fn node_count(&self) -> usize {
        self.component_id.len()
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn component_id(&self, i: usize) -> usize {
        self.component_id[i]
    }

    pub fn ids(&self) -> &[usize] {
        &self.component_id
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn largest(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    /// The partition induced on nodes `range`, relabelled canonically.
    pub fn restrict(&self, range: std::ops::Range<usize>) -> ComponentPartition {
        ComponentPartition::from_labels(&self.component_id[range])
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    fn partition(mut self) -> ComponentPartition {
        let roots: Vec<usize> = (0..self.parent.len()).map(|i| self.find(i)).collect();
        ComponentPartition::from_labels(&roots)
    }
}

pub fn components(graph: &IntersectionGraph) -> ComponentPartition {
    let mut uf = UnionFind::new(graph.node_count());
    for (a, b, _) in graph.edges() {
        uf.union(a, b);
    }
    uf.partition()
}

/// Components of `G_bi` over `V ∪ U`: vertices are nodes `0..|V|`, group `j`
/// is node `|V| + j`.
pub fn bipartite_components(bi: &BipartiteGraph) -> ComponentPartition {
    let nv = bi.vertex_count();
    let mut uf = UnionFind::new(nv + bi.group_count());
    for (v, list) in bi.all_memberships().iter().enumerate() {
        for &u in list {
            uf.union(v, nv + u);
        }
    }
    uf.partition()
}

pub fn largest_component_fraction(graph: &IntersectionGraph) -> Result<f64> {
    if graph.node_count() == 0 {
        return Err(Error::domain("largest component fraction of an empty graph"));
    }
    Ok(components(graph).largest() as f64 / graph.node_count() as f64)
}

/// Degree counts; `counts[k]` nodes have degree `k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub counts: Vec<u64>,
}

impl DegreeHistogram {
    pub fn from_degrees(degrees: impl IntoIterator<Item = usize>) -> Self {
        let mut h = DegreeHistogram::default();
        for k in degrees {
            h.add(k);
        }
        h
    }

    pub fn add(&mut self, degree: usize) {
        if self.counts.len() <= degree {
            self.counts.resize(degree + 1, 0);
        }
        self.counts[degree] += 1;
    }

    pub fn merge(&mut self, other: &DegreeHistogram) {
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Mean degree; `NaN` for an empty histogram.
    pub fn mean(&self) -> f64 {
        let sum: u64 = self.counts.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
        sum as f64 / self.total() as f64
    }

    pub fn fraction(&self, degree: usize) -> f64 {
        self.counts.get(degree).copied().unwrap_or(0) as f64 / self.total() as f64
    }

    /// Rows `degree,count` for every degree up to the maximum observed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{k},{c}");
        }
        out
    }
}

pub fn degree_histogram(graph: &IntersectionGraph) -> DegreeHistogram {
    DegreeHistogram::from_degrees((0..graph.node_count()).map(|i| graph.degree(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{project_onto_groups, project_onto_vertices, BuildOptions, Side};

    fn graph(n: usize, edges: &[(usize, usize)]) -> IntersectionGraph {
        let e: Vec<_> = edges.iter().map(|&(a, b)| (a, b, 1)).collect();
        IntersectionGraph::from_edges(Side::V, n, &e).unwrap()
    }

    #[test]
    fn empty_graph_is_all_singletons() {
        let p = components(&graph(5, &[]));
        assert_eq!(p.component_count(), 5);
        assert_eq!(p.ids(), &[0, 1, 2, 3, 4]);
        assert_eq!(largest_component_fraction(&graph(5, &[])).unwrap(), 0.2);
    }

    #[test]
    fn path_is_one_component() {
        let p = components(&graph(3, &[(0, 1), (1, 2)]));
        assert_eq!(p.component_count(), 1);
        assert_eq!(p.sizes(), &[3]);
    }

    #[test]
    fn ids_follow_smallest_member() {
        let p = components(&graph(6, &[(4, 5), (1, 3), (3, 0)]));
        assert_eq!(p.ids(), &[0, 0, 1, 0, 2, 2]);
        assert_eq!(p.sizes(), &[3, 1, 2]);
        assert_eq!(p.sizes().iter().sum::<usize>(), 6);
        assert_eq!(p.largest(), 3);
    }

    #[test]
    fn complete_graph_fraction_one() {
        let edges: Vec<_> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        assert_eq!(largest_component_fraction(&graph(5, &edges)).unwrap(), 1.0);
    }

    #[test]
    fn empty_node_set_is_an_error() {
        assert!(matches!(largest_component_fraction(&graph(0, &[])), Err(Error::Domain(_))));
    }

    #[test]
    fn histograms() {
        let h = degree_histogram(&graph(4, &[]));
        assert_eq!(h.counts, vec![4]);
        assert_eq!(h.mean(), 0.0);
        let h = degree_histogram(&graph(3, &[(0, 1), (1, 2), (0, 2)]));
        assert_eq!(h.counts, vec![0, 0, 3]);
        assert_eq!(h.mean(), 2.0);
        let g = graph(4, &[(0, 1), (1, 2)]);
        assert_eq!(degree_histogram(&g).mean(), 2.0 * g.edge_count() as f64 / 4.0);
        let mut m = h.clone();
        m.merge(&degree_histogram(&g));
        assert_eq!(m.counts, vec![1, 2, 4]);
        assert_eq!(m.to_csv(), "degree,count\n0,1\n1,2\n2,4\n");
    }

    #[test]
    fn restriction_matches_projections() {
        let bi = BipartiteGraph::from_memberships(
            5,
            vec![vec![0], vec![0, 1], vec![2], vec![], vec![1], vec![3]],
            BuildOptions::exact(0),
        )
        .unwrap();
        let full = bipartite_components(&bi);
        assert_eq!(full.node_count(), 11);
        assert_eq!(full.restrict(0..6), components(&project_onto_vertices(&bi)));
        assert_eq!(full.restrict(6..11), components(&project_onto_groups(&bi)));
    }
}
