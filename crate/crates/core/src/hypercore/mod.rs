//! Canonical hypergraph representation, dataset I/O and clique projections.

mod adjacency;
mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

pub use adjacency::{clique_adjacency, weighted_adjacency, WeightKind};
pub use io::{
    convert_simplicial, load_hyperedge_list, load_labels, open_text, parse_hyperedge_list, parse_labels,
    read_simplicial, to_hyperedge_list_string, write_hyperedge_list, GraphStats, LoadOptions, LoadReport,
};

/// Immutable hypergraph with sparse incidence in both orientations.
///
/// Nodes are dense indices `0..N`; the original identifiers are kept in a side
/// table. Every hyperedge has order ≥ 2 and no repeated node. Node degrees are
/// ≥ 1 unless the graph was built with [`Hypergraph::with_isolated_nodes`]
/// (training graphs in cross-validation keep test-only nodes at degree 0).
#[derive(Debug, Clone)]
pub struct Hypergraph {
    incidence: CsrMatrix,
    incidence_t: CsrMatrix,
    degrees: Vec<usize>,
    orders: Vec<usize>,
    node_ids: Vec<String>,
    id_index: HashMap<String, usize>,
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.incidence == other.incidence && self.node_ids == other.node_ids
    }
}

impl Hypergraph {
    /// Builds a hypergraph in which every node belongs to some hyperedge.
    pub fn new(node_count: usize, hyperedges: Vec<Vec<usize>>) -> Result<Self> {
        let g = Self::with_isolated_nodes(node_count, hyperedges)?;
        if let Some(i) = g.degrees.iter().position(|&d| d == 0) {
            return Err(Error::InvalidGraph(format!("node {i} belongs to no hyperedge")));
        }
        Ok(g)
    }

    /// Like [`Hypergraph::new`] but nodes of degree 0 are allowed.
    pub fn with_isolated_nodes(node_count: usize, hyperedges: Vec<Vec<usize>>) -> Result<Self> {
        if hyperedges.is_empty() {
            return Err(Error::InvalidGraph("no hyperedges".into()));
        }
        let mut trips = Vec::new();
        for (alpha, edge) in hyperedges.iter().enumerate() {
            if edge.len() < 2 {
                return Err(Error::InvalidGraph(format!(
                    "hyperedge {alpha} has order {} (< 2)",
                    edge.len()
                )));
            }
            let mut sorted = edge.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("hyperedge {alpha} repeats a node")));
            }
            if let Some(&bad) = sorted.last().filter(|&&v| v >= node_count) {
                return Err(Error::InvalidGraph(format!(
                    "hyperedge {alpha} references node {bad} but N = {node_count}"
                )));
            }
            trips.extend(sorted.into_iter().map(|i| (i, alpha, 1.0)));
        }
        let incidence = CsrMatrix::from_triplets(node_count, hyperedges.len(), trips)?;
        let incidence_t = incidence.transpose();
        let degrees = (0..node_count).map(|i| incidence.row_nnz(i)).collect();
        let orders = (0..hyperedges.len()).map(|a| incidence_t.row_nnz(a)).collect();
        let node_ids: Vec<String> = (0..node_count).map(|i| i.to_string()).collect();
        let id_index = node_ids.iter().cloned().zip(0..).collect();
        Ok(Self {
            incidence,
            incidence_t,
            degrees,
            orders,
            node_ids,
            id_index,
        })
    }

    /// Replaces the identifier side table.
    pub fn with_node_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.node_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} nodes",
                ids.len(),
                self.node_count()
            )));
        }
        let id_index: HashMap<String, usize> = ids.iter().cloned().zip(0..).collect();
        if id_index.len() != ids.len() {
            return Err(Error::InvalidGraph("node ids are not unique".into()));
        }
        self.node_ids = ids;
        self.id_index = id_index;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn hyperedge_count(&self) -> usize {
        self.orders.len()
    }

    /// Binary N×M incidence matrix.
    pub fn incidence(&self) -> &CsrMatrix {
        &self.incidence
    }

    /// M×N transpose of the incidence matrix (hyperedge-major access).
    pub fn incidence_t(&self) -> &CsrMatrix {
        &self.incidence_t
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    /// Sorted member nodes of hyperedge `alpha`.
    pub fn hyperedge(&self, alpha: usize) -> &[usize] {
        self.incidence_t.row(alpha).0
    }

    pub fn hyperedges(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.hyperedge_count()).map(|a| self.hyperedge(a))
    }

    /// Hyperedges containing node `i`, ascending.
    pub fn node_hyperedges(&self, i: usize) -> &[usize] {
        self.incidence.row(i).0
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.id_index.get(id).copied()
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.node_count();
        let m = self.hyperedge_count();
        GraphStats {
            node_count: n,
            hyperedge_count: m,
            mean_degree: self.degrees.iter().sum::<usize>() as f64 / n as f64,
            mean_order: self.orders.iter().sum::<usize>() as f64 / m as f64,
        }
    }

    /// Connected component id of every node; isolated nodes get their own id.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.node_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for edge in self.hyperedges() {
            let root = find(&mut parent, edge[0]);
            for &v in &edge[1..] {
                let r = find(&mut parent, v);
                if r != root {
                    parent[r] = root;
                }
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut comp = vec![0; n];
        let mut count = 0;
        for i in 0..n {
            let r = find(&mut parent, i);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            comp[i] = label[r];
        }
        (comp, count)
    }

    pub fn is_connected(&self) -> bool {
        self.components().1 == 1
    }

    /// Same node universe restricted to the listed hyperedges, in that order.
    /// Nodes left without hyperedges stay present at degree 0.
    pub fn restrict_to_hyperedges(&self, edges: &[usize]) -> Result<Self> {
        let kept = edges.iter().map(|&a| self.hyperedge(a).to_vec()).collect();
        let mut g = Self::with_isolated_nodes(self.node_count(), kept)?;
        g.node_ids = self.node_ids.clone();
        g.id_index = self.id_index.clone();
        Ok(g)
    }
}

/// Ground-truth community of every node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityLabels {
    /// Community id of node `i`, in `0..community_count`.
    pub labels: Vec<usize>,
    pub community_count: usize,
    /// Original label of each community id.
    pub names: Vec<String>,
}

impl CommunityLabels {
    /// Re-indexes arbitrary labels to `0..N_c` in order of first occurrence.
    pub fn from_raw<T: AsRef<str>>(raw: &[T]) -> Self {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        let labels = raw
            .iter()
            .map(|r| {
                let r = r.as_ref();
                *index.entry(r).or_insert_with(|| {
                    names.push(r.to_string());
                    names.len() - 1
                })
            })
            .collect();
        Self {
            labels,
            community_count: names.len(),
            names,
        }
    }
}
