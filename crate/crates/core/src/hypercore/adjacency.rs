use serde::{Deserialize, Serialize};

use super::Hypergraph;
use crate::linalg::CsrMatrix;

/// Hyperedge weighting for the weighted clique projection `M·W·Mᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    /// `W = K⁻¹`: each hyperedge contributes `1/k` to every member pair.
    Zhou,
    /// `W = (K − I)⁻¹`: node-degree-preserving weighting.
    Ndp,
}

/// Clique projection `A = M·Mᵀ − D`; `A_ij` counts hyperedges containing both
/// nodes and the diagonal is zero.
pub fn clique_adjacency(graph: &Hypergraph) -> CsrMatrix {
    let m = graph.incidence();
    let gram = m.matmul(graph.incidence_t()).expect("incidence shapes agree");
    let d: Vec<f64> = graph.degrees().iter().map(|&d| d as f64).collect();
    gram.add_scaled(1.0, &CsrMatrix::from_diagonal(&d), -1.0)
        .expect("square")
}

/// Weighted projection `M·W·Mᵀ` with the diagonal kept.
pub fn weighted_adjacency(graph: &Hypergraph, kind: WeightKind) -> CsrMatrix {
    let w: Vec<f64> = graph
        .orders()
        .iter()
        .map(|&k| match kind {
            WeightKind::Zhou => 1.0 / k as f64,
            WeightKind::Ndp => 1.0 / (k as f64 - 1.0),
        })
        .collect();
    graph
        .incidence()
        .scale_cols(&w)
        .matmul(graph.incidence_t())
        .expect("incidence shapes agree")
}
