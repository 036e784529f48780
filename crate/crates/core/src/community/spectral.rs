//! Normalized-Laplacian spectral clustering.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{CommunityAlgorithm, Partition};
use crate::error::{Error, Result};
use crate::hypercore::{weighted_adjacency, Hypergraph, WeightKind};
use crate::linalg::{kmeans, smallest_eigenpairs, CsrMatrix, EigenMethod, KMeansOptions};
use crate::proximity::SimilarityMatrix;

/// Diagonal used to normalize the affinity in `L = I − D^{-1/2} W D^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeNormalization {
    /// Hypergraph node degrees `d_i`.
    #[default]
    HypergraphDegree,
    /// Row sums of the affinity matrix.
    RowSum,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectralOptions {
    pub normalization: DegreeNormalization,
    pub eigen: EigenMethod,
    pub kmeans: KMeansOptions,
}

/// Rows of the eigenvectors for the `count` smallest eigenvalues of
/// `I − D^{-1/2}·affinity·D^{-1/2}`. Zero-degree nodes get no scaling.
pub fn spectral_embedding(affinity: &CsrMatrix, degrees: &[f64], count: usize, method: EigenMethod) -> Result<DMatrix<f64>> {
    let n = affinity.rows();
    if degrees.len() != n {
        return Err(Error::DimensionMismatch(format!("{} degrees for {n} nodes", degrees.len())));
    }
    let scale: Vec<f64> = degrees
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let normalized = affinity.scale_rows(&scale).scale_cols(&scale);
    let laplacian = CsrMatrix::identity(n).add_scaled(1.0, &normalized, -1.0)?;
    Ok(smallest_eigenpairs(&laplacian, count, method)?.vectors)
}

fn cluster(
    graph: &Hypergraph,
    affinity: &CsrMatrix,
    n_c: usize,
    seed: u64,
    opts: &SpectralOptions,
    method: CommunityAlgorithm,
) -> Result<Partition> {
    if n_c < 2 {
        return Err(Error::param(format!("spectral clustering needs n_c ≥ 2, got {n_c}")));
    }
    let degrees: Vec<f64> = match opts.normalization {
        DegreeNormalization::HypergraphDegree => graph.degrees().iter().map(|&d| d as f64).collect(),
        DegreeNormalization::RowSum => affinity.row_sums(),
    };
    let embedding = spectral_embedding(affinity, &degrees, n_c, opts.eigen)?;
    let km = kmeans(&embedding, n_c, &opts.kmeans, seed)?;
    Ok(Partition::new(km.assignment, n_c, method, seed, true, km.inertia))
}

/// Spectral clustering on the resource-allocation similarity `S`.
pub fn hra_cd_partition(
    graph: &Hypergraph,
    sim: &SimilarityMatrix,
    n_c: usize,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<Partition> {
    if sim.node_count() != graph.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "similarity covers {} nodes, graph has {}",
            sim.node_count(),
            graph.node_count()
        )));
    }
    cluster(graph, sim.values(), n_c, seed, opts, CommunityAlgorithm::Hra)
}

/// Spectral clustering on `A^Z = M·K⁻¹·Mᵀ` (diagonal kept).
pub fn hsc_partition(graph: &Hypergraph, n_c: usize, seed: u64, opts: &SpectralOptions) -> Result<Partition> {
    let affinity = weighted_adjacency(graph, WeightKind::Zhou);
    cluster(graph, &affinity, n_c, seed, opts, CommunityAlgorithm::Hsc)
}
