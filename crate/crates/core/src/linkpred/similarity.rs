//! Benchmark node-similarity indices for hyperedge prediction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypercore::{clique_adjacency, weighted_adjacency, Hypergraph, WeightKind};
use crate::linalg::{conjugate_gradient, spectral_radius_estimate, CsrMatrix};
use crate::proximity::SimilarityMatrix;

/// Power-iteration steps behind the default Katz attenuation.
pub const RADIUS_STEPS: usize = 100;
/// Default attenuation as a fraction of `1/ρ̂(A)`.
pub const DEFAULT_ATTENUATION: f64 = 0.85;

const KATZ_TOL: f64 = 1e-12;

/// Common neighbours `|Γ(i) ∩ Γ(j)|` in the clique projection.
pub fn cn_similarity(graph: &Hypergraph) -> Result<SimilarityMatrix> {
    let pattern = clique_adjacency(graph).map_values(|_| 1.0);
    SimilarityMatrix::from_upper(&pattern.matmul(&pattern)?)
}

/// Direct term `Σ_{α ∋ i,j} 1/(k_α − 1)` plus the two-hop term
/// `Σ_l S̃_il·S̃_lj / d_l` over common neighbours.
pub fn hpra_similarity(graph: &Hypergraph) -> Result<SimilarityMatrix> {
    let direct = weighted_adjacency(graph, WeightKind::Ndp).without_diagonal();
    let inv_deg: Vec<f64> = graph
        .degrees()
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { 1.0 / d as f64 })
        .collect();
    let two_hop = direct.scale_cols(&inv_deg).matmul(&direct)?;
    SimilarityMatrix::from_upper(&direct.add_scaled(1.0, &two_hop, 1.0)?)
}

/// `0.85 / ρ̂(A)` for the clique projection `A`.
pub fn default_katz_factor(adjacency: &CsrMatrix) -> f64 {
    let radius = spectral_radius_estimate(adjacency, RADIUS_STEPS);
    if radius == 0.0 {
        DEFAULT_ATTENUATION
    } else {
        DEFAULT_ATTENUATION / radius
    }
}

/// Rejects attenuation factors with `factor·ρ̂(A) ≥ 1`.
pub(crate) fn check_factor(adjacency: &CsrMatrix, factor: f64) -> Result<()> {
    if !(factor >= 0.0 && factor.is_finite()) {
        return Err(Error::param(format!("attenuation factor must be ≥ 0, got {factor}")));
    }
    let radius = spectral_radius_estimate(adjacency, RADIUS_STEPS);
    if factor * radius >= 1.0 {
        return Err(Error::OutsideConvergenceRadius {
            factor,
            radius,
            limit: 1.0 / radius,
        });
    }
    Ok(())
}

/// Full Katz matrix `(I − λA)⁻¹ − I`, diagonal included, one CG solve per
/// column.
pub fn katz_matrix(graph: &Hypergraph, lambda: f64) -> Result<CsrMatrix> {
    let a = clique_adjacency(graph);
    check_factor(&a, lambda)?;
    let n = graph.node_count();
    let apply = |x: &[f64], out: &mut [f64]| {
        a.mul_vec_into(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = xi - lambda * *o;
        }
    };
    let columns: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let sol = conjugate_gradient(apply, &e, KATZ_TOL, 10 * n + 100);
            if !sol.converged {
                return Err(Error::NonConvergence {
                    what: format!("Katz solve for column {j}"),
                    residual: sol.residual,
                });
            }
            let mut x = sol.x;
            x[j] -= 1.0;
            Ok(x.into_iter().enumerate().filter(|&(_, v)| v != 0.0).collect())
        })
        .collect::<Result<_>>()?;
    // (I − λA)⁻¹ is symmetric, so column j is row j
    CsrMatrix::from_triplets(
        n,
        n,
        columns
            .into_iter()
            .enumerate()
            .flat_map(|(j, col)| col.into_iter().map(move |(i, v)| (j, i, v))),
    )
}

/// Off-diagonal Katz index `Σ_{l≥1} λˡ (Aˡ)_ij`.
pub fn katz_similarity(graph: &Hypergraph, lambda: f64) -> Result<SimilarityMatrix> {
    SimilarityMatrix::from_upper(&katz_matrix(graph, lambda)?)
}
