//! Resource-allocation proximity between nodes and hyperedges.
//!
//! One allocation round splits each node's resource evenly over its
//! hyperedges and then each hyperedge's resource evenly over its members. As
//! an operator on node vectors this is the column-stochastic transition
//! matrix `T = (M·K⁻¹)·(Mᵀ·D⁻¹)`. Applying it to the incidence matrix gives
//! the proximity matrix `P = T·M`; iterating gives `P⁽ᵗ⁾ = Tᵗ·M`, which tends
//! to the rank-one limit `d_i·k_α / Σ_j d_j` on a connected hypergraph.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercore::Hypergraph;
use crate::linalg::CsrMatrix;

/// Which node×hyperedge matrix feeds the downstream pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Source {
    /// The proximity matrix `P⁽ᵗ⁾`.
    #[default]
    P,
    /// The raw binary incidence matrix (ablation baseline).
    M,
}

impl std::str::FromStr for Source {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(Source::P),
            "M" | "m" => Ok(Source::M),
            other => Err(Error::param(format!("unknown source {other:?} (expected P or M)"))),
        }
    }
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Source::P => "P",
            Source::M => "M",
        })
    }
}

/// Nonnegative node×hyperedge matrix. Column `α` sums to `k_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix {
    values: CsrMatrix,
    iterate: Option<usize>,
}

impl ProximityMatrix {
    /// Wraps an arbitrary nonnegative node×hyperedge matrix.
    pub fn from_values(values: CsrMatrix) -> Self {
        Self { values, iterate: None }
    }

    pub fn values(&self) -> &CsrMatrix {
        &self.values
    }

    /// Number of allocation rounds applied to `M`; `None` for the closed-form limit.
    pub fn iterate(&self) -> Option<usize> {
        self.iterate
    }

    pub fn get(&self, node: usize, hyperedge: usize) -> f64 {
        self.values.get(node, hyperedge)
    }

    /// Same matrix with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.map_values(|v| v * factor),
            iterate: self.iterate,
        }
    }
}

fn inverse(xs: &[usize]) -> Vec<f64> {
    xs.iter().map(|&x| if x == 0 { 0.0 } else { 1.0 / x as f64 }).collect()
}

/// The two sparse factors of `T`: `(M·K⁻¹, Mᵀ·D⁻¹)`.
fn transition_factors(graph: &Hypergraph) -> (CsrMatrix, CsrMatrix) {
    let spread = graph.incidence().scale_cols(&inverse(graph.orders()));
    let gather = graph.incidence_t().scale_cols(&inverse(graph.degrees()));
    (spread, gather)
}

/// Explicit N×N transition matrix. Every column of a node with degree ≥ 1
/// sums to one.
pub fn transition_matrix(graph: &Hypergraph) -> CsrMatrix {
    let (spread, gather) = transition_factors(graph);
    spread.matmul(&gather).expect("factor shapes agree")
}

/// `P⁽⁰⁾ = M` as a real matrix.
pub fn incidence_proximity(graph: &Hypergraph) -> ProximityMatrix {
    ProximityMatrix {
        values: graph.incidence().clone(),
        iterate: Some(0),
    }
}

/// `P⁽ᵗ⁾ = Tᵗ·M` for `t ≥ 1`, applied through the factors of `T` without
/// materializing it.
pub fn proximity_matrix(graph: &Hypergraph, t: usize) -> Result<ProximityMatrix> {
    if t == 0 {
        return Err(Error::param("proximity iterate must be ≥ 1 (use incidence_proximity for t = 0)"));
    }
    let (spread, gather) = transition_factors(graph);
    let mut values = graph.incidence().clone();
    for _ in 0..t {
        let pooled = gather.matmul(&values)?;
        values = spread.matmul(&pooled)?;
    }
    Ok(ProximityMatrix {
        values,
        iterate: Some(t),
    })
}

/// Closed-form limit `d_i·k_α / Σ_j d_j`, with the sum taken over the
/// connected component that contains hyperedge `α` (entries across components
/// are zero). On a connected hypergraph this is the usual rank-one matrix.
pub fn stationary_proximity(graph: &Hypergraph) -> ProximityMatrix {
    let (comp, count) = graph.components();
    let mut mass = vec![0usize; count];
    for (i, &d) in graph.degrees().iter().enumerate() {
        mass[comp[i]] += d;
    }
    let edge_comp: Vec<usize> = graph.hyperedges().map(|e| comp[e[0]]).collect();
    let mut trips = Vec::new();
    for (i, &d) in graph.degrees().iter().enumerate() {
        if d == 0 {
            continue;
        }
        for (alpha, &k) in graph.orders().iter().enumerate() {
            if edge_comp[alpha] == comp[i] {
                trips.push((i, alpha, d as f64 * k as f64 / mass[comp[i]] as f64));
            }
        }
    }
    ProximityMatrix {
        values: CsrMatrix::from_triplets(graph.node_count(), graph.hyperedge_count(), trips)
            .expect("indices in range"),
        iterate: None,
    }
}

/// `P⁽ᵗ⁾` for [`Source::P`] or the incidence matrix for [`Source::M`].
pub fn ablation_source(graph: &Hypergraph, source: Source, t: usize) -> Result<ProximityMatrix> {
    match source {
        Source::P => proximity_matrix(graph, t),
        Source::M => Ok(incidence_proximity(graph)),
    }
}

/// Symmetric nonnegative node×node matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    values: CsrMatrix,
}

impl SimilarityMatrix {
    /// Wraps a square matrix, dropping the diagonal and mirroring the strict
    /// upper triangle so that symmetry is exact.
    pub fn from_upper(values: &CsrMatrix) -> Result<Self> {
        let n = values.rows();
        if values.cols() != n {
            return Err(Error::DimensionMismatch(format!("{}x{} similarity", n, values.cols())));
        }
        let trips = values
            .triplets()
            .filter(|&(i, j, _)| i < j)
            .flat_map(|(i, j, v)| [(i, j, v), (j, i, v)]);
        Ok(Self {
            values: CsrMatrix::from_triplets(n, n, trips)?,
        })
    }

    pub fn values(&self) -> &CsrMatrix {
        &self.values
    }

    pub fn node_count(&self) -> usize {
        self.values.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }
}

/// `S_ij = Σ_α P_iα·P_jα / √(d_i·d_j)` for `i ≠ j`, zero on the diagonal.
/// Nodes of degree 0 get an all-zero row.
pub fn similarity_matrix(prox: &ProximityMatrix, graph: &Hypergraph) -> Result<SimilarityMatrix> {
    similarity_matrix_with_floor(prox, graph, 0.0)
}

/// [`similarity_matrix`] with entries below `floor` pruned.
pub fn similarity_matrix_with_floor(
    prox: &ProximityMatrix,
    graph: &Hypergraph,
    floor: f64,
) -> Result<SimilarityMatrix> {
    let p = prox.values();
    if p.rows() != graph.node_count() || p.cols() != graph.hyperedge_count() {
        return Err(Error::DimensionMismatch(format!(
            "proximity is {}x{} but graph has N={} M={}",
            p.rows(),
            p.cols(),
            graph.node_count(),
            graph.hyperedge_count()
        )));
    }
    let isolated = graph.degrees().iter().filter(|&&d| d == 0).count();
    if isolated > 0 {
        debug!("{isolated} node(s) of degree 0 get zero similarity");
    }
    let scale: Vec<f64> = graph
        .degrees()
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() })
        .collect();
    let gram = p.matmul(&p.transpose())?;
    // divide by the product √(d_i d_j) in one step so mirrored entries agree
    let upper = CsrMatrix::from_triplets(
        gram.rows(),
        gram.cols(),
        gram.triplets()
            .filter(|&(i, j, _)| i < j)
            .map(|(i, j, v)| (i, j, v * (scale[i] * scale[j])))
            .filter(|&(_, _, v)| v >= floor),
    )?;
    SimilarityMatrix::from_upper(&upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercore::tests::toy;

    #[test]
    fn transition_toy_values() {
        let t = transition_matrix(&toy());
        assert_eq!(t.get(0, 0), 0.5);
        assert_eq!(t.get(0, 1), 0.25);
        assert_eq!(t.get(1, 0), 0.5);
        assert_eq!(t.get(2, 0), 0.0);
        for s in t.col_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        // degree vector is a fixed point
        assert_eq!(t.mul_vec(&[1.0, 2.0, 1.0]), vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn single_hyperedge_is_fixed() {
        let g = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
        let t = transition_matrix(&g);
        assert_eq!(t.to_dense().as_slice(), &[0.5, 0.5, 0.5, 0.5]);
        let p = proximity_matrix(&g, 1).unwrap();
        assert_eq!(p.values(), g.incidence());
        let s = similarity_matrix(&p, &g).unwrap();
        assert_eq!(s.get(0, 1), 1.0);
    }

    #[test]
    fn toy_proximity_values() {
        let p = proximity_matrix(&toy(), 1).unwrap();
        let expected = [[0.75, 0.25], [1.0, 1.0], [0.25, 0.75]];
        for (i, row) in expected.iter().enumerate() {
            for (a, &v) in row.iter().enumerate() {
                assert!((p.get(i, a) - v).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn toy_similarity_values() {
        let g = toy();
        let s = similarity_matrix(&proximity_matrix(&g, 1).unwrap(), &g).unwrap();
        assert!((s.get(0, 1) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((s.get(0, 2) - 0.375).abs() < 1e-15);
        assert_eq!(s.get(0, 0), 0.0);
        assert!(s.values().is_symmetric());
    }

    #[test]
    fn incidence_source_gives_co_membership() {
        let g = toy();
        let m = ablation_source(&g, Source::M, 1).unwrap();
        assert!(m.values().values().iter().all(|&v| v == 1.0));
        let s = similarity_matrix(&m, &g).unwrap();
        assert!((s.get(0, 1) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.get(0, 2), 0.0);
    }

    #[test]
    fn stationary_toy() {
        let p = stationary_proximity(&toy());
        assert_eq!(p.get(1, 0), 1.0);
        assert_eq!(p.get(0, 0), 0.5);
        let long = proximity_matrix(&toy(), 100).unwrap();
        for i in 0..3 {
            for a in 0..2 {
                assert!((long.get(i, a) - p.get(i, a)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn t_zero_rejected() {
        assert!(proximity_matrix(&toy(), 0).is_err());
    }

    #[test]
    fn floor_prunes() {
        let g = toy();
        let s = similarity_matrix_with_floor(&proximity_matrix(&g, 1).unwrap(), &g, 0.5).unwrap();
        assert_eq!(s.get(0, 2), 0.0);
        assert!(s.get(0, 1) > 0.7);
    }
}
