//! Node centralities: the resource-allocation quadratic form and the HEC,
//! Katz, NB, SHC and degree benchmarks.
//!
//! Eigenvector-type measures are computed independently on every connected
//! component; each component's block is normalized to unit 1-norm on its own,
//! so values are not comparable across components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercore::{clique_adjacency, Hypergraph};
use crate::linalg::{conjugate_gradient, symmetric_spectrum, DENSE_EIGEN_LIMIT};
use crate::linkpred::default_katz_factor;
use crate::proximity::{ablation_source, ProximityMatrix, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Hra,
    Hec,
    Katz,
    Nb,
    Shc,
    Hdc,
}

impl Measure {
    pub const ALL: [Measure; 6] = [Self::Hra, Self::Hec, Self::Katz, Self::Nb, Self::Shc, Self::Hdc];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hra => "hra",
            Self::Hec => "hec",
            Self::Katz => "katz",
            Self::Nb => "nb",
            Self::Shc => "shc",
            Self::Hdc => "hdc",
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown centrality measure {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CentralityDiagnostics {
    pub converged: bool,
    pub iterations: usize,
    /// Largest relative eigen- or solve residual, 0 for closed forms.
    pub residual: f64,
    /// SHC only: values were multiplied by `exp(-shift)` to stay finite.
    pub exp_shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityVector {
    pub values: Vec<f64>,
    pub method: Measure,
    pub diagnostics: CentralityDiagnostics,
}

impl CentralityVector {
    fn exact(values: Vec<f64>, method: Measure) -> Self {
        Self {
            values,
            method,
            diagnostics: CentralityDiagnostics {
                converged: true,
                ..Default::default()
            },
        }
    }
}

/// `c_i = Σ_{α≠β} P_iα·P_iβ = (Σ_α P_iα)² − Σ_α P_iα²`.
pub fn hra_centrality(prox: &ProximityMatrix) -> CentralityVector {
    let p = prox.values();
    let values = (0..p.rows())
        .map(|i| {
            let (_, vals) = p.row(i);
            let s: f64 = vals.iter().sum();
            let sq: f64 = vals.iter().map(|v| v * v).sum();
            s * s - sq
        })
        .collect();
    CentralityVector::exact(values, Measure::Hra)
}

/// Hypergraph degree `d_i`.
pub fn hdc_centrality(graph: &Hypergraph) -> CentralityVector {
    CentralityVector::exact(graph.degrees().iter().map(|&d| d as f64).collect(), Measure::Hdc)
}

/// Component id of every node and every hyperedge.
fn component_labels(graph: &Hypergraph) -> (Vec<usize>, Vec<usize>, usize) {
    let (node_comp, count) = graph.components();
    let edge_comp = graph.hyperedges().map(|e| node_comp[e[0]]).collect();
    (node_comp, edge_comp, count)
}

/// Scales every component block of `v` to unit 1-norm; returns the old sums.
fn normalize_blocks(v: &mut [f64], comp: &[usize], count: usize) -> Vec<f64> {
    let mut sums = vec![0.0; count];
    for (x, &c) in v.iter().zip(comp) {
        sums[c] += x.abs();
    }
    for (x, &c) in v.iter_mut().zip(comp) {
        if sums[c] > 0.0 {
            *x /= sums[c];
        }
    }
    sums
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Max over components of `‖w − λ_c·v‖₂ / ‖v‖₂` with `λ_c = Σw / Σv` on the block.
fn block_residual(w: &[f64], v: &[f64], comp: &[usize], count: usize) -> f64 {
    let mut sw = vec![0.0; count];
    let mut sv = vec![0.0; count];
    for ((&a, &b), &c) in w.iter().zip(v).zip(comp) {
        sw[c] += a;
        sv[c] += b;
    }
    let mut num = vec![0.0; count];
    let mut den = vec![0.0; count];
    for ((&a, &b), &c) in w.iter().zip(v).zip(comp) {
        let lambda = if sv[c] > 0.0 { sw[c] / sv[c] } else { 0.0 };
        num[c] += (a - lambda * b).powi(2);
        den[c] += b * b;
    }
    (0..count)
        .filter(|&c| den[c] > 0.0)
        .map(|c| (num[c] / den[c]).sqrt())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            tol: 1e-13,
        }
    }
}

/// Coupled power iteration `x ← M·K·y`, `y ← Mᵀ·D·x` from uniform starts,
/// stopped when `‖Δx‖₁ < tol`.
pub fn hec_centrality(graph: &Hypergraph, opts: &IterationOptions) -> CentralityVector {
    let (node_comp, edge_comp, count) = component_labels(graph);
    let m = graph.incidence();
    let mt = graph.incidence_t();
    let k: Vec<f64> = graph.orders().iter().map(|&k| k as f64).collect();
    let d: Vec<f64> = graph.degrees().iter().map(|&d| d as f64).collect();
    let apply_x = |y: &[f64]| -> Vec<f64> {
        let ky: Vec<f64> = y.iter().zip(&k).map(|(a, b)| a * b).collect();
        m.mul_vec(&ky)
    };
    let apply_y = |x: &[f64]| -> Vec<f64> {
        let dx: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a * b).collect();
        mt.mul_vec(&dx)
    };
    let mut x = vec![1.0 / graph.node_count() as f64; graph.node_count()];
    let mut y = vec![1.0 / graph.hyperedge_count() as f64; graph.hyperedge_count()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut next = apply_x(&y);
        normalize_blocks(&mut next, &node_comp, count);
        y = apply_y(&next);
        normalize_blocks(&mut y, &edge_comp, count);
        let delta = l1_diff(&next, &x);
        x = next;
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    let residual = block_residual(&apply_x(&y), &x, &node_comp, count)
        .max(block_residual(&apply_y(&x), &y, &edge_comp, count));
    CentralityVector {
        values: x,
        method: Measure::Hec,
        diagnostics: CentralityDiagnostics {
            converged,
            iterations,
            residual,
            exp_shift: None,
        },
    }
}

/// Solution of `(I − γA)·x = 1` on the clique projection; `None` uses
/// `γ = 0.85/ρ̂(A)`.
pub fn katz_centrality(graph: &Hypergraph, gamma: Option<f64>) -> Result<CentralityVector> {
    let a = clique_adjacency(graph);
    let gamma = gamma.unwrap_or_else(|| default_katz_factor(&a));
    crate::linkpred::check_factor(&a, gamma)?;
    let n = graph.node_count();
    let apply = |x: &[f64], out: &mut [f64]| {
        a.mul_vec_into(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = xi - gamma * *o;
        }
    };
    let sol = conjugate_gradient(apply, &vec![1.0; n], 1e-13, 10 * n + 100);
    if !sol.converged {
        return Err(Error::NonConvergence {
            what: "Katz centrality solve".into(),
            residual: sol.residual,
        });
    }
    Ok(CentralityVector {
        values: sol.x,
        method: Measure::Katz,
        diagnostics: CentralityDiagnostics {
            converged: true,
            iterations: sol.iterations,
            residual: sol.residual,
            exp_shift: None,
        },
    })
}

/// Node block of the principal eigenvector of the bipartite matrix
/// `[[0, M], [Mᵀ, 0]]`. Power iteration runs on the matrix shifted by `I`
/// so the `±σ` pair does not oscillate.
pub fn nb_centrality(graph: &Hypergraph, opts: &IterationOptions) -> CentralityVector {
    let (node_comp, edge_comp, count) = component_labels(graph);
    let n = graph.node_count();
    let comp: Vec<usize> = node_comp.iter().chain(&edge_comp).copied().collect();
    let apply = |v: &[f64]| -> Vec<f64> {
        let (u, e) = v.split_at(n);
        let mut out = graph.incidence().mul_vec(e);
        out.extend(graph.incidence_t().mul_vec(u));
        out
    };
    let mut v = vec![1.0; n + graph.hyperedge_count()];
    normalize_blocks(&mut v, &comp, count);
    let mut iterations = 0;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut next: Vec<f64> = apply(&v).iter().zip(&v).map(|(a, b)| a + b).collect();
        normalize_blocks(&mut next, &comp, count);
        let delta = l1_diff(&next, &v);
        v = next;
        if delta < opts.tol {
            residual = block_residual(&apply(&v), &v, &comp, count);
            converged = true;
            break;
        }
    }
    if !converged {
        residual = block_residual(&apply(&v), &v, &comp, count);
    }
    v.truncate(n);
    normalize_blocks(&mut v, &node_comp, count);
    CentralityVector {
        values: v,
        method: Measure::Nb,
        diagnostics: CentralityDiagnostics {
            converged,
            iterations,
            residual,
            exp_shift: None,
        },
    }
}

/// Exponent above which SHC values are rescaled to avoid overflow.
pub const SHC_EXP_LIMIT: f64 = 700.0;

/// `c_i = Σ_j ξ_ij²·exp(λ_j)`, the diagonal of `exp(A)`, from the full
/// spectrum of the clique projection.
pub fn shc_centrality(graph: &Hypergraph) -> Result<CentralityVector> {
    let n = graph.node_count();
    if n > DENSE_EIGEN_LIMIT {
        return Err(Error::Unsupported(format!(
            "SHC needs a dense eigendecomposition; N = {n} exceeds {DENSE_EIGEN_LIMIT}"
        )));
    }
    let (values, vectors) = symmetric_spectrum(clique_adjacency(graph).to_dense());
    let top = values.last().copied().unwrap_or(0.0);
    let shift = if top > SHC_EXP_LIMIT { top } else { 0.0 };
    let weights: Vec<f64> = values.iter().map(|l| (l - shift).exp()).collect();
    let c = (0..n)
        .map(|i| (0..n).map(|j| vectors[(i, j)].powi(2) * weights[j]).sum())
        .collect();
    Ok(CentralityVector {
        values: c,
        method: Measure::Shc,
        diagnostics: CentralityDiagnostics {
            converged: true,
            iterations: 0,
            residual: 0.0,
            exp_shift: (shift != 0.0).then_some(shift),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralityOptions {
    pub source: Source,
    pub iterate: usize,
    pub katz_gamma: Option<f64>,
    pub iteration: IterationOptions,
}

impl Default for CentralityOptions {
    fn default() -> Self {
        Self {
            source: Source::P,
            iterate: 1,
            katz_gamma: None,
            iteration: IterationOptions::default(),
        }
    }
}

/// Computes one centrality measure.
pub fn centrality(graph: &Hypergraph, measure: Measure, opts: &CentralityOptions) -> Result<CentralityVector> {
    Ok(match measure {
        Measure::Hra => hra_centrality(&ablation_source(graph, opts.source, opts.iterate.max(1))?),
        Measure::Hec => hec_centrality(graph, &opts.iteration),
        Measure::Katz => katz_centrality(graph, opts.katz_gamma)?,
        Measure::Nb => nb_centrality(graph, &opts.iteration),
        Measure::Shc => shc_centrality(graph)?,
        Measure::Hdc => hdc_centrality(graph),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercore::tests::toy;
    use crate::linalg::CsrMatrix;
    use crate::proximity::proximity_matrix;
    use nalgebra::DMatrix;

    fn dyad() -> Hypergraph {
        Hypergraph::new(2, vec![vec![0, 1]]).unwrap()
    }

    fn sample_graph() -> Hypergraph {
        Hypergraph::new(
            9,
            vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5, 6], vec![6, 7], vec![7, 8, 0], vec![1, 5]],
        )
        .unwrap()
    }

    #[test]
    fn hra_toy_values() {
        let c = hra_centrality(&proximity_matrix(&toy(), 1).unwrap());
        assert!((c.values[0] - 0.375).abs() < 1e-12);
        assert!((c.values[1] - 2.0).abs() < 1e-12);
        assert!((c.values[2] - 0.375).abs() < 1e-12);
        let single = ProximityMatrix::from_values(CsrMatrix::from_triplets(1, 2, [(0, 1, 0.7)]).unwrap());
        assert_eq!(hra_centrality(&single).values, vec![0.0]);
    }

    #[test]
    fn hdc_is_degree() {
        assert_eq!(hdc_centrality(&toy()).values, vec![1.0, 2.0, 1.0]);
        let g = sample_graph();
        assert_eq!(hdc_centrality(&g).values, g.incidence().row_sums());
    }

    #[test]
    fn hec_dyad_and_symmetry() {
        let c = hec_centrality(&dyad(), &IterationOptions::default());
        assert_eq!(c.values, vec![0.5, 0.5]);
        let c = hec_centrality(&toy(), &IterationOptions::default());
        assert!(c.diagnostics.converged);
        assert!((c.values[0] - c.values[2]).abs() < 1e-10);
        assert!(c.diagnostics.residual < 1e-8);
        let c = hec_centrality(&sample_graph(), &IterationOptions::default());
        assert!(c.diagnostics.converged);
        assert!(c.diagnostics.residual < 1e-8, "{}", c.diagnostics.residual);
        assert!((c.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn katz_cases() {
        let c = katz_centrality(&toy(), Some(0.0)).unwrap();
        assert_eq!(c.values, vec![1.0; 3]);
        let c = katz_centrality(&toy(), Some(0.5)).unwrap();
        assert!((c.values[0] - c.values[2]).abs() < 1e-12);
        assert!(katz_centrality(&toy(), Some(0.8)).is_err());

        let g = sample_graph();
        let gamma = 0.05;
        let c = katz_centrality(&g, Some(gamma)).unwrap();
        let a = clique_adjacency(&g).to_dense();
        let mut term = nalgebra::DVector::from_element(9, 1.0);
        let mut series = term.clone();
        for _ in 0..30 {
            term = &a * term * gamma;
            series += &term;
        }
        for i in 0..9 {
            assert!((c.values[i] - series[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn nb_is_principal_left_singular_vector() {
        let c = nb_centrality(&dyad(), &IterationOptions::default());
        assert!((c.values[0] - c.values[1]).abs() < 1e-14);
        let g = sample_graph();
        let c = nb_centrality(&g, &IterationOptions::default());
        assert!(c.diagnostics.converged);
        assert!(c.diagnostics.residual < 1e-8, "{}", c.diagnostics.residual);
        let svd = g.incidence().to_dense().svd(true, false);
        let top = svd.singular_values.imax();
        let u = svd.u.unwrap().column(top).into_owned();
        let u = &u / u.sum();
        for i in 0..9 {
            assert!((c.values[i] - u[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn shc_is_diagonal_of_matrix_exponential() {
        let g = sample_graph();
        let c = shc_centrality(&g).unwrap();
        let a = clique_adjacency(&g).to_dense();
        // scaling and squaring with a Taylor core
        let s = 10;
        let scaled = &a / 2f64.powi(s);
        let mut term = DMatrix::<f64>::identity(9, 9);
        let mut exp = term.clone();
        for k in 1..30 {
            term = &term * &scaled / k as f64;
            exp += &term;
        }
        for _ in 0..s {
            exp = &exp * &exp;
        }
        for i in 0..9 {
            assert!((c.values[i] - exp[(i, i)]).abs() < 1e-8 * exp[(i, i)]);
            assert!(c.values[i] > 0.0);
        }
    }

    #[test]
    fn shc_is_local_to_components() {
        let g = sample_graph();
        let mut edges: Vec<Vec<usize>> = g.hyperedges().map(|e| e.to_vec()).collect();
        edges.push(vec![9, 10]);
        let bigger = Hypergraph::new(11, edges).unwrap();
        let a = shc_centrality(&g).unwrap().values;
        let b = shc_centrality(&bigger).unwrap().values;
        for i in 0..9 {
            assert!((a[i] - b[i]).abs() < 1e-10 * a[i]);
        }
        // an isolated dyad has A = [[0,1],[1,0]]: diag exp(A) = cosh 1
        assert!((b[9] - 1f64.cosh()).abs() < 1e-12);
    }

    #[test]
    fn eigen_measures_per_component() {
        let g = Hypergraph::new(5, vec![vec![0, 1], vec![2, 3, 4]]).unwrap();
        for c in [
            hec_centrality(&g, &IterationOptions::default()),
            nb_centrality(&g, &IterationOptions::default()),
        ] {
            assert!((c.values[0] + c.values[1] - 1.0).abs() < 1e-12);
            assert!((c.values[2..].iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(c.values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
    }
}
