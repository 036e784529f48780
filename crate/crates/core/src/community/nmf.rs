//! Lee–Seung multiplicative updates for `A ≈ F·Z`.

use log::warn;
use nalgebra::DMatrix;
use rand::Rng;

use super::{CommunityAlgorithm, Partition};
use crate::error::{Error, Result};
use crate::hypercore::{clique_adjacency, Hypergraph};
use crate::linalg::CsrMatrix;
use crate::rng::{domain, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmfOptions {
    pub max_iter: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tol: f64,
}

impl Default for NmfOptions {
    fn default() -> Self {
        Self { max_iter: 500, tol: 1e-5 }
    }
}

#[derive(Debug, Clone)]
pub struct NmfFactors {
    /// N×r membership strengths.
    pub f: DMatrix<f64>,
    /// r×N loadings.
    pub z: DMatrix<f64>,
    /// `‖A − FZ‖²_F` at initialization and after every update.
    pub objective: Vec<f64>,
    pub converged: bool,
}

/// `A·X` for sparse `A` and dense `X`.
fn sparse_dense(a: &CsrMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.rows(), x.ncols());
    for i in 0..a.rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            for c in 0..x.ncols() {
                out[(i, c)] += v * x[(j, c)];
            }
        }
    }
    out
}

/// `x ⊙ num ⊘ den`, leaving entries with a zero denominator unchanged.
fn multiplicative_step(x: &mut DMatrix<f64>, num: &DMatrix<f64>, den: &DMatrix<f64>) {
    for ((xi, &n), &d) in x.iter_mut().zip(num.iter()).zip(den.iter()) {
        if d > 0.0 {
            *xi *= n / d;
        }
    }
}

/// `‖A‖² − 2·tr(Fᵀ·A·Zᵀ) + tr(FᵀF·ZZᵀ)`, given `A·Zᵀ`.
fn objective(a_norm2: f64, f: &DMatrix<f64>, z: &DMatrix<f64>, azt: &DMatrix<f64>) -> f64 {
    let cross = f.component_mul(azt).sum();
    let quad = (f.transpose() * f).component_mul(&(z * z.transpose())).sum();
    (a_norm2 - 2.0 * cross + quad).max(0.0)
}

/// Rank-`rank` nonnegative factorization of a nonnegative sparse matrix.
pub fn nmf_factorize(a: &CsrMatrix, rank: usize, opts: &NmfOptions, seed: u64) -> Result<NmfFactors> {
    let (n, m) = (a.rows(), a.cols());
    if rank == 0 || rank > n.min(m) {
        return Err(Error::param(format!("NMF rank {rank} for a {n}x{m} matrix")));
    }
    if a.values().iter().any(|&v| v < 0.0) {
        return Err(Error::param("NMF input must be nonnegative"));
    }
    let a_t = a.transpose();
    let a_norm2: f64 = a.values().iter().map(|v| v * v).sum();
    let mean = a.values().iter().sum::<f64>() / (n * m) as f64;
    let scale = (mean / rank as f64).sqrt();
    let mut rng = stream_rng(seed, &[domain::NMF]);
    let mut f = DMatrix::from_fn(n, rank, |_, _| rng.random::<f64>() * scale);
    let mut z = DMatrix::from_fn(rank, m, |_, _| rng.random::<f64>() * scale);

    let mut azt = sparse_dense(a, &z.transpose());
    let mut history = vec![objective(a_norm2, &f, &z, &azt)];
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let den_f = &f * (&z * z.transpose());
        multiplicative_step(&mut f, &azt, &den_f);
        let fta = sparse_dense(&a_t, &f).transpose();
        let den_z = (f.transpose() * &f) * &z;
        multiplicative_step(&mut z, &fta, &den_z);
        azt = sparse_dense(a, &z.transpose());
        let cur = objective(a_norm2, &f, &z, &azt);
        let prev = *history.last().expect("non-empty");
        history.push(cur);
        if prev == 0.0 || (prev - cur) / prev < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(NmfFactors {
        f,
        z,
        objective: history,
        converged,
    })
}

/// Row-argmax of `F`, lowest index on ties.
fn argmax_rows(f: &DMatrix<f64>) -> Vec<usize> {
    (0..f.nrows())
        .map(|i| {
            let mut best = 0;
            for c in 1..f.ncols() {
                if f[(i, c)] > f[(i, best)] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// NMF of the clique projection `A = M·Mᵀ − D`, nodes assigned by row-argmax.
pub fn nmf_partition(graph: &Hypergraph, n_c: usize, opts: &NmfOptions, seed: u64) -> Result<Partition> {
    let a = clique_adjacency(graph);
    let factors = nmf_factorize(&a, n_c, opts, seed)?;
    if !factors.converged {
        warn!("NMF stopped after {} iterations without meeting tolerance", opts.max_iter);
    }
    let obj = *factors.objective.last().expect("non-empty");
    Ok(Partition::new(argmax_rows(&factors.f), n_c, CommunityAlgorithm::Nmf, seed, factors.converged, obj))
}
