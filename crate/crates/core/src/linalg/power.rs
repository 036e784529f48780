use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::CsrMatrix;

/// Outcome of [`power_iteration`].
#[derive(Debug, Clone)]
pub struct PowerIterationResult {
    pub eigenvalue: f64,
    /// 1-norm normalized when the limit vector has one sign, otherwise unit 2-norm.
    pub eigenvector: Vec<f64>,
    /// `‖Av − λv‖₂ / ‖v‖₂` at the returned pair.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Dominant eigenpair of the operator `apply` by power iteration.
///
/// Starts from a seeded strictly positive vector, so a nonnegative irreducible
/// operator converges to its Perron vector.
pub fn power_iteration<F>(apply: F, dim: usize, tol: f64, max_iter: usize, seed: u64) -> PowerIterationResult
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..1.5)).collect();
    normalize2(&mut v);
    let mut w = vec![0.0; dim];
    let mut eigenvalue = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        apply(&v, &mut w);
        eigenvalue = dot(&v, &w);
        residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - eigenvalue * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual < tol {
            converged = true;
            break;
        }
        let norm = norm2(&w);
        if norm == 0.0 {
            // v lies in the null space
            eigenvalue = 0.0;
            residual = 0.0;
            converged = true;
            break;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }

    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if v.iter().all(|&x| x >= -1e-12 * max) {
        v.iter_mut().for_each(|x| *x = x.max(0.0));
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
    }

    PowerIterationResult {
        eigenvalue,
        eigenvector: v,
        residual,
        iterations,
        converged,
    }
}

/// Spectral radius estimate for a nonnegative square matrix.
///
/// Runs `steps` power-iteration steps on `A + I` from the all-ones vector and
/// returns the Rayleigh quotient minus one. The shift keeps bipartite matrices
/// (eigenvalues ±ρ) from oscillating.
pub fn spectral_radius_estimate(a: &CsrMatrix, steps: usize) -> f64 {
    let n = a.rows();
    if n == 0 || a.nnz() == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = vec![0.0; n];
    let mut rayleigh = 0.0;
    for _ in 0..steps {
        a.mul_vec_into(&v, &mut w);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += vi;
        }
        rayleigh = dot(&v, &w);
        let norm = norm2(&w);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    (rayleigh - 1.0).max(0.0)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize2(v: &mut [f64]) {
    let n = norm2(v);
    v.iter_mut().for_each(|x| *x /= n);
}
