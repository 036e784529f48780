//! Symmetric eigenproblems: the smallest eigenpairs of a sparse symmetric
//! matrix, solved densely for moderate sizes and by block Lanczos above.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::power::{dot, norm2};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Largest dimension handled by the dense solver under [`EigenMethod::Auto`].
pub const DENSE_EIGEN_LIMIT: usize = 4000;

/// Residual bound on returned eigenpairs, relative to `max(1, ‖A‖)`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    /// Dense up to [`DENSE_EIGEN_LIMIT`], block Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// Largest `‖Av − λv‖₂` over the returned pairs.
    pub max_residual: f64,
}

/// The `count` smallest eigenpairs of the symmetric matrix `sym`.
pub fn smallest_eigenpairs(sym: &CsrMatrix, count: usize, method: EigenMethod) -> Result<EigenPairs> {
    let n = sym.rows();
    if sym.cols() != n {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", n, sym.cols())));
    }
    if count == 0 || count > n {
        return Err(Error::param(format!("requested {count} eigenpairs of a {n}x{n} matrix")));
    }
    let use_dense = match method {
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => false,
        EigenMethod::Auto => n <= DENSE_EIGEN_LIMIT,
    };
    let pairs = if use_dense {
        dense_smallest(sym, count)
    } else {
        block_lanczos_smallest(sym, count, 0x5eed)?
    };
    let scale = inf_norm(sym).max(1.0);
    if pairs.max_residual > EIGEN_RESIDUAL_TOL * scale {
        return Err(Error::NonConvergence {
            what: "symmetric eigensolver".into(),
            residual: pairs.max_residual,
        });
    }
    Ok(pairs)
}

/// Full spectrum of a dense symmetric matrix, ascending.
pub fn symmetric_spectrum(dense: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(dense);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, c| {
        eig.eigenvectors[(i, order[c])]
    });
    (values, vectors)
}

fn dense_smallest(sym: &CsrMatrix, count: usize) -> EigenPairs {
    let (values, vectors) = symmetric_spectrum(sym.to_dense());
    let vectors = vectors.columns(0, count).into_owned();
    let values = values[..count].to_vec();
    let max_residual = max_residual(sym, &values, &vectors);
    EigenPairs {
        values,
        vectors,
        max_residual,
    }
}

fn inf_norm(a: &CsrMatrix) -> f64 {
    (0..a.rows())
        .map(|i| a.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_residual(a: &CsrMatrix, values: &[f64], vectors: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for (c, &lambda) in values.iter().enumerate() {
        let v: Vec<f64> = vectors.column(c).iter().copied().collect();
        let av = a.mul_vec(&v);
        let r = av
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - lambda * y).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    worst
}

/// Orthogonalizes `v` against `basis` twice (classical Gram–Schmidt with
/// reorthogonalization) and returns its remaining norm.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
    norm2(v)
}

/// Block Krylov subspace with full reorthogonalization and Rayleigh–Ritz
/// extraction. The block size exceeds `count`, so eigenvalues with
/// multiplicity up to the block size (e.g. disconnected Laplacians) are found.
fn block_lanczos_smallest(a: &CsrMatrix, count: usize, seed: u64) -> Result<EigenPairs> {
    let n = a.rows();
    let block = (count + 2).min(n);
    let tol = EIGEN_RESIDUAL_TOL * inf_norm(a).max(1.0) * 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut frontier: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut next_check = (4 * block).max(2 * count + 20).min(n);

    loop {
        let mut added = Vec::new();
        for mut v in frontier.drain(..) {
            if basis.len() == n {
                break;
            }
            let mut norm = orthogonalize(&mut v, &basis);
            // deflated direction: replace with a fresh random vector
            let mut attempts = 0;
            while norm < 1e-10 && attempts < 10 {
                v = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                norm = orthogonalize(&mut v, &basis);
                attempts += 1;
            }
            if norm < 1e-10 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            let av = a.mul_vec(&v);
            basis.push(v);
            images.push(av.clone());
            added.push(av);
        }
        frontier = added;

        let m = basis.len();
        if m >= next_check || m == n || frontier.is_empty() {
            let pairs = rayleigh_ritz(&basis, &images, count);
            if pairs.max_residual < tol || m == n || frontier.is_empty() {
                let max_residual = max_residual(a, &pairs.values, &pairs.vectors);
                return Ok(EigenPairs { max_residual, ..pairs });
            }
            next_check = (m + m / 2).min(n);
        }
    }
}

fn rayleigh_ritz(basis: &[Vec<f64>], images: &[Vec<f64>], count: usize) -> EigenPairs {
    let m = basis.len();
    let n = basis[0].len();
    let mut h = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let (theta, s) = symmetric_spectrum(h);
    let count = count.min(m);
    let mut vectors = DMatrix::zeros(n, count);
    let mut max_residual = 0.0f64;
    for c in 0..count {
        let mut y = vec![0.0; n];
        let mut ay = vec![0.0; n];
        for k in 0..m {
            let w = s[(k, c)];
            for i in 0..n {
                y[i] += w * basis[k][i];
                ay[i] += w * images[k][i];
            }
        }
        let r = ay
            .iter()
            .zip(&y)
            .map(|(x, v)| (x - theta[c] * v).powi(2))
            .sum::<f64>()
            .sqrt();
        max_residual = max_residual.max(r);
        for i in 0..n {
            vectors[(i, c)] = y[i];
        }
    }
    EigenPairs {
        values: theta[..count].to_vec(),
        vectors,
        max_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> CsrMatrix {
        let mut trips = Vec::new();
        for i in 0..n {
            let deg = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            trips.push((i, i, deg));
            if i + 1 < n {
                trips.push((i, i + 1, -1.0));
                trips.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, trips).unwrap()
    }

    fn orthonormal(vectors: &DMatrix<f64>) -> bool {
        let g = vectors.transpose() * vectors;
        (0..g.nrows()).all(|i| (0..g.ncols()).all(|j| (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8))
    }

    #[test]
    fn diagonal_smallest_two() {
        let a = CsrMatrix::from_diagonal(&[0.0, 1.0, 2.0]);
        let p = smallest_eigenpairs(&a, 2, EigenMethod::Dense).unwrap();
        assert!((p.values[0] - 0.0).abs() < 1e-14);
        assert!((p.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_residual_only() {
        let a = CsrMatrix::identity(5);
        for method in [EigenMethod::Dense, EigenMethod::Lanczos] {
            let p = smallest_eigenpairs(&a, 3, method).unwrap();
            assert!(p.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
            assert!(p.max_residual < 1e-8);
            assert!(orthonormal(&p.vectors));
        }
    }

    #[test]
    fn normalized_laplacian_null_vector() {
        // normalized Laplacian of a weighted connected graph: L D^{1/2} 1 = 0
        let w = [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 0.5), (0, 2, 1.0)];
        let mut trips = Vec::new();
        for &(i, j, v) in &w {
            trips.push((i, j, v));
            trips.push((j, i, v));
        }
        let adj = CsrMatrix::from_triplets(4, 4, trips).unwrap();
        let deg = adj.row_sums();
        let inv_sqrt: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
        let norm = adj.scale_rows(&inv_sqrt).scale_cols(&inv_sqrt);
        let lap = CsrMatrix::identity(4).add_scaled(1.0, &norm, -1.0).unwrap();
        let p = smallest_eigenpairs(&lap, 1, EigenMethod::Dense).unwrap();
        assert!(p.values[0].abs() < 1e-8);
        let mut expected: Vec<f64> = deg.iter().map(|d| d.sqrt()).collect();
        let n = norm2(&expected);
        expected.iter_mut().for_each(|x| *x /= n);
        let sign = p.vectors[(0, 0)].signum();
        for i in 0..4 {
            assert!((sign * p.vectors[(i, 0)] - expected[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn lanczos_agrees_with_dense_on_path() {
        let a = path_laplacian(300);
        let d = smallest_eigenpairs(&a, 4, EigenMethod::Dense).unwrap();
        let l = smallest_eigenpairs(&a, 4, EigenMethod::Lanczos).unwrap();
        for (x, y) in d.values.iter().zip(&l.values) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
        assert!(orthonormal(&l.vectors));
    }

    #[test]
    fn lanczos_finds_repeated_zero_eigenvalue() {
        // two disconnected paths: eigenvalue 0 twice
        let p1 = path_laplacian(60);
        let mut trips: Vec<_> = p1.triplets().collect();
        trips.extend(p1.triplets().map(|(i, j, v)| (i + 60, j + 60, v)));
        let a = CsrMatrix::from_triplets(120, 120, trips).unwrap();
        let l = smallest_eigenpairs(&a, 3, EigenMethod::Lanczos).unwrap();
        let d = smallest_eigenpairs(&a, 3, EigenMethod::Dense).unwrap();
        assert!(l.values[0].abs() < 1e-8 && l.values[1].abs() < 1e-8);
        for (x, y) in d.values.iter().zip(&l.values) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_count() {
        let a = CsrMatrix::identity(3);
        assert!(smallest_eigenpairs(&a, 4, EigenMethod::Auto).is_err());
        assert!(smallest_eigenpairs(&a, 0, EigenMethod::Auto).is_err());
    }
}
