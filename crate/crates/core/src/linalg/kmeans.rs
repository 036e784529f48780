use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{domain, stream_rng};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once the relative inertia decrease falls below this.
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 100,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each assignment step of the winning restart.
    pub history: Vec<f64>,
    pub restart: usize,
    /// Clusters that emptied during Lloyd steps and were refilled.
    pub empty_refills: usize,
}

/// Lloyd's k-means on the rows of `points`, best inertia over seeded restarts
/// with k-means++ initialization.
pub fn kmeans(points: &DMatrix<f64>, k: usize, opts: &KMeansOptions, seed: u64) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::param(format!("k-means with k={k} on {n} points")));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| points.row(i).iter().copied().collect()).collect();
    let restarts = opts.restarts.max(1);
    let runs: Vec<KMeansResult> = (0..restarts)
        .into_par_iter()
        .map(|r| single_run(&rows, k, opts, seed, r))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, cur| if cur.inertia < best.inertia { cur } else { best })
        .expect("at least one restart");
    Ok(best)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn plus_plus_init(rows: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![rows[first].clone()];
    let mut nearest: Vec<f64> = rows.iter().map(|p| sq_dist(p, &rows[first])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            while nearest[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            // all remaining points coincide with a centroid
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centroids.push(rows[pick].clone());
        for (i, p) in rows.iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(p, &rows[pick]));
        }
    }
    centroids
}

fn assign(rows: &[Vec<f64>], centroids: &[Vec<f64>], assignment: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, p) in rows.iter().enumerate() {
        let mut best = (0, f64::INFINITY);
        for (c, centroid) in centroids.iter().enumerate() {
            let d = sq_dist(p, centroid);
            if d < best.1 {
                best = (c, d);
            }
        }
        assignment[i] = best.0;
        inertia += best.1;
    }
    inertia
}

fn single_run(rows: &[Vec<f64>], k: usize, opts: &KMeansOptions, seed: u64, restart: usize) -> KMeansResult {
    let mut rng = stream_rng(seed, &[domain::KMEANS, restart as u64]);
    let dim = rows[0].len();
    let mut centroids = plus_plus_init(rows, k, &mut rng);
    let mut assignment = vec![0; rows.len()];
    let mut history = Vec::new();
    let mut empty_refills = 0;
    let mut inertia = assign(rows, &centroids, &mut assignment);
    history.push(inertia);

    for _ in 0..opts.max_iter {
        // update step
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in rows.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // refill with the point farthest from its own centroid
                let far = (0..rows.len())
                    .filter(|&i| counts[assignment[i]] > 1)
                    .max_by(|&a, &b| {
                        sq_dist(&rows[a], &centroids[assignment[a]])
                            .total_cmp(&sq_dist(&rows[b], &centroids[assignment[b]]))
                            .then(b.cmp(&a))
                    });
                if let Some(i) = far {
                    let old = assignment[i];
                    counts[old] -= 1;
                    for (s, x) in sums[old].iter_mut().zip(&rows[i]) {
                        *s -= x;
                    }
                    assignment[i] = c;
                    counts[c] = 1;
                    sums[c] = rows[i].clone();
                    empty_refills += 1;
                }
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next = assign(rows, &centroids, &mut assignment);
        history.push(next);
        let improvement = inertia - next;
        inertia = next;
        if improvement <= opts.tol * inertia.max(f64::MIN_POSITIVE) {
            break;
        }
    }

    KMeansResult {
        assignment,
        centroids,
        inertia,
        history,
        restart,
        empty_refills,
    }
}
