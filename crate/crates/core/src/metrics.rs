//! Evaluation metrics: AUC, NDCG, Kendall's τ, and pairwise precision
//! (defined in the community module and re-exported here).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::community::precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub score: f64,
    pub label: Label,
}

impl ScoredSample {
    pub fn positive(score: f64) -> Self {
        Self {
            score,
            label: Label::Positive,
        }
    }

    pub fn negative(score: f64) -> Self {
        Self {
            score,
            label: Label::Negative,
        }
    }
}

fn check_finite(samples: &[ScoredSample]) -> Result<()> {
    if samples.iter().any(|s| !s.score.is_finite()) {
        return Err(Error::param("sample scores must be finite"));
    }
    Ok(())
}

/// 1-based average ranks of `scores` sorted descending; tied blocks share the
/// mean of the positions they span.
pub fn descending_average_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

/// AUC over every positive×negative pair: `(n₁ + 0.5·n₂) / n` where `n₁`
/// counts pairs with the positive scored higher and `n₂` ties.
pub fn auc(samples: &[ScoredSample]) -> Result<f64> {
    check_finite(samples)?;
    let n_pos = samples.iter().filter(|s| s.label == Label::Positive).count();
    let n_neg = samples.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::param(format!(
            "AUC needs positives and negatives (got {n_pos} and {n_neg})"
        )));
    }
    // Mann–Whitney: ascending ranks of positives
    let scores: Vec<f64> = samples.iter().map(|s| -s.score).collect();
    let ranks = descending_average_ranks(&scores);
    let rank_sum: f64 = samples
        .iter()
        .zip(&ranks)
        .filter(|(s, _)| s.label == Label::Positive)
        .map(|(_, r)| r)
        .sum();
    let p = n_pos as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * n_neg as f64))
}

/// NDCG with binary gains: `Σ_pos 1/log₂(1 + r_i)` over the ideal
/// `Σ_{l=1}^{|pos|} 1/log₂(1 + l)`, ranks descending with average-rank ties.
pub fn ndcg(samples: &[ScoredSample]) -> Result<f64> {
    check_finite(samples)?;
    let n_pos = samples.iter().filter(|s| s.label == Label::Positive).count();
    if n_pos == 0 {
        return Err(Error::param("NDCG needs at least one positive sample"));
    }
    let scores: Vec<f64> = samples.iter().map(|s| s.score).collect();
    let ranks = descending_average_ranks(&scores);
    let dcg: f64 = samples
        .iter()
        .zip(&ranks)
        .filter(|(s, _)| s.label == Label::Positive)
        .map(|(_, &r)| 1.0 / (1.0 + r).log2())
        .sum();
    let ideal: f64 = (1..=n_pos).map(|l| 1.0 / (1.0 + l as f64).log2()).sum();
    Ok(dcg / ideal)
}

/// Concordant and discordant pair counts behind Kendall's τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KendallCounts {
    pub n: usize,
    pub concordant: u64,
    pub discordant: u64,
}

impl KendallCounts {
    /// `τ = 2(n₊ − n₋) / (N(N − 1))`.
    pub fn tau(&self) -> f64 {
        let n = self.n as f64;
        2.0 * (self.concordant as f64 - self.discordant as f64) / (n * (n - 1.0))
    }
}

fn canonical(x: f64) -> f64 {
    // -0.0 and 0.0 must tie under total_cmp
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Pairs tied within runs of equal keys of an already sorted slice.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let len = (end - start) as u64;
        total += len * (len - 1) / 2;
        start = end;
    }
    total
}

/// Merge sort counting inversions (strict exchanges).
fn sort_count_swaps(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_count_swaps(&mut v[..mid], &mut buf[..mid]) + sort_count_swaps(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Exact concordant/discordant counts in O(N log N) (Knight's algorithm).
/// Pairs tied in either vector count as neither.
pub fn kendall_counts(x: &[f64], y: &[f64]) -> Result<KendallCounts> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "Kendall τ of vectors with lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::param("Kendall τ needs at least two observations"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::param("Kendall τ needs finite values"));
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(y).map(|(&a, &b)| (canonical(a), canonical(b))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let total = n as u64 * (n as u64 - 1) / 2;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tied_x = tied_pairs(&xs);
    let tied_xy = tied_pairs(&pairs);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = sort_count_swaps(&mut ys, &mut buf);
    let tied_y = tied_pairs(&ys);

    // untied pairs split into concordant + discordant; swaps are discordant
    let untied = total + tied_xy - tied_x - tied_y;
    let discordant = swaps;
    let concordant = untied - discordant;
    Ok(KendallCounts {
        n,
        concordant,
        discordant,
    })
}

/// Kendall's τ with the tie rule above.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(kendall_counts(x, y)?.tau())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_counts(x: &[f64], y: &[f64]) -> (u64, u64) {
        let (mut c, mut d) = (0, 0);
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let s = (x[i] - x[j]) * (y[i] - y[j]);
                if s > 0.0 {
                    c += 1;
                } else if s < 0.0 {
                    d += 1;
                }
            }
        }
        (c, d)
    }

    #[test]
    fn auc_trivial_cases() {
        let perfect = [ScoredSample::positive(2.0), ScoredSample::positive(3.0), ScoredSample::negative(1.0)];
        assert_eq!(auc(&perfect).unwrap(), 1.0);
        let flat = [ScoredSample::positive(1.0), ScoredSample::negative(1.0), ScoredSample::negative(1.0)];
        assert_eq!(auc(&flat).unwrap(), 0.5);
    }

    #[test]
    fn auc_enumerated_example() {
        let s = [
            ScoredSample::positive(3.0),
            ScoredSample::positive(1.0),
            ScoredSample::negative(2.0),
            ScoredSample::negative(0.0),
        ];
        assert_eq!(auc(&s).unwrap(), 0.75);
    }

    #[test]
    fn auc_requires_both_classes() {
        assert!(auc(&[ScoredSample::positive(1.0)]).is_err());
        assert!(auc(&[ScoredSample::negative(1.0)]).is_err());
    }

    #[test]
    fn ndcg_cases() {
        let top = [ScoredSample::positive(3.0), ScoredSample::negative(1.0)];
        assert_eq!(ndcg(&top).unwrap(), 1.0);
        let last = [
            ScoredSample::negative(3.0),
            ScoredSample::negative(2.0),
            ScoredSample::positive(1.0),
        ];
        assert!((ndcg(&last).unwrap() - 0.5).abs() < 1e-15);
        assert!(ndcg(&[ScoredSample::negative(1.0)]).is_err());
    }

    #[test]
    fn ndcg_ties_use_average_rank() {
        // positive tied with one negative at the top: rank 1.5
        let s = [ScoredSample::positive(1.0), ScoredSample::negative(1.0)];
        assert!((ndcg(&s).unwrap() - 1.0 / 2.5f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn kendall_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
        assert_eq!(kendall_tau(&x, &neg).unwrap(), -1.0);
        let t = kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 1.0, 2.0]).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-15);
        assert!(kendall_tau(&[1.0], &[1.0]).is_err());
        assert!(kendall_tau(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn signed_zero_ties() {
        let c = kendall_counts(&[0.0, -0.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((c.concordant, c.discordant), brute_counts(&[0.0, -0.0, 1.0], &[1.0, 2.0, 3.0]));
    }

    proptest! {
        #[test]
        fn kendall_fast_matches_brute(pairs in proptest::collection::vec((0i32..8, 0i32..8), 2..60)) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            let c = kendall_counts(&x, &y).unwrap();
            prop_assert_eq!((c.concordant, c.discordant), brute_counts(&x, &y));
            let r = kendall_counts(&y, &x).unwrap();
            prop_assert_eq!(c.tau(), r.tau());
        }

        #[test]
        fn auc_invariant_under_monotone_transform(scores in proptest::collection::vec((-50i32..50, any::<bool>()), 2..40)) {
            prop_assume!(scores.iter().any(|s| s.1) && scores.iter().any(|s| !s.1));
            let make = |f: &dyn Fn(f64) -> f64| -> Vec<ScoredSample> {
                scores.iter().map(|&(s, pos)| {
                    let v = f(s as f64);
                    if pos { ScoredSample::positive(v) } else { ScoredSample::negative(v) }
                }).collect()
            };
            let a = auc(&make(&|v| v)).unwrap();
            let b = auc(&make(&|v| (v / 10.0).exp() * 3.0 + 1.0)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
