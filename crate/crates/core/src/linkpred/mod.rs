//! Hyperedge prediction: k-fold cross-validation, negative sampling, and
//! candidate scoring by mean pairwise node similarity.

mod similarity;

pub(crate) use similarity::check_factor;
pub use similarity::{
    cn_similarity, default_katz_factor, hpra_similarity, katz_matrix, katz_similarity,
    DEFAULT_ATTENUATION, RADIUS_STEPS,
};

use log::debug;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercore::{clique_adjacency, Hypergraph};
use crate::linalg::CsrMatrix;
use crate::metrics::{auc, ndcg, Label, ScoredSample};
use crate::proximity::{ablation_source, similarity_matrix, SimilarityMatrix, Source};
use crate::rng::{domain, stream_rng};

/// Assignment of every hyperedge to one of `fold_count` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_count: usize,
    pub assignments: Vec<usize>,
    pub rng_seed: u64,
}

impl FoldSplit {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.fold_count];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// Hyperedges held out in `fold`, ascending.
    pub fn test_edges(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&a| self.assignments[a] == fold).collect()
    }

    /// Hyperedges used for training when `fold` is held out, ascending.
    pub fn train_edges(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&a| self.assignments[a] != fold).collect()
    }
}

/// Uniformly random balanced partition of the hyperedges into `folds` parts.
pub fn kfold_split(graph: &Hypergraph, folds: usize, seed: u64) -> Result<FoldSplit> {
    let m = graph.hyperedge_count();
    if folds < 2 {
        return Err(Error::param(format!("need at least 2 folds, got {folds}")));
    }
    if folds > m {
        return Err(Error::param(format!("{folds} folds but only {m} hyperedges")));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut stream_rng(seed, &[domain::FOLD_SPLIT]));
    let mut assignments = vec![0; m];
    for (pos, &alpha) in order.iter().enumerate() {
        assignments[alpha] = pos % folds;
    }
    Ok(FoldSplit {
        fold_count: folds,
        assignments,
        rng_seed: seed,
    })
}

/// How the number of retained nodes `m` is drawn from a fractional `ρ·k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingRule {
    /// Ceil with probability `frac(ρk)`, floor otherwise; `E[m] = ρk`.
    #[default]
    ExpectationPreserving,
    /// Floor with probability `frac(ρk)`, ceil otherwise.
    Literal,
}

/// A node set to be scored, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub nodes: Vec<usize>,
    pub label: Label,
    /// The positive hyperedge this candidate is (or was generated from).
    pub origin: usize,
}

impl CandidateSet {
    pub fn positive(graph: &Hypergraph, alpha: usize) -> Self {
        Self {
            nodes: graph.hyperedge(alpha).to_vec(),
            label: Label::Positive,
            origin: alpha,
        }
    }
}

const ROUNDING_EPS: f64 = 1e-9;

/// Number of nodes of a size-`k` positive kept in its negative.
pub fn retained_count(k: usize, rho: f64, rule: RoundingRule, rng: &mut impl Rng) -> usize {
    let target = rho * k as f64;
    let floor = target.floor();
    let frac = target - floor;
    if frac < ROUNDING_EPS {
        return floor as usize;
    }
    if frac > 1.0 - ROUNDING_EPS {
        return floor as usize + 1;
    }
    let up = rng.random::<f64>() < frac;
    let up = match rule {
        RoundingRule::ExpectationPreserving => up,
        RoundingRule::Literal => !up,
    };
    floor as usize + usize::from(up)
}

const MAX_RESAMPLES: usize = 1000;

/// Negative sample for hyperedge `alpha`: `m ≈ ρ·k` of its nodes plus `k − m`
/// nodes drawn uniformly without replacement from outside it.
pub fn sample_negative(
    graph: &Hypergraph,
    alpha: usize,
    rho: f64,
    rule: RoundingRule,
    rng: &mut impl Rng,
) -> Result<CandidateSet> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::param(format!("ρ must lie in [0, 1), got {rho}")));
    }
    let positive = graph.hyperedge(alpha);
    let k = positive.len();
    let n = graph.node_count();
    for _ in 0..MAX_RESAMPLES {
        let m = retained_count(k, rho, rule, rng);
        if n - k < k - m {
            return Err(Error::param(format!(
                "cannot fill negative for hyperedge {alpha}: {} outside nodes, need {}",
                n - k,
                k - m
            )));
        }
        let mut nodes: Vec<usize> = index::sample(rng, k, m).into_iter().map(|i| positive[i]).collect();
        for idx in index::sample(rng, n - k, k - m) {
            // idx-th node not in the (sorted) positive
            let mut v = idx;
            for &p in positive {
                if p <= v {
                    v += 1;
                } else {
                    break;
                }
            }
            nodes.push(v);
        }
        nodes.sort_unstable();
        if nodes != positive {
            return Ok(CandidateSet {
                nodes,
                label: Label::Negative,
                origin: alpha,
            });
        }
    }
    Err(Error::param(format!(
        "negative for hyperedge {alpha} equals the positive after {MAX_RESAMPLES} draws"
    )))
}

/// Mean similarity over all unordered node pairs of the candidate.
pub fn score_candidate(candidate: &CandidateSet, sim: &SimilarityMatrix) -> f64 {
    let nodes = &candidate.nodes;
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            total += sim.get(i, j);
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total / pairs as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkPredAlgorithm {
    Hra,
    Cn,
    Hpra,
    Katz,
}

impl LinkPredAlgorithm {
    pub const ALL: [LinkPredAlgorithm; 4] = [Self::Hra, Self::Cn, Self::Hpra, Self::Katz];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hra => "hra",
            Self::Cn => "cn",
            Self::Hpra => "hpra",
            Self::Katz => "katz",
        }
    }
}

impl std::str::FromStr for LinkPredAlgorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown link-prediction algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPredConfig {
    pub algorithm: LinkPredAlgorithm,
    pub rho: f64,
    pub folds: usize,
    pub seed: u64,
    /// Node×hyperedge matrix behind HRA's similarity; ignored by the others.
    pub source: Source,
    /// Allocation rounds for `P⁽ᵗ⁾`.
    pub iterate: usize,
    pub rounding: RoundingRule,
    pub negatives_per_positive: usize,
    /// Katz attenuation; `None` uses `0.85/ρ̂(A)` of each training graph.
    pub katz_lambda: Option<f64>,
}

impl Default for LinkPredConfig {
    fn default() -> Self {
        Self {
            algorithm: LinkPredAlgorithm::Hra,
            rho: 0.5,
            folds: 5,
            seed: 0,
            source: Source::P,
            iterate: 1,
            rounding: RoundingRule::ExpectationPreserving,
            negatives_per_positive: 1,
            katz_lambda: None,
        }
    }
}

/// Similarity of the configured algorithm on a (training) graph.
pub fn algorithm_similarity(graph: &Hypergraph, config: &LinkPredConfig) -> Result<SimilarityMatrix> {
    match config.algorithm {
        LinkPredAlgorithm::Hra => {
            let prox = ablation_source(graph, config.source, config.iterate)?;
            similarity_matrix(&prox, graph)
        }
        LinkPredAlgorithm::Cn => cn_similarity(graph),
        LinkPredAlgorithm::Hpra => hpra_similarity(graph),
        LinkPredAlgorithm::Katz => {
            let lambda = match config.katz_lambda {
                Some(l) => l,
                None => default_katz_factor(&clique_adjacency(graph)),
            };
            katz_similarity(graph, lambda)
        }
    }
}

/// FNV-1a over the sparsity pattern and values of a matrix.
pub fn matrix_fingerprint(m: &CsrMatrix) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(m.rows() as u64);
    eat(m.cols() as u64);
    for (i, j, v) in m.triplets() {
        eat(i as u64);
        eat(j as u64);
        eat(v.to_bits());
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub auc: f64,
    pub ndcg: f64,
    pub positives: usize,
    pub negatives: usize,
    /// Fingerprint of the training incidence the scorer was built from.
    pub training_fingerprint: u64,
    /// Nodes with no training hyperedge (their similarity rows are zero).
    pub untrained_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPredResult {
    pub config: LinkPredConfig,
    pub folds: Vec<FoldResult>,
    pub mean_auc: f64,
    pub mean_ndcg: f64,
}

/// Cross-validated hyperedge prediction with the configured algorithm.
pub fn run_linkpred_experiment(graph: &Hypergraph, config: &LinkPredConfig) -> Result<LinkPredResult> {
    run_linkpred_with(graph, config, |train| {
        let sim = algorithm_similarity(train, config)?;
        Ok(move |c: &CandidateSet| score_candidate(c, &sim))
    })
}

/// Cross-validation harness with a custom scorer. `build` sees only the
/// training graph of each fold and returns the candidate scoring function.
pub fn run_linkpred_with<B, S>(graph: &Hypergraph, config: &LinkPredConfig, build: B) -> Result<LinkPredResult>
where
    B: Fn(&Hypergraph) -> Result<S> + Sync,
    S: Fn(&CandidateSet) -> f64,
{
    if config.negatives_per_positive == 0 {
        return Err(Error::param("negatives_per_positive must be ≥ 1"));
    }
    if !(0.0..1.0).contains(&config.rho) {
        return Err(Error::param(format!("ρ must lie in [0, 1), got {}", config.rho)));
    }
    let split = kfold_split(graph, config.folds, config.seed)?;
    let folds = (0..config.folds)
        .into_par_iter()
        .map(|fold| run_fold(graph, config, &split, fold, &build))
        .collect::<Result<Vec<_>>>()?;
    let count = folds.len() as f64;
    let mean_auc = folds.iter().map(|f| f.auc).sum::<f64>() / count;
    let mean_ndcg = folds.iter().map(|f| f.ndcg).sum::<f64>() / count;
    Ok(LinkPredResult {
        config: config.clone(),
        folds,
        mean_auc,
        mean_ndcg,
    })
}

fn run_fold<B, S>(graph: &Hypergraph, config: &LinkPredConfig, split: &FoldSplit, fold: usize, build: &B) -> Result<FoldResult>
where
    B: Fn(&Hypergraph) -> Result<S>,
    S: Fn(&CandidateSet) -> f64,
{
    let train = graph.restrict_to_hyperedges(&split.train_edges(fold))?;
    let untrained_nodes = train.degrees().iter().filter(|&&d| d == 0).count();
    if untrained_nodes > 0 {
        debug!("fold {fold}: {untrained_nodes} node(s) absent from training");
    }
    let scorer = build(&train)?;
    let mut rng = stream_rng(config.seed, &[domain::NEGATIVE_SAMPLING, fold as u64]);
    let mut samples = Vec::new();
    let mut negatives = 0;
    let test = split.test_edges(fold);
    for &alpha in &test {
        let pos = CandidateSet::positive(graph, alpha);
        samples.push(ScoredSample::positive(scorer(&pos)));
        for _ in 0..config.negatives_per_positive {
            let neg = sample_negative(graph, alpha, config.rho, config.rounding, &mut rng)?;
            samples.push(ScoredSample::negative(scorer(&neg)));
            negatives += 1;
        }
    }
    Ok(FoldResult {
        fold,
        auc: auc(&samples)?,
        ndcg: ndcg(&samples)?,
        positives: test.len(),
        negatives,
        training_fingerprint: matrix_fingerprint(train.incidence()),
        untrained_nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercore::tests::toy;
    use proptest::prelude::*;
    use std::cell::RefCell;
    use std::collections::HashSet;

    fn ring(n: usize, k: usize) -> Hypergraph {
        let edges = (0..n).map(|s| (0..k).map(|o| (s + o) % n).collect()).collect();
        Hypergraph::new(n, edges).unwrap()
    }

    #[test]
    fn fold_sizes_balanced() {
        let g = ring(10, 2);
        assert_eq!(kfold_split(&g, 5, 1).unwrap().fold_sizes(), vec![2; 5]);
        let g = ring(7, 2);
        let mut sizes = kfold_split(&g, 5, 1).unwrap().fold_sizes();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![2, 2, 1, 1, 1]);
        assert!(kfold_split(&g, 8, 1).is_err());
        assert!(kfold_split(&g, 1, 1).is_err());
    }

    #[test]
    fn fold_split_deterministic() {
        let g = ring(30, 3);
        assert_eq!(kfold_split(&g, 5, 9).unwrap(), kfold_split(&g, 5, 9).unwrap());
        assert_ne!(kfold_split(&g, 5, 9).unwrap(), kfold_split(&g, 5, 10).unwrap());
    }

    #[test]
    fn rho_zero_draws_only_outside() {
        let g = ring(20, 3);
        let mut rng = stream_rng(1, &[]);
        for _ in 0..200 {
            let neg = sample_negative(&g, 4, 0.0, RoundingRule::ExpectationPreserving, &mut rng).unwrap();
            assert_eq!(neg.nodes.len(), 3);
            assert!(neg.nodes.iter().all(|v| !g.hyperedge(4).contains(v)));
        }
    }

    #[test]
    fn integral_rho_k_keeps_exact_count() {
        let g = ring(20, 4);
        let mut rng = stream_rng(2, &[]);
        for _ in 0..200 {
            let neg = sample_negative(&g, 0, 0.5, RoundingRule::ExpectationPreserving, &mut rng).unwrap();
            let kept = neg.nodes.iter().filter(|v| g.hyperedge(0).contains(v)).count();
            assert_eq!(kept, 2);
        }
    }

    #[test]
    fn stochastic_rounding_preserves_expectation() {
        let mut rng = stream_rng(3, &[]);
        let draws = 100_000;
        let total: usize = (0..draws)
            .map(|_| retained_count(3, 0.5, RoundingRule::ExpectationPreserving, &mut rng))
            .sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - 1.5).abs() < 0.02, "mean {mean}");
        // ρk = 1.2: literal rule flips the weights
        let total: usize = (0..draws)
            .map(|_| retained_count(3, 0.4, RoundingRule::Literal, &mut rng))
            .sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - 1.8).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn negative_sampling_errors() {
        let g = Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap();
        let mut rng = stream_rng(4, &[]);
        assert!(sample_negative(&g, 0, 0.0, RoundingRule::ExpectationPreserving, &mut rng).is_err());
        assert!(sample_negative(&toy(), 0, 1.0, RoundingRule::ExpectationPreserving, &mut rng).is_err());
    }

    #[test]
    fn score_examples() {
        let s = SimilarityMatrix::from_upper(
            &CsrMatrix::from_triplets(3, 3, [(0, 1, 0.2), (0, 2, 0.4), (1, 2, 0.6)]).unwrap(),
        )
        .unwrap();
        let cand = |nodes: Vec<usize>| CandidateSet {
            nodes,
            label: Label::Positive,
            origin: 0,
        };
        assert_eq!(score_candidate(&cand(vec![0, 1]), &s), 0.2);
        assert!((score_candidate(&cand(vec![0, 1, 2]), &s) - 0.4).abs() < 1e-15);
        let zero = SimilarityMatrix::from_upper(&CsrMatrix::zeros(3, 3)).unwrap();
        assert_eq!(score_candidate(&cand(vec![0, 1, 2]), &zero), 0.0);
    }

    #[test]
    fn oracle_and_constant_scorers() {
        let g = ring(30, 3);
        let cfg = LinkPredConfig::default();
        // distinct positive scores: tied positives share an average rank
        let perfect = run_linkpred_with(&g, &cfg, |_| {
            Ok(|c: &CandidateSet| match c.label {
                Label::Positive => 1.0 + c.origin as f64,
                Label::Negative => 0.0,
            })
        })
        .unwrap();
        assert_eq!(perfect.mean_auc, 1.0);
        assert!((perfect.mean_ndcg - 1.0).abs() < 1e-12);
        assert!(perfect.folds.iter().all(|f| f.auc == 1.0));
        let flat = run_linkpred_with(&g, &cfg, |_| Ok(|_: &CandidateSet| 0.25)).unwrap();
        assert_eq!(flat.mean_auc, 0.5);
    }

    #[test]
    fn scorer_sees_only_training_incidence() {
        let g = ring(25, 3);
        let cfg = LinkPredConfig::default();
        let seen = std::sync::Mutex::new(Vec::new());
        let result = run_linkpred_with(&g, &cfg, |train| {
            seen.lock().unwrap().push(matrix_fingerprint(train.incidence()));
            Ok(|_: &CandidateSet| 0.0)
        })
        .unwrap();
        let split = kfold_split(&g, cfg.folds, cfg.seed).unwrap();
        let seen = seen.into_inner().unwrap();
        let full = matrix_fingerprint(g.incidence());
        for f in &result.folds {
            let expect = g.restrict_to_hyperedges(&split.train_edges(f.fold)).unwrap();
            assert_eq!(f.training_fingerprint, matrix_fingerprint(expect.incidence()));
            assert_ne!(f.training_fingerprint, full);
            assert!(seen.contains(&f.training_fingerprint));
        }
    }

    #[test]
    fn leakage_changes_scores() {
        // injecting a held-out hyperedge into training changes its score
        let g = ring(25, 3);
        let split = kfold_split(&g, 5, 0).unwrap();
        let alpha = split.test_edges(0)[0];
        let train = g.restrict_to_hyperedges(&split.train_edges(0)).unwrap();
        let mut leaked_edges = split.train_edges(0);
        leaked_edges.push(alpha);
        let leaked = g.restrict_to_hyperedges(&leaked_edges).unwrap();
        let cfg = LinkPredConfig::default();
        let pos = CandidateSet::positive(&g, alpha);
        let clean = score_candidate(&pos, &algorithm_similarity(&train, &cfg).unwrap());
        let dirty = score_candidate(&pos, &algorithm_similarity(&leaked, &cfg).unwrap());
        assert_ne!(clean, dirty);
    }

    #[test]
    fn experiment_is_deterministic_for_every_algorithm() {
        let g = ring(40, 3);
        for algorithm in LinkPredAlgorithm::ALL {
            let cfg = LinkPredConfig {
                algorithm,
                seed: 11,
                ..Default::default()
            };
            let a = run_linkpred_experiment(&g, &cfg).unwrap();
            let b = run_linkpred_experiment(&g, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.folds.len(), 5);
            assert!(a.mean_auc > 0.5, "{} auc {}", algorithm.name(), a.mean_auc);
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in LinkPredAlgorithm::ALL {
            assert_eq!(a.name().parse::<LinkPredAlgorithm>().unwrap(), a);
        }
        assert!("nhne".parse::<LinkPredAlgorithm>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn negatives_never_equal_origin(seed in any::<u64>(), rho in 0.0f64..0.99, k in 2usize..6) {
            let g = ring(12, k);
            let rng = RefCell::new(stream_rng(seed, &[]));
            for alpha in 0..g.hyperedge_count() {
                let neg = sample_negative(&g, alpha, rho, RoundingRule::ExpectationPreserving, &mut *rng.borrow_mut()).unwrap();
                prop_assert_ne!(&neg.nodes, &g.hyperedge(alpha).to_vec());
                prop_assert_eq!(neg.nodes.len(), k);
                prop_assert_eq!(neg.nodes.iter().collect::<HashSet<_>>().len(), k);
                prop_assert!(neg.nodes.windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn score_is_permutation_invariant(perm_seed in any::<u64>()) {
            let g = ring(12, 4);
            let sim = algorithm_similarity(&g, &LinkPredConfig::default()).unwrap();
            let mut nodes = vec![0, 3, 5, 7, 11];
            let base = score_candidate(&CandidateSet { nodes: nodes.clone(), label: Label::Positive, origin: 0 }, &sim);
            nodes.shuffle(&mut stream_rng(perm_seed, &[]));
            let shuffled = score_candidate(&CandidateSet { nodes, label: Label::Positive, origin: 0 }, &sim);
            prop_assert!((base - shuffled).abs() < 1e-12);
        }
    }
}
