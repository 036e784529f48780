//! Community detection: the spectral HRA pipeline and the NMF, NDP-Louvain
//! and HSC benchmarks, plus pairwise precision against ground truth.

mod louvain;
mod nmf;
mod spectral;

pub use louvain::{modularity, ndp_louvain_partition, LouvainOptions};
pub use nmf::{nmf_factorize, nmf_partition, NmfFactors, NmfOptions};
pub use spectral::{hra_cd_partition, hsc_partition, spectral_embedding, DegreeNormalization, SpectralOptions};

use std::collections::HashMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercore::{CommunityLabels, Hypergraph};
use crate::proximity::{ablation_source, similarity_matrix, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommunityAlgorithm {
    Hra,
    Hsc,
    Nmf,
    Ndp,
}

impl CommunityAlgorithm {
    pub const ALL: [CommunityAlgorithm; 4] = [Self::Hra, Self::Hsc, Self::Nmf, Self::Ndp];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hra => "hra",
            Self::Hsc => "hsc",
            Self::Nmf => "nmf",
            Self::Ndp => "ndp",
        }
    }
}

impl std::str::FromStr for CommunityAlgorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown community algorithm {s:?}")))
    }
}

/// Hard assignment of every node to one of `community_count` communities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    /// Number of communities requested.
    pub community_count: usize,
    pub method: CommunityAlgorithm,
    pub seed: u64,
    /// Requested ids that no node ended up in.
    pub empty_communities: usize,
    pub converged: bool,
    /// Method objective: k-means inertia, NMF reconstruction error, or modularity.
    pub objective: f64,
}

impl Partition {
    pub(crate) fn new(
        assignment: Vec<usize>,
        community_count: usize,
        method: CommunityAlgorithm,
        seed: u64,
        converged: bool,
        objective: f64,
    ) -> Self {
        let mut used = vec![false; community_count];
        for &c in &assignment {
            if c < community_count {
                used[c] = true;
            }
        }
        let empty_communities = used.iter().filter(|&&u| !u).count();
        if empty_communities > 0 {
            warn!("{}: {empty_communities} of {community_count} communities are empty", method.name());
        }
        Self {
            assignment,
            community_count,
            method,
            seed,
            empty_communities,
            converged,
            objective,
        }
    }
}

fn choose2(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Fraction of co-clustered node pairs in `pred` that share a community in
/// `truth`. Zero, with a warning, when `pred` co-clusters no pair.
pub fn precision_of_labels(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} nodes, labels cover {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut cluster: HashMap<usize, usize> = HashMap::new();
    let mut cell: HashMap<(usize, usize), usize> = HashMap::new();
    for (&p, &t) in pred.iter().zip(truth) {
        *cluster.entry(p).or_default() += 1;
        *cell.entry((p, t)).or_default() += 1;
    }
    let pairs: u64 = cluster.values().map(|&c| choose2(c)).sum();
    if pairs == 0 {
        warn!("precision undefined: no node pair shares a predicted community; reporting 0");
        return Ok(0.0);
    }
    let hits: u64 = cell.values().map(|&c| choose2(c)).sum();
    Ok(hits as f64 / pairs as f64)
}

pub fn precision(pred: &Partition, truth: &CommunityLabels) -> Result<f64> {
    precision_of_labels(&pred.assignment, &truth.labels)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommunityOptions {
    /// Matrix behind HRA's similarity.
    pub source: Source,
    /// Allocation rounds for `P⁽ᵗ⁾`.
    pub iterate: usize,
    pub spectral: SpectralOptions,
    pub nmf: NmfOptions,
    pub louvain: LouvainOptions,
}

impl CommunityOptions {
    pub fn new() -> Self {
        Self {
            iterate: 1,
            ..Default::default()
        }
    }
}

/// Runs one community detection method.
pub fn detect_communities(
    graph: &Hypergraph,
    algorithm: CommunityAlgorithm,
    n_c: usize,
    seed: u64,
    opts: &CommunityOptions,
) -> Result<Partition> {
    match algorithm {
        CommunityAlgorithm::Hra => {
            let prox = ablation_source(graph, opts.source, opts.iterate.max(1))?;
            let sim = similarity_matrix(&prox, graph)?;
            hra_cd_partition(graph, &sim, n_c, seed, &opts.spectral)
        }
        CommunityAlgorithm::Hsc => hsc_partition(graph, n_c, seed, &opts.spectral),
        CommunityAlgorithm::Nmf => nmf_partition(graph, n_c, &opts.nmf, seed),
        CommunityAlgorithm::Ndp => ndp_louvain_partition(graph, n_c, seed, &opts.louvain),
    }
}
