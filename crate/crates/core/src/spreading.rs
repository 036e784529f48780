//! Discrete-time nonlinear SIR on hypergraphs.
//!
//! Each step freezes the infected count `η_α` of every hyperedge. A
//! susceptible node is infected with probability
//! `1 − Π_α (1 − min(1, β·η_α^κ))` over its hyperedges, and every node that
//! was infected at the start of the step recovers with probability `γ`. Draws
//! are taken in ascending node order: infections first, then recoveries.

use log::warn;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercore::Hypergraph;
use crate::metrics::kendall_tau;
use crate::rng::{domain, stream_rng};
use crate::vitality::CentralityVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirConfig {
    pub beta: f64,
    pub gamma: f64,
    pub kappa: f64,
    /// Independent runs per seed node.
    pub runs: usize,
    pub seed: u64,
}

impl Default for SirConfig {
    fn default() -> Self {
        Self {
            beta: 0.0,
            gamma: 0.25,
            kappa: 1.25,
            runs: 100,
            seed: 0,
        }
    }
}

impl SirConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::param(format!("β must be ≥ 0, got {}", self.beta)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::param(format!("γ must lie in (0, 1], got {}", self.gamma)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::param(format!("κ must be > 0, got {}", self.kappa)));
        }
        if self.runs == 0 {
            return Err(Error::param("runs must be ≥ 1"));
        }
        Ok(())
    }

    /// Whether `β·η^κ` can exceed 1 for some attainable `η ≤ k_max − 1`.
    pub fn may_clamp(&self, graph: &Hypergraph) -> bool {
        let k_max = graph.orders().iter().copied().max().unwrap_or(2);
        self.beta * ((k_max - 1) as f64).powf(self.kappa) > 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SirOutcome {
    pub final_recovered: usize,
    /// Compartment sizes at t = 0, 1, …, steps.
    pub s_series: Vec<usize>,
    pub i_series: Vec<usize>,
    pub r_series: Vec<usize>,
    pub steps: usize,
    /// Per-hyperedge infection terms clamped to 1.
    pub clamp_events: u64,
}

const SUSCEPTIBLE: u8 = 0;
const INFECTED: u8 = 1;
const RECOVERED: u8 = 2;

/// `min(1, β·η^κ)` for `η = 0..=k_max` plus a flag for clamped entries.
fn infection_terms(graph: &Hypergraph, config: &SirConfig) -> (Vec<f64>, Vec<bool>) {
    let k_max = graph.orders().iter().copied().max().unwrap_or(2);
    let raw: Vec<f64> = (0..=k_max)
        .map(|eta| if eta == 0 { 0.0 } else { config.beta * (eta as f64).powf(config.kappa) })
        .collect();
    let clamped = raw.iter().map(|&t| t > 1.0).collect();
    (raw.into_iter().map(|t| t.min(1.0)).collect(), clamped)
}

/// One SIR realization from the given initially infected nodes.
pub fn simulate_sir(graph: &Hypergraph, config: &SirConfig, seeds: &[usize], rng: &mut ChaCha8Rng) -> Result<SirOutcome> {
    config.validate()?;
    if seeds.is_empty() {
        return Err(Error::param("at least one seed node is required"));
    }
    let n = graph.node_count();
    if let Some(&bad) = seeds.iter().find(|&&s| s >= n) {
        return Err(Error::UnknownNode(bad.to_string()));
    }
    let (terms, clamped) = infection_terms(graph, config);
    Ok(run(graph, config, seeds, &terms, &clamped, rng, true))
}

fn run(
    graph: &Hypergraph,
    config: &SirConfig,
    seeds: &[usize],
    terms: &[f64],
    clamped: &[bool],
    rng: &mut ChaCha8Rng,
    record: bool,
) -> SirOutcome {
    let n = graph.node_count();
    let mut state = vec![SUSCEPTIBLE; n];
    let mut eta = vec![0usize; graph.hyperedge_count()];
    let mut infected: Vec<usize> = Vec::new();
    for &s in seeds {
        if state[s] == SUSCEPTIBLE {
            state[s] = INFECTED;
            infected.push(s);
            for &a in graph.node_hyperedges(s) {
                eta[a] += 1;
            }
        }
    }
    infected.sort_unstable();
    let (mut s_count, mut i_count, mut r_count) = (n - infected.len(), infected.len(), 0);
    let mut s_series = Vec::new();
    let mut i_series = Vec::new();
    let mut r_series = Vec::new();
    if record {
        s_series.push(s_count);
        i_series.push(i_count);
        r_series.push(r_count);
    }
    let mut mark = vec![false; n];
    let mut exposed: Vec<usize> = Vec::new();
    let mut clamp_events = 0u64;
    let mut steps = 0;

    while !infected.is_empty() {
        steps += 1;
        exposed.clear();
        for &i in &infected {
            for &a in graph.node_hyperedges(i) {
                for &v in graph.hyperedge(a) {
                    if state[v] == SUSCEPTIBLE && !mark[v] {
                        mark[v] = true;
                        exposed.push(v);
                    }
                }
            }
        }
        exposed.sort_unstable();
        let mut newly = Vec::new();
        for &v in &exposed {
            mark[v] = false;
            let mut escape = 1.0;
            for &a in graph.node_hyperedges(v) {
                let e = eta[a];
                if e > 0 {
                    escape *= 1.0 - terms[e];
                    clamp_events += u64::from(clamped[e]);
                }
            }
            if rng.random::<f64>() < 1.0 - escape {
                newly.push(v);
            }
        }
        let mut still = Vec::with_capacity(infected.len());
        for &i in &infected {
            if rng.random::<f64>() < config.gamma {
                state[i] = RECOVERED;
                for &a in graph.node_hyperedges(i) {
                    eta[a] -= 1;
                }
                r_count += 1;
                i_count -= 1;
            } else {
                still.push(i);
            }
        }
        for &v in &newly {
            state[v] = INFECTED;
            for &a in graph.node_hyperedges(v) {
                eta[a] += 1;
            }
        }
        s_count -= newly.len();
        i_count += newly.len();
        still.extend(newly);
        still.sort_unstable();
        infected = still;
        if record {
            s_series.push(s_count);
            i_series.push(i_count);
            r_series.push(r_count);
        }
    }
    SirOutcome {
        final_recovered: r_count,
        s_series,
        i_series,
        r_series,
        steps,
        clamp_events,
    }
}

/// Per-node spreading influence with its Monte Carlo standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Influence {
    /// Mean final outbreak size seeded at each node.
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub clamp_events: u64,
}

/// Influence estimate number `replicate`; each (replicate, node, run) has its
/// own random stream.
pub fn node_influence_replicate(graph: &Hypergraph, config: &SirConfig, replicate: u64) -> Result<Influence> {
    config.validate()?;
    let (terms, clamped) = infection_terms(graph, config);
    let runs = config.runs;
    let per_node: Vec<(u64, u128, u64)> = (0..graph.node_count())
        .into_par_iter()
        .map(|i| {
            let (mut sum, mut sq, mut clamps) = (0u64, 0u128, 0u64);
            for r in 0..runs {
                let mut rng = stream_rng(config.seed, &[domain::SIR_INFLUENCE, replicate, i as u64, r as u64]);
                let out = run(graph, config, &[i], &terms, &clamped, &mut rng, false);
                let size = out.final_recovered as u64;
                sum += size;
                sq += (size as u128) * (size as u128);
                clamps += out.clamp_events;
            }
            (sum, sq, clamps)
        })
        .collect();
    let clamp_events = per_node.iter().map(|p| p.2).sum();
    if clamp_events > 0 {
        warn!("β·η^κ exceeded 1 and was clamped {clamp_events} time(s)");
    }
    let n = runs as f64;
    let mean = per_node.iter().map(|&(s, _, _)| s as f64 / n).collect();
    let std_error = per_node
        .iter()
        .map(|&(s, q, _)| {
            if runs < 2 {
                return 0.0;
            }
            let var = (q as f64 - (s as f64).powi(2) / n) / (n - 1.0);
            (var.max(0.0) / n).sqrt()
        })
        .collect();
    Ok(Influence {
        mean,
        std_error,
        clamp_events,
    })
}

/// `I_i`: mean final recovered count over `config.runs` runs seeded at node `i`.
pub fn node_influence(graph: &Hypergraph, config: &SirConfig) -> Result<Vec<f64>> {
    Ok(node_influence_replicate(graph, config, 0)?.mean)
}

/// Outbreak-size statistics at one infection rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityPoint {
    pub beta: f64,
    pub mean_size: f64,
    /// Standard error of the mean size.
    pub size_std_error: f64,
    /// `(⟨R²⟩ − ⟨R⟩²) / ⟨R⟩`.
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    /// Argmax of `χ` after refinement.
    pub beta_c: f64,
    /// False when `χ` peaks at a grid end or is flat.
    pub has_threshold: bool,
    pub curve: Vec<SusceptibilityPoint>,
    /// Midpoints evaluated around the grid maximum.
    pub refinement: Vec<SusceptibilityPoint>,
    pub ensemble: usize,
}

/// Default ensemble size per grid point.
pub const THRESHOLD_ENSEMBLE: usize = 2000;

/// Outbreak statistics at `beta` over `ensemble` runs from uniformly random
/// single seeds.
pub fn susceptibility(graph: &Hypergraph, template: &SirConfig, beta: f64, ensemble: usize) -> Result<SusceptibilityPoint> {
    let config = SirConfig { beta, ..*template };
    config.validate()?;
    if ensemble < 2 {
        return Err(Error::param("ensemble must have at least 2 runs"));
    }
    let (terms, clamped) = infection_terms(graph, &config);
    let n = graph.node_count();
    let sizes: Vec<u64> = (0..ensemble)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(config.seed, &[domain::SIR_THRESHOLD, beta.to_bits(), r as u64]);
            let seed = rng.random_range(0..n);
            run(graph, &config, &[seed], &terms, &clamped, &mut rng, false).final_recovered as u64
        })
        .collect();
    let sum: u64 = sizes.iter().sum();
    let sq: u128 = sizes.iter().map(|&s| (s as u128) * (s as u128)).sum();
    let count = ensemble as f64;
    let mean = sum as f64 / count;
    let second = sq as f64 / count;
    let var = (second - mean * mean).max(0.0);
    Ok(SusceptibilityPoint {
        beta,
        mean_size: mean,
        size_std_error: (var * count / (count - 1.0) / count).sqrt(),
        chi: if mean > 0.0 { var / mean } else { 0.0 },
    })
}

/// Minimum grid size for [`estimate_threshold`].
pub const MIN_GRID: usize = 10;

/// Checks that `beta_grid` is usable for [`estimate_threshold`].
pub fn validate_grid(beta_grid: &[f64]) -> Result<()> {
    if beta_grid.len() < MIN_GRID {
        return Err(Error::param(format!(
            "grid too small: {} point(s), need at least {MIN_GRID}",
            beta_grid.len()
        )));
    }
    if beta_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("β grid must be strictly ascending"));
    }
    Ok(())
}

/// Epidemic threshold as the peak of the susceptibility `χ(β)`, refined by
/// evaluating the midpoints to both grid neighbours of the maximum.
pub fn estimate_threshold(
    graph: &Hypergraph,
    template: &SirConfig,
    beta_grid: &[f64],
    ensemble: usize,
) -> Result<ThresholdEstimate> {
    validate_grid(beta_grid)?;
    let curve = beta_grid
        .iter()
        .map(|&b| susceptibility(graph, template, b, ensemble))
        .collect::<Result<Vec<_>>>()?;
    locate_threshold(curve, ensemble, |b| susceptibility(graph, template, b, ensemble))
}

/// Peak search over an already evaluated grid curve. `evaluate` computes the
/// two refinement midpoints.
pub fn locate_threshold<F>(curve: Vec<SusceptibilityPoint>, ensemble: usize, mut evaluate: F) -> Result<ThresholdEstimate>
where
    F: FnMut(f64) -> Result<SusceptibilityPoint>,
{
    let grid: Vec<f64> = curve.iter().map(|p| p.beta).collect();
    validate_grid(&grid)?;
    let argmax = |pts: &[SusceptibilityPoint]| {
        pts.iter()
            .enumerate()
            .fold(0, |best, (i, p)| if p.chi > pts[best].chi { i } else { best })
    };
    let peak = argmax(&curve);
    let flat = curve.iter().all(|p| p.chi == curve[0].chi);
    let interior = peak > 0 && peak + 1 < curve.len() && !flat;
    if !interior {
        warn!("χ(β) has no interior maximum on the grid; no threshold detected");
        return Ok(ThresholdEstimate {
            beta_c: curve[peak].beta,
            has_threshold: false,
            curve,
            refinement: Vec::new(),
            ensemble,
        });
    }
    let left = 0.5 * (grid[peak - 1] + grid[peak]);
    let right = 0.5 * (grid[peak] + grid[peak + 1]);
    let refinement = vec![evaluate(left)?, evaluate(right)?];
    let candidates = [refinement[0], curve[peak], refinement[1]];
    let best = candidates[argmax(&candidates)];
    Ok(ThresholdEstimate {
        beta_c: best.beta,
        has_threshold: true,
        curve,
        refinement,
        ensemble,
    })
}

/// Kendall's τ between a centrality and spreading influence, with spread
/// over independent influence estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub tau: f64,
    /// Sample standard deviation over replicates.
    pub std: f64,
    pub std_error: f64,
    pub replicate_taus: Vec<f64>,
}

/// τ of `measure` against influence estimated `replicates` times.
pub fn evaluate_centrality_vs_influence(
    graph: &Hypergraph,
    measure: &CentralityVector,
    config: &SirConfig,
    replicates: usize,
) -> Result<TauEstimate> {
    let influences = (0..replicates as u64)
        .map(|r| node_influence_replicate(graph, config, r).map(|i| i.mean))
        .collect::<Result<Vec<_>>>()?;
    tau_against(&measure.values, &influences)
}

/// τ of `values` against each influence replicate.
pub fn tau_against(values: &[f64], influences: &[Vec<f64>]) -> Result<TauEstimate> {
    if influences.is_empty() {
        return Err(Error::param("at least one influence replicate is required"));
    }
    let taus = influences
        .iter()
        .map(|inf| kendall_tau(values, inf))
        .collect::<Result<Vec<_>>>()?;
    let r = taus.len() as f64;
    let tau = taus.iter().sum::<f64>() / r;
    let std = if taus.len() > 1 {
        (taus.iter().map(|t| (t - tau).powi(2)).sum::<f64>() / (r - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(TauEstimate {
        tau,
        std,
        std_error: std / r.sqrt(),
        replicate_taus: taus,
    })
}
