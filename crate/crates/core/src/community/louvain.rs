//! Louvain optimization of the degree-preserving modularity on the weighted
//! projection `A^W = M·(K − I)⁻¹·Mᵀ`, followed by average-linkage merging.

use std::collections::HashMap;

use log::warn;
use rand::seq::SliceRandom;

use super::{CommunityAlgorithm, Partition};
use crate::error::{Error, Result};
use crate::hypercore::{weighted_adjacency, Hypergraph, WeightKind};
use crate::rng::{domain, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LouvainOptions {
    /// Smallest modularity gain that justifies a move.
    pub min_gain: f64,
    pub max_levels: usize,
}

impl Default for LouvainOptions {
    fn default() -> Self {
        Self {
            min_gain: 1e-9,
            max_levels: 64,
        }
    }
}

/// Weighted graph at one aggregation level. `adj` omits self-loops.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    degree: Vec<f64>,
}

impl Level {
    fn from_graph(graph: &Hypergraph) -> Self {
        let aw = weighted_adjacency(graph, WeightKind::Ndp);
        let n = graph.node_count();
        let mut adj = vec![Vec::new(); n];
        let mut self_loop = vec![0.0; n];
        for (i, list) in adj.iter_mut().enumerate() {
            let (cols, vals) = aw.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if i == j {
                    self_loop[i] = v;
                } else {
                    list.push((j, v));
                }
            }
        }
        let degree = graph.degrees().iter().map(|&d| d as f64).collect();
        Self { adj, self_loop, degree }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Greedy local moves until no move gains more than `min_gain`.
    fn local_moves(&self, total: f64, order: &[usize], min_gain: f64) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut comm_degree = self.degree.clone();
        let mut weight_to = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;
        loop {
            let mut moved = false;
            for &i in order {
                let own = comm[i];
                let d = self.degree[i];
                comm_degree[own] -= d;
                touched.clear();
                touched.push(own);
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if weight_to[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                let gain = |c: usize, w: f64| w - d * comm_degree[c] / total;
                let mut best = own;
                let mut best_gain = gain(own, weight_to[own]);
                for &c in &touched[1..] {
                    let g = gain(c, weight_to[c]);
                    if g > best_gain + min_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                }
                comm_degree[best] += d;
                if best != own {
                    comm[i] = best;
                    moved = true;
                    any_move = true;
                }
            }
            if !moved {
                break;
            }
        }
        (relabel(&comm), any_move)
    }

    fn aggregate(&self, comm: &[usize], count: usize) -> Level {
        let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); count];
        let mut self_loop = vec![0.0; count];
        let mut degree = vec![0.0; count];
        for i in 0..self.len() {
            let ci = comm[i];
            self_loop[ci] += self.self_loop[i];
            degree[ci] += self.degree[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j];
                if ci == cj {
                    self_loop[ci] += w;
                } else {
                    *maps[ci].entry(cj).or_default() += w;
                }
            }
        }
        let adj = maps
            .into_iter()
            .map(|m| {
                let mut v: Vec<(usize, f64)> = m.into_iter().collect();
                v.sort_by_key(|&(j, _)| j);
                v
            })
            .collect();
        Level { adj, self_loop, degree }
    }
}

/// Dense ids in order of first appearance.
fn relabel(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// `Q = (1/2m)·Σ_ij B_ij·δ(g_i, g_j)` with `B = A^W − d·dᵀ/Σd` and
/// `2m = Σ_ij A^W_ij` (self-loops included).
pub fn modularity(graph: &Hypergraph, assignment: &[usize]) -> Result<f64> {
    if assignment.len() != graph.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} nodes",
            assignment.len(),
            graph.node_count()
        )));
    }
    let aw = weighted_adjacency(graph, WeightKind::Ndp);
    let two_m: f64 = aw.values().iter().sum();
    let total: f64 = graph.degrees().iter().sum::<usize>() as f64;
    let mut inside = 0.0;
    for (i, j, v) in aw.triplets() {
        if assignment[i] == assignment[j] {
            inside += v;
        }
    }
    let mut comm_degree: HashMap<usize, f64> = HashMap::new();
    for (i, &c) in assignment.iter().enumerate() {
        *comm_degree.entry(c).or_default() += graph.degrees()[i] as f64;
    }
    let mut labels: Vec<usize> = comm_degree.keys().copied().collect();
    labels.sort_unstable();
    let expected: f64 = labels.iter().map(|c| comm_degree[c].powi(2)).sum::<f64>() / total;
    Ok((inside - expected) / two_m)
}

/// Average-linkage merging on mean inter-community `B` until `target`
/// communities remain.
fn merge_to(level: &Level, sizes: &[usize], target: usize, total: f64) -> Vec<usize> {
    let c = level.len();
    let mut w = vec![vec![0.0; c]; c];
    for (x, list) in level.adj.iter().enumerate() {
        for &(y, v) in list {
            w[x][y] = v;
        }
    }
    let mut degree = level.degree.clone();
    let mut size: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let mut alive: Vec<bool> = vec![true; c];
    let mut owner: Vec<usize> = (0..c).collect();
    let mut count = c;
    while count > target {
        let mut best: Option<(usize, usize, f64)> = None;
        for x in 0..c {
            if !alive[x] {
                continue;
            }
            for y in x + 1..c {
                if !alive[y] {
                    continue;
                }
                let link = (w[x][y] - degree[x] * degree[y] / total) / (size[x] * size[y]);
                if best.is_none_or(|(_, _, b)| link > b) {
                    best = Some((x, y, link));
                }
            }
        }
        let (x, y, _) = best.expect("at least two communities alive");
        for z in 0..c {
            if z != x && z != y {
                w[x][z] += w[y][z];
                w[z][x] = w[x][z];
            }
        }
        degree[x] += degree[y];
        size[x] += size[y];
        alive[y] = false;
        for o in owner.iter_mut() {
            if *o == y {
                *o = x;
            }
        }
        count -= 1;
    }
    owner
}

/// NDP-Louvain communities, merged down to `n_c` when Louvain finds more.
/// When it finds fewer, the partition is returned as-is and the missing ids
/// are counted in [`Partition::empty_communities`].
pub fn ndp_louvain_partition(graph: &Hypergraph, n_c: usize, seed: u64, opts: &LouvainOptions) -> Result<Partition> {
    if n_c == 0 {
        return Err(Error::param("n_c must be ≥ 1"));
    }
    let total: f64 = graph.degrees().iter().sum::<usize>() as f64;
    let mut level = Level::from_graph(graph);
    let mut membership: Vec<usize> = (0..graph.node_count()).collect();
    for depth in 0..opts.max_levels {
        let mut order: Vec<usize> = (0..level.len()).collect();
        order.shuffle(&mut stream_rng(seed, &[domain::LOUVAIN, depth as u64]));
        let (comm, moved) = level.local_moves(total, &order, opts.min_gain);
        if !moved {
            break;
        }
        let count = comm.iter().max().map_or(0, |&m| m + 1);
        for m in membership.iter_mut() {
            *m = comm[*m];
        }
        level = level.aggregate(&comm, count);
    }
    let found = level.len();
    if found > n_c {
        let mut sizes = vec![0usize; found];
        for &m in &membership {
            sizes[m] += 1;
        }
        let owner = merge_to(&level, &sizes, n_c, total);
        for m in membership.iter_mut() {
            *m = owner[*m];
        }
    } else if found < n_c {
        warn!("NDP-Louvain found {found} communities, fewer than the requested {n_c}");
    }
    let assignment = relabel(&membership);
    let q = modularity(graph, &assignment)?;
    Ok(Partition::new(assignment, n_c, CommunityAlgorithm::Ndp, seed, true, q))
}
