//! Task drivers behind [`run`].

use std::path::PathBuf;
use std::time::Instant;

use hypermine::community::{detect_communities, precision, CommunityAlgorithm, CommunityOptions, Partition};
use hypermine::hypercore::{load_hyperedge_list, load_labels, LoadOptions};
use hypermine::linkpred::{run_linkpred_experiment, LinkPredAlgorithm, LinkPredConfig, LinkPredResult};
use hypermine::spreading::{
    locate_threshold, node_influence_replicate, susceptibility, tau_against, Influence, SirConfig, SusceptibilityPoint,
    ThresholdEstimate,
};
use hypermine::vitality::{centrality, CentralityOptions, CentralityVector, Measure};
use hypermine::{CommunityLabels, Hypergraph, Source};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::checkpoint::Checkpoint;
use crate::config::{ExperimentConfig, Task};
use crate::grid::BetaSpec;
use crate::output::{num, output_paths, sha256_str, EvaluationRun, Table, UnitRecord, TOOLKIT_VERSION};
use crate::{CliError, CliResult};

/// Everything a task needs besides its configuration.
struct Context<'a> {
    cfg: &'a ExperimentConfig,
    graph: Hypergraph,
    labels: Option<CommunityLabels>,
    dataset_sha256: String,
    ckpt: Checkpoint,
    units: Vec<UnitRecord>,
    /// Non-fatal numerical problems that still warrant exit code 4.
    nonconvergence: Vec<String>,
}

struct Outcome {
    summary: serde_json::Value,
    headline: Table,
    attachments: Vec<(String, Table)>,
}

/// Runs an experiment, writes its JSON and CSV files and returns the record.
///
/// If some numerical method failed to converge the files are still written
/// and [`CliError::NonConvergence`] carries the diagnostics.
pub fn run(cfg: &ExperimentConfig) -> CliResult<EvaluationRun> {
    cfg.validate()?;
    let started = Instant::now();
    let dataset_sha256 = crate::output::sha256_file(&cfg.dataset)?;
    let labels_sha256 = cfg.labels.as_deref().map(crate::output::sha256_file).transpose()?;
    let opts = LoadOptions {
        dedupe: cfg.dedupe,
        dedupe_within_line: cfg.dedupe_within_line,
    };
    let (graph, report) = load_hyperedge_list(&cfg.dataset, opts)?;
    info!(
        "{}: {} (dropped {} small, {} duplicate hyperedges)",
        cfg.dataset.display(),
        graph.stats(),
        report.dropped_small_edges,
        report.dropped_duplicate_edges
    );
    let labels = cfg.labels.as_deref().map(|p| load_labels(p, &graph)).transpose()?;

    let fingerprint = sha256_str(&[
        TOOLKIT_VERSION,
        &cfg.to_json(),
        &dataset_sha256,
        labels_sha256.as_deref().unwrap_or(""),
    ]);
    let ckpt = Checkpoint::open(&checkpoint_path(cfg), &fingerprint)?;
    let mut ctx = Context {
        cfg,
        graph,
        labels,
        dataset_sha256,
        ckpt,
        units: Vec::new(),
        nonconvergence: Vec::new(),
    };
    let outcome = match cfg.task {
        Task::Linkpred => linkpred(&mut ctx)?,
        Task::Community => community(&mut ctx)?,
        Task::Vital => vital(&mut ctx)?,
        Task::Sir => sir(&mut ctx)?,
        Task::VitalEval => vital_eval(&mut ctx)?,
        Task::Ablation => ablation(&mut ctx)?,
    };
    let run = EvaluationRun {
        toolkit_version: TOOLKIT_VERSION.to_string(),
        config: cfg.clone(),
        dataset_sha256: ctx.dataset_sha256,
        labels_sha256,
        graph: ctx.graph.stats(),
        units: ctx.units,
        summary: outcome.summary,
        headline: outcome.headline,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        attachments: outcome.attachments,
    };
    run.write()?;
    ctx.ckpt.finish()?;
    if !ctx.nonconvergence.is_empty() {
        return Err(CliError::NonConvergence(ctx.nonconvergence.join("; ")));
    }
    Ok(run)
}

fn checkpoint_path(cfg: &ExperimentConfig) -> PathBuf {
    let (json, _) = output_paths(&cfg.output);
    json.with_extension("checkpoint.jsonl")
}

/// Runs (or resumes) the keyed units and keeps them for the result file.
fn run_units<T, F>(ckpt: &Checkpoint, records: &mut Vec<UnitRecord>, keys: Vec<String>, compute: F) -> CliResult<Vec<T>>
where
    T: Serialize + serde::de::DeserializeOwned + Send,
    F: Fn(usize) -> CliResult<T> + Sync,
{
    let out = ckpt.run_units(&keys, compute)?;
    for (key, v) in keys.into_iter().zip(&out) {
        let result = serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))?;
        records.push(UnitRecord { key, result });
    }
    Ok(out)
}

impl Context<'_> {
    fn sir_template(&self) -> SirConfig {
        SirConfig {
            beta: 0.0,
            gamma: self.cfg.gamma,
            kappa: self.cfg.kappa,
            runs: self.cfg.runs,
            seed: self.cfg.master_seed(),
        }
    }

    fn centrality_options(&self, source: Source) -> CentralityOptions {
        CentralityOptions {
            source,
            iterate: self.cfg.iterate,
            katz_gamma: self.cfg.katz_gamma,
            ..Default::default()
        }
    }

    fn community_options(&self, source: Source) -> CommunityOptions {
        let mut opts = CommunityOptions::new();
        opts.source = source;
        opts.iterate = self.cfg.iterate;
        opts.spectral.normalization = self.cfg.normalization;
        opts
    }

    fn labels(&self) -> CliResult<&CommunityLabels> {
        self.labels
            .as_ref()
            .ok_or_else(|| CliError::config("community detection needs a label file"))
    }

    fn community_count(&self) -> CliResult<usize> {
        let labels = self.labels()?;
        let n_c = self.cfg.n_c.unwrap_or(labels.community_count);
        if n_c < 2 || n_c > self.graph.node_count() {
            return Err(CliError::config(format!(
                "n_c = {n_c} must lie in [2, {}]",
                self.graph.node_count()
            )));
        }
        Ok(n_c)
    }

    fn check_centrality(&mut self, c: &CentralityVector) {
        if !c.diagnostics.converged {
            let msg = format!(
                "{} stopped after {} iterations with residual {:e}",
                c.method.name(),
                c.diagnostics.iterations,
                c.diagnostics.residual
            );
            warn!("{msg}");
            self.nonconvergence.push(msg);
        }
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

fn beta_key(beta: f64) -> String {
    format!("{beta}")
}

fn linkpred_config(cfg: &ExperimentConfig, algorithm: LinkPredAlgorithm, source: Source, seed: u64) -> LinkPredConfig {
    LinkPredConfig {
        algorithm,
        rho: cfg.rho,
        folds: cfg.folds,
        seed,
        source,
        iterate: cfg.iterate,
        rounding: cfg.rounding,
        negatives_per_positive: 1,
        katz_lambda: cfg.katz_lambda,
    }
}

fn linkpred(ctx: &mut Context) -> CliResult<Outcome> {
    let cfg = ctx.cfg;
    let algorithms = cfg.linkpred_algorithms()?;
    let jobs: Vec<(LinkPredAlgorithm, u64)> = algorithms
        .iter()
        .flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let keys = jobs
        .iter()
        .map(|(a, s)| format!("linkpred/{}/seed={s}", a.name()))
        .collect();
    let graph = &ctx.graph;
    let results: Vec<LinkPredResult> = run_units(&ctx.ckpt, &mut ctx.units, keys, |i| {
        let (a, s) = jobs[i];
        Ok(run_linkpred_experiment(graph, &linkpred_config(cfg, a, cfg.source, s))?)
    })?;

    let mut table = Table::new([
        "algorithm", "source", "rho", "folds", "seeds", "auc_mean", "auc_std", "ndcg_mean", "ndcg_std",
    ]);
    let mut summary = Vec::new();
    for (k, a) in algorithms.iter().enumerate() {
        let per_seed = &results[k * cfg.seeds.len()..(k + 1) * cfg.seeds.len()];
        let aucs: Vec<f64> = per_seed.iter().map(|r| r.mean_auc).collect();
        let ndcgs: Vec<f64> = per_seed.iter().map(|r| r.mean_ndcg).collect();
        let (auc, auc_sd) = mean_std(&aucs);
        let (ndcg, ndcg_sd) = mean_std(&ndcgs);
        let source = if *a == LinkPredAlgorithm::Hra { cfg.source.to_string() } else { String::new() };
        table.push(vec![
            a.name().into(),
            source,
            num(cfg.rho),
            cfg.folds.to_string(),
            cfg.seeds.len().to_string(),
            num(auc),
            num(auc_sd),
            num(ndcg),
            num(ndcg_sd),
        ]);
        summary.push(json!({
            "algorithm": a.name(), "auc_mean": auc, "auc_std": auc_sd,
            "ndcg_mean": ndcg, "ndcg_std": ndcg_sd, "per_seed_auc": aucs, "per_seed_ndcg": ndcgs,
        }));
    }
    Ok(Outcome {
        summary: json!({ "algorithms": summary }),
        headline: table,
        attachments: Vec::new(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CommunityUnit {
    precision: f64,
    partition: Partition,
}

fn community_units(
    ctx: &mut Context,
    prefix: &str,
    jobs: &[(CommunityAlgorithm, Source, u64)],
) -> CliResult<Vec<CommunityUnit>> {
    let n_c = ctx.community_count()?;
    let keys = jobs
        .iter()
        .map(|(a, src, s)| format!("{prefix}/{}/{src}/seed={s}", a.name()))
        .collect();
    let opts: Vec<CommunityOptions> = jobs.iter().map(|j| ctx.community_options(j.1)).collect();
    let graph = &ctx.graph;
    let labels = ctx.labels()?.clone();
    run_units(&ctx.ckpt, &mut ctx.units, keys, |i| {
        let (a, _, s) = jobs[i];
        let partition = detect_communities(graph, a, n_c, s, &opts[i])?;
        let precision = precision(&partition, &labels)?;
        Ok(CommunityUnit { precision, partition })
    })
}

fn community(ctx: &mut Context) -> CliResult<Outcome> {
    let cfg = ctx.cfg;
    let algorithms = cfg.community_algorithms()?;
    let n_c = ctx.community_count()?;
    let jobs: Vec<_> = algorithms
        .iter()
        .flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, cfg.source, s)))
        .collect();
    let results = community_units(ctx, "community", &jobs)?;

    let mut table = Table::new(["algorithm", "n_c", "seeds", "precision_mean", "precision_std"]);
    let mut assignments = Table::new(["node", "algorithm", "seed", "community"]);
    let mut summary = Vec::new();
    for (k, a) in algorithms.iter().enumerate() {
        let per_seed = &results[k * cfg.seeds.len()..(k + 1) * cfg.seeds.len()];
        let precisions: Vec<f64> = per_seed.iter().map(|u| u.precision).collect();
        let (mean, sd) = mean_std(&precisions);
        table.push(vec![
            a.name().into(),
            n_c.to_string(),
            cfg.seeds.len().to_string(),
            num(mean),
            num(sd),
        ]);
        let empty: usize = per_seed.iter().map(|u| u.partition.empty_communities).sum();
        summary.push(json!({
            "algorithm": a.name(), "precision_mean": mean, "precision_std": sd,
            "per_seed_precision": precisions, "empty_communities": empty,
        }));
        for u in per_seed {
            for (node, c) in u.partition.assignment.iter().enumerate() {
                assignments.push(vec![
                    ctx.graph.node_ids()[node].clone(),
                    a.name().into(),
                    u.partition.seed.to_string(),
                    c.to_string(),
                ]);
            }
        }
    }
    Ok(Outcome {
        summary: json!({ "n_c": n_c, "algorithms": summary }),
        headline: table,
        attachments: vec![("assignments".into(), assignments)],
    })
}

fn centralities(ctx: &mut Context, measures: &[(Measure, Source)]) -> CliResult<Vec<CentralityVector>> {
    let keys = measures
        .iter()
        .map(|(m, src)| format!("centrality/{}/{src}", m.name()))
        .collect();
    let opts: Vec<CentralityOptions> = measures.iter().map(|m| ctx.centrality_options(m.1)).collect();
    let graph = &ctx.graph;
    let out: Vec<CentralityVector> = run_units(&ctx.ckpt, &mut ctx.units, keys, |i| Ok(centrality(graph, measures[i].0, &opts[i])?))?;
    for c in &out {
        ctx.check_centrality(c);
    }
    Ok(out)
}

fn vital(ctx: &mut Context) -> CliResult<Outcome> {
    let measures = ctx.cfg.measures()?;
    let jobs: Vec<_> = measures.iter().map(|&m| (m, ctx.cfg.source)).collect();
    let values = centralities(ctx, &jobs)?;
    let mut header = vec!["node".to_string()];
    header.extend(measures.iter().map(|m| m.name().to_string()));
    let mut table = Table::new(header);
    for (i, id) in ctx.graph.node_ids().iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(values.iter().map(|c| num(c.values[i])));
        table.push(row);
    }
    let diagnostics: Vec<_> = values
        .iter()
        .map(|c| json!({ "measure": c.method.name(), "diagnostics": c.diagnostics }))
        .collect();
    Ok(Outcome {
        summary: json!({ "measures": diagnostics }),
        headline: table,
        attachments: Vec::new(),
    })
}

/// Susceptibility curve plus refinement, each β point checkpointed.
fn threshold(ctx: &mut Context, grid: &[f64]) -> CliResult<ThresholdEstimate> {
    let template = ctx.sir_template();
    let ensemble = ctx.cfg.ensemble;
    let keys = grid.iter().map(|&b| format!("susceptibility/beta={}", beta_key(b))).collect();
    let graph = &ctx.graph;
    let curve: Vec<SusceptibilityPoint> =
        run_units(&ctx.ckpt, &mut ctx.units, keys, |i| Ok(susceptibility(graph, &template, grid[i], ensemble)?))?;

    let mut refined = Vec::new();
    let mut failure = None;
    let estimate = locate_threshold(curve, ensemble, |b| {
        let key = format!("susceptibility/refine/beta={}", beta_key(b));
        if let Some(p) = ctx.ckpt.get::<SusceptibilityPoint>(&key) {
            refined.push((key, p));
            return Ok(p);
        }
        let p = susceptibility(graph, &template, b, ensemble)?;
        if let Err(e) = ctx.ckpt.record(&key, &p) {
            failure.get_or_insert(e);
        }
        refined.push((key, p));
        Ok(p)
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    for (key, p) in refined {
        let result = serde_json::to_value(p).map_err(|e| CliError::Internal(e.to_string()))?;
        ctx.units.push(UnitRecord { key, result });
    }
    Ok(estimate)
}

fn threshold_cache_path(ctx: &Context, grid: &[f64]) -> PathBuf {
    let cfg = ctx.cfg;
    let dir = cfg.cache_dir.clone().unwrap_or_else(|| {
        let (json, _) = output_paths(&cfg.output);
        json.parent().map(|p| p.to_path_buf()).unwrap_or_default().join(".hypermine-cache")
    });
    let grid_text: Vec<String> = grid.iter().map(|b| beta_key(*b)).collect();
    let key = sha256_str(&[
        TOOLKIT_VERSION,
        &ctx.dataset_sha256,
        &format!("{}/{}", cfg.dedupe, cfg.dedupe_within_line),
        &num(cfg.gamma),
        &num(cfg.kappa),
        &cfg.master_seed().to_string(),
        &cfg.ensemble.to_string(),
        &grid_text.join(","),
    ]);
    dir.join(format!("threshold-{}.json", &key[..16]))
}

fn store_threshold(ctx: &Context, grid: &[f64], est: &ThresholdEstimate) {
    let path = threshold_cache_path(ctx, grid);
    let written = path
        .parent()
        .map_or(Ok(()), std::fs::create_dir_all)
        .and_then(|_| std::fs::write(&path, serde_json::to_string_pretty(est).expect("estimate serializes")));
    if let Err(e) = written {
        warn!("could not cache threshold estimate at {}: {e}", path.display());
    }
}

/// Threshold for `rel:` rates, from the cache when an identical estimate
/// exists.
fn cached_threshold(ctx: &mut Context) -> CliResult<ThresholdEstimate> {
    let grid = ctx.cfg.threshold_grid();
    let path = threshold_cache_path(ctx, &grid);
    if let Some(est) = std::fs::read_to_string(&path)
        .ok()
        .and_then(|t| serde_json::from_str::<ThresholdEstimate>(&t).ok())
    {
        info!("using cached threshold β_c = {} from {}", est.beta_c, path.display());
        return Ok(est);
    }
    let est = threshold(ctx, &grid)?;
    store_threshold(ctx, &grid, &est);
    Ok(est)
}

fn sir(ctx: &mut Context) -> CliResult<Outcome> {
    let grid = ctx.cfg.beta_grid.clone().expect("validated");
    let est = threshold(ctx, &grid)?;
    store_threshold(ctx, &grid, &est);
    let mut points: Vec<(&str, &SusceptibilityPoint)> = est.curve.iter().map(|p| ("grid", p)).collect();
    points.extend(est.refinement.iter().map(|p| ("refine", p)));
    points.sort_by(|a, b| a.1.beta.total_cmp(&b.1.beta));
    let mut table = Table::new(["beta", "point", "mean_size", "size_std_error", "chi"]);
    for (kind, p) in points {
        table.push(vec![
            num(p.beta),
            kind.into(),
            num(p.mean_size),
            num(p.size_std_error),
            num(p.chi),
        ]);
    }
    Ok(Outcome {
        summary: json!({ "beta_c": est.beta_c, "has_threshold": est.has_threshold, "ensemble": est.ensemble }),
        headline: table,
        attachments: Vec::new(),
    })
}

/// Absolute rates for a β spec, plus the threshold behind `rel:` rates.
fn resolve_betas(ctx: &mut Context, spec: &BetaSpec) -> CliResult<(Vec<f64>, Option<ThresholdEstimate>)> {
    match spec {
        BetaSpec::Absolute(v) => Ok((v.clone(), None)),
        BetaSpec::Relative(v) => {
            let est = cached_threshold(ctx)?;
            if !est.has_threshold {
                return Err(CliError::config(format!(
                    "no susceptibility peak inside the threshold grid (maximum at its edge, β = {}); widen beta_grid",
                    est.beta_c
                )));
            }
            Ok((v.iter().map(|x| x * est.beta_c).collect(), Some(est)))
        }
    }
}

/// Influence replicates at every rate: `out[b][r]`.
fn influences(ctx: &mut Context, betas: &[f64]) -> CliResult<Vec<Vec<Influence>>> {
    let reps = ctx.cfg.replicates;
    let template = ctx.sir_template();
    let jobs: Vec<(usize, usize)> = (0..betas.len()).flat_map(|b| (0..reps).map(move |r| (b, r))).collect();
    let keys = jobs
        .iter()
        .map(|&(b, r)| format!("influence/beta={}/replicate={r}", beta_key(betas[b])))
        .collect();
    let graph = &ctx.graph;
    let flat: Vec<Influence> = run_units(&ctx.ckpt, &mut ctx.units, keys, |i| {
        let (b, r) = jobs[i];
        let cfg = SirConfig {
            beta: betas[b],
            ..template
        };
        Ok(node_influence_replicate(graph, &cfg, r as u64)?)
    })?;
    let clamps: u64 = flat.iter().map(|i| i.clamp_events).sum();
    if clamps > 0 {
        warn!("infection probability clamped to 1 in {clamps} event(s)");
    }
    let mut it = flat.into_iter();
    Ok(betas.iter().map(|_| it.by_ref().take(reps).collect()).collect())
}

fn vital_eval(ctx: &mut Context) -> CliResult<Outcome> {
    let measures = ctx.cfg.measures()?;
    let spec = ctx.cfg.beta.clone().expect("validated");
    let (betas, est) = resolve_betas(ctx, &spec)?;
    let jobs: Vec<_> = measures.iter().map(|&m| (m, ctx.cfg.source)).collect();
    let values = centralities(ctx, &jobs)?;
    let infl = influences(ctx, &betas)?;

    let mut table = Table::new([
        "beta", "beta_rel", "measure", "tau", "tau_std", "tau_std_error", "replicates",
    ]);
    let mut summary = Vec::new();
    for (b, &beta) in betas.iter().enumerate() {
        let means: Vec<Vec<f64>> = infl[b].iter().map(|i| i.mean.clone()).collect();
        let rel = match &spec {
            BetaSpec::Relative(v) => Some(v[b]),
            BetaSpec::Absolute(_) => est.as_ref().map(|e| beta / e.beta_c),
        };
        for c in &values {
            let tau = tau_against(&c.values, &means)?;
            table.push(vec![
                num(beta),
                rel.map(num).unwrap_or_default(),
                c.method.name().into(),
                num(tau.tau),
                num(tau.std),
                num(tau.std_error),
                means.len().to_string(),
            ]);
            summary.push(json!({ "beta": beta, "beta_rel": rel, "measure": c.method.name(), "tau": tau }));
        }
    }
    Ok(Outcome {
        summary: json!({
            "beta_c": est.as_ref().map(|e| e.beta_c),
            "threshold": est,
            "taus": summary,
        }),
        headline: table,
        attachments: Vec::new(),
    })
}

fn ablation(ctx: &mut Context) -> CliResult<Outcome> {
    let cfg = ctx.cfg;
    let sources = [Source::P, Source::M];
    let mut table = Table::new(["pipeline", "metric", "beta", "source_p", "source_m", "delta"]);
    let mut push = |pipeline: &str, metric: &str, beta: Option<f64>, p: f64, m: f64| {
        table.push(vec![
            pipeline.into(),
            metric.into(),
            beta.map(num).unwrap_or_default(),
            num(p),
            num(m),
            num(p - m),
        ]);
    };

    let jobs: Vec<(Source, u64)> = sources
        .iter()
        .flat_map(|&src| cfg.seeds.iter().map(move |&s| (src, s)))
        .collect();
    let keys = jobs.iter().map(|(src, s)| format!("ablation/lp/{src}/seed={s}")).collect();
    let graph = &ctx.graph;
    let lp: Vec<LinkPredResult> = run_units(&ctx.ckpt, &mut ctx.units, keys, |i| {
        let (src, s) = jobs[i];
        Ok(run_linkpred_experiment(graph, &linkpred_config(cfg, LinkPredAlgorithm::Hra, src, s))?)
    })?;
    let half = cfg.seeds.len();
    let auc = |rs: &[LinkPredResult]| mean_std(&rs.iter().map(|r| r.mean_auc).collect::<Vec<_>>()).0;
    let ndcg = |rs: &[LinkPredResult]| mean_std(&rs.iter().map(|r| r.mean_ndcg).collect::<Vec<_>>()).0;
    push("lp", "auc", None, auc(&lp[..half]), auc(&lp[half..]));
    push("lp", "ndcg", None, ndcg(&lp[..half]), ndcg(&lp[half..]));

    if ctx.labels.is_some() {
        let jobs: Vec<_> = sources
            .iter()
            .flat_map(|&src| cfg.seeds.iter().map(move |&s| (CommunityAlgorithm::Hra, src, s)))
            .collect();
        let cd = community_units(ctx, "ablation/cd", &jobs)?;
        let prec = |us: &[CommunityUnit]| mean_std(&us.iter().map(|u| u.precision).collect::<Vec<_>>()).0;
        push("cd", "precision", None, prec(&cd[..half]), prec(&cd[half..]));
    }

    let mut threshold = None;
    if let Some(spec) = cfg.beta.clone() {
        let (betas, est) = resolve_betas(ctx, &spec)?;
        threshold = est.map(|e| e.beta_c);
        let values = centralities(ctx, &[(Measure::Hra, Source::P), (Measure::Hra, Source::M)])?;
        let infl = influences(ctx, &betas)?;
        for (b, &beta) in betas.iter().enumerate() {
            let means: Vec<Vec<f64>> = infl[b].iter().map(|i| i.mean.clone()).collect();
            let p = tau_against(&values[0].values, &means)?.tau;
            let m = tau_against(&values[1].values, &means)?.tau;
            push("vni", "tau", Some(beta), p, m);
        }
    }

    let rows: Vec<_> = table
        .rows
        .iter()
        .map(|r| json!({ "pipeline": r[0], "metric": r[1], "beta": r[2], "source_p": r[3], "source_m": r[4], "delta": r[5] }))
        .collect();
    Ok(Outcome {
        summary: json!({ "beta_c": threshold, "pairs": rows }),
        headline: table,
        attachments: Vec::new(),
    })
}
