use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypermine::community::DegreeNormalization;
use hypermine::hypercore::{convert_simplicial, parse_hyperedge_list, to_hyperedge_list_string, LoadOptions};
use hypermine::linkpred::RoundingRule;
use hypermine::Source;
use hypermine_cli::config::{ExperimentConfig, Task};
use hypermine_cli::grid::{parse_grid, parse_names, parse_seeds, BetaSpec};
use hypermine_cli::{exit, output, threads_from_env, with_threads, CliError, CliResult};

#[derive(Parser)]
#[command(name = "hypermine", version, about = "Hypergraph mining experiments")]
struct Cli {
    /// Worker threads (overrides HYPERMINE_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert simplicial triple files or a raw list to the canonical hyperedge list.
    Convert(ConvertArgs),
    /// Cross-validated hyperedge prediction.
    Linkpred(LinkpredArgs),
    /// Community detection scored against ground-truth labels.
    Community(CommunityArgs),
    /// Node centralities, one column per measure.
    Vital(VitalArgs),
    /// Susceptibility curve and epidemic threshold.
    Sir(SirArgs),
    /// Kendall's τ between centralities and SIR influence.
    VitalEval(VitalEvalArgs),
    /// HRA pipelines with the proximity matrix versus the raw incidence matrix.
    Ablation(AblationArgs),
    /// Re-check dataset hashes and CSV contents of result files.
    Verify { results: Vec<PathBuf> },
    /// Run an experiment from a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long = "data")]
    dataset: PathBuf,
    /// Result path; `.json` and `.csv` siblings are written.
    #[arg(long)]
    out: PathBuf,
    /// Collapse repeated identical hyperedges.
    #[arg(long)]
    dedupe: bool,
    /// Collapse a node repeated inside one hyperedge instead of failing.
    #[arg(long)]
    dedupe_within_line: bool,
    #[arg(long, default_value = "P")]
    source: Source,
    /// Allocation rounds t for P^(t).
    #[arg(long, default_value_t = 1)]
    iterate: usize,
    /// Also write the resolved config as JSON.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

#[derive(Args)]
struct LinkpredArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    algo: Option<String>,
    #[command(flatten)]
    lp: LinkpredParams,
    /// Seeds: `0..9` (inclusive), `3` or `1,4,7`.
    #[arg(long, alias = "seed", default_value = "0")]
    seeds: String,
}

#[derive(Args)]
struct LinkpredParams {
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, value_enum, default_value = "expectation-preserving")]
    rounding: Rounding,
    #[arg(long)]
    katz_lambda: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Rounding {
    ExpectationPreserving,
    Literal,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Normalization {
    HypergraphDegree,
    RowSum,
}

#[derive(Args)]
struct CommunityParams {
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long = "nc")]
    n_c: Option<usize>,
    #[arg(long, value_enum, default_value = "hypergraph-degree")]
    normalization: Normalization,
}

#[derive(Args)]
struct CommunityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    algo: Option<String>,
    #[command(flatten)]
    cd: CommunityParams,
    #[arg(long, alias = "seed", default_value = "0")]
    seeds: String,
}

#[derive(Args)]
struct VitalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, alias = "algo")]
    measures: Option<String>,
    #[arg(long)]
    katz_gamma: Option<f64>,
}

#[derive(Args)]
struct SpreadParams {
    #[arg(long, default_value_t = 0.25)]
    gamma: f64,
    #[arg(long, default_value_t = 1.25)]
    kappa: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Threshold cache directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SirArgs {
    #[command(flatten)]
    common: Common,
    /// `start:end:count` or a comma list.
    #[arg(long)]
    beta_grid: String,
    /// Runs per β point.
    #[arg(long, default_value_t = hypermine::spreading::THRESHOLD_ENSEMBLE)]
    runs: usize,
    #[command(flatten)]
    spread: SpreadParams,
}

#[derive(Args)]
struct EvalParams {
    /// Absolute rates or `rel:` multiples of the estimated threshold.
    #[arg(long)]
    beta: Option<String>,
    /// Grid searched for the threshold behind `rel:` rates.
    #[arg(long)]
    beta_grid: Option<String>,
    /// SIR runs per seed node.
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// SIR runs per threshold grid point.
    #[arg(long, default_value_t = hypermine::spreading::THRESHOLD_ENSEMBLE)]
    ensemble: usize,
    /// Independent influence estimates per rate.
    #[arg(long, default_value_t = 5)]
    replicates: usize,
}

#[derive(Args)]
struct VitalEvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, alias = "algo")]
    measures: Option<String>,
    #[arg(long)]
    katz_gamma: Option<f64>,
    #[command(flatten)]
    eval: EvalParams,
    #[command(flatten)]
    spread: SpreadParams,
}

#[derive(Args)]
struct AblationArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    lp: LinkpredParams,
    #[command(flatten)]
    cd: CommunityParams,
    #[command(flatten)]
    eval: EvalParams,
    #[arg(long, default_value_t = 0.25)]
    gamma: f64,
    #[arg(long, default_value_t = 1.25)]
    kappa: f64,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, alias = "seed", default_value = "0")]
    seeds: String,
}

#[derive(Args)]
struct ConvertArgs {
    /// Simplex sizes file of the triple layout.
    #[arg(long, requires = "simplices", conflicts_with = "input")]
    nverts: Option<PathBuf>,
    #[arg(long)]
    simplices: Option<PathBuf>,
    #[arg(long)]
    times: Option<PathBuf>,
    /// Raw hyperedge list.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    dedupe: bool,
}

fn base(task: Task, c: &Common) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(task, &c.dataset, &c.out);
    cfg.dedupe = c.dedupe;
    cfg.dedupe_within_line = c.dedupe_within_line;
    cfg.source = c.source;
    cfg.iterate = c.iterate;
    cfg
}

fn names(list: &Option<String>) -> Vec<String> {
    list.as_deref().map(parse_names).unwrap_or_default()
}

fn apply_lp(cfg: &mut ExperimentConfig, lp: &LinkpredParams) {
    cfg.rho = lp.rho;
    cfg.folds = lp.folds;
    cfg.rounding = match lp.rounding {
        Rounding::ExpectationPreserving => RoundingRule::ExpectationPreserving,
        Rounding::Literal => RoundingRule::Literal,
    };
    cfg.katz_lambda = lp.katz_lambda;
}

fn apply_cd(cfg: &mut ExperimentConfig, cd: &CommunityParams) {
    cfg.labels = cd.labels.clone();
    cfg.n_c = cd.n_c;
    cfg.normalization = match cd.normalization {
        Normalization::HypergraphDegree => DegreeNormalization::HypergraphDegree,
        Normalization::RowSum => DegreeNormalization::RowSum,
    };
}

fn apply_eval(cfg: &mut ExperimentConfig, e: &EvalParams) -> CliResult<()> {
    cfg.beta = e.beta.as_deref().map(BetaSpec::parse).transpose()?;
    cfg.beta_grid = e.beta_grid.as_deref().map(parse_grid).transpose()?;
    cfg.runs = e.runs;
    cfg.ensemble = e.ensemble;
    cfg.replicates = e.replicates;
    Ok(())
}

fn apply_spread(cfg: &mut ExperimentConfig, s: &SpreadParams) {
    cfg.gamma = s.gamma;
    cfg.kappa = s.kappa;
    cfg.seeds = vec![s.seed];
    cfg.cache_dir = s.cache_dir.clone();
}

fn experiment(command: &Command) -> CliResult<Option<(ExperimentConfig, Option<&Path>)>> {
    let (cfg, save) = match command {
        Command::Linkpred(a) => {
            let mut cfg = base(Task::Linkpred, &a.common);
            cfg.algorithms = names(&a.algo);
            apply_lp(&mut cfg, &a.lp);
            cfg.seeds = parse_seeds(&a.seeds)?;
            (cfg, &a.common.save_config)
        }
        Command::Community(a) => {
            let mut cfg = base(Task::Community, &a.common);
            cfg.algorithms = names(&a.algo);
            apply_cd(&mut cfg, &a.cd);
            cfg.seeds = parse_seeds(&a.seeds)?;
            (cfg, &a.common.save_config)
        }
        Command::Vital(a) => {
            let mut cfg = base(Task::Vital, &a.common);
            cfg.algorithms = names(&a.measures);
            cfg.katz_gamma = a.katz_gamma;
            (cfg, &a.common.save_config)
        }
        Command::Sir(a) => {
            let mut cfg = base(Task::Sir, &a.common);
            cfg.beta_grid = Some(parse_grid(&a.beta_grid)?);
            cfg.ensemble = a.runs;
            apply_spread(&mut cfg, &a.spread);
            (cfg, &a.common.save_config)
        }
        Command::VitalEval(a) => {
            let mut cfg = base(Task::VitalEval, &a.common);
            cfg.algorithms = names(&a.measures);
            cfg.katz_gamma = a.katz_gamma;
            apply_eval(&mut cfg, &a.eval)?;
            apply_spread(&mut cfg, &a.spread);
            (cfg, &a.common.save_config)
        }
        Command::Ablation(a) => {
            let mut cfg = base(Task::Ablation, &a.common);
            apply_lp(&mut cfg, &a.lp);
            apply_cd(&mut cfg, &a.cd);
            apply_eval(&mut cfg, &a.eval)?;
            cfg.gamma = a.gamma;
            cfg.kappa = a.kappa;
            cfg.cache_dir = a.cache_dir.clone();
            cfg.seeds = parse_seeds(&a.seeds)?;
            (cfg, &a.common.save_config)
        }
        Command::Run { config } => return Ok(Some((ExperimentConfig::load(config)?, None))),
        Command::Convert(_) | Command::Verify { .. } => return Ok(None),
    };
    Ok(Some((cfg, save.as_deref())))
}

fn convert(a: &ConvertArgs) -> CliResult<()> {
    let text = match (&a.nverts, &a.simplices, &a.input) {
        (Some(nv), Some(sx), None) => convert_simplicial(nv, sx, a.times.as_deref())?,
        (None, None, Some(input)) => {
            let mut s = String::new();
            std::io::Read::read_to_string(&mut hypermine::hypercore::open_text(input)?, &mut s)
                .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
            s
        }
        _ => return Err(CliError::config("give either --nverts/--simplices or --input")),
    };
    let opts = LoadOptions {
        dedupe: a.dedupe,
        dedupe_within_line: true,
    };
    let (graph, report) = parse_hyperedge_list(&text, opts)?;
    std::fs::write(&a.out, to_hyperedge_list_string(&graph))
        .map_err(|e| CliError::io(format!("writing {}", a.out.display()), e))?;
    println!("{}", graph.stats());
    println!(
        "dedupe={} dropped_small={} dropped_duplicates={} dropped_isolated={}",
        a.dedupe, report.dropped_small_edges, report.dropped_duplicate_edges, report.dropped_isolated_nodes
    );
    Ok(())
}

fn verify(paths: &[PathBuf]) -> CliResult<()> {
    if paths.is_empty() {
        return Err(CliError::config("no result files given"));
    }
    let mut failed = 0;
    for p in paths {
        let v = output::verify(&output::output_paths(p).0)?;
        if v.ok() {
            println!("{}: ok", p.display());
        } else {
            failed += 1;
            for problem in &v.problems {
                println!("{}: {problem}", p.display());
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Data(format!("{failed} result file(s) failed verification")));
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => threads_from_env()?,
    };
    match &cli.command {
        Command::Convert(a) => return convert(a),
        Command::Verify { results } => return verify(results),
        _ => {}
    }
    let (cfg, save) = experiment(&cli.command)?.expect("experiment command");
    if let Some(path) = save {
        std::fs::write(path, cfg.to_json()).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    }
    let run = with_threads(threads, || hypermine_cli::run(&cfg))??;
    let (json, csv) = output::output_paths(&run.config.output);
    println!("{}", run.headline.to_csv().trim_end());
    eprintln!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
