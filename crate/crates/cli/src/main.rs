//! `harness`: offline completion experiments, log simulation and the HTTP service.

use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use edgesuggest_core::harness::synth::{generate, SynthConfig};
use edgesuggest_core::harness::{
    expand_all, load_targets, paired_rows, parse_results, render_paired, render_summary, replay,
    results_tsv, summarize, CompletionResult, Experiment, DEFAULT_CAP,
};
use edgesuggest_core::querylog::{
    cooccurrence_ingest, datapos_simulate, import_positive_sets, inject_negatives, parse_windows,
    SimulationConfig,
};
use edgesuggest_core::rank::build_ranker;
use edgesuggest_core::{
    DataGraph, QueryLog, RankerConfig, RankerKind, ServiceConfig, SuggestionService,
};

#[derive(Parser)]
#[command(
    name = "harness",
    version,
    about = "Query-log driven edge suggestion: experiments and service"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulated query completion over a set of target queries.
    Run(RunArgs),
    /// Mean suggestions over an (n-paths, tau) grid.
    Sweep(SweepArgs),
    /// Builds a query log from a data graph, text windows or positive sets.
    SimulateLog(SimulateArgs),
    /// Writes a synthetic benchmark (graph, log, targets).
    Synth(SynthArgs),
    /// Re-drives recorded results and checks they reproduce exactly.
    Replay(ReplayArgs),
    /// Serves the suggestion API over HTTP.
    Serve(ServeArgs),
}

#[derive(Args, Clone)]
struct GraphArgs {
    #[arg(long)]
    graph_nodes: PathBuf,
    #[arg(long)]
    graph_edges: PathBuf,
}

impl GraphArgs {
    fn load(&self) -> Result<DataGraph> {
        DataGraph::load(&self.graph_nodes, &self.graph_edges).with_context(|| {
            format!(
                "loading graph from {} and {}",
                self.graph_nodes.display(),
                self.graph_edges.display()
            )
        })
    }
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    log: PathBuf,
    /// Directory of `*.qg` target queries.
    #[arg(long)]
    targets: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// One or more seeds, comma-separated.
    #[arg(
        long = "seed",
        alias = "seeds",
        value_delimiter = ',',
        default_value = "0"
    )]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    car_min_support: usize,
    #[arg(long, default_value_t = 0.0)]
    car_min_confidence: f64,
}

struct Loaded {
    graph: DataGraph,
    log: Arc<QueryLog>,
    targets: Vec<(String, edgesuggest_core::QueryGraph)>,
}

impl ExperimentArgs {
    fn load(&self) -> Result<Loaded> {
        let graph = self.graph.load()?;
        let log = QueryLog::load(&self.log, graph.edge_types().clone())
            .with_context(|| format!("loading log {}", self.log.display()))?;
        let targets = load_targets(&graph, &self.targets)
            .with_context(|| format!("loading targets from {}", self.targets.display()))?;
        ensure!(
            !targets.is_empty(),
            "no .qg targets in {}",
            self.targets.display()
        );
        Ok(Loaded {
            graph,
            log: Arc::new(log),
            targets,
        })
    }

    fn ranker(&self, kind: RankerKind, n_paths: usize, tau: usize) -> RankerConfig {
        RankerConfig {
            n_paths,
            tau,
            car_min_support: self.car_min_support,
            car_min_confidence: self.car_min_confidence,
            ..RankerConfig::new(kind)
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// One or more rankers, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "rdp")]
    ranker: Vec<String>,
    #[arg(long, default_value_t = 10)]
    n_paths: usize,
    #[arg(long, default_value_t = 10)]
    tau: usize,
    /// Result records; the summary goes to stdout and is appended as comments.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-instance comparison of two rankers, e.g. `rdp,rdp-noneg`.
    #[arg(long, value_delimiter = ',')]
    paired: Option<Vec<String>>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    #[arg(long, default_value = "rdp")]
    ranker: String,
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,25")]
    n_paths: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,25")]
    tau: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Frequent incident edge-type sets of data-graph nodes.
    Datapos,
    /// Edge types among entities co-mentioned in text windows.
    Cooccur,
    /// Positive edge-type sets read verbatim.
    Import,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum)]
    method: Method,
    /// Absolute support threshold for `datapos`.
    #[arg(long)]
    rho_d: Option<usize>,
    /// Absolute support threshold for `cooccur`.
    #[arg(long)]
    rho_w: Option<usize>,
    /// Entity windows for `cooccur`: one window per line, node ids.
    #[arg(long)]
    windows: Option<PathBuf>,
    /// Positive sets for `import`: one session per line, edge types.
    #[arg(long)]
    sets: Option<PathBuf>,
    #[arg(long, default_value_t = SimulationConfig::DEFAULT_MAX_ITEMSET_SIZE)]
    max_itemset_size: usize,
    /// Keep positive sessions only.
    #[arg(long)]
    no_negatives: bool,
    /// At most this many injected negatives per session.
    #[arg(long)]
    negative_cap: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = SynthConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = SynthConfig::default().sessions)]
    sessions: usize,
    #[arg(long, default_value_t = SynthConfig::default().targets)]
    targets: usize,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    targets: PathBuf,
    /// Output of `harness run`.
    #[arg(long)]
    results: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Query log the ranker is trained on.
    #[arg(long)]
    log: PathBuf,
    #[arg(long, default_value = "rdp")]
    ranker: String,
    #[arg(long, default_value_t = 10)]
    n_paths: usize,
    #[arg(long, default_value_t = 10)]
    tau: usize,
    #[arg(long, default_value_t = edgesuggest_core::service::DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Finished sessions are appended here.
    #[arg(long)]
    session_log: PathBuf,
    /// Final query graphs are archived here.
    #[arg(long)]
    archive: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
}

fn kind(s: &str) -> Result<RankerKind> {
    Ok(s.parse::<RankerKind>()?)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Settings a results file needs for replay, as a leading comment.
fn config_line(cfg: &RankerConfig, cap: usize) -> String {
    format!(
        "# config\tn_paths={}\ttau={}\tcap={}\tcar_min_support={}\tcar_min_confidence={}\n",
        cfg.n_paths, cfg.tau, cap, cfg.car_min_support, cfg.car_min_confidence
    )
}

fn parse_config_line(text: &str) -> Result<BTreeMap<String, String>> {
    let line = text
        .lines()
        .find(|l| l.starts_with("# config\t"))
        .context("results file has no `# config` line")?;
    Ok(line
        .split('\t')
        .skip(1)
        .filter_map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_owned(), v.to_owned()))
        })
        .collect())
}

fn run(a: RunArgs) -> Result<()> {
    let kinds = a
        .ranker
        .iter()
        .map(|s| kind(s))
        .collect::<Result<Vec<_>>>()?;
    let data = a.exp.load()?;
    let instances = expand_all(&data.graph, &data.targets)?;
    let exp = Experiment::new(&data.graph, data.log.clone(), &instances, a.exp.cap)?;
    let mut all: Vec<CompletionResult> = Vec::new();
    for &k in &kinds {
        all.extend(exp.run_seeds(&a.exp.ranker(k, a.n_paths, a.tau), &a.exp.seeds)?);
    }
    let summary = render_summary(&summarize(&all)?);
    let mut text = config_line(&a.exp.ranker(kinds[0], a.n_paths, a.tau), a.exp.cap);
    text.push_str(&results_tsv(&all, data.graph.edge_types()));
    text.push_str(&summary);
    if let Some(p) = &a.paired {
        ensure!(p.len() == 2, "--paired takes exactly two rankers");
        let (x, y) = (kind(&p[0])?, kind(&p[1])?);
        let table = render_paired(&paired_rows(&all, x, y), x, y);
        eprint!("{table}");
    }
    match &a.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            print!("{summary}");
            println!(
                "# {} targets, {} instances, {} records -> {}",
                data.targets.len(),
                instances.len(),
                all.len(),
                path.display()
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let k = kind(&a.ranker)?;
    let data = a.exp.load()?;
    let instances = expand_all(&data.graph, &data.targets)?;
    let exp = Experiment::new(&data.graph, data.log.clone(), &instances, a.exp.cap)?;
    let cells = exp.sweep(&a.exp.ranker(k, 10, 10), &a.n_paths, &a.tau, &a.exp.seeds)?;
    let mut text = format!(
        "# {k}: mean suggestions over {} instances x {} seeds, cap {}\nn_paths\ttau\tmean_suggestions\tcompletion\n",
        instances.len(),
        a.exp.seeds.len(),
        a.exp.cap
    );
    for c in &cells {
        text.push_str(&format!(
            "{}\t{}\t{:.4}\t{:.4}\n",
            c.n_paths, c.tau, c.mean_suggestions, c.completion
        ));
    }
    write_or_print(a.out.as_deref(), &text)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let g = a.graph.load()?;
    let cfg = |rho_w: usize, rho_d: usize| -> Result<SimulationConfig> {
        let mut c = SimulationConfig::new(rho_w, rho_d)?;
        c.max_itemset_size = a.max_itemset_size;
        c.validate()?;
        Ok(c)
    };
    let positives = match a.method {
        Method::Datapos => {
            let rho_d = a.rho_d.context("--rho-d is required for datapos")?;
            datapos_simulate(&g, &cfg(1, rho_d)?)?
        }
        Method::Cooccur => {
            let rho_w = a.rho_w.context("--rho-w is required for cooccur")?;
            let path = a
                .windows
                .as_ref()
                .context("--windows is required for cooccur")?;
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let (log, report) = cooccurrence_ingest(&parse_windows(&text), &g, &cfg(rho_w, 1)?)?;
            eprintln!(
                "# {} windows, {} unknown entity mentions skipped, {} windows with fewer than 2 known entities",
                report.windows, report.skipped_entities, report.skipped_windows
            );
            log
        }
        Method::Import => {
            let path = a.sets.as_ref().context("--sets is required for import")?;
            import_positive_sets(path, &g)?
        }
    };
    let log = if a.no_negatives {
        positives
    } else {
        inject_negatives(&positives, &g, a.negative_cap)?
    };
    log.save(&a.out)?;
    println!("# wrote {} sessions to {}", log.len(), a.out.display());
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        seed: a.seed,
        sessions: a.sessions,
        targets: a.targets,
        ..SynthConfig::default()
    };
    let b = generate(&cfg)?;
    b.write(&a.out)?;
    println!(
        "# wrote {} edge types, {} sessions, {} targets to {}",
        b.edge_type_count(),
        b.log.len(),
        b.targets.len(),
        a.out.display()
    );
    Ok(())
}

fn replay_cmd(a: ReplayArgs) -> Result<()> {
    let graph = a.graph.load()?;
    let log = Arc::new(QueryLog::load(&a.log, graph.edge_types().clone())?);
    let targets = load_targets(&graph, &a.targets)?;
    let instances = expand_all(&graph, &targets)?;
    let text = fs::read_to_string(&a.results)
        .with_context(|| format!("reading {}", a.results.display()))?;
    let conf = parse_config_line(&text)?;
    let get = |k: &str| {
        conf.get(k)
            .with_context(|| format!("config line lacks `{k}`"))
    };
    let n_paths: usize = get("n_paths")?.parse()?;
    let tau: usize = get("tau")?.parse()?;
    let car_min_support: usize = get("car_min_support")?.parse()?;
    let car_min_confidence: f64 = get("car_min_confidence")?.parse()?;
    let recorded = parse_results(&text, &a.results, graph.edge_types())?;
    ensure!(
        !recorded.is_empty(),
        "no result records in {}",
        a.results.display()
    );
    let mut rankers = BTreeMap::new();
    for rec in &recorded {
        let inst = instances
            .get(rec.instance)
            .filter(|i| i.target_name == rec.target)
            .with_context(|| {
                format!(
                    "instance {} ({}) not among the targets",
                    rec.instance, rec.target
                )
            })?;
        let key = (rec.ranker, rec.seed);
        let ranker = match rankers.entry(key) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                let cfg = RankerConfig {
                    n_paths,
                    tau,
                    seed: rec.seed,
                    car_min_support,
                    car_min_confidence,
                    ..RankerConfig::new(rec.ranker)
                };
                e.insert(build_ranker(&cfg, log.clone())?)
            }
        };
        let r = replay(&graph, inst, ranker.as_ref(), rec).with_context(|| {
            format!("{} seed {} instance {}", rec.ranker, rec.seed, rec.instance)
        })?;
        if !r.same_outcome(rec) {
            bail!(
                "{} seed {} instance {}: replay differs from the record",
                rec.ranker,
                rec.seed,
                rec.instance
            );
        }
    }
    println!("# replayed {} records: all identical", recorded.len());
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let graph = a.graph.load()?;
    let log = QueryLog::load(&a.log, graph.edge_types().clone())?;
    let mut cfg = ServiceConfig::new(
        &a.session_log,
        RankerConfig {
            n_paths: a.n_paths,
            tau: a.tau,
            seed: a.seed,
            ..RankerConfig::new(kind(&a.ranker)?)
        },
    );
    cfg.k = a.k;
    cfg.seed = a.seed;
    cfg.archive_dir = a.archive;
    let svc = Arc::new(SuggestionService::new(Arc::new(graph), Arc::new(log), cfg)?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(edgesuggest_server::serve(a.addr, svc, |addr| {
        println!("listening on http://{addr}");
    }))?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::SimulateLog(a) => simulate(a),
        Command::Synth(a) => synth(a),
        Command::Replay(a) => replay_cmd(a),
        Command::Serve(a) => serve(a),
    }
}
