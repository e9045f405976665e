//! Command-line harness: loads embeddings and scored word pairs, fits fuzzy
//! models over a sweep of cluster counts, and writes machine-readable result
//! documents for validity indices, gold-pair co-clustering, and per-word
//! membership reports.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use fuzzyclust::corpus::{
    build_dataset, distinct_words, load_embeddings, load_word_pairs, ScoredWordPair,
};
use fuzzyclust::eval::{
    count_cocluster_pairs, extract_gold_pairs, membership_confidence_census, repeated_models,
    word_report, GoldPairSet, RunStats,
};
use fuzzyclust::fcm::FcmConfig;
use fuzzyclust::fgk::FgkConfig;
use fuzzyclust::validity;
use fuzzyclust::{Dataset64, Model64, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "fuzzyclust",
    version,
    about = "Fuzzy clustering of word embeddings, with validity indices and \
             gold-standard evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model per cluster count and run, reporting validity indices
    /// and hardened assignments
    Cluster(CommonArgs),
    /// Count scored gold pairs that land in the same hard cluster, with
    /// mean and spread over repeated runs
    Pairs(CommonArgs),
    /// Report one word's membership degrees and the member words of every
    /// cluster it belongs to strongly
    Word(WordArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Clustering algorithm
    #[arg(long, value_enum)]
    algo: Option<AlgoArg>,
    /// Embedding vectors, one `word v1 v2 ...` line each
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Scored word pairs (word, word, score 0-10 per line)
    #[arg(long)]
    wordsim: Option<PathBuf>,
    /// Comma-separated cluster counts to sweep
    #[arg(long, value_delimiter = ',')]
    clusters: Option<Vec<usize>>,
    /// Fuzzifier exponent; larger means softer memberships
    #[arg(long)]
    m: Option<f64>,
    /// Relative convergence tolerance on the objective
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap per fit
    #[arg(long)]
    max_iter: Option<usize>,
    /// Independent runs per cluster count
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run k uses seed + k
    #[arg(long)]
    seed: Option<u64>,
    /// Minimum similarity score for a pair to count as gold
    #[arg(long)]
    gold_threshold: Option<f64>,
    /// Membership floor for counting a word as confidently placed
    #[arg(long)]
    confidence_threshold: Option<f64>,
    /// Write the result document here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with the same keys as the long flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct WordArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Word to report on
    #[arg(long)]
    word: Option<String>,
    /// Membership floor for listing a cluster and its members
    #[arg(long)]
    min_degree: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum AlgoArg {
    Fcm,
    Fgk,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    algo: Option<String>,
    embeddings: Option<PathBuf>,
    wordsim: Option<PathBuf>,
    clusters: Option<Vec<usize>>,
    m: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    runs: Option<usize>,
    seed: Option<u64>,
    gold_threshold: Option<f64>,
    confidence_threshold: Option<f64>,
    out: Option<PathBuf>,
    word: Option<String>,
    min_degree: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Algo {
    Fcm,
    Fgk,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Fcm => "fcm",
            Algo::Fgk => "fgk",
        }
    }
}

struct Resolved {
    algorithm: Algo,
    embeddings: PathBuf,
    wordsim: PathBuf,
    clusters: Vec<usize>,
    fuzzifier: f64,
    tolerance: f64,
    max_iter: usize,
    runs: usize,
    seed: u64,
    gold_threshold: f64,
    confidence_threshold: f64,
    out: Option<PathBuf>,
    word: Option<String>,
    min_degree: f64,
}

impl Resolved {
    fn solver_config(&self, clusters: usize) -> SolverConfig<f64> {
        let mut base = FcmConfig::new(clusters);
        base.fuzzifier = self.fuzzifier;
        base.tolerance = self.tolerance;
        base.max_iter = self.max_iter;
        base.seed = self.seed;
        match self.algorithm {
            Algo::Fcm => SolverConfig::Fcm(base),
            Algo::Fgk => {
                let mut cfg = FgkConfig::new(clusters);
                cfg.base = base;
                SolverConfig::Fgk(cfg)
            }
        }
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            algorithm: self.algorithm.name(),
            embeddings: self.embeddings.display().to_string(),
            wordsim: self.wordsim.display().to_string(),
            clusters: self.clusters.clone(),
            fuzzifier: self.fuzzifier,
            tolerance: self.tolerance,
            max_iter: self.max_iter,
            runs: self.runs,
            seed: self.seed,
            gold_threshold: self.gold_threshold,
            confidence_threshold: self.confidence_threshold,
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn resolve(
    common: &CommonArgs,
    word: Option<&String>,
    min_degree: Option<f64>,
) -> Result<Resolved, Failure> {
    let file = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| usage(format!("invalid config file {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    let algorithm = match common.algo {
        Some(AlgoArg::Fcm) => Algo::Fcm,
        Some(AlgoArg::Fgk) => Algo::Fgk,
        None => match file.algo.as_deref() {
            None => Algo::Fcm,
            Some(s) if s.eq_ignore_ascii_case("fcm") => Algo::Fcm,
            Some(s) if s.eq_ignore_ascii_case("fgk") => Algo::Fgk,
            Some(s) => {
                return Err(usage(format!(
                    "unknown algorithm {s:?}: expected fcm or fgk"
                )))
            }
        },
    };
    let embeddings = common
        .embeddings
        .clone()
        .or(file.embeddings)
        .ok_or_else(|| usage("missing embeddings path: pass --embeddings or set it in --config"))?;
    let wordsim = common
        .wordsim
        .clone()
        .or(file.wordsim)
        .ok_or_else(|| usage("missing word-pair path: pass --wordsim or set it in --config"))?;
    let resolved = Resolved {
        algorithm,
        embeddings,
        wordsim,
        clusters: common
            .clusters
            .clone()
            .or(file.clusters)
            .unwrap_or_else(|| vec![10]),
        fuzzifier: common.m.or(file.m).unwrap_or(1.1),
        tolerance: common.tol.or(file.tol).unwrap_or(1e-6),
        max_iter: common.max_iter.or(file.max_iter).unwrap_or(300),
        runs: common.runs.or(file.runs).unwrap_or(10),
        seed: common.seed.or(file.seed).unwrap_or(0),
        gold_threshold: common.gold_threshold.or(file.gold_threshold).unwrap_or(7.5),
        confidence_threshold: common
            .confidence_threshold
            .or(file.confidence_threshold)
            .unwrap_or(0.75),
        out: common.out.clone().or(file.out),
        word: word.cloned().or(file.word),
        min_degree: min_degree.or(file.min_degree).unwrap_or(0.1),
    };

    if resolved.clusters.is_empty() {
        return Err(usage("cluster list is empty"));
    }
    if let Some(&c) = resolved.clusters.iter().find(|&&c| c < 2) {
        return Err(usage(format!(
            "cluster count {c} is below the minimum of 2"
        )));
    }
    if !(resolved.fuzzifier.is_finite() && resolved.fuzzifier > 1.0) {
        return Err(usage(format!(
            "fuzzifier must be a finite number above 1, got {}",
            resolved.fuzzifier
        )));
    }
    if !(resolved.tolerance.is_finite() && resolved.tolerance > 0.0) {
        return Err(usage(format!(
            "tolerance must be a finite positive number, got {}",
            resolved.tolerance
        )));
    }
    if resolved.max_iter == 0 {
        return Err(usage("max-iter must be at least 1"));
    }
    if resolved.runs == 0 {
        return Err(usage("runs must be at least 1"));
    }
    if !(0.0..=10.0).contains(&resolved.gold_threshold) {
        return Err(usage(format!(
            "gold-threshold must lie in [0, 10], got {}",
            resolved.gold_threshold
        )));
    }
    if !(0.0..=1.0).contains(&resolved.confidence_threshold) {
        return Err(usage(format!(
            "confidence-threshold must lie in [0, 1], got {}",
            resolved.confidence_threshold
        )));
    }
    if !(0.0..=1.0).contains(&resolved.min_degree) {
        return Err(usage(format!(
            "min-degree must lie in [0, 1], got {}",
            resolved.min_degree
        )));
    }
    Ok(resolved)
}

#[derive(Serialize)]
struct ConfigEcho {
    algorithm: &'static str,
    embeddings: String,
    wordsim: String,
    clusters: Vec<usize>,
    fuzzifier: f64,
    tolerance: f64,
    max_iter: usize,
    runs: usize,
    seed: u64,
    gold_threshold: f64,
    confidence_threshold: f64,
}

#[derive(Serialize)]
struct DatasetInfo {
    words: usize,
    dim: usize,
    /// Pair-file words without an embedding vector, in first-appearance order.
    missing: Vec<String>,
}

struct Inputs {
    pairs: Vec<ScoredWordPair>,
    dataset: Dataset64,
    info: DatasetInfo,
}

fn load_inputs(resolved: &Resolved) -> anyhow::Result<Inputs> {
    let pair_file = File::open(&resolved.wordsim)
        .with_context(|| format!("opening word-pair file {}", resolved.wordsim.display()))?;
    let pairs = load_word_pairs(BufReader::new(pair_file))
        .with_context(|| format!("parsing word-pair file {}", resolved.wordsim.display()))?;
    let words = distinct_words(&pairs);

    let wanted: HashSet<String> = words.iter().map(|w| w.to_lowercase()).collect();
    let emb_file = File::open(&resolved.embeddings)
        .with_context(|| format!("opening embedding file {}", resolved.embeddings.display()))?;
    let table = load_embeddings::<f64, _>(BufReader::new(emb_file), Some(&wanted))
        .with_context(|| format!("parsing embedding file {}", resolved.embeddings.display()))?;

    let build = build_dataset(&table, &words).context("assembling the clustering dataset")?;
    let info = DatasetInfo {
        words: build.dataset.len(),
        dim: build.dataset.dim(),
        missing: build.missing.clone(),
    };
    log::info!(
        "dataset: {} words at {} dimensions, {} pair-file words without vectors",
        info.words,
        info.dim,
        info.missing.len()
    );
    Ok(Inputs {
        pairs,
        dataset: build.dataset,
        info,
    })
}

fn fit_sweep(
    resolved: &Resolved,
    dataset: &Dataset64,
) -> anyhow::Result<Vec<(usize, Vec<Model64>)>> {
    resolved
        .clusters
        .iter()
        .map(|&c| {
            let config = resolved.solver_config(c);
            config
                .validate()
                .with_context(|| format!("validating the solver configuration for c={c}"))?;
            let models = repeated_models(dataset, &config, resolved.runs, resolved.seed)
                .with_context(|| format!("fitting {} runs at c={c}", resolved.runs))?;
            Ok((c, models))
        })
        .collect()
}

#[derive(Serialize)]
struct AssignmentRecord {
    word: String,
    cluster: usize,
}

#[derive(Serialize)]
struct RunRecord {
    seed: u64,
    fpc: f64,
    xie_beni: Option<f64>,
    iterations: usize,
    converged: bool,
    fallback_events: usize,
    confident_words: usize,
    assignments: Vec<AssignmentRecord>,
}

#[derive(Serialize)]
struct SweepBlock {
    clusters: usize,
    runs: Vec<RunRecord>,
}

#[derive(Serialize)]
struct ClusterDoc {
    command: &'static str,
    config: ConfigEcho,
    dataset: DatasetInfo,
    results: Vec<SweepBlock>,
}

fn cmd_cluster(resolved: &Resolved) -> Result<(), Failure> {
    let inputs = load_inputs(resolved)?;
    let sweep = fit_sweep(resolved, &inputs.dataset)?;
    let results = sweep
        .into_iter()
        .map(|(c, models)| SweepBlock {
            clusters: c,
            runs: models
                .iter()
                .map(|m| run_record(m, &inputs.dataset, resolved))
                .collect(),
        })
        .collect();
    let doc = ClusterDoc {
        command: "cluster",
        config: resolved.echo(),
        dataset: inputs.info,
        results,
    };
    emit(&doc, resolved).map_err(Failure::Runtime)
}

fn run_record(model: &Model64, dataset: &Dataset64, resolved: &Resolved) -> RunRecord {
    let report = validity::report(dataset, model);
    let xie_beni = match report.as_ref() {
        Ok(r) => Some(r.xie_beni),
        Err(e) => {
            log::warn!("seed {}: Xie-Beni index undefined: {e}", model.seed);
            None
        }
    };
    let fpc = validity::fpc(&model.memberships);
    let confident_words = membership_confidence_census(
        &model.memberships,
        dataset.labels(),
        resolved.confidence_threshold,
    )
    .len();
    let hard = model.harden();
    let assignments = dataset
        .labels()
        .iter()
        .enumerate()
        .map(|(i, w)| AssignmentRecord {
            word: w.clone(),
            cluster: hard.cluster_of(i),
        })
        .collect();
    RunRecord {
        seed: model.seed,
        fpc,
        xie_beni,
        iterations: model.iterations,
        converged: model.converged,
        fallback_events: model.fallback_events,
        confident_words,
        assignments,
    }
}

#[derive(Serialize)]
struct GoldInfo {
    threshold: f64,
    pairs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

#[derive(Serialize)]
struct SeedPairs {
    seed: u64,
    co_clustered: usize,
    excluded: usize,
    per_cluster: Vec<usize>,
}

#[derive(Serialize)]
struct PairsBlock {
    clusters: usize,
    per_seed: Vec<SeedPairs>,
    mean: f64,
    std_dev: f64,
}

#[derive(Serialize)]
struct PairsDoc {
    command: &'static str,
    config: ConfigEcho,
    dataset: DatasetInfo,
    gold: GoldInfo,
    results: Vec<PairsBlock>,
}

fn cmd_pairs(resolved: &Resolved) -> Result<(), Failure> {
    let inputs = load_inputs(resolved)?;
    let gold = extract_gold_pairs(&inputs.pairs, resolved.gold_threshold);
    let warning = if gold.is_empty() {
        let msg = format!(
            "no pair reaches the gold threshold {}; co-cluster counts are 0",
            resolved.gold_threshold
        );
        log::warn!("{msg}");
        Some(msg)
    } else {
        None
    };

    let sweep = fit_sweep(resolved, &inputs.dataset)?;
    let results = sweep
        .into_iter()
        .map(|(c, models)| pairs_block(c, &models, &inputs.dataset, &gold))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let doc = PairsDoc {
        command: "pairs",
        config: resolved.echo(),
        dataset: inputs.info,
        gold: GoldInfo {
            threshold: gold.threshold(),
            pairs: gold.len(),
            warning,
        },
        results,
    };
    emit(&doc, resolved).map_err(Failure::Runtime)
}

fn pairs_block(
    c: usize,
    models: &[Model64],
    dataset: &Dataset64,
    gold: &GoldPairSet,
) -> anyhow::Result<PairsBlock> {
    let per_seed: Vec<SeedPairs> = models
        .iter()
        .map(|m| {
            let report = count_cocluster_pairs(&m.harden(), dataset.labels(), gold);
            SeedPairs {
                seed: m.seed,
                co_clustered: report.co_clustered,
                excluded: report.excluded,
                per_cluster: report.per_cluster,
            }
        })
        .collect();
    let stats = RunStats::from_values(
        per_seed
            .iter()
            .map(|s| s.co_clustered as f64)
            .collect::<Vec<_>>(),
    )
    .with_context(|| format!("summarizing co-cluster counts at c={c}"))?;
    Ok(PairsBlock {
        clusters: c,
        per_seed,
        mean: stats.mean(),
        std_dev: stats.std_dev(),
    })
}

#[derive(Serialize)]
struct DegreeRecord {
    cluster: usize,
    degree: f64,
}

#[derive(Serialize)]
struct StrongRecord {
    cluster: usize,
    degree: f64,
    members: Vec<String>,
}

#[derive(Serialize)]
struct WordDoc {
    command: &'static str,
    config: ConfigEcho,
    dataset: DatasetInfo,
    word: String,
    min_degree: f64,
    clusters_used: usize,
    seed: u64,
    degrees: Vec<DegreeRecord>,
    strong_clusters: Vec<StrongRecord>,
}

fn cmd_word(resolved: &Resolved) -> Result<(), Failure> {
    let word = resolved
        .word
        .as_deref()
        .ok_or_else(|| usage("missing word: pass --word or set it in --config"))?;
    let inputs = load_inputs(resolved)?;
    let c = resolved.clusters[0];
    let config = resolved.solver_config(c);
    config
        .validate()
        .with_context(|| format!("validating the solver configuration for c={c}"))?;
    let model = fuzzyclust::fit(&inputs.dataset, &config)
        .with_context(|| format!("fitting the model at c={c}, seed {}", resolved.seed))?;

    let report = match word_report(&model, inputs.dataset.labels(), word, resolved.min_degree) {
        Ok(r) => r,
        Err(e) => {
            let candidates = prefix_candidates(inputs.dataset.labels(), &word.to_lowercase(), 8);
            let hint = if candidates.is_empty() {
                "no similarly spelled word is in the dataset".to_string()
            } else {
                format!("closest by spelling: {}", candidates.join(", "))
            };
            return Err(Failure::Runtime(anyhow::anyhow!("{e}; {hint}")));
        }
    };

    let doc = WordDoc {
        command: "word",
        config: resolved.echo(),
        dataset: inputs.info,
        word: report.word.clone(),
        min_degree: resolved.min_degree,
        clusters_used: c,
        seed: resolved.seed,
        degrees: report
            .degrees
            .iter()
            .map(|&(cluster, degree)| DegreeRecord { cluster, degree })
            .collect(),
        strong_clusters: report
            .strong_clusters
            .iter()
            .map(|s| StrongRecord {
                cluster: s.cluster,
                degree: s.degree,
                members: s.members.clone(),
            })
            .collect(),
    };
    emit(&doc, resolved).map_err(Failure::Runtime)
}

/// Dataset words sharing the longest possible prefix with `query`, for
/// diagnostics on unknown words.
fn prefix_candidates(labels: &[String], query: &str, limit: usize) -> Vec<String> {
    let boundaries: Vec<usize> = query
        .char_indices()
        .map(|(i, _)| i)
        .skip(1)
        .chain([query.len()])
        .collect();
    for &end in boundaries.iter().rev() {
        let prefix = &query[..end];
        let hits: Vec<String> = labels
            .iter()
            .filter(|w| w.starts_with(prefix))
            .take(limit)
            .cloned()
            .collect();
        if !hits.is_empty() {
            return hits;
        }
    }
    Vec::new()
}

fn emit<T: Serialize>(doc: &T, resolved: &Resolved) -> anyhow::Result<()> {
    match &resolved.out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("creating output file {}", path.display()))?;
            let mut writer = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut writer, doc).context("serializing the result")?;
            writeln!(writer)?;
            writer.flush().context("writing the result document")?;
        }
        None => {
            let stdout = io::stdout();
            let mut writer = stdout.lock();
            serde_json::to_writer_pretty(&mut writer, doc).context("serializing the result")?;
            writeln!(writer)?;
        }
    }
    Ok(())
}

fn run() -> Result<(), Failure> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Cluster(common) => {
            let resolved = resolve(common, None, None)?;
            cmd_cluster(&resolved)
        }
        Command::Pairs(common) => {
            let resolved = resolve(common, None, None)?;
            cmd_pairs(&resolved)
        }
        Command::Word(args) => {
            let resolved = resolve(&args.common, args.word.as_ref(), args.min_degree)?;
            cmd_word(&resolved)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
