//! Command-line front end. [`dispatch`] parses arguments, validates flag
//! combinations before touching any file, runs the command and maps the
//! outcome to an exit code: 0 on success, 1 on runtime failure, 2 on usage
//! errors. Failures print a single `error[<kind>]: <message>` line on stderr.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchSpec};
use crate::dataset::{parse_predictions, parse_records, write_prediction, EvalRecord};
use crate::embedding::EmbeddingTable;
use crate::eval::{self, EvalReport, Lexicon};
use crate::rerank::{Cascade, ContextMode, Models, RerankConfig, Reranker, ScoredHypothesis, Scorer};
use crate::tdp::{self, TdpTable};
use crate::twe::{self, Pairing, SkipGramConfig, TrainedEmbeddings};
use crate::unigram::{UnigramBuilder, UnigramModel};

#[derive(Debug, Parser)]
#[command(name = "scene-rerank", version = crate::VERSION_INFO, about = "Re-rank k-best scene-text hypotheses")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Serial execution; identical inputs give byte-identical outputs.
    #[arg(long, global = true)]
    pub deterministic: bool,

    /// Worker threads for re-ranking and evaluation.
    #[arg(long, default_value_t = 1, global = true)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count a unigram language model from plain-text corpora.
    BuildLm(BuildLmArgs),
    /// Print the cosine between a word and a context label.
    Similarity(SimilarityArgs),
    /// Fit word-given-context probabilities on annotated records.
    FitTdp(FitTdpArgs),
    /// Train task embeddings on (gold word, context) pairs.
    TrainTwe(TrainTweArgs),
    /// Re-rank every record of a dataset with one cascade.
    Rerank(RerankArgs),
    /// Accuracy of re-ranked predictions at one or more cutoffs.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic benchmark directory.
    GenBench(GenBenchArgs),
    /// Run the bundled synthetic pipeline end to end.
    Selftest,
}

#[derive(Debug, Args)]
pub struct BuildLmArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub oov_floor: Option<f64>,
    #[arg(long)]
    pub short_word_discount: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long, num_args = 2, value_names = ["W", "C"])]
    pub pair: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FitTdpArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = tdp::DEFAULT_FLOOR)]
    pub floor: f64,
}

#[derive(Debug, Args)]
pub struct TrainTweArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.025)]
    pub learning_rate: f64,
    /// Start from these vectors (TWE*); random start otherwise.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Output prefix; writes PREFIX.in and PREFIX.out.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairingArg {
    /// word-side vector against context-side vector
    InOut,
    /// word-side vectors on both ends
    InIn,
}

#[derive(Debug, Args)]
pub struct RerankArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// bl (no re-ranker) or p1..p7.
    #[arg(long)]
    pub cascade: String,
    #[arg(long)]
    pub lm: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub tdp: Option<PathBuf>,
    /// Prefix of trained embeddings (PREFIX.in / PREFIX.out).
    #[arg(long)]
    pub twe: Option<PathBuf>,
    #[arg(long, default_value_t = crate::rerank::DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = crate::rerank::DEFAULT_MAX_CONTEXTS)]
    pub max_contexts: usize,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub clamp_neg_sim: Switch,
    /// TDP and TWE reuse the context picked by embedding similarity.
    #[arg(long)]
    pub shared_context: bool,
    #[arg(long, value_enum, default_value_t = PairingArg::InOut)]
    pub twe_pairing: PairingArg,
    /// Only re-rank the top K baseline hypotheses.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// One or more prediction files written by `rerank`.
    #[arg(long, num_args = 1.., required = true)]
    pub pred: Vec<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<usize>,
    /// Tab-separated report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenBenchArgs {
    #[arg(long, default_value_t = 200)]
    pub records: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0.4)]
    pub gold_top1: f64,
    #[arg(long, default_value_t = 0.9)]
    pub strength: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                eprint!("{e}");
                return 2;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!("error[usage]: {}", one_line(first.trim_start_matches("error: ")));
            return 2;
        }
    };
    init_logging(cli.verbose);
    match run(&cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error[usage]: {}", one_line(&msg));
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error[runtime]: {}", one_line(&format!("{e:#}")));
            1
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

pub fn run(cli: &Cli) -> CliResult {
    let jobs = if cli.deterministic { 1 } else { cli.jobs.max(1) };
    match &cli.command {
        Command::BuildLm(a) => build_lm(a),
        Command::Similarity(a) => similarity(a),
        Command::FitTdp(a) => fit_tdp(a),
        Command::TrainTwe(a) => train_twe(a),
        Command::Rerank(a) => rerank(a, jobs),
        Command::Evaluate(a) => evaluate(a),
        Command::GenBench(a) => gen_bench(a),
        Command::Selftest => selftest(jobs),
    }
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn read_records(path: &Path) -> anyhow::Result<Vec<EvalRecord>> {
    parse_records(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn load_lm(path: &Path) -> anyhow::Result<UnigramModel> {
    UnigramModel::load(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn load_embeddings(path: &Path) -> anyhow::Result<EmbeddingTable> {
    EmbeddingTable::load(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn load_tdp(path: &Path) -> anyhow::Result<TdpTable> {
    TdpTable::load(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn build_lm(a: &BuildLmArgs) -> CliResult {
    if let Some(f) = a.oov_floor {
        if !(f > 0.0 && f < 1.0) {
            return Err(usage(format!("--oov-floor {f} must lie in (0, 1)")));
        }
    }
    if let Some(d) = a.short_word_discount {
        if !(d > 0.0 && d.is_finite()) {
            return Err(usage(format!("--short-word-discount {d} must be positive")));
        }
    }
    let mut builder = UnigramBuilder::new();
    for path in &a.corpus {
        builder
            .add_reader(open(path)?)
            .with_context(|| format!("reading {}", path.display()))?;
    }
    let mut model = builder.finish();
    if let Some(f) = a.oov_floor {
        model = model.with_oov_floor(f)?;
    }
    if let Some(d) = a.short_word_discount {
        model = model.with_short_word_discount(d)?;
    }
    model.save(create(&a.out)?)?;
    log::info!("{} types, {} tokens", model.vocab_size(), model.total());
    Ok(())
}

fn similarity(a: &SimilarityArgs) -> CliResult {
    let table = load_embeddings(&a.embeddings)?;
    let norm = |s: &str| crate::dataset::normalize_token(s).ok_or_else(|| usage(format!("empty token {s:?}")));
    let (w, c) = (norm(&a.pair[0])?, norm(&a.pair[1])?);
    match table.label_similarity(&w, &c) {
        Some(s) => println!("{s}"),
        None => println!("absent"),
    }
    Ok(())
}

fn fit_tdp(a: &FitTdpArgs) -> CliResult {
    if !(a.floor > 0.0 && a.floor <= 1.0) {
        return Err(usage(format!("--floor {} must lie in (0, 1]", a.floor)));
    }
    let records = read_records(&a.train)?;
    let table = TdpTable::fit(&records).with_floor(a.floor)?;
    table.save(create(&a.out)?)?;
    log::info!("{} pairs over {} contexts", table.num_pairs(), table.num_contexts());
    Ok(())
}

fn train_twe(a: &TrainTweArgs) -> CliResult {
    let config = SkipGramConfig {
        dim: a.dim,
        negatives: a.negatives,
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        min_learning_rate: a.learning_rate * 1e-4,
        seed: a.seed,
        ..Default::default()
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let records = read_records(&a.train)?;
    let init = a.init.as_deref().map(load_embeddings).transpose()?;
    log::info!("training with seed {}", config.seed);
    let pairs = twe::training_pairs(&records);
    let (emb, report) = twe::train_twe(&pairs, &config, init.as_ref())?;
    for (i, loss) in report.epoch_losses.iter().enumerate() {
        log::info!("epoch {}: loss {loss:.6}", i + 1);
    }
    emb.save(&a.out)?;
    Ok(())
}

/// Reports which flag a cascade is missing, before anything is read.
fn check_rerank_flags(a: &RerankArgs, cascade: Cascade) -> CliResult {
    let needs = |r: Reranker| cascade.rerankers().contains(&r);
    let mut missing = Vec::new();
    if (needs(Reranker::Ulm) || needs(Reranker::Swe)) && a.lm.is_none() {
        missing.push("--lm");
    }
    if (needs(Reranker::Swe) || a.shared_context) && a.embeddings.is_none() {
        missing.push("--embeddings");
    }
    if needs(Reranker::Tdp) && a.tdp.is_none() {
        missing.push("--tdp");
    }
    if needs(Reranker::Twe) && a.twe.is_none() {
        missing.push("--twe");
    }
    if !missing.is_empty() {
        return Err(usage(format!(
            "cascade {cascade} requires {}",
            missing.join(" and ")
        )));
    }
    if !(0.0..=1.0).contains(&a.beta) {
        return Err(usage(format!("--beta {} outside [0, 1]", a.beta)));
    }
    if a.max_contexts == 0 {
        return Err(usage("--max-contexts must be at least 1"));
    }
    if a.k == Some(0) {
        return Err(usage("--k must be at least 1"));
    }
    Ok(())
}

fn rerank(a: &RerankArgs, jobs: usize) -> CliResult {
    let cascade: Cascade = a.cascade.parse().map_err(|e: crate::Error| usage(e.to_string()))?;
    check_rerank_flags(a, cascade)?;

    let needs = |r: Reranker| cascade.rerankers().contains(&r);
    let pairing = match a.twe_pairing {
        PairingArg::InOut => Pairing::InputOutput,
        PairingArg::InIn => Pairing::InputInput,
    };
    // Only load what the cascade uses.
    let models = Models {
        ulm: match &a.lm {
            Some(p) if needs(Reranker::Ulm) || needs(Reranker::Swe) => Some(load_lm(p)?),
            _ => None,
        },
        embeddings: match &a.embeddings {
            Some(p) if needs(Reranker::Swe) || a.shared_context => Some(load_embeddings(p)?),
            _ => None,
        },
        tdp: match &a.tdp {
            Some(p) if needs(Reranker::Tdp) => Some(load_tdp(p)?),
            _ => None,
        },
        twe: match &a.twe {
            Some(p) if needs(Reranker::Twe) => Some(
                TrainedEmbeddings::load(p, pairing)
                    .with_context(|| format!("reading trained embeddings {}", p.display()))?,
            ),
            _ => None,
        },
    };
    let cfg = RerankConfig {
        beta: a.beta,
        max_contexts: a.max_contexts,
        rerankers: cascade.rerankers().to_vec(),
        clamp_negative_sim: a.clamp_neg_sim == Switch::On,
        context_mode: if a.shared_context {
            ContextMode::Shared
        } else {
            ContextMode::PerReranker
        },
    };
    let scorer = Scorer::new(&models, &cfg)?;
    let records = read_records(&a.data)?;
    let outputs = scorer.rerank_all(&records, a.k, jobs);
    let mut out = create(&a.out)?;
    for (record, reranked) in records.iter().zip(&outputs) {
        write_prediction(&mut out, record, cascade.name(), reranked)?;
    }
    out.flush().context("writing predictions")?;
    Ok(())
}

/// Groups predictions by cascade (first-seen order) and aligns each group
/// with the dataset by record id.
fn align_predictions(
    records: &[EvalRecord],
    paths: &[PathBuf],
) -> anyhow::Result<Vec<(String, Vec<Vec<ScoredHypothesis>>)>> {
    let mut groups: Vec<(String, HashMap<String, Vec<ScoredHypothesis>>)> = Vec::new();
    for path in paths {
        let preds = parse_predictions(open(path)?).with_context(|| format!("reading {}", path.display()))?;
        for p in preds {
            let idx = match groups.iter().position(|(c, _)| *c == p.cascade) {
                Some(i) => i,
                None => {
                    groups.push((p.cascade.clone(), HashMap::new()));
                    groups.len() - 1
                }
            };
            if groups[idx].1.insert(p.record.id.clone(), p.reranked).is_some() {
                return Err(anyhow!("duplicate prediction for record {:?} in cascade {}", p.record.id, p.cascade));
            }
        }
    }
    let mut aligned = Vec::with_capacity(groups.len());
    for (cascade, mut by_id) in groups {
        if by_id.len() != records.len() {
            return Err(crate::Error::Mismatch(format!(
                "cascade {cascade}: {} predictions for {} records",
                by_id.len(),
                records.len()
            ))
            .into());
        }
        let mut outputs = Vec::with_capacity(records.len());
        for r in records {
            outputs.push(by_id.remove(&r.id).ok_or_else(|| {
                crate::Error::Mismatch(format!("cascade {cascade}: no prediction for record {:?}", r.id))
            })?);
        }
        aligned.push((cascade, outputs));
    }
    Ok(aligned)
}

fn evaluate(a: &EvaluateArgs) -> CliResult {
    if a.k.contains(&0) {
        return Err(usage("--k values must be at least 1"));
    }
    let records = read_records(&a.data)?;
    let lexicon = match &a.lexicon {
        Some(p) => Some(Lexicon::load(open(p)?).with_context(|| format!("reading {}", p.display()))?),
        None => {
            eprintln!("notice: no --lexicon given, dictionary view skipped");
            None
        }
    };
    let aligned = align_predictions(&records, &a.pred)?;
    let mut reports: Vec<EvalReport> = Vec::new();
    for (cascade, outputs) in &aligned {
        for &k in &a.k {
            reports.push(eval::evaluate(cascade, &records, outputs, k, lexicon.as_ref())?);
        }
    }
    let mut out = create(&a.out)?;
    eval::write_tsv(&mut out, &reports)?;
    out.flush().context("writing report")?;
    print!("{}", eval::render_table(&reports));
    Ok(())
}

fn gen_bench(a: &GenBenchArgs) -> CliResult {
    let spec = BenchSpec {
        n_records: a.records,
        k: a.k,
        gold_top1_rate: a.gold_top1,
        correlation_strength: a.strength,
        seed: a.seed,
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    log::info!("generating benchmark with seed {}", spec.seed);
    let data = bench::generate(&spec)?;
    data.write_to_dir(&a.out)?;
    Ok(())
}

fn selftest_in(dir: &Path, jobs: usize) -> anyhow::Result<Vec<EvalReport>> {
    let s = |p: &Path| p.to_string_lossy().into_owned();
    let bench_dir = dir.join("bench");
    let step = |args: Vec<String>| -> anyhow::Result<()> {
        let mut argv = vec!["scene-rerank".to_string(), "--jobs".into(), jobs.to_string()];
        argv.extend(args);
        let cli = Cli::try_parse_from(&argv).map_err(|e| anyhow!("bad selftest arguments: {e}"))?;
        run(&cli).map_err(|e| match e {
            CliError::Usage(m) => anyhow!("{m}"),
            CliError::Runtime(e) => e,
        })
    };
    let args = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    step(args(&["gen-bench", "--out", &s(&bench_dir)]))?;
    let f = |name: &str| s(&bench_dir.join(name));
    let lm = s(&dir.join("bench.ulm"));
    let tdp = s(&dir.join("bench.tdp"));
    let twe = s(&dir.join("bench.twe"));
    step(args(&["build-lm", "--corpus", &f("corpus.txt"), "--out", &lm]))?;
    step(args(&["fit-tdp", "--train", &f("train.jsonl"), "--out", &tdp]))?;
    step(args(&[
        "train-twe", "--train", &f("train.jsonl"), "--dim", "16", "--epochs", "5", "--negatives", "5",
        "--seed", "7", "--out", &twe,
    ]))?;
    let mut preds = Vec::new();
    for cascade in Cascade::ALL {
        let pred = s(&dir.join(format!("{}.jsonl", cascade.name())));
        step(args(&[
            "rerank", "--data", &f("dataset.jsonl"), "--cascade", cascade.name(), "--lm", &lm, "--embeddings",
            &f("embeddings.vec"), "--tdp", &tdp, "--twe", &twe, "--out", &pred,
        ]))?;
        preds.push(pred);
    }
    let records = read_records(&bench_dir.join("dataset.jsonl"))?;
    let lexicon = Lexicon::load(open(&bench_dir.join("lexicon.txt"))?)?;
    let aligned = align_predictions(&records, &preds.iter().map(PathBuf::from).collect::<Vec<_>>())?;
    let mut reports = Vec::new();
    for (cascade, outputs) in &aligned {
        reports.push(eval::evaluate(cascade, &records, outputs, 3, Some(&lexicon))?);
    }
    Ok(reports)
}

fn selftest(jobs: usize) -> CliResult {
    let dir = std::env::temp_dir().join(format!("scene-rerank-selftest-{}", std::process::id()));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let result = selftest_in(&dir, jobs);
    let _ = fs::remove_dir_all(&dir);
    let reports = result?;
    print!("{}", eval::render_table(&reports));

    let full = |name: &str| reports.iter().find(|r| r.cascade == name).map(|r| r.full_acc).unwrap_or(f64::NAN);
    let (bl, p2, p5) = (full("bl"), full("p2"), full("p5"));
    let checks = [
        ("baseline top-1 accuracy is 0.400", (bl - 0.4).abs() < 1e-12),
        ("p2 gains at least 0.20", p2 - bl >= 0.20),
        ("p5 gains at least as much as p2", p5 >= p2),
    ];
    let mut ok = true;
    for (name, pass) in checks {
        println!("{} {name}", if pass { "ok  " } else { "FAIL" });
        ok &= pass;
    }
    if ok {
        println!("PASS");
        Ok(())
    } else {
        Err(CliError::Runtime(anyhow!("selftest failed")))
    }
}
