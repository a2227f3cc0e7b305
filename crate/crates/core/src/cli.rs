//! Batch commands: `train`, `eval`, `cluster`, `synth`, `stats`.
//!
//! Every command writes its outputs and a `manifest.json` under `--out-dir`.
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal
//! consistency failure.

use std::collections::BTreeSet;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    corpus_stats, extract_parsebank, generate_synthetic, load_corpus, write_corpus, Corpus,
    LoadOptions, SyntheticConfig, CORPUS_FORMAT, CORPUS_VERSION,
};
use crate::error::{Error, ErrorKind, Result};
use crate::evaluation::{
    evaluate, random_baseline, render_table, sweep_checkpoints, sweep_csv, sweep_peak, Task,
};
use crate::lexicalization::{
    build_freq_table, train_clusters, ClusterConfig, LexFrequencyTable, Lexicon, PairCounts,
    RelationSpec,
};
use crate::model::{LogLinearModel, DEFAULT_TIE_EPSILON};
use crate::properties::{
    add_correction, build_registry, select_properties, FeaturizedCorpus, PropertyKind,
    RegistryConfig,
};
use crate::trainer::{train, Checkpoint, Init, TrainingConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(
    name = "forestlm",
    version,
    about = "Log-linear parse disambiguation from incomplete data"
)]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build properties and fit a model with IM.
    Train(TrainArgs),
    /// Score a model on a test corpus.
    Eval(EvalArgs),
    /// Cluster verb-noun pairs and build the f_c table.
    Cluster(ClusterArgs),
    /// Generate a synthetic corpus with a hidden model.
    Synth(SynthArgs),
    /// Print corpus statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Uniform,
    Random,
}

/// Flags of `train`. Unset options fall back to `--config`, then to the
/// built-in defaults.
#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Train only on the unambiguous sentences.
    #[arg(long)]
    pub parsebank: bool,
    #[arg(long)]
    pub max_parses: Option<usize>,
    /// Drop properties active on fewer parses than this.
    #[arg(long)]
    pub select_cutoff: Option<usize>,
    /// Comma-separated structural kinds; defaults to all of them when the
    /// corpus carries structures, none otherwise.
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
    /// Frequency table from `cluster`; enables the lexicalized properties.
    #[arg(long, value_name = "TABLE")]
    pub lexicalized: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    #[arg(long)]
    pub init_range: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFileConfig {
    pub corpus: Option<PathBuf>,
    pub parsebank: Option<bool>,
    pub max_parses: Option<usize>,
    pub select_cutoff: Option<usize>,
    pub kinds: Option<Vec<String>>,
    pub lexicalized: Option<PathBuf>,
    pub init: Option<InitArg>,
    pub init_range: Option<f64>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
    pub checkpoint_every: Option<usize>,
}

/// Fully resolved `train` settings; its JSON digest goes into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSettings {
    pub corpus: PathBuf,
    pub parsebank: bool,
    pub max_parses: Option<usize>,
    pub select_cutoff: Option<usize>,
    pub kinds: Option<Vec<String>>,
    pub lexicalized: Option<PathBuf>,
    pub init: InitArg,
    pub init_range: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub checkpoint_every: usize,
    pub seed: u64,
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Repeat for several report blocks.
    #[arg(long, value_enum, default_values_t = [TaskArg::Exact])]
    pub task: Vec<TaskArg>,
    /// Number of random models for the baseline.
    #[arg(long)]
    pub baseline: Option<usize>,
    /// Directory of `checkpoint_*.json` files from `train`.
    #[arg(long)]
    pub checkpoints: Option<PathBuf>,
    /// Required when the model uses lexicalized properties.
    #[arg(long)]
    pub lex_table: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TIE_EPSILON)]
    pub tie_epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum TaskArg {
    Exact,
    Frame,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Exact => Task::ExactMatch,
            TaskArg::Frame => Task::FrameMatch,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Tab-separated `verb noun count` lines.
    #[arg(long, required_unless_present = "corpus", conflicts_with = "corpus")]
    pub counts: Option<PathBuf>,
    /// Count pairs from the relation annotations of a corpus instead.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    pub classes: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    pub sentences: usize,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [1, 8])]
    pub ambiguity: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub features: usize,
    #[arg(long, default_value_t = 2)]
    pub relations: usize,
    /// Fraction of sentences kept for training; the rest is the test split.
    #[arg(long, default_value_t = 0.8)]
    pub split: f64,
    #[arg(long)]
    pub pool_size: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub param_scale: f64,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Provenance record written next to every command's outputs. Input paths
/// are as given on the command line; output paths are relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub seed: u64,
    pub tool_version: String,
    pub started_at: u64,
    pub finished_at: u64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn digest_json<T: Serialize>(value: &T) -> String {
    let s = serde_json::to_string(value).expect("serializable settings");
    hex::encode(Sha256::digest(s.as_bytes()))
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&s).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }

    /// Recomputes every digest; `dir` is the directory holding the
    /// manifest.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        let check = |f: &FileDigest, path: &Path| -> Result<()> {
            let actual = sha256_file(path)?;
            if actual != f.sha256 {
                return Err(Error::Consistency(format!(
                    "{}: digest {actual} does not match manifest {}",
                    path.display(),
                    f.sha256
                )));
            }
            Ok(())
        };
        for f in &self.inputs {
            check(f, &f.path)?;
        }
        for f in &self.outputs {
            check(f, &dir.join(&f.path))?;
        }
        Ok(())
    }
}

/// Collects outputs of one run and writes them under the output directory.
struct Run {
    command: &'static str,
    out_dir: PathBuf,
    seed: u64,
    started_at: u64,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl Run {
    fn start(command: &'static str, cli: &Cli) -> Result<Self> {
        fs::create_dir_all(&cli.out_dir).map_err(|e| Error::io(&cli.out_dir, e))?;
        Ok(Run {
            command,
            out_dir: cli.out_dir.clone(),
            seed: cli.seed,
            started_at: now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256,
        });
        Ok(())
    }

    fn write(&mut self, rel: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> Result<()> {
        let rel = rel.as_ref();
        let path = self.out_dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, contents.as_ref()).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(FileDigest {
            path: rel.to_path_buf(),
            sha256: hex::encode(Sha256::digest(contents.as_ref())),
        });
        Ok(())
    }

    fn finish(self, config_digest: String) -> Result<()> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            config_digest,
            inputs: self.inputs,
            outputs: self.outputs,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: self.started_at,
            finished_at: now(),
        };
        let path = self.out_dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(&manifest).expect("plain manifest");
        fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }
}

fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Config => 1,
        ErrorKind::Data => 2,
        ErrorKind::Internal => 3,
    }
}

/// Parses `std::env::args` and runs the command; returns the exit code.
pub fn main() -> i32 {
    main_from(std::env::args_os())
}

pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if cli.threads < 1 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::Train(a) => cmd_train(cli, a),
        Command::Eval(a) => cmd_eval(cli, a),
        Command::Cluster(a) => cmd_cluster(cli, a),
        Command::Synth(a) => cmd_synth(cli, a),
        Command::Stats(a) => cmd_stats(cli, a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_table(path: &Path) -> Result<Lexicon> {
    Ok(Lexicon {
        table: LexFrequencyTable::from_json(&read_text(path)?)?,
        spec: RelationSpec::default(),
    })
}

fn parse_kinds(names: &[String]) -> Result<BTreeSet<PropertyKind>> {
    names
        .iter()
        .filter(|n| !n.is_empty() && n.as_str() != "none")
        .map(|n| {
            PropertyKind::parse(n)
                .filter(|k| k.is_structural())
                .ok_or_else(|| Error::Config(format!("unknown structural property kind {n:?}")))
        })
        .collect()
}

pub fn resolve_train(cli: &Cli, a: &TrainArgs) -> Result<TrainSettings> {
    let file = match &a.config {
        Some(p) => toml::from_str::<TrainFileConfig>(&read_text(p)?)
            .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => TrainFileConfig::default(),
    };
    let corpus = a
        .corpus
        .clone()
        .or(file.corpus)
        .ok_or_else(|| Error::Config("--corpus is required".into()))?;
    let d = TrainingConfig::default();
    Ok(TrainSettings {
        corpus,
        parsebank: a.parsebank || file.parsebank.unwrap_or(false),
        max_parses: a.max_parses.or(file.max_parses),
        select_cutoff: a.select_cutoff.or(file.select_cutoff),
        kinds: a.kinds.clone().or(file.kinds),
        lexicalized: a.lexicalized.clone().or(file.lexicalized),
        init: a.init.or(file.init).unwrap_or(InitArg::Uniform),
        init_range: a.init_range.or(file.init_range).unwrap_or(1.0),
        max_iterations: a
            .max_iterations
            .or(file.max_iterations)
            .unwrap_or(d.max_iterations),
        tolerance: a
            .tolerance
            .or(file.tolerance)
            .unwrap_or(d.likelihood_tolerance),
        checkpoint_every: a
            .checkpoint_every
            .or(file.checkpoint_every)
            .unwrap_or(d.checkpoint_every),
        seed: cli.seed,
        threads: cli.threads,
    })
}

fn cmd_train(cli: &Cli, a: &TrainArgs) -> Result<()> {
    let s = resolve_train(cli, a)?;
    let mut run = Run::start("train", cli)?;
    if let Some(p) = &a.config {
        run.input(p)?;
    }
    run.input(&s.corpus)?;
    let opts = LoadOptions {
        max_parses: s.max_parses,
        aggregate_duplicates: true,
        ..LoadOptions::default()
    };
    let mut corpus = load_corpus(&s.corpus, opts)?;
    if s.parsebank {
        corpus = extract_parsebank(&corpus)?;
    }
    let lexicon = match &s.lexicalized {
        Some(p) => {
            run.input(p)?;
            Some(load_table(p)?)
        }
        None => None,
    };
    let has_structure = corpus
        .entries()
        .iter()
        .flat_map(|e| &e.parses)
        .any(|p| p.has_structure());
    let enabled_kinds = match &s.kinds {
        Some(names) => parse_kinds(names)?,
        None if has_structure => PropertyKind::STRUCTURAL.into_iter().collect(),
        None => BTreeSet::new(),
    };
    let reg_config = RegistryConfig {
        enabled_kinds,
        include_lexicalized: lexicon.is_some(),
    };
    let mut registry = build_registry(&corpus, &reg_config, lexicon.as_ref())?;
    if let Some(cutoff) = s.select_cutoff {
        registry = select_properties(&registry, cutoff)?;
    }
    let registry = add_correction(&registry, &corpus, lexicon.as_ref())?;
    let featurized = FeaturizedCorpus::build(&corpus, &registry, lexicon.as_ref(), true)?;
    let config = TrainingConfig {
        init: match s.init {
            InitArg::Uniform => Init::UniformZero,
            InitArg::Random => Init::Random {
                range: s.init_range,
                seed: s.seed,
            },
        },
        max_iterations: s.max_iterations,
        likelihood_tolerance: s.tolerance,
        checkpoint_every: s.checkpoint_every,
        threads: s.threads,
        ..TrainingConfig::default()
    };
    let (model, trace) = train(&featurized, Arc::new(registry), &config)?;

    run.write("model.json", model.to_json()? + "\n")?;
    run.write("trace.jsonl", trace.to_jsonl())?;
    for c in &trace.checkpoints {
        let json = serde_json::to_string(c).expect("plain checkpoint");
        run.write(
            Path::new("checkpoints").join(format!("checkpoint_{:05}.json", c.iteration)),
            json + "\n",
        )?;
    }
    println!(
        "trained {} properties on {} sentences: L {} -> {} in {} iterations{}",
        model.lambda().len(),
        featurized.sentences.len(),
        trace.initial_likelihood(),
        trace.final_likelihood(),
        trace.records.len() - 1,
        if trace.converged {
            ""
        } else {
            " (not converged)"
        }
    );
    run.finish(digest_json(&s))
}

fn load_checkpoints(dir: &Path) -> Result<(Vec<Checkpoint>, Vec<PathBuf>)> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("checkpoint_") && n.ends_with(".json"))
        })
        .collect();
    paths.sort();
    let cps = paths
        .iter()
        .map(|p| {
            serde_json::from_str::<Checkpoint>(&read_text(p)?)
                .map_err(|e| Error::Data(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((cps, paths))
}

fn cmd_eval(cli: &Cli, a: &EvalArgs) -> Result<()> {
    let mut run = Run::start("eval", cli)?;
    run.input(&a.model)?;
    run.input(&a.corpus)?;
    let model = LogLinearModel::from_json(&read_text(&a.model)?)?;
    let lexicon = match &a.lex_table {
        Some(p) => {
            run.input(p)?;
            Some(load_table(p)?)
        }
        None => None,
    };
    let opts = LoadOptions {
        normalize_weights: false,
        ..LoadOptions::default()
    };
    let corpus = load_corpus(&a.corpus, opts)?;
    let test = FeaturizedCorpus::build(&corpus, model.registry(), lexicon.as_ref(), false)?;
    let checkpoints = match &a.checkpoints {
        Some(dir) => {
            let (cps, paths) = load_checkpoints(dir)?;
            for p in &paths {
                run.input(p)?;
            }
            Some(cps)
        }
        None => None,
    };

    let mut tasks: Vec<Task> = Vec::new();
    for t in &a.task {
        let t = Task::from(*t);
        if !tasks.contains(&t) {
            tasks.push(t);
        }
    }
    let mut text = String::new();
    if test.clamped > 0 {
        text.push_str(&format!(
            "note: {} test parses exceeded K and had the correction clamped at 0\n\n",
            test.clamped
        ));
    }
    for &task in &tasks {
        let name = task.as_str();
        let outcome = evaluate(&model, &test, task, a.tie_epsilon)?;
        text.push_str(&render_table(&outcome));
        run.write(format!("report_{name}.json"), outcome.to_json()? + "\n")?;
        if let Some(n) = a.baseline {
            let b = random_baseline(&model, &test, task, n, cli.seed, a.tie_epsilon)?;
            text.push_str(&format!(
                "baseline       {:.2}% +- {:.2} over {} random models\n",
                100.0 * b.mean_precision,
                100.0 * b.stdev,
                b.n_models
            ));
            let json = serde_json::to_string_pretty(&b).expect("plain report");
            run.write(format!("baseline_{name}.json"), json + "\n")?;
        }
        if let Some(cps) = &checkpoints {
            let rows = sweep_checkpoints(&model, cps, &test, task, a.tie_epsilon)?;
            if let Some(peak) = sweep_peak(&rows) {
                text.push_str(&format!(
                    "sweep peak     iteration {} ({:.2}%)\n",
                    peak.iteration,
                    100.0 * peak.precision.unwrap_or(f64::NAN)
                ));
            }
            run.write(format!("sweep_{name}.csv"), sweep_csv(&rows))?;
        }
        text.push('\n');
    }
    print!("{text}");
    run.write("report.txt", &text)?;
    let settings = (
        &a.model,
        &a.corpus,
        &a.task,
        a.baseline,
        &a.checkpoints,
        &a.lex_table,
        a.tie_epsilon,
        cli.seed,
    );
    run.finish(digest_json(&settings))
}

fn cmd_cluster(cli: &Cli, a: &ClusterArgs) -> Result<()> {
    let mut run = Run::start("cluster", cli)?;
    let counts = match (&a.counts, &a.corpus) {
        (Some(p), _) => {
            run.input(p)?;
            let f = fs::File::open(p).map_err(|e| Error::io(p, e))?;
            PairCounts::read_tsv(BufReader::new(f))?
        }
        (None, Some(p)) => {
            run.input(p)?;
            PairCounts::from_corpus(&load_corpus(p, LoadOptions::default())?)
        }
        (None, None) => return Err(Error::Config("--counts or --corpus is required".into())),
    };
    let config = ClusterConfig {
        n_classes: a.classes,
        max_iterations: a.max_iterations,
        tolerance: a.tolerance,
        seed: cli.seed,
        ..ClusterConfig::default()
    };
    let (model, trace) = train_clusters(&counts, &config)?;
    let table = build_freq_table(&model, &counts);
    run.write("clusters.json", model.to_json()? + "\n")?;
    run.write("lex_table.json", table.to_json()? + "\n")?;
    let trace_lines: String = trace
        .iter()
        .enumerate()
        .map(|(i, l)| {
            format!(
                "{{\"iter\":{i},\"L\":{}}}\n",
                serde_json::to_string(l).expect("finite")
            )
        })
        .collect();
    run.write("cluster_trace.jsonl", trace_lines)?;
    println!(
        "clustered {} pairs into {} classes: L {} -> {} in {} iterations",
        counts.len(),
        a.classes,
        trace[0],
        trace[trace.len() - 1],
        trace.len() - 1
    );
    run.finish(digest_json(&(&a.counts, &a.corpus, &config)))
}

fn corpus_bytes(corpus: &Corpus) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_corpus(corpus, &mut buf)?;
    Ok(buf)
}

fn cmd_synth(cli: &Cli, a: &SynthArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.split) {
        return Err(Error::Config("--split must lie in [0, 1]".into()));
    }
    let config = SyntheticConfig {
        n_sentences: a.sentences,
        ambiguity_range: (a.ambiguity[0], a.ambiguity[1]),
        n_features: a.features,
        n_relations: a.relations,
        seed: cli.seed,
        pool_size: a.pool_size,
        param_scale: a.param_scale,
        ..SyntheticConfig::default()
    };
    config.validate()?;
    let mut run = Run::start("synth", cli)?;
    let (corpus, hidden) = generate_synthetic(&config, None)?;
    let n_train = (a.split * a.sentences as f64).floor() as usize;
    let entries = corpus.into_entries();
    let (train_part, test_part) = entries.split_at(n_train.min(entries.len()));
    let renormalized = |part: &[crate::corpus::SentenceEntry]| -> Result<Vec<u8>> {
        if part.is_empty() {
            let header = serde_json::json!({"format": CORPUS_FORMAT, "version": CORPUS_VERSION});
            return Ok(format!("{header}\n").into_bytes());
        }
        corpus_bytes(&Corpus::new(part.to_vec())?.normalize_weights())
    };
    run.write("train.jsonl", renormalized(train_part)?)?;
    run.write("test.jsonl", renormalized(test_part)?)?;
    let hidden_json = serde_json::to_string_pretty(&hidden).expect("plain hidden model");
    run.write("hidden_model.json", hidden_json + "\n")?;
    println!(
        "wrote {} training and {} test sentences",
        train_part.len(),
        test_part.len()
    );
    run.finish(digest_json(&config))
}

fn cmd_stats(cli: &Cli, a: &StatsArgs) -> Result<()> {
    let mut run = Run::start("stats", cli)?;
    run.input(&a.corpus)?;
    let corpus = load_corpus(&a.corpus, LoadOptions::default())?;
    let st = corpus_stats(&corpus);
    println!("sentences       {}", st.n_sentences);
    println!("mean ambiguity  {:.3}", st.mean_ambiguity);
    println!("mean length     {:.3}", st.mean_length);
    println!("universe size   {}", st.universe_size);
    let json = serde_json::to_string_pretty(&st).expect("plain stats");
    run.write("stats.json", json + "\n")?;
    run.finish(digest_json(&a.corpus))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("train.toml");
        fs::write(
            &cfg,
            "corpus = \"a.jsonl\"\nmax_iterations = 7\ninit = \"random\"\n",
        )
        .unwrap();
        let cli = Cli::try_parse_from([
            "forestlm",
            "train",
            "--config",
            cfg.to_str().unwrap(),
            "--max-iterations",
            "3",
        ])
        .unwrap();
        let Command::Train(a) = &cli.command else {
            panic!()
        };
        let s = resolve_train(&cli, a).unwrap();
        assert_eq!(s.corpus, PathBuf::from("a.jsonl"));
        assert_eq!(s.max_iterations, 3);
        assert_eq!(s.init, InitArg::Random);
    }

    #[test]
    fn unknown_config_key_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("train.toml");
        fs::write(&cfg, "corpsu = \"a.jsonl\"\n").unwrap();
        let cli =
            Cli::try_parse_from(["forestlm", "train", "--config", cfg.to_str().unwrap()]).unwrap();
        let Command::Train(a) = &cli.command else {
            panic!()
        };
        assert!(matches!(resolve_train(&cli, a), Err(Error::Config(_))));
    }

    #[test]
    fn kinds_parse() {
        let k = parse_kinds(&["production".into(), "none".into()]).unwrap();
        assert_eq!(k.len(), 1);
        assert!(parse_kinds(&["lexicalized-relation".into()]).is_err());
    }
}
