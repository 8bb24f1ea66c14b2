use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use densify_core::corpus::Corpus;
use densify_core::densify::{densify, source_stats, DensifyConfig};
use densify_core::eval::{evaluate_corpus, EvalOptions, EvalSource};
use densify_core::io::{self, CorpusManifest};
use densify_core::keywords::Tier;
use densify_core::mlp::{self, TrainConfig};
use densify_core::novel::NovelConfig;
use densify_core::pseudo::{self, PredictionSequence};
use densify_core::synth::{self, SynthConfig};
use densify_core::{exemplar, novel, Source, SpotMethod, SpotterConfig, Spotting};

#[derive(Parser)]
#[command(
    name = "densify",
    version,
    about = "Dense automatic sign annotation over feature sequences"
)]
struct Cli {
    /// TOML file of defaults; a `[subcommand]` table overrides top-level keys, flags override both.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted signs.
    Synth(SynthArgs),
    /// Mine new instances of annotated words with sign exemplars (E).
    SpotExemplar(ExemplarArgs),
    /// Discover unannotated words with positive/negative subtitle exemplars (N).
    SpotNovel(NovelArgs),
    /// Keep classifier predictions whose word occurs in the subtitle (P).
    PseudoLabel(PseudoArgs),
    /// Train the classifier on spottings.
    TrainMlp(TrainArgs),
    /// Write sliding-window predictions for every video.
    Predict(PredictArgs),
    /// Recall, IoU and coverage against the subtitles.
    Evaluate(EvalArgs),
    /// Merge spotting sources into one file.
    Densify(DensifyArgs),
    /// Per-source counts and vocabulary sizes.
    Stats(StatsArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    videos: Option<usize>,
    #[arg(long)]
    subtitles_per_video: Option<usize>,
    #[arg(long)]
    words_per_subtitle: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    filler_rate: Option<f64>,
    #[arg(long)]
    synonym_fraction: Option<f64>,
    #[arg(long)]
    annotate_fraction: Option<f64>,
    #[arg(long)]
    novel_fraction: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Vote,
    Avg,
    Max,
}

#[derive(Args)]
struct ExemplarArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Extra spotting files used as exemplars, on top of the manifest annotations.
    #[arg(long, value_delimiter = ',')]
    existing: Vec<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    exemplars: Option<usize>,
    #[arg(long)]
    pad_frames: Option<u64>,
    #[arg(long)]
    min_exemplar_conf: Option<f32>,
    #[arg(long)]
    expand_synonyms: bool,
}

#[derive(Args)]
struct NovelArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    existing: Vec<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    positives: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    min_conf: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PseudoArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory of `<video>.dsp` prediction files.
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    threshold: Option<f32>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    spottings: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Comma-separated epochs at which the rate is divided by the decay factor.
    #[arg(long, value_delimiter = ',')]
    decay_epochs: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Draw each spotting's training feature once instead of every epoch.
    #[arg(long)]
    fixed_samples: bool,
    #[arg(long)]
    min_conf: Option<f32>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Output directory, one `<video>.dsp` file per video.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Debug, ValueEnum)]
enum EvalMode {
    Spottings,
    Predictions,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = EvalMode::Spottings)]
    mode: EvalMode,
    /// Spotting files (spottings mode) or one prediction directory (predictions mode).
    #[arg(long, value_delimiter = ',', required = true)]
    input: Vec<PathBuf>,
    #[arg(long)]
    min_conf: Option<f32>,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    tsv: Option<PathBuf>,
}

#[derive(Args)]
struct DensifyArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Source tags to keep, e.g. `mstar,dstar,a,p,e`; all when omitted.
    #[arg(long, value_delimiter = ',')]
    sources: Vec<String>,
    /// Per-source thresholds, e.g. `mstar=0.5,dstar=0.75`.
    #[arg(long, value_delimiter = ',')]
    min_conf: Vec<String>,
    /// Collapse same-word spottings within this many feature positions.
    #[arg(long)]
    dedup_window: Option<u64>,
    #[arg(long)]
    stride: Option<u32>,
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    inputs: Vec<PathBuf>,
}

/// Raised for bad configuration values; exits with the usage code.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Values from the optional TOML file.
struct Settings {
    table: toml::Table,
    section: &'static str,
}

impl Settings {
    fn load(path: Option<&Path>, section: &'static str) -> Result<Self> {
        let table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        Ok(Settings { table, section })
    }

    fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        let alt = key.replace('_', "-");
        let lookup = |t: &toml::Table| t.get(key).or_else(|| t.get(&alt)).cloned();
        let section = self.table.get(self.section).and_then(|v| v.as_table());
        let Some(value) = section.and_then(lookup).or_else(|| lookup(&self.table)) else {
            return Ok(None);
        };
        value
            .try_into()
            .map(Some)
            .map_err(|e| usage(format!("config key {key:?}: {e}")))
    }

    fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }
}

/// Writes through a temporary file in the target directory, then renames it into place.
fn write_atomic(path: &Path, write: impl FnOnce(&mut BufWriter<&std::fs::File>) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        write(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_spottings_file(path: &Path, spottings: &[Spotting]) -> Result<()> {
    write_atomic(path, |w| Ok(io::write_spottings(spottings, w)?))
}

fn read_spotting_files(paths: &[PathBuf]) -> Result<Vec<Spotting>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(io::read_spottings(io::open(p)?).with_context(|| format!("reading {}", p.display()))?);
    }
    Ok(out)
}

fn load_corpus(manifest: &Path) -> Result<Corpus> {
    let m = CorpusManifest::load(manifest).with_context(|| format!("loading manifest {}", manifest.display()))?;
    Ok(Corpus::load(&m)?)
}

fn read_prediction_dir(
    dir: &Path,
    videos: impl Iterator<Item = String>,
) -> Result<BTreeMap<String, PredictionSequence>> {
    let mut out = BTreeMap::new();
    for video in videos {
        let path = dir.join(format!("{video}.dsp"));
        if !path.exists() {
            log::warn!("no predictions for {video} in {}", dir.display());
            continue;
        }
        let preds = io::read_predictions(&mut io::open(&path)?, &video)
            .with_context(|| format!("reading {}", path.display()))?;
        out.insert(video, preds);
    }
    Ok(out)
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn parse_source(tag: &str) -> Result<Source> {
    tag.trim()
        .parse()
        .map_err(|_| usage(format!("unknown source tag {tag:?}")))
}

fn run_synth(a: SynthArgs, s: &Settings) -> Result<()> {
    let d = SynthConfig::default();
    let cfg = SynthConfig {
        seed: s.pick(a.seed, "seed", d.seed)?,
        n_classes: s.pick(a.classes, "classes", d.n_classes)?,
        dim: s.pick(a.dim, "dim", d.dim)?,
        n_videos: s.pick(a.videos, "videos", d.n_videos)?,
        subtitles_per_video: s.pick(a.subtitles_per_video, "subtitles_per_video", d.subtitles_per_video)?,
        words_per_subtitle: s.pick(a.words_per_subtitle, "words_per_subtitle", d.words_per_subtitle)?,
        noise_sigma: s.pick(a.noise, "noise", d.noise_sigma)?,
        filler_rate: s.pick(a.filler_rate, "filler_rate", d.filler_rate)?,
        synonym_fraction: s.pick(a.synonym_fraction, "synonym_fraction", d.synonym_fraction)?,
        annotate_fraction: s.pick(a.annotate_fraction, "annotate_fraction", d.annotate_fraction)?,
        novel_fraction: s.pick(a.novel_fraction, "novel_fraction", d.novel_fraction)?,
        ..d
    };
    let corpus = synth::generate(&cfg)?;
    std::fs::create_dir_all(&a.out)?;
    // build next to the target, then move each file into place
    let staging = tempfile::Builder::new().prefix(".synth").tempdir_in(&a.out)?;
    synth::write_corpus(&corpus, staging.path())?;
    for entry in walk(staging.path())? {
        let rel = entry.strip_prefix(staging.path())?;
        let dest = a.out.join(rel);
        if let Some(parent) = dest.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::rename(&entry, &dest)?;
    }
    log::info!(
        "wrote {} videos, {} subtitles, {} annotations to {}",
        cfg.n_videos,
        corpus.corpus.subtitles.len(),
        corpus.corpus.annotations.len(),
        a.out.display()
    );
    Ok(())
}

fn walk(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            out.extend(walk(&path)?);
        } else {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn run_spot_exemplar(a: ExemplarArgs, s: &Settings) -> Result<()> {
    let method = match a.method {
        Some(MethodArg::Vote) => SpotMethod::Vote,
        Some(MethodArg::Avg) => SpotMethod::Avg,
        Some(MethodArg::Max) => SpotMethod::Max,
        None => match s.get::<String>("method")? {
            Some(m) => m.parse().map_err(|_| usage(format!("unknown method {m:?}")))?,
            None => SpotMethod::Vote,
        },
    };
    let d = SpotterConfig::for_method(method);
    let cfg = SpotterConfig {
        h: s.pick(a.threshold, "threshold", d.h)?,
        n_exemplars: s.pick(a.exemplars, "exemplars", d.n_exemplars)?,
        pad_frames: s.pick(a.pad_frames, "pad_frames", d.pad_frames)?,
        min_exemplar_confidence: s.pick(a.min_exemplar_conf, "min_exemplar_conf", d.min_exemplar_confidence)?,
        expand_synonyms: a.expand_synonyms || s.get("expand_synonyms")?.unwrap_or(false),
        ..d
    };
    let corpus = load_corpus(&a.manifest)?;
    let mut existing = corpus.annotations.clone();
    existing.extend(read_spotting_files(&a.existing)?);
    let found = exemplar::mine_corpus(&corpus, &existing, &cfg)?;
    log::info!("{} exemplar spottings", found.len());
    write_spottings_file(&a.out, &found)
}

fn run_spot_novel(a: NovelArgs, s: &Settings) -> Result<()> {
    let d = NovelConfig::default();
    let cfg = NovelConfig {
        h: s.pick(a.threshold, "threshold", d.h)?,
        n_positives: s.pick(a.positives, "positives", d.n_positives)?,
        n_negatives: s.pick(a.negatives, "negatives", d.n_negatives)?,
        min_confidence: s.pick(a.min_conf, "min_conf", d.min_confidence)?,
        seed: s.pick(a.seed, "seed", d.seed)?,
    };
    if !(cfg.h > 0.0 && cfg.h < 1.0) || cfg.n_positives == 0 {
        return Err(usage("threshold must lie in (0, 1) and positives must be positive"));
    }
    let corpus = load_corpus(&a.manifest)?;
    let mut existing = corpus.annotations.clone();
    existing.extend(read_spotting_files(&a.existing)?);
    let known: BTreeSet<String> = existing.iter().map(|x| corpus.tables.canonical(&x.keyword)).collect();
    let found = novel::mine_novel(&corpus, &known, &existing, &cfg)?;
    log::info!("{} novel spottings", found.len());
    write_spottings_file(&a.out, &found)
}

fn run_pseudo_label(a: PseudoArgs, s: &Settings) -> Result<()> {
    let threshold = s.pick(a.threshold, "threshold", pseudo::DEFAULT_THRESHOLD)?;
    let corpus = load_corpus(&a.manifest)?;
    let preds = read_prediction_dir(&a.predictions, corpus.features.keys().cloned())?;
    let found = pseudo::pseudo_label_corpus(&corpus.subtitles, &preds, &corpus.tables, threshold, Tier::Two)?;
    log::info!("{} pseudo-label spottings", found.len());
    write_spottings_file(&a.out, &found)
}

fn run_train(a: TrainArgs, s: &Settings) -> Result<()> {
    let d = TrainConfig::default();
    let hidden: Vec<usize> = s.pick(a.hidden, "hidden", d.hidden.to_vec())?;
    let [h1, h2] = hidden[..] else {
        return Err(usage("--hidden takes exactly two sizes"));
    };
    let cfg = TrainConfig {
        epochs: s.pick(a.epochs, "epochs", d.epochs)?,
        batch_size: s.pick(a.batch_size, "batch_size", d.batch_size)?,
        lr: s.pick(a.lr, "lr", d.lr)?,
        decay_epochs: s.pick(a.decay_epochs, "decay_epochs", d.decay_epochs.clone())?,
        seed: s.pick(a.seed, "seed", d.seed)?,
        hidden: [h1, h2],
        redraw_each_epoch: !(a.fixed_samples || s.get("fixed_samples")?.unwrap_or(false)),
        ..d
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let min_conf = s.pick(a.min_conf, "min_conf", 0.0)?;
    let corpus = load_corpus(&a.manifest)?;
    let spots: Vec<Spotting> = read_spotting_files(&a.spottings)?
        .into_iter()
        .filter(|x| x.confidence >= min_conf && corpus.features.contains_key(&x.video_id))
        .map(|mut x| {
            x.keyword = corpus.tables.canonical(&x.keyword);
            x
        })
        .collect();
    let vocab: Vec<String> = spots
        .iter()
        .map(|x| x.keyword.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let outcome = mlp::train(&spots, &corpus.features, &vocab, &cfg)?;
    write_atomic(&a.out, |w| {
        io::write_model(&outcome.model, w)?;
        Ok(())
    })?;
    print_json(&serde_json::json!({
        "samples": spots.len(),
        "classes": vocab.len(),
        "loss": outcome.loss_history,
        "lr": outcome.lr_history,
    }))
}

fn run_predict(a: PredictArgs) -> Result<()> {
    let corpus = load_corpus(&a.manifest)?;
    let model = io::read_model(&mut io::open(&a.model)?).with_context(|| format!("reading {}", a.model.display()))?;
    for (video, seq) in &corpus.features {
        let preds = mlp::predict_sliding(&model, seq)?;
        write_atomic(&a.out.join(format!("{video}.dsp")), |w| {
            io::write_predictions(&preds, w)?;
            Ok(())
        })?;
    }
    Ok(())
}

fn run_evaluate(a: EvalArgs, s: &Settings) -> Result<()> {
    let opts = EvalOptions {
        min_confidence: s.pick(a.min_conf, "min_conf", 0.0)?,
        strict: a.strict || s.get("strict")?.unwrap_or(false),
    };
    let m = CorpusManifest::load(&a.manifest)?;
    let corpus = Corpus::load(&m)?;
    let report = match a.mode {
        EvalMode::Spottings => {
            let spots = read_spotting_files(&a.input)?;
            evaluate_corpus(EvalSource::Spottings(&spots), &corpus.subtitles, &corpus.tables, &opts)?
        }
        EvalMode::Predictions => {
            let [dir] = &a.input[..] else {
                return Err(usage("predictions mode takes one directory"));
            };
            let preds = read_prediction_dir(dir, corpus.features.keys().cloned())?;
            evaluate_corpus(
                EvalSource::Predictions(&preds),
                &corpus.subtitles,
                &corpus.tables,
                &opts,
            )?
        }
    };
    if let Some(p) = &a.json {
        let text = report.to_json()?;
        write_atomic(p, |w| Ok(w.write_all(text.as_bytes())?))?;
    }
    if let Some(p) = &a.tsv {
        let text = report.to_tsv();
        write_atomic(p, |w| Ok(w.write_all(text.as_bytes())?))?;
    }
    print_json(&serde_json::json!({
        "recall": report.recall,
        "iou": report.iou,
        "coverage": report.coverage,
        "retained": report.n_subtitles_retained,
        "dropped": report.n_subtitles_dropped,
    }))
}

fn run_densify(a: DensifyArgs, s: &Settings) -> Result<()> {
    let mut cfg = DensifyConfig::new(s.pick(a.stride, "stride", densify_core::model::DEFAULT_STRIDE)?);
    let sources: Vec<String> = if a.sources.is_empty() {
        s.get("sources")?.unwrap_or_default()
    } else {
        a.sources
    };
    cfg.sources = sources.iter().map(|t| parse_source(t)).collect::<Result<_>>()?;
    let thresholds: Vec<String> = if a.min_conf.is_empty() {
        s.get("min_conf")?.unwrap_or_default()
    } else {
        a.min_conf
    };
    for item in &thresholds {
        let Some((tag, value)) = item.split_once('=') else {
            return Err(usage(format!("expected source=value, got {item:?}")));
        };
        let v: f32 = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad threshold {value:?}")))?;
        cfg.min_confidence.insert(parse_source(tag)?, v);
    }
    cfg.dedup_window = a.dedup_window.or(s.get("dedup_window")?);
    let inputs = read_spotting_files(&a.inputs)?;
    let (out, stats) = densify(&inputs, &cfg);
    write_spottings_file(&a.out, &out)?;
    if let Some(p) = &a.stats {
        let text = serde_json::to_string_pretty(&stats)?;
        write_atomic(p, |w| Ok(w.write_all(text.as_bytes())?))?;
    }
    print_json(&stats)
}

fn run_stats(a: StatsArgs) -> Result<()> {
    let spots = read_spotting_files(&a.inputs)?;
    let vocab = spots.iter().map(|x| x.keyword.as_str()).collect::<BTreeSet<_>>().len();
    print_json(&serde_json::json!({
        "total": spots.len(),
        "vocabulary": vocab,
        "per_source": source_stats(&spots),
    }))
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("DENSIFY_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("DENSIFY_THREADS={value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let section = match &cli.command {
        Command::Synth(_) => "synth",
        Command::SpotExemplar(_) => "spot-exemplar",
        Command::SpotNovel(_) => "spot-novel",
        Command::PseudoLabel(_) => "pseudo-label",
        Command::TrainMlp(_) => "train-mlp",
        Command::Predict(_) => "predict",
        Command::Evaluate(_) => "evaluate",
        Command::Densify(_) => "densify",
        Command::Stats(_) => "stats",
    };
    let s = Settings::load(cli.config.as_deref(), section)?;
    match cli.command {
        Command::Synth(a) => run_synth(a, &s),
        Command::SpotExemplar(a) => run_spot_exemplar(a, &s),
        Command::SpotNovel(a) => run_spot_novel(a, &s),
        Command::PseudoLabel(a) => run_pseudo_label(a, &s),
        Command::TrainMlp(a) => run_train(a, &s),
        Command::Predict(a) => run_predict(a),
        Command::Evaluate(a) => run_evaluate(a, &s),
        Command::Densify(a) => run_densify(a, &s),
        Command::Stats(a) => run_stats(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<densify_core::Error>() {
            return match e {
                densify_core::Error::Config(_) => 2,
                e if e.is_data_error() => 3,
                _ => 4,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 3;
        }
    }
    4
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
