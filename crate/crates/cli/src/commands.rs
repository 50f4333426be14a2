//! Subcommands. Each returns the JSON summary that `main` prints as a
//! single `SUMMARY {...}` line; human-readable output goes to stdout before
//! it and progress to stderr.

use std::net::{IpAddr, SocketAddr};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gestarlite_core::classify::{
    compute_metrics, predict_all, train_classifier, ClassifierKind, ClassifierTrainConfig, MetricsReport,
    TrainedClassifier, DEFAULT_THRESHOLD,
};
use gestarlite_core::nn::Parameterized;
use gestarlite_core::pipeline::{classify_timed, robustness_eval, RobustnessGrid, RobustnessReport};
use gestarlite_core::regressor::{
    eval_success_curve, train_regressor_with, FingertipRegressor, RegressorSpec, RegressorTrainConfig,
};
use gestarlite_core::synth::io::{read_frames, read_trajectories, write_frames, write_trajectories};
use gestarlite_core::synth::{
    generate_dataset, render_fingertip_frame, split_per_class, FrameSample, SynthConfig, Trajectory,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::server::{self, AppState};

/// Overrides every command's `--seed` when set.
pub const SEED_ENV: &str = "GESTARLITE_SEED";

/// Frame seeds for master seed `s` start at `s * FRAME_SEED_STRIDE`; the test
/// block starts `FRAME_TEST_OFFSET` further on, so train and test never
/// share a frame.
pub const FRAME_SEED_STRIDE: u64 = 10_000_000;
pub const FRAME_TEST_OFFSET: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "gestarlite", version, about = "Pointing-gesture recognition: data, training, evaluation, service")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a trajectory dataset, or fingertip frames with --frames.
    Gen(GenArgs),
    /// Train a gesture classifier and save its checkpoint.
    TrainClassifier(TrainClassifierArgs),
    /// Train the fingertip regressor and save its checkpoint.
    TrainRegressor(TrainRegressorArgs),
    /// Per-class precision / recall / F1 and confusion matrix.
    EvalClassifier(EvalClassifierArgs),
    /// Success-rate curve and mean tip error.
    EvalRegressor(EvalRegressorArgs),
    /// Train every classifier on one split and compare; robustness sweep and latency.
    Bench(BenchArgs),
    /// WebSocket classification service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

impl SeedArg {
    pub fn resolve(&self) -> Result<u64> {
        resolve_seed(self.seed, std::env::var(SEED_ENV).ok().as_deref())
    }
}

pub fn resolve_seed(flag: u64, env: Option<&str>) -> Result<u64> {
    match env {
        Some(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        None => Ok(flag),
    }
}

/// Trajectories from `--data`, or the default synthetic dataset split per
/// class.
#[derive(Debug, Clone, Args)]
pub struct TrajectorySource {
    /// JSONL trajectory file; used whole when given.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 250)]
    pub n_per_class: usize,
    #[arg(long, default_value_t = 200)]
    pub train_per_class: usize,
}

impl TrajectorySource {
    pub fn split(&self, seed: u64) -> Result<(Vec<Trajectory>, Vec<Trajectory>)> {
        if self.train_per_class > self.n_per_class {
            bail!("--train-per-class {} exceeds --n-per-class {}", self.train_per_class, self.n_per_class);
        }
        let data = generate_dataset(self.n_per_class, &SynthConfig { seed, ..SynthConfig::default() })?;
        Ok(split_per_class(&data, self.train_per_class))
    }

    fn load(&self, seed: u64, test: bool) -> Result<Vec<Trajectory>> {
        match &self.data {
            Some(path) => read_trajectories(path).with_context(|| format!("reading {}", path.display())),
            None => {
                let (train, held_out) = self.split(seed)?;
                Ok(if test { held_out } else { train })
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FrameSource {
    /// JSONL frame file; used whole when given.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

pub fn frame_seeds(seed: u64, n: usize, test: bool) -> Result<Range<u64>> {
    if n as u64 > FRAME_TEST_OFFSET {
        bail!("at most {FRAME_TEST_OFFSET} frames per split");
    }
    let start = seed.wrapping_mul(FRAME_SEED_STRIDE) + if test { FRAME_TEST_OFFSET } else { 0 };
    Ok(start..start + n as u64)
}

pub fn render_frames(seeds: Range<u64>) -> Vec<FrameSample> {
    seeds.map(render_fingertip_frame).collect()
}

fn load_frames(source: &FrameSource, seed: u64, n: usize, test: bool) -> Result<Vec<FrameSample>> {
    match &source.data {
        Some(path) => read_frames(path).with_context(|| format!("reading {}", path.display())),
        None => Ok(render_frames(frame_seeds(seed, n, test)?)),
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 250)]
    pub n_per_class: usize,
    /// Write this many fingertip frames instead of trajectories.
    #[arg(long)]
    pub frames: Option<usize>,
    /// With --frames: take seeds from the test block.
    #[arg(long)]
    pub test_split: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainClassifierArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub source: TrajectorySource,
    #[arg(long, default_value = "bilstm")]
    pub kind: ClassifierKind,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.2)]
    pub val_fraction: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainRegressorArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub source: FrameSource,
    #[arg(long, default_value_t = 5000)]
    pub frames: usize,
    #[arg(long, default_value_t = 8)]
    pub epochs: usize,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalClassifierArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub source: TrajectorySource,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Also write the full report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalRegressorArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub source: FrameSource,
    #[arg(long, default_value_t = 1000)]
    pub frames: usize,
    #[arg(long)]
    pub model: PathBuf,
    /// Also write the success curve as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub source: TrajectorySource,
    /// Comma-separated subset of bilstm,lstm,dtw,svm.
    #[arg(long, value_delimiter = ',', default_value = "dtw,svm,lstm,bilstm")]
    pub kinds: Vec<ClassifierKind>,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    /// Gate used for the robustness sweep and latency runs.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Streams per robustness cell; 0 skips the sweep.
    #[arg(long, default_value_t = 200)]
    pub streams: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = 8765)]
    pub port: u16,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

pub fn run(cli: Cli) -> Result<Value> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::TrainClassifier(a) => train_classifier_cmd(a),
        Command::TrainRegressor(a) => train_regressor_cmd(a),
        Command::EvalClassifier(a) => eval_classifier(a),
        Command::EvalRegressor(a) => eval_regressor(a),
        Command::Bench(a) => bench(a),
        Command::Serve(a) => serve(a),
    }
}

fn gen(a: GenArgs) -> Result<Value> {
    let seed = a.seed.resolve()?;
    let records = match a.frames {
        Some(n) => {
            let frames = render_frames(frame_seeds(seed, n, a.test_split)?);
            write_frames(&a.out, &frames)?;
            frames.len()
        }
        None => {
            let data = generate_dataset(a.n_per_class, &SynthConfig { seed, ..SynthConfig::default() })?;
            write_trajectories(&a.out, &data)?;
            data.len()
        }
    };
    let kind = if a.frames.is_some() { "frames" } else { "trajectories" };
    Ok(json!({"command": "gen", "seed": seed, "kind": kind, "records": records, "out": a.out}))
}

pub fn classifier_config(seed: u64, epochs: usize, batch: usize, lr: f64) -> ClassifierTrainConfig {
    let mut cfg = ClassifierTrainConfig::with_seed(seed);
    cfg.sequence.epochs = epochs;
    cfg.sequence.batch_size = batch;
    cfg.sequence.learning_rate = lr;
    cfg
}

pub fn param_count(model: &TrainedClassifier) -> usize {
    match model {
        TrainedClassifier::Recurrent(m) => m.num_params(),
        TrainedClassifier::Svm(s) => s.weights.iter().map(Vec::len).sum::<usize>() + s.bias.len(),
        TrainedClassifier::Dtw(_) => 0,
    }
}

fn train_classifier_cmd(a: TrainClassifierArgs) -> Result<Value> {
    let seed = a.seed.resolve()?;
    let train = a.source.load(seed, false)?;
    let mut cfg = classifier_config(seed, a.epochs, a.batch, a.lr);
    cfg.sequence.validation_fraction = a.val_fraction;
    let start = Instant::now();
    let (model, history) = train_classifier(a.kind, &train, &cfg, |e| {
        if e.epoch == 1 || e.epoch % 10 == 0 {
            eprintln!(
                "epoch {:>4}  loss {:.4}  acc {:.3}  val_loss {:.4}  val_acc {:.3}",
                e.epoch, e.train_loss, e.train_accuracy, e.val_loss, e.val_accuracy
            );
        }
    })?;
    model.save(&a.out, seed)?;
    let best_val = history.iter().map(|e| e.val_accuracy).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    Ok(json!({
        "command": "train-classifier",
        "seed": seed,
        "kind": a.kind.name(),
        "train_records": train.len(),
        "params": param_count(&model),
        "epochs": history.len(),
        "best_val_accuracy": best_val,
        "elapsed_s": start.elapsed().as_secs_f64(),
        "out": a.out,
    }))
}

fn train_regressor_cmd(a: TrainRegressorArgs) -> Result<Value> {
    let seed = a.seed.resolve()?;
    let data = load_frames(&a.source, seed, a.frames, false)?;
    let cfg = RegressorTrainConfig {
        epochs: a.epochs,
        learning_rate: a.lr,
        batch_size: a.batch,
        seed,
        ..RegressorTrainConfig::default()
    };
    let start = Instant::now();
    let (model, history) = train_regressor_with(&RegressorSpec::default(), &data, &cfg, |e| {
        eprintln!(
            "epoch {:>3}  train {:.6}  val {:.6}  ({:.0}s)",
            e.epoch,
            e.train_loss,
            e.val_loss,
            start.elapsed().as_secs_f64()
        );
    })?;
    model.save(&a.out)?;
    let last = history.last();
    Ok(json!({
        "command": "train-regressor",
        "seed": seed,
        "frames": data.len(),
        "epochs": history.len(),
        "train_loss": last.map(|e| e.train_loss),
        "val_loss": last.map(|e| e.val_loss),
        "elapsed_s": start.elapsed().as_secs_f64(),
        "out": a.out,
    }))
}

fn eval_classifier(a: EvalClassifierArgs) -> Result<Value> {
    let seed = a.seed.resolve()?;
    let model = TrainedClassifier::load(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let test = a.source.load(seed, true)?;
    let (preds, truths) = predict_all(&model, &test, a.threshold)?;
    let report = compute_metrics(&preds, &truths)?;
    println!("{}", report.to_table());
    if let Some(path) = &a.json {
        std::fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(json!({
        "command": "eval-classifier",
        "seed": seed,
        "kind": model.kind().name(),
        "records": test.len(),
        "threshold": a.threshold,
        "accuracy": report.accuracy,
        "macro_precision": report.macro_precision,
        "macro_recall": report.macro_recall,
        "macro_f1": report.macro_f1,
    }))
}

fn eval_regressor(a: EvalRegressorArgs) -> Result<Value> {
    let seed = a.seed.resolve()?;
    let model = FingertipRegressor::load(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let test = load_frames(&a.source, seed, a.frames, true)?;
    let curve = eval_success_curve(&model, &test)?;
    println!("{}", curve.to_table());
    if let Some(path) = &a.svg {
        std::fs::write(path, curve.to_svg()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(json!({
        "command": "eval-regressor",
        "seed": seed,
        "frames": test.len(),
        "mean_error_px": curve.mean_error_px,
        "success_at_10px": curve.rate_at(10),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyStats {
    pub samples: usize,
    pub mean_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

/// Preprocess + inference time per trajectory.
pub fn measure_latency(model: &TrainedClassifier, data: &[Trajectory], threshold: f64) -> Result<LatencyStats> {
    if data.is_empty() {
        bail!("no trajectories to time");
    }
    let mut times = Vec::with_capacity(data.len());
    for t in data {
        let (result, pre, cls) = classify_timed(model, t, threshold);
        result.map_err(anyhow::Error::msg)?;
        times.push(pre + cls);
    }
    times.sort_by(f64::total_cmp);
    let p95 = times[((times.len() as f64 * 0.95).ceil() as usize).clamp(1, times.len()) - 1];
    Ok(LatencyStats {
        samples: times.len(),
        mean_ms: times.iter().sum::<f64>() / times.len() as f64,
        p95_ms: p95,
        max_ms: *times.last().expect("non-empty"),
    })
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub kind: ClassifierKind,
    pub model: TrainedClassifier,
    pub metrics: MetricsReport,
    pub latency: LatencyStats,
    pub train_s: f64,
}

/// Trains each kind on `train` and scores it on `test` by plain argmax
/// (threshold 0), the comparison the baselines can share.
pub fn compare_classifiers(
    kinds: &[ClassifierKind],
    train: &[Trajectory],
    test: &[Trajectory],
    config: &ClassifierTrainConfig,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let start = Instant::now();
        let (model, _) = train_classifier(kind, train, config, |e| {
            if e.epoch % 50 == 0 {
                eprintln!("{kind}: epoch {} val_acc {:.3}", e.epoch, e.val_accuracy);
            }
        })?;
        let train_s = start.elapsed().as_secs_f64();
        let (preds, truths) = predict_all(&model, test, 0.0)?;
        let metrics = compute_metrics(&preds, &truths)?;
        let latency = measure_latency(&model, test, 0.0)?;
        rows.push(BenchRow { kind, model, metrics, latency, train_s });
    }
    Ok(rows)
}

pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut s = format!(
        "{:<8} {:>9} {:>9} {:>9} {:>9} {:>8} {:>11} {:>9}\n",
        "model", "precision", "recall", "f1", "accuracy", "params", "latency_ms", "train_s"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<8} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>8} {:>11.3} {:>9.1}\n",
            r.kind.name(),
            r.metrics.macro_precision,
            r.metrics.macro_recall,
            r.metrics.macro_f1,
            r.metrics.accuracy,
            param_count(&r.model),
            r.latency.mean_ms,
            r.train_s
        ));
    }
    s
}

/// DTW < SVM < LSTM ≤ Bi-LSTM + 0.02 on macro-F1. `None` unless all four
/// kinds are present.
pub fn ordering_holds(rows: &[BenchRow]) -> Option<bool> {
    let f1 = |k| rows.iter().find(|r| r.kind == k).map(|r| r.metrics.macro_f1);
    let (dtw, svm, lstm, bi) = (
        f1(ClassifierKind::Dtw1Nn)?,
        f1(ClassifierKind::LinearSvm)?,
        f1(ClassifierKind::Lstm)?,
        f1(ClassifierKind::BiLstm)?,
    );
    Some(dtw < svm && svm < lstm && lstm <= bi + 0.02)
}

fn bench(a: BenchArgs) -> Result<Value> {
    let seed = a.seed.resolve()?;
    if a.kinds.is_empty() {
        bail!("--kinds is empty");
    }
    let (train, test) = a.source.split(seed)?;
    let cfg = classifier_config(seed, a.epochs, a.batch, a.lr);
    let rows = compare_classifiers(&a.kinds, &train, &test, &cfg)?;
    println!("{}", bench_table(&rows));
    let ordering = ordering_holds(&rows);
    if let Some(ok) = ordering {
        println!("ordering dtw < svm < lstm <= bilstm + 0.02: {}", if ok { "holds" } else { "violated" });
    }

    // The sweep runs on the strongest sequence model available.
    let swept = [ClassifierKind::BiLstm, ClassifierKind::Lstm, ClassifierKind::LinearSvm, ClassifierKind::Dtw1Nn]
        .into_iter()
        .find_map(|k| rows.iter().find(|r| r.kind == k));
    let mut robustness: Option<RobustnessReport> = None;
    if let (Some(row), true) = (swept, a.streams > 0) {
        let report = robustness_eval(&row.model, &test, &RobustnessGrid::default(), a.streams, a.threshold, seed)?;
        println!("robustness ({}, threshold {}):\n{}", row.kind, a.threshold, report.to_table());
        robustness = Some(report);
    }
    let models: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "kind": r.kind.name(),
                "macro_f1": r.metrics.macro_f1,
                "accuracy": r.metrics.accuracy,
                "mean_latency_ms": r.latency.mean_ms,
                "p95_latency_ms": r.latency.p95_ms,
            })
        })
        .collect();
    let (clean, worst) = robustness
        .as_ref()
        .map(|r| {
            let acc = r.cells.iter().map(|c| c.accuracy);
            (r.cells.first().map(|c| c.accuracy), acc.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v)))))
        })
        .unwrap_or((None, None));
    Ok(json!({
        "command": "bench",
        "seed": seed,
        "train_records": train.len(),
        "test_records": test.len(),
        "models": models,
        "ordering_holds": ordering,
        "robustness_clean_accuracy": clean,
        "robustness_worst_accuracy": worst,
    }))
}

/// Loads a checkpoint for serving; DTW and SVM checkpoints are refused.
pub fn load_service_model(path: &Path, threshold: f64) -> Result<AppState> {
    let model = TrainedClassifier::load(path).with_context(|| format!("loading {}", path.display()))?;
    AppState::new(model, threshold)
}

fn serve(a: ServeArgs) -> Result<Value> {
    let seed = a.seed.resolve()?;
    let state = load_service_model(&a.model, a.threshold)?;
    let kind = state.model.kind();
    let addr = SocketAddr::new(a.host, a.port);
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    rt.block_on(async move {
        let listener = server::bind(addr).await?;
        eprintln!("serving {kind} on ws://{}/ws", listener.local_addr()?);
        server::serve(listener, state, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })?;
    Ok(json!({"command": "serve", "seed": seed, "kind": kind.name(), "addr": addr.to_string()}))
}
