use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    add_noise, degree_features, link_split, node_split_citation, node_split_fraction, standardize_columns, Dataset,
};
use crate::error::{Error, Result};
use crate::filterbank::{BankName, DEFAULT_SIGMOID_ALPHA};
use crate::framelet::{FrameletSystem, Mode, TransformConfig};
use crate::network::{
    evaluate, train, Batch, Checkpoint, FrameletMagNet, Gcn, ModelSpec, OptimizerKind, Targets, Task, TrainConfig,
    TrainReport, Trainable,
};
use crate::RMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Framelet,
    Gcn,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Framelet => "framelet",
            ModelKind::Gcn => "gcn",
        }
    }
}

/// How node-task splits are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SplitConfig {
    /// Uniform train/validation/test fractions.
    Fraction { fractions: [f64; 3] },
    /// A fixed number of training nodes per class and a fixed validation
    /// size.
    Citation { per_class: usize, val: usize },
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig::Fraction {
            fractions: [0.6, 0.2, 0.2],
        }
    }
}

fn default_alpha() -> f64 {
    DEFAULT_SIGMOID_ALPHA
}

fn default_optimizer() -> OptimizerKind {
    OptimizerKind::Adam
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub dataset: PathBuf,
    pub bank: BankName,
    pub q: f64,
    #[serde(rename = "S")]
    pub levels: usize,
    #[serde(rename = "K")]
    pub cheb_degree: usize,
    pub mode: Mode,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub patience: usize,
    /// `null` picks 0.5 for node tasks and 0 for link tasks.
    #[serde(default)]
    pub dropout: Option<f64>,
    pub hidden_dims: Vec<usize>,
    pub n_repeats: usize,
    pub seed: u64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default = "default_optimizer")]
    pub optimizer: OptimizerKind,
    #[serde(default = "default_alpha")]
    pub sigmoid_alpha: f64,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub model: ModelKind,
}

impl ExperimentConfig {
    /// Spec defaults for everything but the task and dataset.
    pub fn new(task: Task, dataset: impl Into<PathBuf>) -> Self {
        let train = TrainConfig::default();
        Self {
            task,
            dataset: dataset.into(),
            bank: BankName::Haar,
            q: 0.25,
            levels: crate::framelet::DEFAULT_LEVELS,
            cheb_degree: crate::framelet::DEFAULT_CHEB_DEGREE,
            mode: Mode::Exact,
            lr: train.lr,
            weight_decay: train.weight_decay,
            epochs: train.epochs,
            patience: train.patience,
            dropout: None,
            hidden_dims: vec![16],
            n_repeats: 10,
            seed: 0,
            noise_sigma: 0.0,
            optimizer: train.optimizer,
            sigmoid_alpha: DEFAULT_SIGMOID_ALPHA,
            split: SplitConfig::default(),
            model: ModelKind::Framelet,
        }
    }

    /// Reads a JSON config. A relative dataset path is taken relative to
    /// the config file's directory.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut cfg: Self = serde_json::from_reader(file)?;
        if cfg.dataset.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.dataset = dir.join(&cfg.dataset);
            }
        }
        Ok(cfg)
    }

    pub fn transform(&self) -> TransformConfig {
        TransformConfig {
            bank: self.bank,
            sigmoid_alpha: self.sigmoid_alpha,
            q: self.q,
            levels: self.levels,
            mode: self.mode,
            cheb_degree: self.cheb_degree,
        }
    }

    pub fn dropout(&self) -> f64 {
        self.dropout.unwrap_or(if self.task.is_link() { 0.0 } else { 0.5 })
    }

    fn validate(&self) -> Result<()> {
        if self.n_repeats == 0 {
            return Err(Error::InvalidConfig("n_repeats must be at least 1".into()));
        }
        if self.hidden_dims.is_empty() {
            return Err(Error::InvalidConfig("hidden_dims must not be empty".into()));
        }
        if self.model == ModelKind::Gcn && self.task.is_link() {
            return Err(Error::InvalidConfig("the GCN comparator supports node tasks only".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatMetrics {
    pub seed: u64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub test_accuracy: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub repeats: Vec<RepeatMetrics>,
    /// Mean test accuracy.
    pub mean: f64,
    /// Sample standard deviation of the test accuracy, 0 for one repeat.
    pub std: f64,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: Report,
    /// Framelet model of the repeat with the best validation accuracy.
    /// Link-task checkpoints belong to that repeat's training graph.
    pub checkpoint: Option<Checkpoint>,
}

/// Independent stream seeds for one repeat.
fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SPLIT_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const INIT_STREAM: u64 = 3;
const DROPOUT_STREAM: u64 = 4;

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

struct RepeatOutcome {
    metrics: RepeatMetrics,
    checkpoint: Option<Checkpoint>,
}

fn finish<M: Trainable>(
    model: &mut M,
    config: &ExperimentConfig,
    seed: u64,
    batches: [Batch<'_>; 3],
) -> Result<(RepeatMetrics, TrainReport)> {
    let [tb, vb, sb] = batches;
    let train_config = TrainConfig {
        optimizer: config.optimizer,
        lr: config.lr,
        weight_decay: config.weight_decay,
        epochs: config.epochs,
        patience: config.patience,
        seed: derive_seed(seed, DROPOUT_STREAM),
    };
    let val = (!vb.targets.is_empty()).then_some(&vb);
    let report = train(model, &tb, val, &train_config)?;
    let metrics = RepeatMetrics {
        seed,
        train_accuracy: evaluate(model, &tb)?.1,
        val_accuracy: evaluate(model, &vb)?.1,
        test_accuracy: evaluate(model, &sb)?.1,
        best_epoch: report.best_epoch,
        epochs_run: report.history.len(),
    };
    Ok((metrics, report))
}

fn node_features(ds: &Dataset) -> RMatrix {
    match &ds.features {
        Some(f) => standardize_columns(f),
        None => degree_features(&ds.graph),
    }
}

fn run_node_repeat(
    ds: &Dataset,
    config: &ExperimentConfig,
    system: Option<&Arc<FrameletSystem>>,
    seed: u64,
) -> Result<RepeatOutcome> {
    let labels = ds
        .labels
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("dataset '{}' has no labels.csv", ds.name)))?;
    let split = match config.split {
        SplitConfig::Fraction { fractions } => node_split_fraction(labels, fractions, derive_seed(seed, SPLIT_STREAM))?,
        SplitConfig::Citation { per_class, val } => {
            node_split_citation(labels, per_class, val, derive_seed(seed, SPLIT_STREAM))?
        }
    };
    let x = add_noise(&node_features(ds), config.noise_sigma, derive_seed(seed, NOISE_STREAM))?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
    let (lt, lv, ls) = (pick(&split.train), pick(&split.val), pick(&split.test));
    let batches = [
        Batch {
            features: &x,
            targets: Targets::Nodes(&split.train),
            labels: &lt,
        },
        Batch {
            features: &x,
            targets: Targets::Nodes(&split.val),
            labels: &lv,
        },
        Batch {
            features: &x,
            targets: Targets::Nodes(&split.test),
            labels: &ls,
        },
    ];
    let init = derive_seed(seed, INIT_STREAM);
    match (config.model, system) {
        (ModelKind::Framelet, Some(system)) => {
            let mut spec = ModelSpec::new(Task::Node, x.ncols(), config.hidden_dims.clone(), ds.n_classes());
            spec.dropout = config.dropout();
            let mut model = FrameletMagNet::new(system.clone(), spec, init)?;
            let (metrics, _) = finish(&mut model, config, seed, batches)?;
            Ok(RepeatOutcome {
                metrics,
                checkpoint: Some(Checkpoint::from_model(&model, config.transform())),
            })
        }
        _ => {
            let mut model = Gcn::new(
                &ds.graph,
                x.ncols(),
                config.hidden_dims[0],
                ds.n_classes(),
                config.dropout(),
                init,
            )?;
            let (metrics, _) = finish(&mut model, config, seed, batches)?;
            Ok(RepeatOutcome {
                metrics,
                checkpoint: None,
            })
        }
    }
}

fn run_link_repeat(ds: &Dataset, config: &ExperimentConfig, seed: u64) -> Result<RepeatOutcome> {
    let split = link_split(&ds.graph, config.task, derive_seed(seed, SPLIT_STREAM))?;
    let system = Arc::new(config.transform().build(&split.train_graph)?);
    let x = add_noise(
        &degree_features(&split.train_graph),
        config.noise_sigma,
        derive_seed(seed, NOISE_STREAM),
    )?;
    let batches = [&split.train, &split.val, &split.test].map(|p| Batch {
        features: &x,
        targets: Targets::Pairs(&p.pairs),
        labels: &p.labels,
    });
    let mut spec = ModelSpec::new(config.task, x.ncols(), config.hidden_dims.clone(), 2);
    spec.dropout = config.dropout();
    let mut model = FrameletMagNet::new(system, spec, derive_seed(seed, INIT_STREAM))?;
    let (metrics, _) = finish(&mut model, config, seed, batches)?;
    Ok(RepeatOutcome {
        metrics,
        checkpoint: Some(Checkpoint::from_model(&model, config.transform())),
    })
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {jobs} worker threads: {e}")))
}

/// Runs `config.n_repeats` split-train-test repeats with seeds
/// `seed, seed + 1, …` on up to `jobs` threads (0 picks the core count).
pub fn run_experiment_on(ds: &Dataset, config: &ExperimentConfig, jobs: usize) -> Result<ExperimentOutcome> {
    config.validate()?;
    ds.validate()?;
    let start = Instant::now();
    let system = match (config.task, config.model) {
        (Task::Node, ModelKind::Framelet) => Some(Arc::new(config.transform().build(&ds.graph)?)),
        _ => None,
    };
    let seeds: Vec<u64> = (0..config.n_repeats as u64).map(|i| config.seed + i).collect();
    let results: Vec<Result<RepeatOutcome>> = thread_pool(jobs)?.install(|| {
        seeds
            .par_iter()
            .map(|&s| match config.task {
                Task::Node => run_node_repeat(ds, config, system.as_ref(), s),
                _ => run_link_repeat(ds, config, s),
            })
            .collect()
    });
    let mut outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    outcomes.sort_by_key(|o| o.metrics.seed);

    let accs: Vec<f64> = outcomes.iter().map(|o| o.metrics.test_accuracy).collect();
    let (mean, std) = mean_std(&accs);
    let mut best: Option<&RepeatOutcome> = None;
    for o in &outcomes {
        if best.is_none_or(|b| o.metrics.val_accuracy > b.metrics.val_accuracy) {
            best = Some(o);
        }
    }
    let checkpoint = best.and_then(|o| o.checkpoint.clone());
    Ok(ExperimentOutcome {
        report: Report {
            config: config.clone(),
            repeats: outcomes.into_iter().map(|o| o.metrics).collect(),
            mean,
            std,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        },
        checkpoint,
    })
}

/// [`run_experiment_on`] with the dataset loaded from `config.dataset`.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentOutcome> {
    let ds = Dataset::load(&config.dataset)?;
    run_experiment_on(&ds, config, jobs)
}

pub const DENOISE_HEADER: &str = "model,sigma,mean,std";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseRow {
    pub model: ModelKind,
    pub sigma: f64,
    pub mean: f64,
    pub std: f64,
}

/// Node experiment with noisy features for the framelet model and the GCN
/// comparator at every sigma; rows are sigma-major, framelet first.
pub fn run_denoise(ds: &Dataset, config: &ExperimentConfig, sigmas: &[f64], jobs: usize) -> Result<Vec<DenoiseRow>> {
    if config.task != Task::Node {
        return Err(Error::InvalidConfig("denoising runs on node tasks".into()));
    }
    let mut rows = Vec::with_capacity(2 * sigmas.len());
    for &sigma in sigmas {
        for model in [ModelKind::Framelet, ModelKind::Gcn] {
            let cfg = ExperimentConfig {
                noise_sigma: sigma,
                model,
                ..config.clone()
            };
            let report = run_experiment_on(ds, &cfg, jobs)?.report;
            rows.push(DenoiseRow {
                model,
                sigma,
                mean: report.mean,
                std: report.std,
            });
        }
    }
    Ok(rows)
}

pub fn write_denoise_csv<W: std::io::Write>(rows: &[DenoiseRow], mut w: W) -> Result<()> {
    writeln!(w, "{DENOISE_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.model.as_str(), r.sigma, r.mean, r.std)?;
    }
    Ok(())
}
