use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{accuracy, cross_entropy, Batch, Optimizer, OptimizerKind, Trainable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    /// Epochs without a validation-loss improvement before stopping.
    pub patience: usize,
    /// Seeds the dropout stream.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Adam,
            lr: 5e-3,
            weight_decay: 5e-4,
            epochs: 3000,
            patience: 500,
            seed: 0,
        }
    }
}

/// Metrics at the parameters entering an epoch's update, dropout off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub history: Vec<EpochRecord>,
    /// Epoch whose parameters were restored.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainReport {
    pub fn best(&self) -> Option<&EpochRecord> {
        self.history.iter().find(|r| r.epoch == self.best_epoch)
    }
}

/// Loss and accuracy with dropout off.
pub fn evaluate<M: Trainable + ?Sized>(model: &M, batch: &Batch<'_>) -> Result<(f64, f64)> {
    if batch.targets.is_empty() {
        return Ok((0.0, 0.0));
    }
    metrics(&model.logits(batch.features, batch.targets)?, batch.labels)
}

fn metrics(logits: &crate::RMatrix, labels: &[usize]) -> Result<(f64, f64)> {
    if labels.is_empty() {
        return Ok((0.0, 0.0));
    }
    let (loss, _) = cross_entropy(logits, labels)?;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: 0 });
    }
    Ok((loss, accuracy(logits, labels)))
}

/// [`evaluate`] on the training batch and optionally a validation batch
/// sharing its features.
fn evaluate_many<M: Trainable + ?Sized>(model: &M, train: &Batch<'_>, val: Option<&Batch<'_>>) -> Result<Vec<(f64, f64)>> {
    let batches: Vec<&Batch<'_>> = std::iter::once(train).chain(val).collect();
    if batches.iter().any(|b| !std::ptr::eq(b.features, train.features)) {
        return batches.iter().map(|b| evaluate(model, b)).collect();
    }
    let targets: Vec<_> = batches.iter().map(|b| b.targets).collect();
    let logits = model.logits_many(train.features, &targets)?;
    logits.iter().zip(&batches).map(|(l, b)| metrics(l, b.labels)).collect()
}

fn at_epoch<T>(r: Result<T>, epoch: usize) -> Result<T> {
    r.map_err(|e| match e {
        Error::NonFiniteLoss { .. } => Error::NonFiniteLoss { epoch },
        other => other,
    })
}

/// Full-batch training with early stopping on validation loss (training
/// loss when `val` is `None`). The best parameters are restored on return.
pub fn train<M: Trainable + ?Sized>(
    model: &mut M,
    train: &Batch<'_>,
    val: Option<&Batch<'_>>,
    config: &TrainConfig,
) -> Result<TrainReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = Optimizer::new(config.optimizer, config.lr, config.weight_decay);
    let mut params = model.parameters();
    let mut best = (f64::INFINITY, 0usize, params.clone());
    let mut history = Vec::with_capacity(config.epochs);
    let mut stopped_early = false;

    for epoch in 0..config.epochs {
        let metrics = at_epoch(evaluate_many(model, train, val), epoch)?;
        let (train_loss, train_accuracy) = metrics[0];
        let (val_loss, val_accuracy) = match metrics.get(1) {
            Some(&(l, a)) => (Some(l), Some(a)),
            None => (None, None),
        };
        history.push(EpochRecord {
            epoch,
            train_loss,
            train_accuracy,
            val_loss,
            val_accuracy,
        });
        let monitored = val_loss.unwrap_or(train_loss);
        if monitored < best.0 {
            best = (monitored, epoch, params.clone());
        } else if epoch - best.1 >= config.patience {
            stopped_early = true;
            break;
        }

        let (_, grad) = at_epoch(model.loss_and_grad(train, Some(&mut rng)), epoch)?;
        optimizer.step(&mut params, &grad);
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch });
        }
        model.set_parameters(&params)?;
    }

    model.set_parameters(&best.2)?;
    Ok(TrainReport {
        history,
        best_epoch: best.1,
        stopped_early,
    })
}
