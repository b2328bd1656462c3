use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layer::{ConvCache, FrameletConv};
use super::{
    cross_entropy, dropout_mask, flat, pair_concat, rewind, select_rows, unwind, Activation, Batch, Linear,
    Targets, Task, Trainable,
};
use crate::error::{shape_mismatch, Error, Result};
use crate::framelet::FrameletSystem;
use crate::{to_complex, CMatrix, RMatrix};

/// Architecture of a [`FrameletMagNet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub task: Task,
    pub input_dim: usize,
    /// Output widths of the convolution layers; at least one.
    pub hidden_dims: Vec<usize>,
    /// Ignored for link tasks, which always have two classes.
    pub n_classes: usize,
    pub dropout: f64,
    pub activation: Activation,
}

impl ModelSpec {
    /// Dropout 0.5 for node tasks and 0 for link tasks.
    pub fn new(task: Task, input_dim: usize, hidden_dims: Vec<usize>, n_classes: usize) -> Self {
        Self {
            task,
            input_dim,
            hidden_dims,
            n_classes: if task.is_link() { 2 } else { n_classes },
            dropout: if task.is_link() { 0.0 } else { 0.5 },
            activation: Activation::ComplexRelu,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.hidden_dims.is_empty() || self.hidden_dims.contains(&0) || self.input_dim == 0 {
            return Err(Error::InvalidConfig(
                "need at least one convolution layer and non-zero widths".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if self.n_classes < 2 {
            return Err(Error::InvalidConfig("need at least two classes".into()));
        }
        Ok(())
    }

    pub fn head_input_dim(&self) -> usize {
        let width = 2 * self.hidden_dims.last().copied().unwrap_or(0);
        if self.task.is_link() {
            2 * width
        } else {
            width
        }
    }
}

/// Stacked framelet convolutions, unwind, optional pair concatenation and
/// a real linear classifier.
#[derive(Debug, Clone)]
pub struct FrameletMagNet {
    system: Arc<FrameletSystem>,
    spec: ModelSpec,
    pub layers: Vec<FrameletConv>,
    pub head: Linear,
}

struct Forward {
    caches: Vec<ConvCache>,
    unwound: RMatrix,
    mask: Option<RMatrix>,
    head_input: RMatrix,
    logits: RMatrix,
}

impl FrameletMagNet {
    pub fn new(system: Arc<FrameletSystem>, spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(spec.hidden_dims.len());
        let mut d_in = spec.input_dim;
        for &d_out in &spec.hidden_dims {
            layers.push(FrameletConv::new(&system, d_in, d_out, spec.activation, &mut rng));
            d_in = d_out;
        }
        let head = Linear::new(spec.head_input_dim(), spec.n_classes, &mut rng);
        Ok(Self {
            system,
            spec,
            layers,
            head,
        })
    }

    pub fn system(&self) -> &Arc<FrameletSystem> {
        &self.system
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn task(&self) -> Task {
        self.spec.task
    }

    pub fn set_dropout(&mut self, p: f64) -> Result<()> {
        let mut spec = self.spec.clone();
        spec.dropout = p;
        spec.validate()?;
        self.spec = spec;
        Ok(())
    }

    /// Output of the last convolution layer, complex `N × D_C`.
    pub fn conv_output(&self, features: &RMatrix) -> Result<CMatrix> {
        self.check_features(features)?;
        let mut x = to_complex(features);
        for layer in &self.layers {
            x = layer.forward(&self.system, &x)?;
        }
        Ok(x)
    }

    /// The unwound node representation `[Re X_C | Im X_C]`.
    pub fn embed(&self, features: &RMatrix) -> Result<RMatrix> {
        Ok(unwind(&self.conv_output(features)?))
    }

    /// Head input for the given targets, dropout off.
    pub fn head_input(&self, features: &RMatrix, targets: Targets<'_>) -> Result<RMatrix> {
        let h = self.embed(features)?;
        self.gather(&h, targets)
    }

    fn check_features(&self, features: &RMatrix) -> Result<()> {
        let want = (self.system.n_nodes(), self.spec.input_dim);
        if features.shape() != want {
            return Err(shape_mismatch(format!("{want:?} features"), format!("{:?}", features.shape())));
        }
        Ok(())
    }

    fn gather(&self, h: &RMatrix, targets: Targets<'_>) -> Result<RMatrix> {
        match (self.spec.task.is_link(), targets) {
            (false, Targets::Nodes(nodes)) => select_rows(h, nodes),
            (true, Targets::Pairs(pairs)) => pair_concat(h, pairs),
            _ => Err(Error::InvalidConfig(format!(
                "targets do not match the {:?} task",
                self.spec.task
            ))),
        }
    }

    /// Pullback of [`Self::gather`]: scatter-adds head-input cotangents
    /// into node rows.
    fn scatter(&self, grad: &RMatrix, targets: Targets<'_>, n: usize, width: usize) -> RMatrix {
        let mut out = RMatrix::zeros(n, width);
        match targets {
            Targets::Nodes(nodes) => {
                for (k, &i) in nodes.iter().enumerate() {
                    let mut row = out.row_mut(i);
                    row += grad.row(k);
                }
            }
            Targets::Pairs(pairs) => {
                for (k, &(i, j)) in pairs.iter().enumerate() {
                    let mut row = out.row_mut(i);
                    row += grad.row(k).columns(0, width);
                    let mut row = out.row_mut(j);
                    row += grad.row(k).columns(width, width);
                }
            }
        }
        out
    }

    fn forward(
        &self,
        features: &RMatrix,
        targets: Targets<'_>,
        dropout_rng: Option<&mut dyn rand::RngCore>,
    ) -> Result<Forward> {
        self.check_features(features)?;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x = to_complex(features);
        for layer in &self.layers {
            let cache = layer.forward_cached(&self.system, &x)?;
            x = layer.output(&cache);
            caches.push(cache);
        }
        let unwound = unwind(&x);
        let mask = match dropout_rng {
            Some(rng) if self.spec.dropout > 0.0 => Some(dropout_mask(unwound.shape(), self.spec.dropout, rng)),
            _ => None,
        };
        let dropped = match &mask {
            Some(m) => unwound.component_mul(m),
            None => unwound.clone(),
        };
        let head_input = self.gather(&dropped, targets)?;
        let logits = self.head.forward(&head_input);
        Ok(Forward {
            caches,
            unwound,
            mask,
            head_input,
            logits,
        })
    }
}

impl Trainable for FrameletMagNet {
    fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            flat::push_complex(&mut out, &layer.weight);
            flat::push_real(&mut out, layer.gains.iter());
        }
        flat::push_real(&mut out, self.head.weight.iter());
        flat::push_real(&mut out, self.head.bias.iter());
        out
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        let mut updated = self.clone();
        let mut reader = flat::Reader::new(params);
        for layer in &mut updated.layers {
            reader.complex_into(&mut layer.weight)?;
            reader.real_into(layer.gains.iter_mut())?;
        }
        reader.real_into(updated.head.weight.iter_mut())?;
        reader.real_into(updated.head.bias.iter_mut())?;
        reader.finish()?;
        *self = updated;
        Ok(())
    }

    fn logits(&self, features: &RMatrix, targets: Targets<'_>) -> Result<RMatrix> {
        Ok(self.forward(features, targets, None)?.logits)
    }

    fn logits_many(&self, features: &RMatrix, targets: &[Targets<'_>]) -> Result<Vec<RMatrix>> {
        let h = self.embed(features)?;
        targets
            .iter()
            .map(|&t| Ok(self.head.forward(&self.gather(&h, t)?)))
            .collect()
    }

    fn loss_and_grad(&self, batch: &Batch<'_>, dropout_rng: Option<&mut dyn rand::RngCore>) -> Result<(f64, Vec<f64>)> {
        let fwd = self.forward(batch.features, batch.targets, dropout_rng)?;
        if fwd.logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch: 0 });
        }
        let (loss, grad_logits) = cross_entropy(&fwd.logits, batch.labels)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch: 0 });
        }
        let (grad_head_in, grad_head_w, grad_head_b) = self.head.backward(&fwd.head_input, &grad_logits);
        let (n, width) = fwd.unwound.shape();
        let mut grad_h = self.scatter(&grad_head_in, batch.targets, n, width);
        if let Some(m) = &fwd.mask {
            grad_h.component_mul_assign(m);
        }
        // d/dRe and d/dIm of the unwound columns assemble the conjugate
        // cotangent directly.
        let mut grad_x = rewind(&grad_h);

        let mut layer_grads = Vec::with_capacity(self.layers.len());
        for (layer, cache) in self.layers.iter().zip(&fwd.caches).rev() {
            let (gx, gw, gg) = layer.backward(&self.system, cache, &grad_x)?;
            layer_grads.push((gw, gg));
            grad_x = gx;
        }
        layer_grads.reverse();

        let mut grad = Vec::with_capacity(self.parameters_len());
        for (gw, gg) in &layer_grads {
            flat::push_complex(&mut grad, gw);
            flat::push_real(&mut grad, gg.iter());
        }
        flat::push_real(&mut grad, grad_head_w.iter());
        flat::push_real(&mut grad, grad_head_b.iter());
        Ok((loss, grad))
    }
}

impl FrameletMagNet {
    fn parameters_len(&self) -> usize {
        self.layers.iter().map(FrameletConv::n_params).sum::<usize>() + self.head.n_params()
    }
}
