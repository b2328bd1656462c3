//! A minimal trainable Framelet-MagNet.
//!
//! The forward pass is
//!
//! ```text
//! X_i = σ(F* diag(ω_i) F (X_{i-1} W_i))      for each convolution layer
//! H   = [Re X_C | Im X_C]                    (unwind)
//! P   = H              (node tasks)
//!     = [H_u | H_v]    (link tasks, one row per ordered pair (u, v))
//! logits = P W_head + b
//! ```
//!
//! Gradients are accumulated by hand in reverse mode. Complex quantities
//! carry cotangents `∂L/∂Re z + i ∂L/∂Im z`, so every complex parameter
//! behaves as two independent real parameters.

mod checkpoint;
mod gcn;
mod layer;
mod model;
mod optim;
mod train;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CMatrix, Complex64, RMatrix};

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use gcn::Gcn;
pub use layer::{conv_forward, FrameletConv};
pub use model::{FrameletMagNet, ModelSpec};
pub use optim::{Optimizer, OptimizerKind};
pub use train::{evaluate, train, EpochRecord, TrainConfig, TrainReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Node,
    LinkExistence,
    LinkDirection,
}

impl Task {
    pub fn is_link(self) -> bool {
        !matches!(self, Task::Node)
    }
}

/// Elementwise nonlinearity of the convolution layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// `ReLU(Re z) + i ReLU(Im z)`.
    ComplexRelu,
    Identity,
}

impl Activation {
    pub fn apply(self, z: &CMatrix) -> CMatrix {
        match self {
            Activation::ComplexRelu => z.map(|c| Complex64::new(c.re.max(0.0), c.im.max(0.0))),
            Activation::Identity => z.clone(),
        }
    }

    /// Pulls a cotangent back through the activation at pre-activation `z`.
    pub fn backward(self, z: &CMatrix, grad: &CMatrix) -> CMatrix {
        match self {
            Activation::ComplexRelu => z.zip_map(grad, |c, g| {
                Complex64::new(
                    if c.re > 0.0 { g.re } else { 0.0 },
                    if c.im > 0.0 { g.im } else { 0.0 },
                )
            }),
            Activation::Identity => grad.clone(),
        }
    }
}

/// Rows the loss is evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Nodes(&'a [usize]),
    Pairs(&'a [(usize, usize)]),
}

impl Targets<'_> {
    pub fn len(&self) -> usize {
        match self {
            Targets::Nodes(n) => n.len(),
            Targets::Pairs(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Full-batch input: node features of the whole graph plus the labelled
/// rows.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub features: &'a RMatrix,
    pub targets: Targets<'a>,
    pub labels: &'a [usize],
}

/// Common surface of the trainable models. Parameters are exchanged as a
/// flat real vector, complex entries stored as interleaved `(re, im)`.
pub trait Trainable {
    fn parameters(&self) -> Vec<f64>;

    fn set_parameters(&mut self, params: &[f64]) -> Result<()>;

    fn logits(&self, features: &RMatrix, targets: Targets<'_>) -> Result<RMatrix>;

    /// Logits for several target sets from one forward pass where the
    /// model allows it.
    fn logits_many(&self, features: &RMatrix, targets: &[Targets<'_>]) -> Result<Vec<RMatrix>> {
        targets.iter().map(|&t| self.logits(features, t)).collect()
    }

    /// Mean cross-entropy over the batch and its gradient with respect to
    /// [`Trainable::parameters`]. Dropout is active iff `dropout_rng` is
    /// given.
    fn loss_and_grad(&self, batch: &Batch<'_>, dropout_rng: Option<&mut dyn rand::RngCore>) -> Result<(f64, Vec<f64>)>;
}

/// `[Re Z | Im Z]`.
pub fn unwind(z: &CMatrix) -> RMatrix {
    let (n, d) = z.shape();
    RMatrix::from_fn(n, 2 * d, |i, j| if j < d { z[(i, j)].re } else { z[(i, j - d)].im })
}

/// Inverse of [`unwind`].
pub fn rewind(h: &RMatrix) -> CMatrix {
    let d = h.ncols() / 2;
    CMatrix::from_fn(h.nrows(), d, |i, j| Complex64::new(h[(i, j)], h[(i, j + d)]))
}

/// Row `k` is `[H(i_k, :) | H(j_k, :)]`.
pub fn pair_concat(h: &RMatrix, pairs: &[(usize, usize)]) -> Result<RMatrix> {
    let (n, f) = h.shape();
    for &(i, j) in pairs {
        for index in [i, j] {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, limit: n });
            }
        }
    }
    Ok(RMatrix::from_fn(pairs.len(), 2 * f, |k, c| {
        let (i, j) = pairs[k];
        if c < f {
            h[(i, c)]
        } else {
            h[(j, c - f)]
        }
    }))
}

pub(crate) fn select_rows(h: &RMatrix, rows: &[usize]) -> Result<RMatrix> {
    for &r in rows {
        if r >= h.nrows() {
            return Err(Error::IndexOutOfRange { index: r, limit: h.nrows() });
        }
    }
    Ok(RMatrix::from_fn(rows.len(), h.ncols(), |k, c| h[(rows[k], c)]))
}

/// Mean softmax cross-entropy and its gradient with respect to the logits.
pub fn cross_entropy(logits: &RMatrix, labels: &[usize]) -> Result<(f64, RMatrix)> {
    let (n, k) = logits.shape();
    if labels.len() != n {
        return Err(crate::error::shape_mismatch(format!("{n} labels"), labels.len()));
    }
    if n == 0 {
        return Ok((0.0, RMatrix::zeros(0, k)));
    }
    let mut grad = RMatrix::zeros(n, k);
    let mut loss = 0.0;
    for i in 0..n {
        let label = labels[i];
        if label >= k {
            return Err(Error::IndexOutOfRange { index: label, limit: k });
        }
        let row = logits.row(i);
        let top = row.max();
        let log_norm = top + row.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
        loss += log_norm - row[label];
        for c in 0..k {
            grad[(i, c)] = (row[c] - log_norm).exp() / n as f64;
        }
        grad[(i, label)] -= 1.0 / n as f64;
    }
    Ok((loss / n as f64, grad))
}

pub fn accuracy(logits: &RMatrix, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = logits
        .row_iter()
        .zip(labels)
        .filter(|(row, &label)| row.transpose().argmax().0 == label)
        .count();
    hits as f64 / labels.len() as f64
}

/// Real affine map `x ↦ x W + b` applied to rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: RMatrix,
    pub bias: DVector<f64>,
}

impl Linear {
    /// Glorot-uniform weights, zero bias.
    pub fn new<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (d_in + d_out) as f64).sqrt();
        Self {
            weight: RMatrix::from_fn(d_in, d_out, |_, _| rng.random_range(-bound..=bound)),
            bias: DVector::zeros(d_out),
        }
    }

    pub fn forward(&self, x: &RMatrix) -> RMatrix {
        let mut out = x * &self.weight;
        for mut row in out.row_iter_mut() {
            row += self.bias.transpose();
        }
        out
    }

    /// Returns `(grad_input, grad_weight, grad_bias)`.
    pub fn backward(&self, x: &RMatrix, grad: &RMatrix) -> (RMatrix, RMatrix, DVector<f64>) {
        let gw = x.transpose() * grad;
        let gb = DVector::from_iterator(grad.ncols(), grad.column_iter().map(|c| c.sum()));
        (grad * self.weight.transpose(), gw, gb)
    }

    pub fn n_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

/// Inverted dropout mask with keep probability `1 - p`, scaled by `1/(1-p)`.
pub(crate) fn dropout_mask(shape: (usize, usize), p: f64, rng: &mut dyn rand::RngCore) -> RMatrix {
    let keep = 1.0 - p;
    RMatrix::from_fn(shape.0, shape.1, |_, _| {
        if rng.random::<f64>() < keep {
            1.0 / keep
        } else {
            0.0
        }
    })
}

/// Flat-vector packing helpers shared by the models.
pub(crate) mod flat {
    use super::*;

    pub fn push_complex(out: &mut Vec<f64>, m: &CMatrix) {
        for c in m.iter() {
            out.push(c.re);
            out.push(c.im);
        }
    }

    pub fn push_real<'a>(out: &mut Vec<f64>, values: impl IntoIterator<Item = &'a f64>) {
        out.extend(values);
    }

    pub struct Reader<'a> {
        data: &'a [f64],
        pos: usize,
    }

    impl<'a> Reader<'a> {
        pub fn new(data: &'a [f64]) -> Self {
            Self { data, pos: 0 }
        }

        fn take(&mut self, n: usize) -> Result<&'a [f64]> {
            let end = self.pos + n;
            if end > self.data.len() {
                return Err(crate::error::shape_mismatch(
                    format!("at least {end} parameters"),
                    self.data.len(),
                ));
            }
            let out = &self.data[self.pos..end];
            self.pos = end;
            Ok(out)
        }

        pub fn complex_into(&mut self, m: &mut CMatrix) -> Result<()> {
            let vals = self.take(2 * m.len())?;
            for (c, pair) in m.iter_mut().zip(vals.chunks_exact(2)) {
                *c = Complex64::new(pair[0], pair[1]);
            }
            Ok(())
        }

        pub fn real_into<'b>(&mut self, dst: impl IntoIterator<Item = &'b mut f64>) -> Result<()> {
            let dst: Vec<&mut f64> = dst.into_iter().collect();
            let vals = self.take(dst.len())?;
            for (d, v) in dst.into_iter().zip(vals) {
                *d = *v;
            }
            Ok(())
        }

        pub fn finish(self) -> Result<()> {
            if self.pos != self.data.len() {
                return Err(crate::error::shape_mismatch(
                    format!("{} parameters", self.pos),
                    self.data.len(),
                ));
            }
            Ok(())
        }
    }
}
