use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{cross_entropy, dropout_mask, flat, select_rows, Batch, Targets, Trainable};
use crate::error::{shape_mismatch, Error, Result};
use crate::graph::Digraph;
use crate::sparse::Csr;
use crate::RMatrix;

/// Two-layer GCN on the symmetrized graph, the real-valued comparator for
/// node classification:
///
/// ```text
/// logits = Â dropout(ReLU(Â X W1 + b1)) W2 + b2,   Â = D̃^{-1/2} (A_s + I) D̃^{-1/2}
/// ```
///
/// where `A_s` is the binary symmetrized adjacency.
#[derive(Debug, Clone)]
pub struct Gcn {
    propagation: Csr<f64>,
    pub w1: RMatrix,
    pub b1: DVector<f64>,
    pub w2: RMatrix,
    pub b2: DVector<f64>,
    pub dropout: f64,
}

/// `D̃^{-1/2} (A_s + I) D̃^{-1/2}` as a sparse matrix.
pub fn gcn_propagation(g: &Digraph) -> Csr<f64> {
    let n = g.n_nodes();
    let mut neighbours: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for &(u, v) in g.edges() {
        for (a, b) in [(u, v), (v, u)] {
            if !neighbours[a].contains(&b) {
                neighbours[a].push(b);
            }
        }
    }
    let inv_sqrt: Vec<f64> = neighbours.iter().map(|nb| 1.0 / (nb.len() as f64).sqrt()).collect();
    let triplets = neighbours
        .iter()
        .enumerate()
        .flat_map(|(i, nb)| nb.iter().map(move |&j| (i, j)))
        .map(|(i, j)| (i, j, inv_sqrt[i] * inv_sqrt[j]))
        .collect();
    Csr::from_triplets(n, n, triplets)
}

fn glorot<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> RMatrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    RMatrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..=bound))
}

fn add_bias(m: &mut RMatrix, b: &DVector<f64>) {
    for mut row in m.row_iter_mut() {
        row += b.transpose();
    }
}

fn column_sums(m: &RMatrix) -> DVector<f64> {
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum()))
}

impl Gcn {
    pub fn new(g: &Digraph, input_dim: usize, hidden: usize, n_classes: usize, dropout: f64, seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden == 0 || n_classes < 2 {
            return Err(Error::InvalidConfig("GCN needs non-zero widths and at least two classes".into()));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::InvalidConfig(format!("dropout {dropout} outside [0, 1)")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            propagation: gcn_propagation(g),
            w1: glorot(input_dim, hidden, &mut rng),
            b1: DVector::zeros(hidden),
            w2: glorot(hidden, n_classes, &mut rng),
            b2: DVector::zeros(n_classes),
            dropout,
        })
    }

    pub fn propagation(&self) -> &Csr<f64> {
        &self.propagation
    }

    fn check(&self, features: &RMatrix) -> Result<()> {
        let want = (self.propagation.nrows(), self.w1.nrows());
        if features.shape() != want {
            return Err(shape_mismatch(format!("{want:?} features"), format!("{:?}", features.shape())));
        }
        Ok(())
    }

    fn nodes<'a>(targets: Targets<'a>) -> Result<&'a [usize]> {
        match targets {
            Targets::Nodes(n) => Ok(n),
            Targets::Pairs(_) => Err(Error::InvalidConfig("the GCN comparator supports node tasks only".into())),
        }
    }
}

impl Trainable for Gcn {
    fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        flat::push_real(&mut out, self.w1.iter());
        flat::push_real(&mut out, self.b1.iter());
        flat::push_real(&mut out, self.w2.iter());
        flat::push_real(&mut out, self.b2.iter());
        out
    }

    fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        let mut updated = self.clone();
        let mut reader = flat::Reader::new(params);
        reader.real_into(updated.w1.iter_mut())?;
        reader.real_into(updated.b1.iter_mut())?;
        reader.real_into(updated.w2.iter_mut())?;
        reader.real_into(updated.b2.iter_mut())?;
        reader.finish()?;
        *self = updated;
        Ok(())
    }

    fn logits(&self, features: &RMatrix, targets: Targets<'_>) -> Result<RMatrix> {
        self.check(features)?;
        let nodes = Self::nodes(targets)?;
        let mut z1 = self.propagation.mul_dense(&(features * &self.w1));
        add_bias(&mut z1, &self.b1);
        let h1 = z1.map(|v| v.max(0.0));
        let mut out = self.propagation.mul_dense(&(h1 * &self.w2));
        add_bias(&mut out, &self.b2);
        select_rows(&out, nodes)
    }

    fn loss_and_grad(&self, batch: &Batch<'_>, dropout_rng: Option<&mut dyn rand::RngCore>) -> Result<(f64, Vec<f64>)> {
        self.check(batch.features)?;
        let nodes = Self::nodes(batch.targets)?;
        let p = self.propagation.mul_dense(batch.features);
        let mut z1 = &p * &self.w1;
        add_bias(&mut z1, &self.b1);
        let h1 = z1.map(|v| v.max(0.0));
        let mask = match dropout_rng {
            Some(rng) if self.dropout > 0.0 => Some(dropout_mask(h1.shape(), self.dropout, rng)),
            _ => None,
        };
        let d = match &mask {
            Some(m) => h1.component_mul(m),
            None => h1,
        };
        let ad = self.propagation.mul_dense(&d);
        let mut full = &ad * &self.w2;
        add_bias(&mut full, &self.b2);
        let logits = select_rows(&full, nodes)?;
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch: 0 });
        }
        let (loss, grad_logits) = cross_entropy(&logits, batch.labels)?;

        let mut grad_full = RMatrix::zeros(full.nrows(), full.ncols());
        for (k, &i) in nodes.iter().enumerate() {
            let mut row = grad_full.row_mut(i);
            row += grad_logits.row(k);
        }
        let grad_w2 = ad.transpose() * &grad_full;
        let grad_b2 = column_sums(&grad_full);
        // Â is symmetric, so its transpose is itself.
        let mut grad_z1 = self.propagation.mul_dense(&(&grad_full * self.w2.transpose()));
        if let Some(m) = &mask {
            grad_z1.component_mul_assign(m);
        }
        grad_z1.zip_apply(&z1, |g, z| {
            if z <= 0.0 {
                *g = 0.0
            }
        });
        let grad_w1 = p.transpose() * &grad_z1;
        let grad_b1 = column_sums(&grad_z1);

        let mut grad = Vec::with_capacity(self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len());
        grad.extend(grad_w1.iter());
        grad.extend(grad_b1.iter());
        grad.extend(grad_w2.iter());
        grad.extend(grad_b2.iter());
        Ok((loss, grad))
    }
}
