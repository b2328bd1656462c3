use nalgebra::DVector;
use rand::Rng;

use super::Activation;
use crate::error::{shape_mismatch, Result};
use crate::framelet::{FrameletCoefficients, FrameletSystem};
use crate::{CMatrix, Complex64};

/// One magnetic framelet convolution `σ(F* diag(ω) F (X W))`.
///
/// `gains` holds one real gain per coefficient row: entry `j·N + i` scales
/// row `i` of block `j`, shared across channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameletConv {
    pub weight: CMatrix,
    pub gains: DVector<f64>,
    pub activation: Activation,
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct ConvCache {
    input: CMatrix,
    coeffs: FrameletCoefficients,
    pre_activation: CMatrix,
}

impl FrameletConv {
    /// Complex Glorot weights, unit gains.
    pub fn new<R: Rng + ?Sized>(
        system: &FrameletSystem,
        d_in: usize,
        d_out: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let bound = (6.0 / (d_in + d_out) as f64).sqrt() / 2f64.sqrt();
        let weight = CMatrix::from_fn(d_in, d_out, |_, _| {
            Complex64::new(rng.random_range(-bound..=bound), rng.random_range(-bound..=bound))
        });
        Self {
            weight,
            gains: DVector::from_element(system.n_blocks() * system.n_nodes(), 1.0),
            activation,
        }
    }

    /// `W = I`, `ω = 1`.
    pub fn identity(system: &FrameletSystem, dim: usize, activation: Activation) -> Self {
        Self {
            weight: CMatrix::identity(dim, dim),
            gains: DVector::from_element(system.n_blocks() * system.n_nodes(), 1.0),
            activation,
        }
    }

    pub fn d_in(&self) -> usize {
        self.weight.nrows()
    }

    pub fn d_out(&self) -> usize {
        self.weight.ncols()
    }

    pub fn n_params(&self) -> usize {
        2 * self.weight.len() + self.gains.len()
    }

    fn check(&self, system: &FrameletSystem, x: &CMatrix) -> Result<()> {
        let stack = system.n_blocks() * system.n_nodes();
        if self.gains.len() != stack {
            return Err(shape_mismatch(format!("{stack} gains"), self.gains.len()));
        }
        if x.ncols() != self.d_in() {
            return Err(shape_mismatch(
                format!("{} input columns", self.d_in()),
                x.ncols(),
            ));
        }
        Ok(())
    }

    fn scale_rows(&self, coeffs: &mut FrameletCoefficients, n: usize) {
        for (j, block) in coeffs.blocks.iter_mut().enumerate() {
            for (i, mut row) in block.row_iter_mut().enumerate() {
                row *= Complex64::new(self.gains[j * n + i], 0.0);
            }
        }
    }

    pub fn forward(&self, system: &FrameletSystem, x: &CMatrix) -> Result<CMatrix> {
        Ok(self.activation.apply(&self.forward_cached(system, x)?.pre_activation))
    }

    pub(crate) fn forward_cached(&self, system: &FrameletSystem, x: &CMatrix) -> Result<ConvCache> {
        self.check(system, x)?;
        let coeffs = system.analyze(&(x * &self.weight))?;
        let mut scaled = coeffs.clone();
        self.scale_rows(&mut scaled, system.n_nodes());
        let pre_activation = system.synthesize(&scaled)?;
        Ok(ConvCache {
            input: x.clone(),
            coeffs,
            pre_activation,
        })
    }

    pub(crate) fn output(&self, cache: &ConvCache) -> CMatrix {
        self.activation.apply(&cache.pre_activation)
    }

    /// Given the cotangent of the output, returns
    /// `(cotangent of the input, grad W, grad ω)`.
    pub(crate) fn backward(
        &self,
        system: &FrameletSystem,
        cache: &ConvCache,
        grad_out: &CMatrix,
    ) -> Result<(CMatrix, CMatrix, DVector<f64>)> {
        let n = system.n_nodes();
        let grad_z = self.activation.backward(&cache.pre_activation, grad_out);
        // F* is the adjoint of the analysis map, so its pullback is F.
        let mut grad_c = system.analyze(&grad_z)?;
        let mut grad_gains = DVector::zeros(self.gains.len());
        for (j, (c, g)) in cache.coeffs.blocks.iter().zip(&grad_c.blocks).enumerate() {
            for i in 0..n {
                grad_gains[j * n + i] = c
                    .row(i)
                    .iter()
                    .zip(g.row(i).iter())
                    .map(|(c, g)| (c.conj() * g).re)
                    .sum();
            }
        }
        self.scale_rows(&mut grad_c, n);
        let grad_y = system.synthesize(&grad_c)?;
        let grad_w = cache.input.ad_mul(&grad_y);
        let grad_x = &grad_y * self.weight.adjoint();
        Ok((grad_x, grad_w, grad_gains))
    }
}

/// Standalone form of [`FrameletConv::forward`].
pub fn conv_forward(layer: &FrameletConv, system: &FrameletSystem, x: &CMatrix) -> Result<CMatrix> {
    layer.forward(system, x)
}
