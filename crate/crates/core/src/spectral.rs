//! Dense Hermitian eigendecomposition and the dilation base used by the
//! exact framelet transform.

use std::f64::consts::PI;

use nalgebra::{DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::MagneticLaplacian;
use crate::{CMatrix, Complex64};

const EIG_TOLERANCE: f64 = 1e-15;
const EIG_MAX_ITERATIONS: usize = 100_000;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending, column `k` of
/// `eigenvectors` paired with `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.iter().copied().last().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.iter().copied().next().unwrap_or(0.0)
    }

    /// `U diag(f(λ)) U*`.
    pub fn spectral_matrix(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(f(self.eigenvalues[k]), 0.0);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `max |U Λ U* - L|`.
    pub fn reconstruction_residual(&self, l: &CMatrix) -> f64 {
        (self.spectral_matrix(|x| x) - l).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max |U* U - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.n();
        (self.eigenvectors.adjoint() * &self.eigenvectors - CMatrix::identity(n, n))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

pub fn eig_hermitian(l: &MagneticLaplacian) -> Result<EigenSystem> {
    eig_hermitian_matrix(l.matrix())
}

/// Eigendecomposition of any Hermitian matrix; only the lower triangle is
/// read by the solver.
pub fn eig_hermitian_matrix(m: &CMatrix) -> Result<EigenSystem> {
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenSystem {
            eigenvalues: DVector::zeros(0),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(m.clone(), EIG_TOLERANCE, EIG_MAX_ITERATIONS)
        .ok_or(Error::ConvergenceFailure)?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = CMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Smallest `M >= 0` with `lambda_max <= 2^M π`.
pub fn dilation_base(lambda_max: f64) -> u32 {
    let mut m = 0u32;
    let mut bound = PI;
    while lambda_max > bound {
        m += 1;
        bound *= 2.0;
    }
    m
}
