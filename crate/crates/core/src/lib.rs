//! Magnetic-Laplacian framelet transforms on directed graphs and the
//! Framelet-MagNet spectral convolution network.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: digraphs, adjacency decomposition, magnetic Laplacian
//! - [`spectral`]: Hermitian eigendecomposition, dilation base
//! - [`filterbank`]: the Haar, Linear, Quadratic, Sigmoid and Entropy banks
//! - [`framelet`]: exact and Chebyshev-approximated framelet transforms
//! - [`network`]: framelet convolution layers, heads, training
//! - [`pipeline`]: datasets, splits, features, experiments

pub mod error;
pub mod filterbank;
pub mod framelet;
pub mod graph;
pub mod network;
pub mod pipeline;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};

pub type Complex64 = nalgebra::Complex<f64>;
pub type CMatrix = nalgebra::DMatrix<Complex64>;
pub type RMatrix = nalgebra::DMatrix<f64>;

/// Promotes a real matrix to complex.
pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Largest entry modulus, `max |m(i, j)|`.
pub fn max_abs<R, C, S>(m: &nalgebra::Matrix<Complex64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<Complex64, R, C>,
{
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
