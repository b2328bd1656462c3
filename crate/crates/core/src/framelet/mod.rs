//! Undecimated magnetic framelet transform on digraphs.
//!
//! Operators are indexed by `(r, s)` with band `r ∈ 0..=R` and level
//! `s ∈ 1..=S`. With dilation base `M`, the spectral response of block
//! `(r, s)` is
//!
//! ```text
//! z_r(λ / 2^{M+s-1}) · z_0(λ / 2^{M+s-2}) ⋯ z_0(λ / 2^M)
//! ```
//!
//! and the blocks are stacked as `[(0,S); (1,1) … (1,S); …; (R,1) … (R,S)]`:
//! one low-pass block at the coarsest level, then the high-pass blocks
//! band-major. The identity condition of the bank telescopes through the
//! cascade, so the stacked operator satisfies `F* F = I`.
//!
//! Two representations share this contract. [`FrameletSystem::exact`]
//! materializes every operator as a dense `U f(Λ) U*` product.
//! [`FrameletSystem::chebyshev`] replaces each `z_r` by a Chebyshev
//! interpolant and applies the cascade factor by factor through sparse
//! products with the Laplacian; no dense operator is ever formed.

pub mod chebyshev;
mod io;

use serde::{Deserialize, Serialize};

use crate::error::{shape_mismatch, Error, Result};
use crate::filterbank::{BankName, FilterBank, DEFAULT_SIGMOID_ALPHA};
use crate::graph::{sparse_magnetic_laplacian, Digraph, MagneticLaplacian};
use crate::sparse::Csr;
use crate::spectral::{dilation_base, EigenSystem};
use crate::{max_abs, CMatrix, Complex64};

pub use chebyshev::{chebyshev_eval, chebyshev_fit};
use chebyshev::ShiftedOperator;
pub use io::{read_coefficients_csv, write_coefficients_csv};

/// Default number of dilation levels.
pub const DEFAULT_LEVELS: usize = 2;
/// Default Chebyshev degree of the fast transform.
pub const DEFAULT_CHEB_DEGREE: usize = 32;
/// Spectral bound used by the fast transform in place of `λ_max`.
pub const NORMALIZED_SPECTRAL_BOUND: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Chebyshev,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "chebyshev" | "fast" => Ok(Mode::Chebyshev),
            other => Err(Error::InvalidConfig(format!("unknown transform mode '{other}'"))),
        }
    }
}

/// Band and level of one operator in the stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockLabel {
    pub r: usize,
    pub s: usize,
}

/// Stack ordering for a bank with `n_high` high-pass filters and `levels`
/// dilation levels.
pub fn block_labels(n_high: usize, levels: usize) -> Vec<BlockLabel> {
    let mut labels = vec![BlockLabel { r: 0, s: levels }];
    for r in 1..=n_high {
        labels.extend((1..=levels).map(|s| BlockLabel { r, s }));
    }
    labels
}

/// Spectral response of block `(r, s)` at eigenvalue `lambda`.
pub fn block_response(bank: &FilterBank, dilation: u32, label: BlockLabel, lambda: f64) -> f64 {
    let scaled = |level: usize| lambda / 2f64.powi((dilation as usize + level - 1) as i32);
    let cascade: f64 = (1..label.s).map(|j| bank.eval(0, scaled(j))).product();
    bank.eval(label.r, scaled(label.s)) * cascade
}

/// A complex matrix held as separate real and imaginary parts, so the
/// products run on the optimized real kernels.
#[derive(Debug, Clone)]
struct SplitMatrix {
    re: nalgebra::DMatrix<f64>,
    im: nalgebra::DMatrix<f64>,
}

impl SplitMatrix {
    fn new(m: &CMatrix) -> Self {
        Self {
            re: m.map(|c| c.re),
            im: m.map(|c| c.im),
        }
    }

    fn mul(&self, x: &CMatrix) -> CMatrix {
        let (xr, xi) = (x.map(|c| c.re), x.map(|c| c.im));
        let mut re = &self.re * &xr;
        re -= &self.im * &xi;
        let mut im = &self.re * &xi;
        im += &self.im * &xr;
        re.zip_map(&im, Complex64::new)
    }
}

#[derive(Debug, Clone)]
enum Operators {
    Dense {
        ops: Vec<CMatrix>,
        split: Vec<SplitMatrix>,
    },
    Chebyshev {
        laplacian: Csr<Complex64>,
        /// One coefficient vector per band `r`.
        coeffs: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone)]
pub struct FrameletSystem {
    q: f64,
    levels: usize,
    dilation: u32,
    bank: FilterBank,
    n_nodes: usize,
    labels: Vec<BlockLabel>,
    operators: Operators,
}

/// Framelet coefficients, one block per operator, in stack order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameletCoefficients {
    pub blocks: Vec<CMatrix>,
    pub labels: Vec<BlockLabel>,
}

impl FrameletCoefficients {
    pub fn zeros_like(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| CMatrix::zeros(b.nrows(), b.ncols())).collect(),
            labels: self.labels.clone(),
        }
    }

    /// `Σ_j ‖blocks[j]‖²`.
    pub fn energy(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| max_abs(&(a - b)))
            .fold(0.0, f64::max)
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::InvalidConfig("dilation levels must be at least 1".into()));
    }
    Ok(())
}

impl FrameletSystem {
    /// Exact transform from a full eigendecomposition, with the dilation
    /// base taken from the largest eigenvalue.
    pub fn exact(eig: &EigenSystem, bank: FilterBank, levels: usize, q: f64) -> Result<Self> {
        Self::exact_with_dilation(eig, bank, levels, q, dilation_base(eig.lambda_max()))
    }

    /// Exact transform with an explicit dilation base.
    pub fn exact_with_dilation(
        eig: &EigenSystem,
        bank: FilterBank,
        levels: usize,
        q: f64,
        dilation: u32,
    ) -> Result<Self> {
        check_levels(levels)?;
        let labels = block_labels(bank.n_high(), levels);
        let ops = labels
            .iter()
            .map(|&label| {
                // symmetrize away round-off so analysis and synthesis stay
                // exact adjoints
                let op = eig.spectral_matrix(|lam| block_response(&bank, dilation, label, lam));
                (&op + op.adjoint()) * Complex64::new(0.5, 0.0)
            })
            .collect::<Vec<CMatrix>>();
        Ok(Self {
            q,
            levels,
            dilation,
            bank,
            n_nodes: eig.n(),
            labels,
            operators: Operators::Dense {
                split: ops.iter().map(SplitMatrix::new).collect(),
                ops,
            },
        })
    }

    /// Fast transform from a dense Laplacian; only its sparsity is used.
    pub fn fast(l: &MagneticLaplacian, bank: FilterBank, levels: usize, degree: usize) -> Result<Self> {
        Self::chebyshev(l.to_sparse(), l.q(), bank, levels, degree)
    }

    /// Fast transform over a sparse Laplacian whose spectrum lies in
    /// `[0, 2]`.
    pub fn chebyshev(
        laplacian: Csr<Complex64>,
        q: f64,
        bank: FilterBank,
        levels: usize,
        degree: usize,
    ) -> Result<Self> {
        check_levels(levels)?;
        if degree == 0 {
            return Err(Error::InvalidConfig("Chebyshev degree must be at least 1".into()));
        }
        if laplacian.nrows() != laplacian.ncols() {
            return Err(shape_mismatch(
                "square Laplacian",
                format!("{}x{}", laplacian.nrows(), laplacian.ncols()),
            ));
        }
        let coeffs = (0..bank.n_filters())
            .map(|r| chebyshev_fit(|d| bank.eval(r, d), degree))
            .collect();
        Ok(Self {
            q,
            levels,
            dilation: dilation_base(NORMALIZED_SPECTRAL_BOUND),
            bank,
            n_nodes: laplacian.nrows(),
            labels: block_labels(bank.n_high(), levels),
            operators: Operators::Chebyshev { laplacian, coeffs },
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dilation(&self) -> u32 {
        self.dilation
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_blocks(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[BlockLabel] {
        &self.labels
    }

    /// Position of block `(r, s)` in the stack.
    pub fn block_index(&self, r: usize, s: usize) -> Option<usize> {
        self.labels.iter().position(|l| l.r == r && l.s == s)
    }

    pub fn mode(&self) -> Mode {
        match self.operators {
            Operators::Dense { .. } => Mode::Exact,
            Operators::Chebyshev { .. } => Mode::Chebyshev,
        }
    }

    pub fn cheb_degree(&self) -> Option<usize> {
        match &self.operators {
            Operators::Dense { .. } => None,
            Operators::Chebyshev { coeffs, .. } => Some(coeffs[0].len() - 1),
        }
    }

    /// Dense operators (exact mode only).
    pub fn dense_operators(&self) -> Option<&[CMatrix]> {
        match &self.operators {
            Operators::Dense { ops, .. } => Some(ops),
            Operators::Chebyshev { .. } => None,
        }
    }

    /// Materializes the operators by transforming the identity. Meant for
    /// diagnostics on small graphs.
    pub fn materialize(&self) -> Vec<CMatrix> {
        let eye = CMatrix::identity(self.n_nodes, self.n_nodes);
        self.analyze(&eye).expect("identity has matching shape").blocks
    }

    fn level_operator<'a>(&self, laplacian: &'a Csr<Complex64>, s: usize) -> ShiftedOperator<'a> {
        ShiftedOperator {
            laplacian,
            scale: 1.0 / 2f64.powi((self.dilation as usize + s - 1) as i32),
        }
    }

    fn check_rows(&self, x: &CMatrix) -> Result<()> {
        if x.nrows() != self.n_nodes {
            return Err(shape_mismatch(
                format!("{} rows", self.n_nodes),
                format!("{} rows", x.nrows()),
            ));
        }
        Ok(())
    }

    /// Forward transform `F x`, block by block.
    pub fn analyze(&self, x: &CMatrix) -> Result<FrameletCoefficients> {
        self.check_rows(x)?;
        let blocks = match &self.operators {
            Operators::Dense { split, .. } => split.iter().map(|op| op.mul(x)).collect(),
            Operators::Chebyshev { laplacian, coeffs } => {
                let mut blocks = vec![CMatrix::zeros(0, 0); self.n_blocks()];
                let mut carry = x.clone();
                for s in 1..=self.levels {
                    let op = self.level_operator(laplacian, s);
                    let mut outs = op.apply_polynomials(coeffs, &carry).into_iter();
                    carry = outs.next().expect("low-pass output");
                    for (r, out) in (1..).zip(outs) {
                        blocks[self.block_index(r, s).expect("label exists")] = out;
                    }
                }
                blocks[0] = carry;
                blocks
            }
        };
        Ok(FrameletCoefficients {
            blocks,
            labels: self.labels.clone(),
        })
    }

    /// Adjoint transform `F* c = Σ_j F_j* c_j`.
    pub fn synthesize(&self, coeffs: &FrameletCoefficients) -> Result<CMatrix> {
        if coeffs.blocks.len() != self.n_blocks() {
            return Err(shape_mismatch(
                format!("{} blocks", self.n_blocks()),
                format!("{} blocks", coeffs.blocks.len()),
            ));
        }
        let cols = coeffs.blocks[0].ncols();
        for b in &coeffs.blocks {
            self.check_rows(b)?;
            if b.ncols() != cols {
                return Err(shape_mismatch(format!("{cols} columns"), format!("{} columns", b.ncols())));
            }
        }
        match &self.operators {
            Operators::Dense { split, .. } => {
                // every U f(Λ) U* is Hermitian, so F_j* = F_j
                let mut out = CMatrix::zeros(self.n_nodes, cols);
                for (op, block) in split.iter().zip(&coeffs.blocks) {
                    out += op.mul(block);
                }
                Ok(out)
            }
            Operators::Chebyshev { laplacian, coeffs: polys } => {
                // F_{r,s}* = p_0(X_1) ⋯ p_0(X_{s-1}) p_r(X_s): fold from the
                // coarsest level back to the finest.
                let mut carry = coeffs.blocks[0].clone();
                for s in (1..=self.levels).rev() {
                    let op = self.level_operator(laplacian, s);
                    let mut terms: Vec<(&[f64], &CMatrix)> = vec![(&polys[0], &carry)];
                    for r in 1..=self.bank.n_high() {
                        let idx = self.block_index(r, s).expect("label exists");
                        terms.push((&polys[r], &coeffs.blocks[idx]));
                    }
                    carry = op.sum_polynomials(&terms);
                }
                Ok(carry)
            }
        }
    }

    /// `max |Σ_j F_j* F_j − I|`.
    pub fn tightness_residual(&self) -> f64 {
        let ops = match &self.operators {
            Operators::Dense { ops, .. } => ops.clone(),
            Operators::Chebyshev { .. } => self.materialize(),
        };
        let n = self.n_nodes;
        let mut gram = CMatrix::zeros(n, n);
        for op in &ops {
            gram += op.ad_mul(op);
        }
        max_abs(&(gram - CMatrix::identity(n, n)))
    }
}

/// Forward transform of a complex signal.
pub fn mgft(sys: &FrameletSystem, x: &CMatrix) -> Result<FrameletCoefficients> {
    sys.analyze(x)
}

/// Forward transform of a real signal, promoted to complex.
pub fn mgft_real(sys: &FrameletSystem, x: &nalgebra::DMatrix<f64>) -> Result<FrameletCoefficients> {
    sys.analyze(&crate::to_complex(x))
}

pub fn reconstruct(sys: &FrameletSystem, coeffs: &FrameletCoefficients) -> Result<CMatrix> {
    sys.synthesize(coeffs)
}

/// Column `node` of `U z_r(Λ / 2^level) U*`: the low-pass (`r = 0`) or
/// high-pass framelet centred at `node`, with single-level scaling.
pub fn framelet_atom(
    eig: &EigenSystem,
    bank: &FilterBank,
    node: usize,
    level: usize,
    band: usize,
) -> Result<nalgebra::DVector<Complex64>> {
    let n = eig.n();
    if node >= n {
        return Err(Error::IndexOutOfRange { index: node, limit: n });
    }
    if band > bank.n_high() {
        return Err(Error::IndexOutOfRange {
            index: band,
            limit: bank.n_high() + 1,
        });
    }
    if level == 0 {
        return Err(Error::IndexOutOfRange { index: 0, limit: 1 });
    }
    let u = &eig.eigenvectors;
    let scale = 2f64.powi(level as i32);
    Ok(nalgebra::DVector::from_fn(n, |m, _| {
        (0..n)
            .map(|k| {
                let gain = bank.eval(band, eig.eigenvalues[k] / scale);
                u[(m, k)] * u[(node, k)].conj() * gain
            })
            .sum()
    }))
}

/// Everything needed to rebuild a [`FrameletSystem`] from a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub bank: BankName,
    #[serde(default = "default_alpha")]
    pub sigmoid_alpha: f64,
    pub q: f64,
    pub levels: usize,
    pub mode: Mode,
    pub cheb_degree: usize,
}

fn default_alpha() -> f64 {
    DEFAULT_SIGMOID_ALPHA
}

impl TransformConfig {
    pub fn new(bank: BankName, q: f64, mode: Mode) -> Self {
        Self {
            bank,
            sigmoid_alpha: DEFAULT_SIGMOID_ALPHA,
            q,
            levels: DEFAULT_LEVELS,
            mode,
            cheb_degree: DEFAULT_CHEB_DEGREE,
        }
    }

    pub fn filter_bank(&self) -> FilterBank {
        FilterBank::new(self.bank).with_sigmoid_alpha(self.sigmoid_alpha)
    }

    pub fn build(&self, g: &Digraph) -> Result<FrameletSystem> {
        match self.mode {
            Mode::Exact => {
                let l = MagneticLaplacian::new(g, self.q)?;
                let eig = crate::spectral::eig_hermitian(&l)?;
                FrameletSystem::exact(&eig, self.filter_bank(), self.levels, self.q)
            }
            Mode::Chebyshev => FrameletSystem::chebyshev(
                sparse_magnetic_laplacian(g, self.q)?,
                self.q,
                self.filter_bank(),
                self.levels,
                self.cheb_degree,
            ),
        }
    }
}
