//! Tight framelet filter banks on the spectral interval `[0, π]`.
//!
//! Every bank is a family `z_0, ..., z_R` with `Σ_r z_r(δ)² = 1`. `z_0` is
//! the low-pass filter and `z_R` the highest-pass one. Haar, Linear and
//! Quadratic come from a multiresolution analysis and carry a refinable
//! scaling function; Sigmoid and Entropy are quasi-framelet banks defined
//! directly in the frequency domain.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default transition sharpness of the Sigmoid bank.
pub const DEFAULT_SIGMOID_ALPHA: f64 = 6.0;

/// Truncation depth of the infinite-product scaling function.
pub const SCALING_PRODUCT_DEPTH: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BankName {
    Haar,
    Linear,
    Quadratic,
    Sigmoid,
    Entropy,
}

impl BankName {
    pub const ALL: [BankName; 5] = [
        BankName::Haar,
        BankName::Linear,
        BankName::Quadratic,
        BankName::Sigmoid,
        BankName::Entropy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BankName::Haar => "haar",
            BankName::Linear => "linear",
            BankName::Quadratic => "quadratic",
            BankName::Sigmoid => "sigmoid",
            BankName::Entropy => "entropy",
        }
    }
}

impl fmt::Display for BankName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BankName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BankName::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownBank(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankKind {
    Mra,
    Quasi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterBank {
    name: BankName,
    sigmoid_alpha: f64,
}

/// Shorthand for [`FilterBank::new`].
pub fn make_bank(name: &str) -> Result<FilterBank> {
    Ok(FilterBank::new(name.parse()?))
}

impl FilterBank {
    pub fn new(name: BankName) -> Self {
        Self {
            name,
            sigmoid_alpha: DEFAULT_SIGMOID_ALPHA,
        }
    }

    /// Overrides the Sigmoid transition sharpness. Ignored by other banks.
    pub fn with_sigmoid_alpha(mut self, alpha: f64) -> Self {
        self.sigmoid_alpha = alpha;
        self
    }

    pub fn name(&self) -> BankName {
        self.name
    }

    pub fn sigmoid_alpha(&self) -> f64 {
        self.sigmoid_alpha
    }

    pub fn kind(&self) -> BankKind {
        match self.name {
            BankName::Haar | BankName::Linear | BankName::Quadratic => BankKind::Mra,
            BankName::Sigmoid | BankName::Entropy => BankKind::Quasi,
        }
    }

    /// Number of high-pass filters `R`.
    pub fn n_high(&self) -> usize {
        match self.name {
            BankName::Haar | BankName::Sigmoid | BankName::Entropy => 1,
            BankName::Linear => 2,
            BankName::Quadratic => 3,
        }
    }

    /// `R + 1`.
    pub fn n_filters(&self) -> usize {
        self.n_high() + 1
    }

    /// `z_r(δ)`, with `δ` clamped into `[0, π]`.
    pub fn eval(&self, r: usize, delta: f64) -> f64 {
        assert!(r <= self.n_high(), "band {r} out of range for {}", self.name);
        let d = delta.clamp(0.0, PI);
        let (c, s) = ((d / 2.0).cos(), (d / 2.0).sin());
        match (self.name, r) {
            (BankName::Haar, 0) => c,
            (BankName::Haar, _) => s,
            (BankName::Linear, 0) => c * c,
            (BankName::Linear, 1) => d.sin() / SQRT_2,
            (BankName::Linear, _) => s * s,
            (BankName::Quadratic, 0) => c * c * c,
            (BankName::Quadratic, 1) => 3f64.sqrt() * c * c * s,
            (BankName::Quadratic, 2) => 3f64.sqrt() * c * s * s,
            (BankName::Quadratic, _) => s * s * s,
            (BankName::Sigmoid, 0) => {
                1.0 / (1.0 + (self.sigmoid_alpha * (d - FRAC_PI_2)).exp()).sqrt()
            }
            (BankName::Sigmoid, _) => {
                1.0 / (1.0 + (-self.sigmoid_alpha * (d - FRAC_PI_2)).exp()).sqrt()
            }
            // sqrt(1 - h(t)) and sqrt(h(t)) for the smoothstep h(t) = t²(3 - 2t),
            // in factored form: 1 - h = (1 - t)²(1 + 2t), h = t²(3 - 2t)
            (BankName::Entropy, 0) => {
                let t = d / PI;
                (1.0 - t) * (1.0 + 2.0 * t).sqrt()
            }
            (BankName::Entropy, _) => {
                let t = d / PI;
                t * (3.0 - 2.0 * t).sqrt()
            }
        }
    }

    pub fn eval_all(&self, delta: f64) -> Vec<f64> {
        (0..self.n_filters()).map(|r| self.eval(r, delta)).collect()
    }

    /// Max deviation of `Σ z_r²` from 1 on a uniform grid over `[0, π]`.
    pub fn verify_identity(&self, grid_size: usize) -> f64 {
        let filters: Vec<Box<dyn Fn(f64) -> f64 + '_>> = (0..self.n_filters())
            .map(|r| Box::new(move |d| self.eval(r, d)) as Box<dyn Fn(f64) -> f64>)
            .collect();
        identity_deviation(&filters, grid_size)
    }

    /// Refinable scaling function `ζ̂_r`. For `r = 0` this is the truncated
    /// infinite product `Π_{j=1}^{J} â_0(ξ / 2^j)`; high-pass scaling
    /// functions are `ζ̂_r(ξ) = â_r(ξ/2) ζ̂_0(ξ/2)`.
    pub fn scaling_function(&self, r: usize, xi: f64) -> Result<f64> {
        if self.kind() != BankKind::Mra {
            return Err(Error::NotMraBank(self.name.as_str()));
        }
        if r == 0 {
            Ok((1..=SCALING_PRODUCT_DEPTH)
                .map(|j| self.eval(0, xi / 2f64.powi(j as i32)))
                .product())
        } else {
            Ok(self.eval(r, xi / 2.0) * self.scaling_function(0, xi / 2.0)?)
        }
    }

    /// `max_r |ζ̂_r(2δ) - â_r(δ) ζ̂_0(δ)|`.
    pub fn mra_scaling_check(&self, delta: f64) -> Result<f64> {
        let base = self.scaling_function(0, delta)?;
        let mut worst = 0.0f64;
        for r in 0..self.n_filters() {
            let lhs = self.scaling_function(r, 2.0 * delta)?;
            worst = worst.max((lhs - self.eval(r, delta) * base).abs());
        }
        Ok(worst)
    }
}

/// Max of `|Σ_r f_r(δ)² - 1|` over `grid_size` uniform points in `[0, π]`.
pub fn identity_deviation<F: Fn(f64) -> f64>(filters: &[F], grid_size: usize) -> f64 {
    assert!(grid_size >= 2, "grid needs at least two points");
    (0..grid_size)
        .map(|i| {
            let d = PI * i as f64 / (grid_size - 1) as f64;
            (filters.iter().map(|f| f(d).powi(2)).sum::<f64>() - 1.0).abs()
        })
        .fold(0.0, f64::max)
}
