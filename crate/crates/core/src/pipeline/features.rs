use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::RMatrix;

/// Columns with a standard deviation below this are treated as constant.
const CONSTANT_COLUMN_STD: f64 = 1e-12;

/// Zero mean and unit population variance per column; constant columns
/// become zero.
pub fn standardize_columns(m: &RMatrix) -> RMatrix {
    let n = m.nrows();
    let mut out = m.clone();
    if n == 0 {
        return out;
    }
    for mut col in out.column_iter_mut() {
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        if std < CONSTANT_COLUMN_STD {
            col.fill(0.0);
        } else {
            col.apply(|v| *v = (*v - mean) / std);
        }
    }
    out
}

/// Standardized `[in-degree, out-degree]` per node.
pub fn degree_features(g: &Digraph) -> RMatrix {
    let (ins, outs) = (g.in_degrees(), g.out_degrees());
    let raw = RMatrix::from_fn(g.n_nodes(), 2, |i, c| if c == 0 { ins[i] } else { outs[i] } as f64);
    standardize_columns(&raw)
}

/// `features + G` with `G` i.i.d. normal of standard deviation `sigma`.
pub fn add_noise(features: &RMatrix, sigma: f64, seed: u64) -> Result<RMatrix> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise sigma {sigma} must be finite and non-negative")));
    }
    if sigma == 0.0 {
        return Ok(features.clone());
    }
    let normal = Normal::new(0.0, sigma).expect("sigma checked above");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(features.map(|v| v + normal.sample(&mut rng)))
}
