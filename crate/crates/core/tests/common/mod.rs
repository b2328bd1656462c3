#![allow(dead_code)]

use magframe::graph::Digraph;
use magframe::{CMatrix, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CHARGES: [f64; 6] = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25];

/// Erdős–Rényi style digraph: each ordered pair is an edge with
/// probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> Digraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Digraph::new(n, edges).unwrap()
}

pub fn random_signal(n: usize, d: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(n, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_real_signal(n: usize, d: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(n, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
}

/// Largest relative disagreement between the analytic gradient and central
/// differences with step `eps`, over every parameter component. The
/// denominator is floored at `floor` so components whose true gradient is
/// (numerically) zero are compared absolutely.
pub fn fd_max_relative_error<M: magframe::network::Trainable + Clone>(
    model: &M,
    batch: &magframe::network::Batch<'_>,
    eps: f64,
    floor: f64,
) -> f64 {
    let (_, grad) = model.loss_and_grad(batch, None).unwrap();
    let base = model.parameters();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for k in 0..base.len() {
        let mut p = base.clone();
        p[k] = base[k] + eps;
        probe.set_parameters(&p).unwrap();
        let up = probe.loss_and_grad(batch, None).unwrap().0;
        p[k] = base[k] - eps;
        probe.set_parameters(&p).unwrap();
        let down = probe.loss_and_grad(batch, None).unwrap().0;
        let numeric = (up - down) / (2.0 * eps);
        let denom = grad[k].abs().max(numeric.abs()).max(floor);
        worst = worst.max((grad[k] - numeric).abs() / denom);
    }
    worst
}
