use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::graph::Digraph;
use crate::RMatrix;

/// Parameters of the two-cluster directed benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_per_cluster: usize,
    /// Probability of an edge between two nodes of the same cluster, with
    /// a random orientation.
    pub p_in: f64,
    /// Probability of an edge between clusters.
    pub p_out: f64,
    /// Orient cross-cluster edges from cluster 0 to cluster 1 instead of
    /// at random. This makes the topology itself label-informative.
    pub forward_cross_edges: bool,
    pub feature_dim: usize,
    /// Standard deviation of the Gaussian jitter around the cluster means.
    pub feature_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// The benchmark shipped under `data/synthetic`: the directed graph is
    /// independent of the labels, so once the features are drowned in noise
    /// nothing is left to predict from.
    fn default() -> Self {
        Self {
            n_per_cluster: 200,
            p_in: 0.015,
            p_out: 0.015,
            forward_cross_edges: false,
            feature_dim: 4,
            feature_noise: 0.3,
            seed: 2024,
        }
    }
}

/// Nodes `0..n` form cluster 0 and `n..2n` cluster 1. Cluster `c` has
/// feature mean `e_c` (the `c`-th unit vector).
pub fn synthetic_two_cluster(spec: &SyntheticSpec) -> Dataset {
    assert!(spec.feature_dim >= 2, "need at least two feature dimensions");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = 2 * spec.n_per_cluster;
    let labels: Vec<usize> = (0..n).map(|i| i / spec.n_per_cluster).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if labels[u] == labels[v] {
                if rng.random_bool(spec.p_in) {
                    edges.push(if rng.random_bool(0.5) { (u, v) } else { (v, u) });
                }
            } else if rng.random_bool(spec.p_out) {
                edges.push(if spec.forward_cross_edges || rng.random_bool(0.5) { (u, v) } else { (v, u) });
            }
        }
    }
    let noise = Normal::new(0.0, spec.feature_noise).expect("finite noise level");
    let features = RMatrix::from_fn(n, spec.feature_dim, |i, j| {
        let mean = if j == labels[i] { 1.0 } else { 0.0 };
        mean + noise.sample(&mut rng)
    });
    Dataset {
        name: "synthetic".into(),
        graph: Digraph::new(n, edges).expect("generator emits valid edges"),
        features: Some(features),
        labels: Some(labels),
    }
}
