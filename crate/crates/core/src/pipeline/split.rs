use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::network::Task;

pub const LINK_VAL_FRACTION: f64 = 0.05;
pub const LINK_TEST_FRACTION: f64 = 0.15;
pub const MAX_SPLIT_ATTEMPTS: usize = 100;

/// Node index sets for a node-classification split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// `floor(fraction · n)`, robust to products like `0.29 · 100` landing a
/// hair below an integer.
fn floor_count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// `per_class` training nodes from every class, `n_val` validation nodes
/// from the rest, everything else for testing.
pub fn node_split_citation(labels: &[usize], per_class: usize, n_val: usize, seed: u64) -> Result<NodeSplit> {
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < per_class {
            return Err(Error::InsufficientClassMembers {
                class,
                count: members.len(),
                required: per_class,
            });
        }
    }
    let needed = per_class * n_classes + n_val;
    if labels.len() <= needed {
        return Err(Error::SplitTooSmall(format!(
            "{} nodes, {needed} needed for train and validation plus a non-empty test set",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(per_class * n_classes);
    let mut rest = Vec::with_capacity(labels.len() - per_class * n_classes);
    for mut members in by_class {
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..per_class]);
        rest.extend_from_slice(&members[per_class..]);
    }
    rest.shuffle(&mut rng);
    let test = rest.split_off(n_val);
    Ok(NodeSplit {
        train,
        val: rest,
        test,
        seed,
    })
}

/// Uniform assignment with `floor` counts for train and validation and the
/// remainder for testing.
pub fn node_split_fraction(labels: &[usize], fractions: [f64; 3], seed: u64) -> Result<NodeSplit> {
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "split fractions {fractions:?} must lie in [0, 1] and sum to 1"
        )));
    }
    let n = labels.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = floor_count(fractions[0], n);
    let n_val = floor_count(fractions[1], n).min(n - n_train);
    let test = order.split_off(n_train + n_val);
    let val = order.split_off(n_train);
    Ok(NodeSplit {
        train: order,
        val,
        test,
        seed,
    })
}

/// Ordered node pairs with their class labels.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LinkPartition {
    pub pairs: Vec<(usize, usize)>,
    pub labels: Vec<usize>,
}

impl LinkPartition {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct LinkSplit {
    /// The input graph without the validation and test edges.
    pub train_graph: Digraph,
    pub train: LinkPartition,
    pub val: LinkPartition,
    pub test: LinkPartition,
    pub seed: u64,
}

fn degrees(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut d = vec![0; n];
    for &(u, v) in edges {
        d[u] += 1;
        d[v] += 1;
    }
    d
}

/// Holds out 5% of the edges for validation and 15% for testing, retrying
/// until every node that had an edge keeps one in the training graph.
///
/// Existence task: each partition's edges are positives (label 0) and an
/// equal number of sampled ordered non-edges are negatives (label 1),
/// disjoint across partitions. Direction task: each edge `(u, v)` is
/// presented as `(u, v)` with label 0 or `(v, u)` with label 1 by a fair
/// coin.
pub fn link_split(g: &Digraph, task: Task, seed: u64) -> Result<LinkSplit> {
    if !task.is_link() {
        return Err(Error::InvalidConfig("link_split needs a link task".into()));
    }
    let n = g.n_nodes();
    let m = g.n_edges();
    let n_val = floor_count(LINK_VAL_FRACTION, m);
    let n_test = floor_count(LINK_TEST_FRACTION, m);
    let original = degrees(n, g.edges());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut chosen = None;
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        let mut edges = g.edges().to_vec();
        edges.shuffle(&mut rng);
        let held = edges.split_off(m - n_val - n_test);
        let kept = degrees(n, &edges);
        if original.iter().zip(&kept).all(|(&o, &k)| o == 0 || k > 0) {
            chosen = Some((edges, held));
            break;
        }
    }
    let (mut train_edges, mut held) = chosen.ok_or(Error::RetryExhausted(MAX_SPLIT_ATTEMPTS))?;
    let test_edges = held.split_off(n_val);
    let val_edges = held;
    train_edges.sort_unstable();
    let train_graph = Digraph::new(n, train_edges.iter().copied())?;

    let partitions = [train_edges, val_edges, test_edges];
    let [train, val, test] = match task {
        Task::LinkExistence => existence_partitions(g, &partitions, &mut rng)?,
        _ => partitions.map(|edges| direction_partition(&edges, &mut rng)),
    };
    Ok(LinkSplit {
        train_graph,
        train,
        val,
        test,
        seed,
    })
}

fn direction_partition(edges: &[(usize, usize)], rng: &mut ChaCha8Rng) -> LinkPartition {
    let mut part = LinkPartition::default();
    for &(u, v) in edges {
        if rng.random_bool(0.5) {
            part.pairs.push((v, u));
            part.labels.push(1);
        } else {
            part.pairs.push((u, v));
            part.labels.push(0);
        }
    }
    part
}

fn existence_partitions(
    g: &Digraph,
    partitions: &[Vec<(usize, usize)>; 3],
    rng: &mut ChaCha8Rng,
) -> Result<[LinkPartition; 3]> {
    let n = g.n_nodes();
    let needed: usize = partitions.iter().map(Vec::len).sum();
    let available = (n * n.saturating_sub(1)).saturating_sub(g.n_edges());
    if needed > available {
        return Err(Error::SplitTooSmall(format!(
            "{needed} negative pairs requested, only {available} non-edges exist"
        )));
    }
    let mut used = HashSet::with_capacity(needed);
    let mut out: [LinkPartition; 3] = Default::default();
    for (part, edges) in out.iter_mut().zip(partitions) {
        part.pairs.extend_from_slice(edges);
        part.labels.extend(std::iter::repeat_n(0, edges.len()));
        let mut negatives = 0;
        while negatives < edges.len() {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v && !g.has_edge(u, v) && used.insert((u, v)) {
                part.pairs.push((u, v));
                part.labels.push(1);
                negatives += 1;
            }
        }
    }
    Ok(out)
}
