//! Directed graphs, the symmetric/skew split of their adjacency, and the
//! normalized magnetic Laplacian
//!
//! ```text
//! L(q) = I - Psi(q) ⊙ (D_sym^{-1/2} A_sym D_sym^{-1/2}),
//! Psi(q)(i, j) = exp(2πi q A_skew(i, j))
//! ```
//!
//! Nodes with zero symmetric degree follow the pseudo-inverse convention:
//! their row and column of the normalized adjacency vanish, leaving a unit
//! diagonal entry.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::io::BufRead;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sparse::Csr;
use crate::{CMatrix, Complex64};

/// Largest admissible charge parameter.
pub const MAX_CHARGE: f64 = 0.25;

/// An unweighted directed graph without self-loops or multi-edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    edge_set: HashSet<(usize, usize)>,
}

impl Digraph {
    /// Validates and stores the edge list. Edge order is normalized
    /// (sorted), so two graphs with the same edge set compare equal.
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edge_set = HashSet::new();
        let mut list = Vec::new();
        for (u, v) in edges {
            for index in [u, v] {
                if index >= n_nodes {
                    return Err(Error::NodeOutOfRange { index, n_nodes });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !edge_set.insert((u, v)) {
                return Err(Error::DuplicateEdge(u, v));
            }
            list.push((u, v));
        }
        list.sort_unstable();
        Ok(Self {
            n_nodes,
            edges: list,
            edge_set,
        })
    }

    pub fn edgeless(n_nodes: usize) -> Self {
        Self {
            n_nodes,
            edges: Vec::new(),
            edge_set: HashSet::new(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_set.contains(&(u, v))
    }

    /// Same nodes, every edge flipped.
    pub fn reversed(&self) -> Self {
        Self::new(self.n_nodes, self.edges.iter().map(|&(u, v)| (v, u)))
            .expect("reversal preserves validity")
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_nodes {
            return Err(crate::error::shape_mismatch(self.n_nodes, perm.len()));
        }
        Self::new(self.n_nodes, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }

    /// Dense binary adjacency, `A(i, j) = 1` iff `(i, j)` is an edge.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n_nodes, self.n_nodes);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
        }
        a
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_nodes];
        for &(_, v) in &self.edges {
            deg[v] += 1;
        }
        deg
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_nodes];
        for &(u, _) in &self.edges {
            deg[u] += 1;
        }
        deg
    }

    /// Reads the tab-separated edge-list format: one `src<TAB>dst` pair per
    /// line, `#` comments, and an optional `#nodes=N` header overriding the
    /// inferred node count `1 + max id`.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut edges = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(n) = comment.trim().strip_prefix("nodes=") {
                    let n = n.trim().parse::<usize>().map_err(|e| Error::Parse {
                        line: line_no,
                        message: format!("bad node count: {e}"),
                    })?;
                    declared = Some(n);
                }
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "expected 'src<TAB>dst', found {} field(s); weighted edges are not supported",
                        fields.len()
                    ),
                });
            }
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad node id '{s}': {e}"),
                })
            };
            edges.push((parse(fields[0])?, parse(fields[1])?));
        }
        let inferred = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let n_nodes = declared.unwrap_or(inferred);
        Self::new(n_nodes, edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_edge_list(std::io::BufReader::new(file))
    }

    pub fn write_edge_list<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#nodes={}", self.n_nodes)?;
        for &(u, v) in &self.edges {
            writeln!(w, "{u}\t{v}")?;
        }
        Ok(())
    }
}

/// `A = A_sym + A_skew / 2` with `A_sym = (A + Aᵀ)/2` and `A_skew = A - Aᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyDecomposition {
    pub a_sym: DMatrix<f64>,
    pub a_skew: DMatrix<f64>,
    pub d_sym: DVector<f64>,
}

pub fn decompose_adjacency(g: &Digraph) -> AdjacencyDecomposition {
    let a = g.adjacency();
    let at = a.transpose();
    let a_sym = (&a + &at) * 0.5;
    let a_skew = &a - &at;
    let d_sym = DVector::from_iterator(g.n_nodes(), a_sym.row_iter().map(|r| r.sum()));
    AdjacencyDecomposition {
        a_sym,
        a_skew,
        d_sym,
    }
}

/// The normalized magnetic Laplacian of a digraph at charge `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticLaplacian {
    q: f64,
    matrix: CMatrix,
}

fn check_charge(q: f64) -> Result<()> {
    if (0.0..=MAX_CHARGE).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidCharge(q))
    }
}

/// Off-diagonal entries of `L(q)` for the upper triangle `i < j`, one per
/// connected unordered pair. The lower triangle is the conjugate.
fn upper_entries(g: &Digraph, q: f64) -> Vec<(usize, usize, Complex64)> {
    let n = g.n_nodes();
    let mut a_sym_deg = vec![0.0f64; n];
    let mut pairs: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(u, v)| (u.min(v), u.max(v)))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    for &(i, j) in &pairs {
        let w = 0.5 * (a(g, i, j) + a(g, j, i));
        a_sym_deg[i] += w;
        a_sym_deg[j] += w;
    }
    let inv_sqrt = |d: f64| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 };
    pairs
        .into_iter()
        .map(|(i, j)| {
            let sym = 0.5 * (a(g, i, j) + a(g, j, i));
            let skew = a(g, i, j) - a(g, j, i);
            let norm = sym * inv_sqrt(a_sym_deg[i]) * inv_sqrt(a_sym_deg[j]);
            let phase = Complex64::from_polar(1.0, 2.0 * PI * q * skew);
            (i, j, -phase * norm)
        })
        .collect()
}

fn a(g: &Digraph, i: usize, j: usize) -> f64 {
    if g.has_edge(i, j) {
        1.0
    } else {
        0.0
    }
}

impl MagneticLaplacian {
    pub fn new(g: &Digraph, q: f64) -> Result<Self> {
        check_charge(q)?;
        let n = g.n_nodes();
        let mut matrix = CMatrix::identity(n, n);
        for (i, j, v) in upper_entries(g, q) {
            matrix[(i, j)] = v;
            matrix[(j, i)] = v.conj();
        }
        Ok(Self { q, matrix })
    }

    /// Wraps an externally supplied matrix, rejecting anything that is not
    /// Hermitian to within `1e-12`.
    pub fn from_matrix(q: f64, matrix: CMatrix) -> Result<Self> {
        check_charge(q)?;
        if !matrix.is_square() {
            return Err(crate::error::shape_mismatch(
                "square matrix",
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        let residual = hermitian_residual(&matrix);
        if !(residual <= 1e-12) {
            return Err(Error::NotHermitian(residual));
        }
        Ok(Self { q, matrix })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_nodes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn to_sparse(&self) -> Csr<Complex64> {
        Csr::from_dense(&self.matrix)
    }
}

/// Builds `L(q)` directly in CSR form without a dense intermediate.
pub fn sparse_magnetic_laplacian(g: &Digraph, q: f64) -> Result<Csr<Complex64>> {
    check_charge(q)?;
    let n = g.n_nodes();
    let upper = upper_entries(g, q);
    let mut trip = Vec::with_capacity(n + 2 * upper.len());
    trip.extend((0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))));
    for (i, j, v) in upper {
        trip.push((i, j, v));
        trip.push((j, i, v.conj()));
    }
    Ok(Csr::from_triplets(n, n, trip))
}

/// `max |M(i,j) - conj(M(j,i))|`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `I - D^{-1/2} A_sym D^{-1/2}`, the ordinary symmetric normalized
/// Laplacian of the symmetrized graph.
pub fn symmetric_normalized_laplacian(g: &Digraph) -> DMatrix<f64> {
    let dec = decompose_adjacency(g);
    let n = g.n_nodes();
    let inv: Vec<f64> = dec
        .d_sym
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - inv[i] * dec.a_sym[(i, j)] * inv[j]
    })
}
