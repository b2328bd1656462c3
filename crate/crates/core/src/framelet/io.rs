//! Coefficient dump format: CSV with header
//! `block_index,r,s,node,real,imag`, one row per node of each block of a
//! single-channel signal.

use std::io::{Read, Write};

use super::{BlockLabel, FrameletCoefficients};
use crate::error::{shape_mismatch, Error, Result};
use crate::{CMatrix, Complex64};

pub const COEFFICIENT_HEADER: &str = "block_index,r,s,node,real,imag";

pub fn write_coefficients_csv<W: Write>(coeffs: &FrameletCoefficients, mut w: W) -> Result<()> {
    writeln!(w, "{COEFFICIENT_HEADER}")?;
    for (j, (block, label)) in coeffs.blocks.iter().zip(&coeffs.labels).enumerate() {
        if block.ncols() != 1 {
            return Err(shape_mismatch("single-channel signal", format!("{} channels", block.ncols())));
        }
        for (node, v) in block.iter().enumerate() {
            writeln!(w, "{j},{},{},{node},{},{}", label.r, label.s, v.re, v.im)?;
        }
    }
    Ok(())
}

/// Parses a coefficient dump, checking it against the expected stack
/// ordering and node count.
pub fn read_coefficients_csv<R: Read>(
    reader: R,
    labels: &[BlockLabel],
    n_nodes: usize,
) -> Result<FrameletCoefficients> {
    let mut blocks = vec![CMatrix::zeros(n_nodes, 1); labels.len()];
    let mut seen = vec![false; labels.len() * n_nodes];
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let bad = |message: String| Error::Parse { line, message };
        if record.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", record.len())));
        }
        let int = |k: usize| {
            record[k]
                .trim()
                .parse::<usize>()
                .map_err(|e| bad(format!("field {k}: {e}")))
        };
        let float = |k: usize| {
            record[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("field {k}: {e}")))
        };
        let (j, r, s, node) = (int(0)?, int(1)?, int(2)?, int(3)?);
        let label = labels
            .get(j)
            .ok_or_else(|| bad(format!("block index {j} out of range")))?;
        if label.r != r || label.s != s {
            return Err(bad(format!(
                "block {j} is (r={}, s={}), row says (r={r}, s={s})",
                label.r, label.s
            )));
        }
        if node >= n_nodes {
            return Err(bad(format!("node {node} out of range")));
        }
        blocks[j][node] = Complex64::new(float(4)?, float(5)?);
        seen[j * n_nodes + node] = true;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::Parse {
            line: 0,
            message: format!(
                "missing coefficient for block {} node {}",
                missing / n_nodes,
                missing % n_nodes
            ),
        });
    }
    Ok(FrameletCoefficients {
        blocks,
        labels: labels.to_vec(),
    })
}
