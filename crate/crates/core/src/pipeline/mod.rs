//! Datasets, splits, features, noise and experiment orchestration.
//!
//! A dataset lives in a directory:
//!
//! ```text
//! edges.tsv      edge list in the graph format (required)
//! features.csv   N rows of D comma-separated floats (optional)
//! labels.csv     N rows, one integer class per row (optional)
//! ```

mod experiment;
mod features;
mod split;
mod synthetic;

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::RMatrix;

pub use experiment::{
    run_denoise, run_experiment, run_experiment_on, write_denoise_csv, DenoiseRow, ExperimentConfig, ExperimentOutcome, ModelKind,
    RepeatMetrics, Report, SplitConfig, DENOISE_HEADER,
};
pub use features::{add_noise, degree_features, standardize_columns};
pub use split::{
    link_split, node_split_citation, node_split_fraction, LinkPartition, LinkSplit, NodeSplit, LINK_TEST_FRACTION,
    LINK_VAL_FRACTION, MAX_SPLIT_ATTEMPTS,
};
pub use synthetic::{synthetic_two_cluster, SyntheticSpec};

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub graph: Digraph,
    pub features: Option<RMatrix>,
    pub labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    pub fn n_classes(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().max())
            .map_or(0, |m| m + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes();
        if let Some(f) = &self.features {
            if f.nrows() != n {
                return Err(crate::error::shape_mismatch(format!("{n} feature rows"), f.nrows()));
            }
        }
        if let Some(l) = &self.labels {
            if l.len() != n {
                return Err(crate::error::shape_mismatch(format!("{n} labels"), l.len()));
            }
        }
        Ok(())
    }

    /// Loads a dataset directory; the name is the directory's file name.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let graph = Digraph::load(dir.join("edges.tsv"))?;
        let features_path = dir.join("features.csv");
        let features = if features_path.exists() {
            Some(read_features_csv(std::fs::File::open(features_path)?)?)
        } else {
            None
        };
        let labels_path = dir.join("labels.csv");
        let labels = if labels_path.exists() {
            Some(read_labels_csv(std::fs::File::open(labels_path)?)?)
        } else {
            None
        };
        let name = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let ds = Self {
            name,
            graph,
            features,
            labels,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.graph
            .write_edge_list(std::io::BufWriter::new(std::fs::File::create(dir.join("edges.tsv"))?))?;
        if let Some(f) = &self.features {
            write_features_csv(f, std::fs::File::create(dir.join("features.csv"))?)?;
        }
        if let Some(l) = &self.labels {
            write_labels_csv(l, std::fs::File::create(dir.join("labels.csv"))?)?;
        }
        Ok(())
    }
}

fn csv_reader<R: std::io::Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

pub fn read_features_csv<R: std::io::Read>(r: R) -> Result<RMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in csv_reader(r).records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("bad feature value '{field}': {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    let d = rows.first().map_or(0, Vec::len);
    Ok(RMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

pub fn read_labels_csv<R: std::io::Read>(r: R) -> Result<Vec<usize>> {
    csv_reader(r)
        .records()
        .enumerate()
        .map(|(i, record)| {
            let record = record?;
            if record.len() != 1 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected one label, found {} fields", record.len()),
                });
            }
            record[0].parse::<usize>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("bad label '{}': {e}", &record[0]),
            })
        })
        .collect()
}

pub fn write_features_csv<W: std::io::Write>(m: &RMatrix, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in m.row_iter() {
        out.write_record(row.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_labels_csv<W: std::io::Write>(labels: &[usize], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for l in labels {
        out.write_record([l.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_csv_round_trip() {
        let m = RMatrix::from_row_slice(2, 3, &[1.0, -0.5, 1e-300, 0.1, 2.0, -3.25]);
        let mut buf = Vec::new();
        write_features_csv(&m, &mut buf).unwrap();
        assert_eq!(read_features_csv(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn ragged_features_are_rejected() {
        let err = read_features_csv("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(matches!(read_features_csv("1,x\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn labels_parse() {
        assert_eq!(read_labels_csv("0\n2\n 1 \n".as_bytes()).unwrap(), vec![0, 2, 1]);
        assert!(read_labels_csv("0\n-1\n".as_bytes()).is_err());
        assert!(read_labels_csv("0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn row_counts_are_checked() {
        let ds = Dataset {
            name: "t".into(),
            graph: Digraph::edgeless(3),
            features: Some(RMatrix::zeros(2, 1)),
            labels: None,
        };
        assert!(ds.validate().is_err());
    }
}
