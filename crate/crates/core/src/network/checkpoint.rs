use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FrameletMagNet, ModelSpec, Task, Trainable};
use crate::error::{shape_mismatch, Error, Result};
use crate::framelet::{FrameletSystem, TransformConfig};
use crate::graph::Digraph;

pub const CHECKPOINT_VERSION: &str = "framelet-magnet-v1";

/// One parameter tensor. Complex tensors store `(re, im)` pairs
/// interleaved; all tensors are column-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub complex: bool,
    pub values: Vec<f64>,
}

/// JSON checkpoint of a trained [`FrameletMagNet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: String,
    pub task: Task,
    pub transform: TransformConfig,
    pub model: ModelSpec,
    pub tensors: Vec<Tensor>,
}

fn layout(model: &FrameletMagNet) -> Vec<(String, Vec<usize>, bool)> {
    let mut out = Vec::new();
    for (i, layer) in model.layers.iter().enumerate() {
        out.push((format!("conv{i}.weight"), vec![layer.d_in(), layer.d_out()], true));
        out.push((format!("conv{i}.gains"), vec![layer.gains.len()], false));
    }
    out.push(("head.weight".into(), vec![model.head.weight.nrows(), model.head.weight.ncols()], false));
    out.push(("head.bias".into(), vec![model.head.bias.len()], false));
    out
}

impl Checkpoint {
    pub fn from_model(model: &FrameletMagNet, transform: TransformConfig) -> Self {
        let params = model.parameters();
        let mut offset = 0;
        let tensors = layout(model)
            .into_iter()
            .map(|(name, shape, complex)| {
                let len = shape.iter().product::<usize>() * if complex { 2 } else { 1 };
                let values = params[offset..offset + len].to_vec();
                offset += len;
                Tensor {
                    name,
                    shape,
                    complex,
                    values,
                }
            })
            .collect();
        Self {
            version: CHECKPOINT_VERSION.into(),
            task: model.task(),
            transform,
            model: model.spec().clone(),
            tensors,
        }
    }

    /// Rebuilds the model on `g`, which must be the graph it was trained on.
    pub fn restore(&self, g: &Digraph) -> Result<FrameletMagNet> {
        let system = Arc::new(self.transform.build(g)?);
        self.restore_with_system(system)
    }

    pub fn restore_with_system(&self, system: Arc<FrameletSystem>) -> Result<FrameletMagNet> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported checkpoint version '{}'",
                self.version
            )));
        }
        let mut model = FrameletMagNet::new(system, self.model.clone(), 0)?;
        let expected = layout(&model);
        if expected.len() != self.tensors.len() {
            return Err(shape_mismatch(format!("{} tensors", expected.len()), self.tensors.len()));
        }
        let mut params = Vec::new();
        for ((name, shape, complex), t) in expected.iter().zip(&self.tensors) {
            if &t.name != name || &t.shape != shape || t.complex != *complex {
                return Err(shape_mismatch(
                    format!("{name} {shape:?}"),
                    format!("{} {:?}", t.name, t.shape),
                ));
            }
            params.extend(&t.values);
        }
        model.set_parameters(&params)?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(file)?)
    }
}
