use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl std::str::FromStr for OptimizerKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Self::Sgd),
            "adam" => Ok(Self::Adam),
            other => Err(crate::Error::InvalidConfig(format!("unknown optimizer '{other}'"))),
        }
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// First-order optimizer over a flat parameter vector. Weight decay is
/// added to the gradient as an L2 term.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    weight_decay: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, weight_decay: f64) -> Self {
        Self {
            kind,
            lr,
            weight_decay,
            m: Vec::new(),
            v: Vec::new(),
            t: 0,
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), grad.len(), "parameter and gradient lengths differ");
        // a zero step must leave every bit in place, signed zeros included
        if self.lr == 0.0 {
            return;
        }
        let wd = self.weight_decay;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= self.lr * (g + wd * *p);
                }
            }
            OptimizerKind::Adam => {
                if self.m.len() != params.len() {
                    self.m = vec![0.0; params.len()];
                    self.v = vec![0.0; params.len()];
                    self.t = 0;
                }
                self.t += 1;
                let c1 = 1.0 - BETA1.powi(self.t);
                let c2 = 1.0 - BETA2.powi(self.t);
                for ((p, g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
                    let g = g + wd * *p;
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + EPS);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lr_is_bit_identical() {
        let start = vec![1.5, -0.0, 0.0, -3.25e-7];
        for kind in [OptimizerKind::Sgd, OptimizerKind::Adam] {
            let mut p = start.clone();
            let mut opt = Optimizer::new(kind, 0.0, 5e-4);
            opt.step(&mut p, &[1.0, 2.0, -3.0, 4.0]);
            let bits: Vec<u64> = p.iter().map(|v| v.to_bits()).collect();
            let want: Vec<u64> = start.iter().map(|v| v.to_bits()).collect();
            assert_eq!(bits, want);
        }
    }

    #[test]
    fn sgd_step() {
        let mut p = vec![1.0];
        Optimizer::new(OptimizerKind::Sgd, 0.1, 0.5).step(&mut p, &[2.0]);
        assert!((p[0] - (1.0 - 0.1 * 2.5)).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_has_magnitude_lr() {
        let mut p = vec![0.0, 0.0];
        Optimizer::new(OptimizerKind::Adam, 0.01, 0.0).step(&mut p, &[3.0, -1e-3]);
        assert!((p[0] + 0.01).abs() < 1e-9);
        assert!((p[1] - 0.01).abs() < 1e-7);
    }

    #[test]
    fn adam_minimizes_quadratic() {
        let mut p = vec![3.0, -2.0];
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.05, 0.0);
        for _ in 0..2000 {
            let g: Vec<f64> = p.iter().map(|x| 2.0 * x).collect();
            opt.step(&mut p, &g);
        }
        assert!(p.iter().all(|x| x.abs() < 1e-3), "{p:?}");
    }
}
