use crate::error::{Error, Result};
use crate::oracle::{Blackbox, ObjectiveModel, SquaredNorm};
use crate::problems::libsvm::SparseDataset;
use crate::prox::Regularizer;

/// `(1/m) Σ_i 1/(1 + exp(l_i ⟨a_i, x⟩)) + λ‖x‖² + μ‖x‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationInstance {
    pub dataset: SparseDataset,
    pub lambda: f64,
    pub mu: f64,
}

/// `1 / (1 + e^z)`, evaluated without overflow.
#[inline]
pub fn sigmoid_loss(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Mean sigmoid loss over the samples, plus `l2 · ‖x‖²` when folded in.
#[derive(Debug, Clone)]
pub struct SigmoidBlackbox {
    /// Rows with 0-based indices and values pre-multiplied by the label.
    rows: Vec<Vec<(usize, f64)>>,
    /// Column view of `rows`: `(sample, label · value)`.
    cols: Vec<Vec<(usize, f64)>>,
    l2: f64,
}

impl SigmoidBlackbox {
    pub fn new(dataset: &SparseDataset, l2: f64) -> Self {
        let mut cols = vec![Vec::new(); dataset.n_features];
        let rows = dataset
            .rows
            .iter()
            .enumerate()
            .map(|(j, row)| {
                row.features
                    .iter()
                    .map(|&(idx, val)| {
                        let v = row.label * val;
                        cols[idx - 1].push((j, v));
                        (idx - 1, v)
                    })
                    .collect()
            })
            .collect();
        SigmoidBlackbox { rows, cols, l2 }
    }

    fn margins(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(i, v)| v * x[i]).sum())
            .collect()
    }

    fn scale(&self) -> f64 {
        1.0 / self.rows.len().max(1) as f64
    }
}

impl Blackbox for SigmoidBlackbox {
    fn eval(&self, x: &[f64]) -> f64 {
        let loss: f64 = self.margins(x).into_iter().map(sigmoid_loss).sum();
        let reg = if self.l2 != 0.0 {
            self.l2 * x.iter().map(|v| v * v).sum::<f64>()
        } else {
            0.0
        };
        loss * self.scale() + reg
    }

    /// Moving along axis `i` only changes the margins of samples that use
    /// feature `i`, so each probe costs one column instead of the whole data.
    fn eval_axis_probes(&self, x: &[f64], delta: f64, plus: &mut [f64], minus: &mut [f64]) -> Option<f64> {
        let z = self.margins(x);
        let base: Vec<f64> = z.iter().map(|&zj| sigmoid_loss(zj)).collect();
        let scale = self.scale();
        let sq: f64 = x.iter().map(|v| v * v).sum();
        let f0 = base.iter().sum::<f64>() * scale + self.l2 * sq;
        for (i, col) in self.cols.iter().enumerate() {
            let (mut dp, mut dm) = (0.0, 0.0);
            for &(j, v) in col {
                dp += sigmoid_loss(z[j] + delta * v) - base[j];
                dm += sigmoid_loss(z[j] - delta * v) - base[j];
            }
            let quad = self.l2 * delta * delta;
            let lin = self.l2 * 2.0 * delta * x[i];
            plus[i] = f0 + dp * scale + lin + quad;
            minus[i] = f0 + dm * scale - lin + quad;
        }
        Some(f0)
    }
}

/// The classification objective.
///
/// With `fold_l2` the `λ‖x‖²` term is part of the black box and gets
/// estimated by finite differences; otherwise it is an analytic term whose
/// gradient and curvature are added exactly.
pub fn sigmoid_objective(inst: &ClassificationInstance, fold_l2: bool) -> Result<ObjectiveModel> {
    for (name, v) in [("lambda", inst.lambda), ("mu", inst.mu)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                value: v,
                reason: "must be nonnegative and finite",
            });
        }
    }
    let n = inst.dataset.n_features;
    let l2 = if fold_l2 { inst.lambda } else { 0.0 };
    let model = ObjectiveModel::new(n, SigmoidBlackbox::new(&inst.dataset, l2), Regularizer::l1(inst.mu))?;
    Ok(if fold_l2 {
        model
    } else {
        model.with_known_smooth(SquaredNorm { weight: inst.lambda })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::parse_libsvm;

    fn instance(text: &str) -> ClassificationInstance {
        ClassificationInstance {
            dataset: parse_libsvm(text).unwrap(),
            lambda: 1e-3,
            mu: 1e-3,
        }
    }

    #[test]
    fn loss_is_stable() {
        assert_eq!(sigmoid_loss(0.0), 0.5);
        assert_eq!(sigmoid_loss(1e4), 0.0);
        assert_eq!(sigmoid_loss(-1e4), 1.0);
        assert!((sigmoid_loss(2.0) + sigmoid_loss(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn value_at_origin_is_half() {
        let inst = instance("+1 1:0.3 2:1\n-1 2:0.5\n+1 3:2");
        for fold in [false, true] {
            let m = sigmoid_objective(&inst, fold).unwrap();
            assert_eq!(m.evaluate(&[0.0; 3]).unwrap(), 0.5);
        }
    }

    #[test]
    fn loss_vanishes_for_confident_margin() {
        let inst = instance("+1 1:1");
        let m = sigmoid_objective(&ClassificationInstance { lambda: 0.0, ..inst }, true).unwrap();
        assert!(m.evaluate(&[50.0]).unwrap() < 1e-20);
        assert!(m.evaluate(&[800.0]).unwrap() == 0.0);
    }

    #[test]
    fn probe_fast_path_matches_pointwise() {
        let inst = instance("+1 1:0.3 2:1 5:-1\n-1 2:0.5 4:1\n+1 3:2\n-1 1:1 5:0.7");
        for l2 in [0.0, 0.25] {
            let bb = SigmoidBlackbox::new(&inst.dataset, l2);
            let x = [0.4, -1.2, 0.3, 2.0, -0.7];
            let (mut plus, mut minus) = (vec![0.0; 5], vec![0.0; 5]);
            let f0 = bb.eval_axis_probes(&x, 0.05, &mut plus, &mut minus).unwrap();
            assert!((f0 - bb.eval(&x)).abs() < 1e-14);
            for i in 0..5 {
                let mut y = x;
                y[i] += 0.05;
                assert!((plus[i] - bb.eval(&y)).abs() < 1e-14);
                y[i] = x[i] - 0.05;
                assert!((minus[i] - bb.eval(&y)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn negative_weights_rejected() {
        let inst = ClassificationInstance {
            lambda: -1.0,
            ..instance("+1 1:1")
        };
        assert!(sigmoid_objective(&inst, false).is_err());
    }
}
