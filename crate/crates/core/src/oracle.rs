//! Black-box access to the smooth part of the objective.
//!
//! [`ObjectiveModel`] bundles the black box `f`, an optional analytic smooth
//! term, and the regularizer `r` of `h = f + r`. Every black-box call goes
//! through the model so the evaluation count stays exact.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{check_point, check_positive, Error, Result};
use crate::prox::Regularizer;

/// The zeroth-order oracle: function values only.
///
/// Implementations must be pure: the same point always yields the same value.
pub trait Blackbox: Send + Sync {
    fn eval(&self, x: &[f64]) -> f64;

    /// Optional fast path for the `2n + 1` axis probes around `x`.
    ///
    /// Returns `f(x)` and fills `plus[i] = f(x + δe_i)`, `minus[i] = f(x − δe_i)`.
    /// Values must agree with [`Blackbox::eval`] up to rounding. Implementations
    /// that exploit structure (e.g. a least-squares residual) override this;
    /// the default declines and the model probes pointwise.
    fn eval_axis_probes(
        &self,
        _x: &[f64],
        _delta: f64,
        _plus: &mut [f64],
        _minus: &mut [f64],
    ) -> Option<f64> {
        None
    }
}

impl<F> Blackbox for F
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn eval(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// A smooth term known in closed form, added to `f` without sampling.
pub trait KnownSmooth: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hess_diag(&self, x: &[f64]) -> Vec<f64>;
}

/// `weight · ‖x‖²`.
#[derive(Debug, Clone, Copy)]
pub struct SquaredNorm {
    pub weight: f64,
}

impl KnownSmooth for SquaredNorm {
    fn value(&self, x: &[f64]) -> f64 {
        self.weight * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| 2.0 * self.weight * v).collect()
    }

    fn hess_diag(&self, x: &[f64]) -> Vec<f64> {
        vec![2.0 * self.weight; x.len()]
    }
}

/// Thread-safe count of black-box invocations.
#[derive(Debug, Default)]
pub struct EvalCounter(AtomicU64);

impl EvalCounter {
    pub fn get(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }

    fn add(&self, k: u64) {
        self.0.fetch_add(k, Ordering::SeqCst);
    }
}

/// Black-box values at `x` and at `x ± δ e_i` for every axis `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialBatch {
    pub center: Vec<f64>,
    pub delta: f64,
    pub values_plus: Vec<f64>,
    pub values_minus: Vec<f64>,
    pub value_center: f64,
}

impl TrialBatch {
    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    /// Trial point `j` in the order `+e_0..+e_{n-1}, −e_0..−e_{n-1}, center`.
    pub fn trial_point(&self, j: usize) -> Vec<f64> {
        let n = self.dimension();
        let mut y = self.center.clone();
        if j < n {
            y[j] = self.center[j] + self.delta;
        } else if j < 2 * n {
            y[j - n] = self.center[j - n] - self.delta;
        }
        y
    }

    fn value(&self, j: usize) -> f64 {
        let n = self.dimension();
        if j < n {
            self.values_plus[j]
        } else if j < 2 * n {
            self.values_minus[j - n]
        } else {
            self.value_center
        }
    }
}

/// The composite objective `h = f + known_smooth + r`.
#[derive(Clone)]
pub struct ObjectiveModel {
    blackbox: Arc<dyn Blackbox>,
    known_smooth: Option<Arc<dyn KnownSmooth>>,
    regularizer: Regularizer,
    dimension: usize,
    counter: Arc<EvalCounter>,
    parallel: bool,
    purity_check: bool,
    purity_state: Arc<AtomicU64>,
}

impl std::fmt::Debug for ObjectiveModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObjectiveModel")
            .field("dimension", &self.dimension)
            .field("regularizer", &self.regularizer)
            .field("known_smooth", &self.known_smooth.is_some())
            .field("evals", &self.counter.get())
            .finish()
    }
}

impl ObjectiveModel {
    pub fn new(
        dimension: usize,
        blackbox: impl Blackbox + 'static,
        regularizer: Regularizer,
    ) -> Result<Self> {
        Self::from_arc(dimension, Arc::new(blackbox), regularizer)
    }

    pub fn from_arc(
        dimension: usize,
        blackbox: Arc<dyn Blackbox>,
        regularizer: Regularizer,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        regularizer.validate(dimension)?;
        Ok(ObjectiveModel {
            blackbox,
            known_smooth: None,
            regularizer,
            dimension,
            counter: Arc::new(EvalCounter::default()),
            parallel: false,
            purity_check: false,
            purity_state: Arc::new(AtomicU64::new(0x853c_49e6_748f_ea9b)),
        })
    }

    pub fn with_known_smooth(mut self, term: impl KnownSmooth + 'static) -> Self {
        self.known_smooth = Some(Arc::new(term));
        self
    }

    /// Probe the `2n + 1` trial points concurrently. Only for thread-safe black boxes;
    /// results are identical to serial probing.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    /// Re-evaluate one trial point per batch and fail if the value changed.
    pub fn with_purity_check(mut self, enabled: bool) -> Self {
        self.purity_check = enabled;
        self
    }

    /// Same model with its own zeroed counter, for independent runs.
    pub fn with_fresh_counter(&self) -> Self {
        let mut m = self.clone();
        m.counter = Arc::new(EvalCounter::default());
        m
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.regularizer
    }

    pub fn known_smooth(&self) -> Option<&dyn KnownSmooth> {
        self.known_smooth.as_deref()
    }

    pub fn blackbox(&self) -> &dyn Blackbox {
        self.blackbox.as_ref()
    }

    pub fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    pub fn evals(&self) -> u64 {
        self.counter.get()
    }

    fn call(&self, x: &[f64]) -> Result<f64> {
        let v = self.blackbox.eval(x);
        self.counter.add(1);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::OracleFailure {
                point: x.to_vec(),
                value: v,
            })
        }
    }

    /// Smooth value `f(x) + known_smooth(x)`: one black-box call.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.dimension)?;
        let v = self.call(x)?;
        Ok(v + self.known_smooth_value(x))
    }

    /// Full objective `h(x)`: one black-box call.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        Ok(self.evaluate(x)? + self.regularizer.value(x))
    }

    pub fn known_smooth_value(&self, x: &[f64]) -> f64 {
        self.known_smooth.as_ref().map_or(0.0, |k| k.value(x))
    }

    /// Black-box values at the center and the `2n` axis perturbations.
    ///
    /// Costs exactly `2n + 1` counted evaluations (one more with the purity
    /// check enabled). The analytic smooth term is not included.
    pub fn sample_batch(&self, x: &[f64], delta: f64) -> Result<TrialBatch> {
        check_point(x, self.dimension)?;
        check_positive("delta", delta)?;
        let n = self.dimension;
        let mut plus = vec![0.0; n];
        let mut minus = vec![0.0; n];

        let fast = self.blackbox.eval_axis_probes(x, delta, &mut plus, &mut minus);
        let value_center = match fast {
            Some(center) => center,
            None if self.parallel => {
                let values: Vec<f64> = (0..=2 * n)
                    .into_par_iter()
                    .map(|j| {
                        let mut y = x.to_vec();
                        if j < n {
                            y[j] = x[j] + delta;
                        } else if j < 2 * n {
                            y[j - n] = x[j - n] - delta;
                        }
                        self.blackbox.eval(&y)
                    })
                    .collect();
                plus.copy_from_slice(&values[..n]);
                minus.copy_from_slice(&values[n..2 * n]);
                values[2 * n]
            }
            None => {
                let mut y = x.to_vec();
                for i in 0..n {
                    y[i] = x[i] + delta;
                    plus[i] = self.blackbox.eval(&y);
                    y[i] = x[i] - delta;
                    minus[i] = self.blackbox.eval(&y);
                    y[i] = x[i];
                }
                self.blackbox.eval(&y)
            }
        };
        self.counter.add(2 * n as u64 + 1);

        let batch = TrialBatch {
            center: x.to_vec(),
            delta,
            values_plus: plus,
            values_minus: minus,
            value_center,
        };
        if let Some(j) = (0..=2 * n).find(|&j| !batch.value(j).is_finite()) {
            return Err(Error::OracleFailure {
                point: batch.trial_point(j),
                value: batch.value(j),
            });
        }
        if self.purity_check {
            self.check_purity(&batch, fast.is_some())?;
        }
        Ok(batch)
    }

    fn check_purity(&self, batch: &TrialBatch, approximate: bool) -> Result<()> {
        // splitmix64 step; any index choice works, it only has to vary
        let s = self
            .purity_state
            .fetch_add(0x9e37_79b9_7f4a_7c15, Ordering::Relaxed)
            .wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = s;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        let j = (z % (2 * batch.dimension() as u64 + 1)) as usize;

        let first = batch.value(j);
        let second = self.call(&batch.trial_point(j))?;
        let same = if approximate {
            (first - second).abs() <= 1e-9 * (1.0 + first.abs().max(second.abs()))
        } else {
            first.to_bits() == second.to_bits()
        };
        if same {
            Ok(())
        } else {
            Err(Error::PurityViolation {
                index: j,
                first,
                second,
            })
        }
    }
}
