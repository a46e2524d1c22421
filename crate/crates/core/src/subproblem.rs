//! The diagonally preconditioned local model and its minimization.
//!
//! ```text
//! l(y) = f(x) + ⟨g, y − x⟩ + ½ Σ_i τ_i (y_i − x_i)² + r(y),   τ_i = H_ii + σ
//! ```
//!
//! With a separable `r` the minimizer is a per-coordinate prox. Otherwise the
//! model is minimized by proximal gradient with a certified gap bound.

use crate::error::{check_positive, Error, Result};
use crate::linalg::norm;
use crate::prox::Regularizer;

#[derive(Debug, Clone)]
pub struct LocalModel<'r> {
    pub center: Vec<f64>,
    pub grad: Vec<f64>,
    /// `τ_i = hess_diag_i + σ`; all entries positive.
    pub precond_diag: Vec<f64>,
    pub sigma: f64,
    pub f_center: f64,
    pub regularizer: &'r Regularizer,
}

impl<'r> LocalModel<'r> {
    pub fn new(
        center: Vec<f64>,
        grad: Vec<f64>,
        hess_diag: &[f64],
        sigma: f64,
        f_center: f64,
        regularizer: &'r Regularizer,
    ) -> Result<Self> {
        let n = center.len();
        if grad.len() != n || hess_diag.len() != n {
            return Err(Error::InvalidModel(format!(
                "length mismatch: center {n}, grad {}, hess {}",
                grad.len(),
                hess_diag.len()
            )));
        }
        check_positive("sigma", sigma)?;
        let model = LocalModel {
            center,
            grad,
            precond_diag: hess_diag.iter().map(|h| h + sigma).collect(),
            sigma,
            f_center,
            regularizer,
        };
        model.check_precond()?;
        Ok(model)
    }

    fn check_precond(&self) -> Result<()> {
        match self.precond_diag.iter().position(|&t| !(t > 0.0 && t.is_finite())) {
            None => Ok(()),
            Some(i) => Err(Error::InvalidModel(format!(
                "preconditioner entry {i} is {} (must be positive)",
                self.precond_diag[i]
            ))),
        }
    }

    /// Model value without the regularizer.
    pub fn smooth_value(&self, y: &[f64]) -> f64 {
        let mut lin = 0.0;
        let mut quad = 0.0;
        for i in 0..y.len() {
            let d = y[i] - self.center[i];
            lin += self.grad[i] * d;
            quad += self.precond_diag[i] * d * d;
        }
        self.f_center + lin + 0.5 * quad
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.smooth_value(y) + self.regularizer.value(y)
    }
}

/// `l(y; x, δ, σ)`.
pub fn model_value(model: &LocalModel<'_>, y: &[f64]) -> f64 {
    model.value(y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub point: Vec<f64>,
    /// Certified upper bound on `l(point) − inf l`.
    pub gap_bound: f64,
    pub inner_iters: usize,
}

/// Exact minimizer for separable regularizers:
/// `y_i = prox_{r_i / τ_i}(x_i − g_i / τ_i)`.
pub fn solve_separable(model: &LocalModel<'_>) -> Result<SubproblemSolution> {
    if !model.regularizer.is_separable() {
        return Err(Error::InvalidModel(
            "closed-form solve needs a separable regularizer".into(),
        ));
    }
    model.check_precond()?;
    let point = (0..model.center.len())
        .map(|i| {
            let tau = model.precond_diag[i];
            let step = model.center[i] - model.grad[i] / tau;
            model.regularizer.piece_unchecked(i).prox_unchecked(step, 1.0 / tau)
        })
        .collect();
    Ok(SubproblemSolution {
        point,
        gap_bound: 0.0,
        inner_iters: 0,
    })
}

/// Proximal gradient on the model with step `1/M`, `M = max τ_i`, warm-started
/// at the center.
///
/// After each step `y → y⁺` the residual `g = M (y − y⁺)` bounds the model
/// gap at `y⁺` by `‖g‖² / (2m)`, `m = min τ_i` (strong convexity). Returns
/// the first `y⁺` whose bound is at most `epsilon`.
pub fn solve_inexact(
    model: &LocalModel<'_>,
    epsilon: f64,
    max_inner: usize,
) -> Result<SubproblemSolution> {
    check_positive("epsilon", epsilon)?;
    model.check_precond()?;
    let tau = &model.precond_diag;
    let m = tau.iter().copied().fold(f64::INFINITY, f64::min);
    let big_m = tau.iter().copied().fold(0.0, f64::max);
    let step = 1.0 / big_m;

    let x = &model.center;
    let mut y = x.clone();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for iter in 1..=max_inner {
        let forward: Vec<f64> = (0..y.len())
            .map(|i| y[i] - step * (model.grad[i] + tau[i] * (y[i] - x[i])))
            .collect();
        let next = model.regularizer.prox(&forward, step)?;
        let residual: Vec<f64> = y.iter().zip(&next).map(|(a, b)| big_m * (a - b)).collect();
        let r = norm(&residual);
        let gap = r * r / (2.0 * m);
        if !gap.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "inner residual became {gap} at iteration {iter}"
            )));
        }
        if gap <= epsilon {
            return Ok(SubproblemSolution {
                point: next,
                gap_bound: gap,
                inner_iters: iter,
            });
        }
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, next.clone()));
        }
        y = next;
    }
    let (best_gap, point) = best.unwrap_or((f64::INFINITY, y));
    Err(Error::InexactnessFailure {
        best_gap,
        epsilon,
        iters: max_inner,
        point,
    })
}
