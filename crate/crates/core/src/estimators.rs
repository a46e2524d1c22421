//! Central-difference gradient and diagonal-Hessian estimates from one
//! [`TrialBatch`]. Both are exact on quadratics up to rounding.

use crate::error::{Error, Result};
use crate::oracle::{ObjectiveModel, TrialBatch};

/// Default bound on the magnitude of each diagonal-Hessian entry.
pub const DEFAULT_HESS_CAP: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeEstimates {
    pub grad: Vec<f64>,
    pub hess_diag: Vec<f64>,
    pub delta: f64,
    /// Number of diagonal entries that hit the cap.
    pub clamped: usize,
}

/// `(f(x + δe_i) − f(x − δe_i)) / 2δ` for each axis.
pub fn estimate_gradient(batch: &TrialBatch) -> Result<Vec<f64>> {
    let scale = 1.0 / (2.0 * batch.delta);
    let grad: Vec<f64> = batch
        .values_plus
        .iter()
        .zip(&batch.values_minus)
        .map(|(p, m)| (p - m) * scale)
        .collect();
    finite_or_fail("gradient", grad)
}

/// `(f(x + δe_i) + f(x − δe_i) − 2f(x)) / δ²` for each axis.
pub fn estimate_hess_diag(batch: &TrialBatch) -> Result<Vec<f64>> {
    let d2 = batch.delta * batch.delta;
    let c2 = 2.0 * batch.value_center;
    let hess: Vec<f64> = batch
        .values_plus
        .iter()
        .zip(&batch.values_minus)
        .map(|(p, m)| (p + m - c2) / d2)
        .collect();
    finite_or_fail("diagonal Hessian", hess)
}

fn finite_or_fail(what: &str, v: Vec<f64>) -> Result<Vec<f64>> {
    match v.iter().position(|x| !x.is_finite()) {
        None => Ok(v),
        Some(i) => Err(Error::NumericalFailure(format!(
            "{what} estimate entry {i} is {}",
            v[i]
        ))),
    }
}

/// Both estimates, with each diagonal entry clamped into `[−hess_cap, hess_cap]`.
pub fn estimate(batch: &TrialBatch, hess_cap: f64) -> Result<DerivativeEstimates> {
    let grad = estimate_gradient(batch)?;
    let mut hess_diag = estimate_hess_diag(batch)?;
    let mut clamped = 0;
    for h in hess_diag.iter_mut() {
        if h.abs() > hess_cap {
            *h = h.clamp(-hess_cap, hess_cap);
            clamped += 1;
        }
    }
    Ok(DerivativeEstimates {
        grad,
        hess_diag,
        delta: batch.delta,
        clamped,
    })
}

/// Estimates of the full smooth part: black-box differences plus the exact
/// gradient and diagonal of the model's analytic term, if any.
pub fn estimate_smooth(
    model: &ObjectiveModel,
    batch: &TrialBatch,
    hess_cap: f64,
) -> Result<DerivativeEstimates> {
    let mut est = estimate(batch, hess_cap)?;
    if let Some(k) = model.known_smooth() {
        let x = &batch.center;
        for (g, kg) in est.grad.iter_mut().zip(k.gradient(x)) {
            *g += kg;
        }
        for (h, kh) in est.hess_diag.iter_mut().zip(k.hess_diag(x)) {
            *h += kh;
        }
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SquaredNorm;
    use crate::prox::Regularizer;

    fn batch(n: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, x: &[f64], delta: f64) -> TrialBatch {
        ObjectiveModel::new(n, f, Regularizer::Zero)
            .unwrap()
            .sample_batch(x, delta)
            .unwrap()
    }

    #[test]
    fn gradient_exact_on_half_squared_norm() {
        for &delta in &[1e-3, 0.1, 1.0, 7.5] {
            let b = batch(2, |x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1]), &[1.0, 2.0], delta);
            let g = estimate_gradient(&b).unwrap();
            assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] - 2.0).abs() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn constant_blackbox_gives_zero_estimates() {
        let b = batch(3, |_| 2.5, &[0.3, -1.0, 4.0], 0.2);
        assert_eq!(estimate_gradient(&b).unwrap(), vec![0.0; 3]);
        assert_eq!(estimate_hess_diag(&b).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn cubic_hand_values() {
        let b = batch(1, |x: &[f64]| x[0].powi(3), &[1.0], 0.1);
        let g = estimate_gradient(&b).unwrap()[0];
        assert!((g - 3.01).abs() < 1e-12);
        // within M_f δ² / 2 = 0.03 of f'(1) = 3
        assert!((g - 3.0).abs() <= 0.03);
        let h = estimate_hess_diag(&b).unwrap()[0];
        assert!((h - 6.0).abs() < 1e-10, "{h}");
    }

    #[test]
    fn diagonal_quadratic_exact() {
        for &delta in &[0.01, 0.5, 3.0] {
            let b = batch(2, |x: &[f64]| 0.5 * (2.0 * x[0] * x[0] + 5.0 * x[1] * x[1]), &[0.7, -0.2], delta);
            let h = estimate_hess_diag(&b).unwrap();
            assert!((h[0] - 2.0).abs() < 1e-9 && (h[1] - 5.0).abs() < 1e-9, "{h:?}");
        }
    }

    #[test]
    fn clamp_counts_events() {
        let b = batch(2, |x: &[f64]| 1e12 * x[0] * x[0] + x[1] * x[1], &[0.0, 0.0], 1.0);
        let est = estimate(&b, DEFAULT_HESS_CAP).unwrap();
        assert_eq!(est.hess_diag[0], DEFAULT_HESS_CAP);
        assert_eq!(est.hess_diag[1], 2.0);
        assert_eq!(est.clamped, 1);
    }

    #[test]
    fn known_smooth_added_exactly() {
        let m = ObjectiveModel::new(2, |x: &[f64]| x[0] + x[1], Regularizer::Zero)
            .unwrap()
            .with_known_smooth(SquaredNorm { weight: 0.5 });
        let b = m.sample_batch(&[1.0, -2.0], 0.25).unwrap();
        let est = estimate_smooth(&m, &b, DEFAULT_HESS_CAP).unwrap();
        assert_eq!(est.grad, vec![2.0, -1.0]);
        assert_eq!(est.hess_diag, vec![1.0, 1.0]);
    }

    #[test]
    fn overflow_is_numerical_failure() {
        let b = TrialBatch {
            center: vec![0.0],
            delta: 1e-200,
            values_plus: vec![1.0],
            values_minus: vec![1.0],
            value_center: 0.0,
        };
        assert!(matches!(estimate_hess_diag(&b), Err(Error::NumericalFailure(_))));
    }
}
