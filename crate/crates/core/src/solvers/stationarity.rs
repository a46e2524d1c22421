use crate::error::{check_positive, Result};
use crate::oracle::ObjectiveModel;
use crate::prox::Regularizer;

/// Proximal-gradient mapping `P_γ(x) = (x − prox_{γr}(x − γ g)) / γ`.
///
/// `grad` is whatever gradient surrogate is at hand: the exact gradient in
/// tests, the finite-difference estimate inside the solvers. `‖P_γ(x)‖` is the
/// stationarity measure.
pub fn prox_grad_mapping(
    model: &ObjectiveModel,
    x: &[f64],
    gamma: f64,
    grad: &[f64],
) -> Result<Vec<f64>> {
    gradient_mapping(model.regularizer(), x, gamma, grad)
}

/// [`prox_grad_mapping`] for a bare regularizer.
pub fn gradient_mapping(reg: &Regularizer, x: &[f64], gamma: f64, grad: &[f64]) -> Result<Vec<f64>> {
    check_positive("gamma", gamma)?;
    let forward: Vec<f64> = x.iter().zip(grad).map(|(xi, gi)| xi - gamma * gi).collect();
    let p = reg.prox(&forward, gamma)?;
    Ok(x.iter().zip(&p).map(|(xi, pi)| (xi - pi) / gamma).collect())
}
