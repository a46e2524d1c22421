//! Fixtures shared by the criterion benches.

use ipzo_core::oracle::ObjectiveModel;
use ipzo_core::problems::{gen_lasso, initial_point, lasso_blackbox, LassoInstance};

pub struct LassoFixture {
    pub instance: LassoInstance,
    pub model: ObjectiveModel,
    pub x0: Vec<f64>,
}

pub fn lasso(n: usize, m: usize, seed: u64) -> LassoFixture {
    let instance = gen_lasso(n, m, 1e-3, seed).expect("valid dimensions");
    let model = lasso_blackbox(&instance);
    LassoFixture {
        x0: initial_point(n, seed),
        instance,
        model,
    }
}

/// The same objective without the structured probe path, so every trial
/// point costs a full matrix-vector product.
pub fn lasso_pointwise(fixture: &LassoFixture) -> ObjectiveModel {
    let inst = fixture.instance.clone();
    ObjectiveModel::new(
        inst.n(),
        move |x: &[f64]| inst.smooth_value(x),
        fixture.model.regularizer().clone(),
    )
    .expect("valid dimensions")
}
