use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::oracle::{Blackbox, ObjectiveModel};
use crate::problems::rng::{problem_rng, standard_normals};
use crate::prox::Regularizer;

/// Standard deviation of the observation noise: `b = Au + √0.001 · l`.
pub const LASSO_NOISE: f64 = 0.031_622_776_601_683_79;

/// `min ½‖Ax − b‖² + μ‖x‖₁` with planted signal `ground_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoInstance {
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub mu: f64,
    pub ground_u: Vec<f64>,
}

/// Draws `A` (row by row), then `u`, then `l` from the seed's problem stream,
/// all i.i.d. standard normal, and sets `b = Au + √0.001 · l`.
pub fn gen_lasso(n: usize, m: usize, mu: f64, seed: u64) -> Result<LassoInstance> {
    gen_lasso_with_noise(n, m, mu, seed, LASSO_NOISE)
}

/// [`gen_lasso`] with the noise level as a parameter (0 gives `b = Au`).
pub fn gen_lasso_with_noise(
    n: usize,
    m: usize,
    mu: f64,
    seed: u64,
    noise: f64,
) -> Result<LassoInstance> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput(format!(
            "LASSO needs n, m >= 1 (got n = {n}, m = {m})"
        )));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: mu,
            reason: "must be nonnegative and finite",
        });
    }
    let mut rng = problem_rng(seed);
    let entries = standard_normals(&mut rng, m * n);
    let a = DMatrix::from_row_slice(m, n, &entries);
    let u = standard_normals(&mut rng, n);
    let l = standard_normals(&mut rng, m);
    let au = &a * DVector::from_column_slice(&u);
    let b = au.iter().zip(&l).map(|(v, li)| v + noise * li).collect();
    Ok(LassoInstance {
        a,
        b,
        mu,
        ground_u: u,
    })
}

impl LassoInstance {
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    fn residual(&self, x: &[f64]) -> DVector<f64> {
        &self.a * DVector::from_column_slice(x) - DVector::from_column_slice(&self.b)
    }

    /// `½‖Ax − b‖²`.
    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        0.5 * self.residual(x).norm_squared()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.smooth_value(x) + self.mu * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Exact gradient `Aᵀ(Ax − b)`; for diagnostics, never used by the solvers.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.a.tr_mul(&self.residual(x)).as_slice().to_vec()
    }

    /// `L_f = λ_max(AᵀA)`.
    pub fn grad_lipschitz(&self) -> f64 {
        let gram = if self.m() <= self.n() {
            &self.a * self.a.transpose()
        } else {
            self.a.tr_mul(&self.a)
        };
        SymmetricEigen::new(gram).eigenvalues.max()
    }

    /// `max_i ‖a_i‖²`, the largest entry of `diag(AᵀA)`; bounds `‖H_δ‖` exactly.
    pub fn hess_diag_bound(&self) -> f64 {
        self.a
            .column_iter()
            .map(|c| c.norm_squared())
            .fold(0.0, f64::max)
    }
}

/// `x ↦ ½‖Ax − b‖²` as a black box.
///
/// Axis probes use `½‖r ± δa_i‖² = ½‖r‖² ± δ⟨a_i, r⟩ + ½δ²‖a_i‖²`, one
/// matrix-vector product pair per batch instead of `2n + 1`.
#[derive(Debug, Clone)]
pub struct LassoBlackbox {
    a: DMatrix<f64>,
    b: DVector<f64>,
    col_sq: Vec<f64>,
}

impl LassoBlackbox {
    pub fn new(inst: &LassoInstance) -> Self {
        LassoBlackbox {
            a: inst.a.clone(),
            b: DVector::from_column_slice(&inst.b),
            col_sq: inst.a.column_iter().map(|c| c.norm_squared()).collect(),
        }
    }
}

impl Blackbox for LassoBlackbox {
    fn eval(&self, x: &[f64]) -> f64 {
        let r = &self.a * DVector::from_column_slice(x) - &self.b;
        0.5 * r.norm_squared()
    }

    fn eval_axis_probes(&self, x: &[f64], delta: f64, plus: &mut [f64], minus: &mut [f64]) -> Option<f64> {
        let r = &self.a * DVector::from_column_slice(x) - &self.b;
        let f0 = 0.5 * r.norm_squared();
        let atr = self.a.tr_mul(&r);
        for i in 0..x.len() {
            let lin = delta * atr[i];
            let quad = 0.5 * delta * delta * self.col_sq[i];
            plus[i] = f0 + lin + quad;
            minus[i] = f0 - lin + quad;
        }
        Some(f0)
    }
}

/// Black box `½‖Ax − b‖²`, regularizer `μ‖x‖₁`, no analytic term.
pub fn lasso_blackbox(inst: &LassoInstance) -> ObjectiveModel {
    ObjectiveModel::new(inst.n(), LassoBlackbox::new(inst), Regularizer::l1(inst.mu))
        .expect("generated LASSO instances are well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_constant() {
        assert_eq!(LASSO_NOISE, 0.001f64.sqrt());
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(gen_lasso(2, 1, 0.1, 42).unwrap(), gen_lasso(2, 1, 0.1, 42).unwrap());
        assert_ne!(gen_lasso(2, 1, 0.1, 42).unwrap(), gen_lasso(2, 1, 0.1, 43).unwrap());
    }

    #[test]
    fn shapes() {
        let inst = gen_lasso(1000, 100, 1e-3, 0).unwrap();
        assert_eq!(inst.a.shape(), (100, 1000));
        assert_eq!(inst.b.len(), 100);
        assert_eq!(inst.ground_u.len(), 1000);
    }

    #[test]
    fn noiseless_interpolates_ground_truth() {
        let inst = gen_lasso_with_noise(6, 4, 0.0, 3, 0.0).unwrap();
        assert!(inst.smooth_value(&inst.ground_u) < 1e-24);
    }

    #[test]
    fn rejects_empty_dimensions() {
        assert!(gen_lasso(0, 3, 0.1, 0).is_err());
        assert!(gen_lasso(3, 0, 0.1, 0).is_err());
        assert!(gen_lasso(3, 3, -0.1, 0).is_err());
    }

    fn identity_instance(mu: f64) -> LassoInstance {
        LassoInstance {
            a: DMatrix::identity(2, 2),
            b: vec![1.0, 1.0],
            mu,
            ground_u: vec![1.0, 1.0],
        }
    }

    #[test]
    fn objective_examples() {
        let inst = identity_instance(1.0);
        let model = lasso_blackbox(&inst);
        assert_eq!(model.evaluate(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(model.objective(&[1.0, 1.0]).unwrap(), 2.0);

        let inst = gen_lasso(7, 3, 0.5, 1).unwrap();
        let model = lasso_blackbox(&inst);
        let half_b_sq = 0.5 * inst.b.iter().map(|v| v * v).sum::<f64>();
        assert!((model.evaluate(&[0.0; 7]).unwrap() - half_b_sq).abs() < 1e-12);
    }

    #[test]
    fn probe_fast_path_matches_pointwise() {
        let inst = gen_lasso(30, 10, 0.1, 5).unwrap();
        let bb = LassoBlackbox::new(&inst);
        let x = crate::problems::initial_point(30, 5);
        let (mut plus, mut minus) = (vec![0.0; 30], vec![0.0; 30]);
        let f0 = bb.eval_axis_probes(&x, 0.3, &mut plus, &mut minus).unwrap();
        assert!((f0 - bb.eval(&x)).abs() <= 1e-12 * f0);
        for i in 0..30 {
            let mut y = x.clone();
            y[i] += 0.3;
            assert!((plus[i] - bb.eval(&y)).abs() <= 1e-12 * f0);
            y[i] = x[i] - 0.3;
            assert!((minus[i] - bb.eval(&y)).abs() <= 1e-12 * f0);
        }
    }

    #[test]
    fn constants_match_definitions() {
        let inst = gen_lasso(5, 8, 0.1, 2).unwrap();
        let gram = inst.a.tr_mul(&inst.a);
        let lf = SymmetricEigen::new(gram.clone()).eigenvalues.max();
        assert!((inst.grad_lipschitz() - lf).abs() < 1e-9 * lf);
        let diag_max = (0..5).map(|i| gram[(i, i)]).fold(0.0, f64::max);
        assert!((inst.hess_diag_bound() - diag_max).abs() < 1e-12 * diag_max);
    }
}
