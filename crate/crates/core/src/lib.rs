//! Derivative-free solvers for composite problems `min f(x) + r(x)` where `f`
//! is only available through function values and `r` has a cheap proximal
//! mapping.
//!
//! The main method estimates the gradient and the Hessian diagonal of `f` by
//! central differences on the same `2n + 1` trial points, then takes a
//! diagonally preconditioned proximal step. A plain zeroth-order
//! proximal-gradient method is included as a baseline.
//!
//! ```
//! use ipzo_core::prelude::*;
//!
//! let inst = gen_lasso(50, 20, 0.1, 7).unwrap();
//! let model = lasso_blackbox(&inst);
//! let report = ipzopm(&model, &SolverConfig::default(), &initial_point(50, 7));
//! assert!(!report.termination.is_error());
//! ```

// `!(a >= b)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod estimators;
pub mod linalg;
pub mod oracle;
pub mod problems;
pub mod prox;
pub mod solvers;
pub mod subproblem;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::estimators::{estimate, estimate_gradient, estimate_hess_diag, estimate_smooth, DerivativeEstimates};
    pub use crate::oracle::{Blackbox, KnownSmooth, ObjectiveModel, SquaredNorm, TrialBatch};
    pub use crate::problems::{
        gen_lasso, initial_point, lasso_blackbox, parse_libsvm, sigmoid_objective, ClassificationInstance,
        LassoInstance, SparseDataset,
    };
    pub use crate::prox::{prox, prox_scalar, Regularizer, ScalarPiece};
    pub use crate::solvers::{
        ipzopm, prox_grad_mapping, solve, tune_zopg, zopg, DeltaRule, EpsilonRule, GammaRule, SigmaRule,
        SolverConfig, SolverKind, SolverReport, StepsizeRule, Termination, ZOPG_ETA_GRID,
    };
    pub use crate::subproblem::{model_value, solve_inexact, solve_separable, LocalModel, SubproblemSolution};
}
