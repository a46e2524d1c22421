//! Benchmark problems: synthetic LASSO, sigmoid-loss classification, and the
//! LIBSVM reader their data comes from.

mod classify;
mod lasso;
mod libsvm;
pub mod rng;

pub use classify::{sigmoid_loss, sigmoid_objective, ClassificationInstance, SigmoidBlackbox};
pub use lasso::{gen_lasso, gen_lasso_with_noise, lasso_blackbox, LassoBlackbox, LassoInstance, LASSO_NOISE};
pub use libsvm::{parse_libsvm, parse_libsvm_with, read_libsvm, SparseDataset, SparseRow};
pub use rng::initial_point;
