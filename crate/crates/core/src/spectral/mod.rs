//! Eigen-decompositions of information operators and stochastic estimators
//! built on their actions.

mod modes;
mod probe;
mod randomized;

pub use modes::{mass_weighted_eig, prior_preconditioned_eig, sym_eig, Metric, ModeSet};
pub use probe::{estimate_diag, DiagEstimate};
pub use randomized::{randomized_eig, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS};
