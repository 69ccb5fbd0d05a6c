//! Local information operators: assembly from observation blocks, additive
//! and joint combination, reparameterization, discrepancy inflation and
//! nuisance elimination.
//!
//! An [`InfoOperator`] is either a dense symmetric matrix or a matrix-free
//! action. Both are built from [`ObservationBlock`]s holding a Jacobian and a
//! noise covariance; whitening always goes through a triangular factor of the
//! covariance (or elementwise square roots for diagonal noise).

mod block;
mod io;
mod nuisance;
mod operator;

pub use block::{NoiseCov, ObservationBlock};
pub use io::DenseOperatorRecord;
pub use nuisance::{inflate_covariance, schur_complement, JointInfoBlocks, DEFAULT_PINV_TOL};
pub use operator::{
    add_blocks, assemble_info, assemble_info_action, assemble_info_auto, assemble_joint,
    ellipsoid_axes, Action, EllipsoidAxis, InfoOperator, Representation, DENSE_LIMIT,
};
