//! Model-discrepancy inflation and nuisance-parameter elimination.

use nalgebra::DMatrix;

use super::block::{NoiseCov, ObservationBlock};
use super::operator::{assemble_info, InfoOperator};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh_desc, max_abs, pinv_sym, symmetrize, symmetry_defect};
use crate::scalar::Scalar;

/// Default relative eigenvalue cutoff for the generalized inverse of the
/// nuisance block.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

/// Replaces the block covariance `R` by `R + C_delta`.
pub fn inflate_covariance<T: Scalar>(
    block: &ObservationBlock<T>,
    c_delta: &DMatrix<T>,
) -> Result<ObservationBlock<T>> {
    check_dim("discrepancy covariance rows", block.n_obs(), c_delta.nrows())?;
    check_dim("discrepancy covariance cols", block.n_obs(), c_delta.ncols())?;
    let scale = max_abs(c_delta);
    if symmetry_defect(c_delta) > T::lit(1e-12) * scale {
        return Err(Error::Covariance("discrepancy covariance is not symmetric".into()));
    }
    if c_delta.nrows() > 0 {
        let (vals, _) = eigh_desc(c_delta);
        let top = vals[0].max(T::zero());
        if vals[vals.len() - 1] < -T::lit(1e-10) * top {
            return Err(Error::Covariance(
                "discrepancy covariance is not positive semidefinite".into(),
            ));
        }
    }
    let r_eff = symmetrize(&(block.noise().to_dense() + c_delta));
    block.with_noise(NoiseCov::Dense(r_eff), format!("{} (inflated)", block.label()))
}

/// Joint information partitioned into interest (`m`) and nuisance (`n`)
/// parameters. `I_nm` is `I_mn^T` and is not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct JointInfoBlocks<T: Scalar> {
    pub mm: DMatrix<T>,
    pub mn: DMatrix<T>,
    pub nn: DMatrix<T>,
}

impl<T: Scalar> JointInfoBlocks<T> {
    /// Partitions a symmetric joint matrix after its first `n_interest`
    /// coordinates.
    pub fn from_joint(joint: &DMatrix<T>, n_interest: usize) -> Result<Self> {
        let op = InfoOperator::from_matrix(joint.clone(), Vec::new())?;
        let joint = op.as_dense().expect("from_matrix is dense");
        let n = joint.nrows();
        if n_interest > n {
            return Err(Error::InvalidArgument(format!(
                "{n_interest} interest parameters exceed joint dimension {n}"
            )));
        }
        let k = n - n_interest;
        Ok(Self {
            mm: joint.view((0, 0), (n_interest, n_interest)).into_owned(),
            mn: joint.view((0, n_interest), (n_interest, k)).into_owned(),
            nn: joint.view((n_interest, n_interest), (k, k)).into_owned(),
        })
    }

    /// Joint information of `[J_m J_n]` under a shared noise model.
    pub fn from_jacobians(j_m: &DMatrix<T>, j_n: &DMatrix<T>, noise: NoiseCov<T>) -> Result<Self> {
        check_dim("nuisance jacobian rows", j_m.nrows(), j_n.nrows())?;
        let (p, q) = (j_m.ncols(), j_n.ncols());
        let mut j = DMatrix::zeros(j_m.nrows(), p + q);
        j.columns_mut(0, p).copy_from(j_m);
        j.columns_mut(p, q).copy_from(j_n);
        let block = ObservationBlock::new(j, noise, "joint")?;
        let joint = assemble_info(&block);
        Self::from_joint(joint.as_dense().expect("dense assembly"), p)
    }

    pub fn n_interest(&self) -> usize {
        self.mm.nrows()
    }

    pub fn n_nuisance(&self) -> usize {
        self.nn.nrows()
    }

    pub fn nm(&self) -> DMatrix<T> {
        self.mn.transpose()
    }

    pub fn joint_matrix(&self) -> DMatrix<T> {
        let (p, q) = (self.n_interest(), self.n_nuisance());
        let mut out = DMatrix::zeros(p + q, p + q);
        out.view_mut((0, 0), (p, p)).copy_from(&self.mm);
        out.view_mut((0, p), (p, q)).copy_from(&self.mn);
        out.view_mut((p, 0), (q, p)).copy_from(&self.nm());
        out.view_mut((p, p), (q, q)).copy_from(&self.nn);
        out
    }
}

/// Effective information for the interest parameters after eliminating the
/// nuisance block: `I_mm - I_mn I_nn^+ I_nm`, with the pseudoinverse cut at
/// `pinv_tol` relative to the largest nuisance eigenvalue.
pub fn schur_complement<T: Scalar>(joint: &JointInfoBlocks<T>, pinv_tol: T) -> InfoOperator<T> {
    let pinv = pinv_sym(&joint.nn, pinv_tol);
    let loss = &joint.mn * pinv * joint.nm();
    InfoOperator::dense_unchecked(symmetrize(&(&joint.mm - loss)), vec!["schur".to_string()])
}
