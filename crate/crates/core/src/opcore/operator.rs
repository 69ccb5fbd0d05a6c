use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::block::{NoiseCov, ObservationBlock};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh_desc, max_abs, symmetrize, symmetry_defect};
use crate::scalar::Scalar;

/// Parameter dimension above which assembly switches to the matrix-free
/// representation.
pub const DENSE_LIMIT: usize = 4000;

/// Matrix-free action `v -> I v`.
pub type Action<T> = Arc<dyn Fn(&DVector<T>) -> DVector<T> + Send + Sync>;

#[derive(Clone)]
pub enum Representation<T: Scalar> {
    Dense(DMatrix<T>),
    Action { dim: usize, action: Action<T> },
}

/// Symmetric positive-semidefinite operator on parameter perturbations.
#[derive(Clone)]
pub struct InfoOperator<T: Scalar> {
    repr: Representation<T>,
    labels: Vec<String>,
}

impl<T: Scalar> fmt::Debug for InfoOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.is_dense() { "dense" } else { "action" };
        f.debug_struct("InfoOperator")
            .field("dim", &self.dim())
            .field("representation", &kind)
            .field("labels", &self.labels)
            .finish()
    }
}

impl<T: Scalar> InfoOperator<T> {
    /// Wraps a dense matrix after checking symmetry and positive
    /// semidefiniteness.
    pub fn from_matrix(m: DMatrix<T>, labels: Vec<String>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(format!(
                "information matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = max_abs(&m);
        if symmetry_defect(&m) > T::lit(1e-12) * scale {
            return Err(Error::InvalidArgument("information matrix is not symmetric".into()));
        }
        let (vals, _) = eigh_desc(&m);
        if let (Some(&top), Some(&bottom)) = (vals.iter().next(), vals.iter().last()) {
            if bottom < -T::lit(1e-10) * top.max(T::zero()) {
                return Err(Error::InvalidArgument(format!(
                    "information matrix is indefinite (min eigenvalue {})",
                    bottom.as_f64()
                )));
            }
        }
        Ok(Self::dense_unchecked(symmetrize(&m), labels))
    }

    pub(crate) fn dense_unchecked(m: DMatrix<T>, labels: Vec<String>) -> Self {
        Self {
            repr: Representation::Dense(m),
            labels,
        }
    }

    /// Matrix-free operator. The caller guarantees symmetry and PSD.
    pub fn from_action(dim: usize, action: Action<T>, labels: Vec<String>) -> Self {
        Self {
            repr: Representation::Action { dim, action },
            labels,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::dense_unchecked(DMatrix::zeros(n, n), Vec::new())
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Representation::Dense(m) => m.nrows(),
            Representation::Action { dim, .. } => *dim,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn representation(&self) -> &Representation<T> {
        &self.repr
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Representation::Dense(_))
    }

    pub fn as_dense(&self) -> Option<&DMatrix<T>> {
        match &self.repr {
            Representation::Dense(m) => Some(m),
            Representation::Action { .. } => None,
        }
    }

    /// Dense matrix; action operators are materialized column by column.
    pub fn to_dense(&self) -> DMatrix<T> {
        match &self.repr {
            Representation::Dense(m) => m.clone(),
            Representation::Action { dim, action } => {
                let n = *dim;
                let mut out = DMatrix::zeros(n, n);
                let mut e = DVector::zeros(n);
                for j in 0..n {
                    e[j] = T::one();
                    out.set_column(j, &action(&e));
                    e[j] = T::zero();
                }
                symmetrize(&out)
            }
        }
    }

    /// Operator action `I v`.
    pub fn apply(&self, v: &DVector<T>) -> Result<DVector<T>> {
        check_dim("operator apply", self.dim(), v.len())?;
        Ok(match &self.repr {
            Representation::Dense(m) => m * v,
            Representation::Action { action, .. } => action(v),
        })
    }

    /// Quadratic form `v^T I v`.
    pub fn quadratic_form(&self, v: &DVector<T>) -> Result<T> {
        Ok(v.dot(&self.apply(v)?))
    }

    pub fn diagonal(&self) -> DVector<T> {
        match &self.repr {
            Representation::Dense(m) => m.diagonal(),
            Representation::Action { dim, action } => {
                let mut e = DVector::zeros(*dim);
                DVector::from_fn(*dim, |j, _| {
                    e[j] = T::one();
                    let d = action(&e)[j];
                    e[j] = T::zero();
                    d
                })
            }
        }
    }

    /// Congruence `T^T I T` for a change of parameter coordinates with
    /// `T: n x n_new`.
    pub fn transform(&self, t: &DMatrix<T>) -> Result<Self> {
        check_dim("transform rows", self.dim(), t.nrows())?;
        let labels = self.labels.clone();
        Ok(match &self.repr {
            Representation::Dense(m) => {
                Self::dense_unchecked(symmetrize(&(t.transpose() * m * t)), labels)
            }
            Representation::Action { action, .. } => {
                let t = t.clone();
                let inner = action.clone();
                let dim = t.ncols();
                Self::from_action(
                    dim,
                    Arc::new(move |v: &DVector<T>| t.tr_mul(&inner(&(&t * v)))),
                    labels,
                )
            }
        })
    }

    /// Checks the symmetry and PSD invariants on the dense form.
    pub fn check_invariants(&self) -> Result<()> {
        Self::from_matrix(self.to_dense(), Vec::new()).map(|_| ())
    }
}

/// Dense local information operator `J^T R^{-1} J` of one block, formed from
/// the whitened Jacobian.
pub fn assemble_info<T: Scalar>(block: &ObservationBlock<T>) -> InfoOperator<T> {
    let w = block.whitened_jacobian();
    InfoOperator::dense_unchecked(symmetrize(&w.tr_mul(&w)), vec![block.label().to_string()])
}

/// Matrix-free operator `v -> J^T (R^{-1} (J v))` of one block.
pub fn assemble_info_action<T: Scalar>(block: Arc<ObservationBlock<T>>) -> InfoOperator<T> {
    let dim = block.n_params();
    let labels = vec![block.label().to_string()];
    InfoOperator::from_action(
        dim,
        Arc::new(move |v: &DVector<T>| {
            let jv = block.jacobian() * v;
            block.jacobian().tr_mul(&block.apply_precision(&jv))
        }),
        labels,
    )
}

/// Dense assembly up to [`DENSE_LIMIT`] parameters, matrix-free above.
pub fn assemble_info_auto<T: Scalar>(block: Arc<ObservationBlock<T>>) -> InfoOperator<T> {
    if block.n_params() <= DENSE_LIMIT {
        assemble_info(&block)
    } else {
        assemble_info_action(block)
    }
}

/// Sum of operators of conditionally independent blocks. Dense inputs are
/// summed elementwise left to right; any action input makes the result an
/// action.
pub fn add_blocks<T: Scalar>(ops: &[InfoOperator<T>]) -> Result<InfoOperator<T>> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidArgument("add_blocks needs at least one operator".into()))?;
    let n = first.dim();
    for op in ops {
        check_dim("add_blocks", n, op.dim())?;
    }
    let labels: Vec<String> = ops.iter().flat_map(|o| o.labels.iter().cloned()).collect();
    if ops.iter().all(InfoOperator::is_dense) {
        let mut sum = DMatrix::zeros(n, n);
        for op in ops {
            sum += op.as_dense().expect("checked dense");
        }
        Ok(InfoOperator::dense_unchecked(sum, labels))
    } else {
        let parts: Vec<InfoOperator<T>> = ops.to_vec();
        Ok(InfoOperator::from_action(
            n,
            Arc::new(move |v: &DVector<T>| {
                let mut acc = DVector::zeros(v.len());
                for op in &parts {
                    acc += op.apply(v).expect("dimension checked at construction");
                }
                acc
            }),
            labels,
        ))
    }
}

/// Operator of stacked blocks with a full joint covariance across all rows.
pub fn assemble_joint<T: Scalar>(
    blocks: &[ObservationBlock<T>],
    joint_cov: &DMatrix<T>,
) -> Result<InfoOperator<T>> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::InvalidArgument("assemble_joint needs at least one block".into()))?;
    let n = first.n_params();
    let mut rows = 0;
    for b in blocks {
        check_dim("assemble_joint parameter dimension", n, b.n_params())?;
        rows += b.n_obs();
    }
    check_dim("joint covariance dimension", rows, joint_cov.nrows())?;
    check_dim("joint covariance dimension", rows, joint_cov.ncols())?;
    let mut stacked = DMatrix::zeros(rows, n);
    let mut r0 = 0;
    for b in blocks {
        stacked.rows_mut(r0, b.n_obs()).copy_from(b.jacobian());
        r0 += b.n_obs();
    }
    let label = blocks.iter().map(|b| b.label()).collect::<Vec<_>>().join("+");
    let joint = ObservationBlock::new(stacked, NoiseCov::Dense(joint_cov.clone()), label)?;
    let mut op = assemble_info(&joint);
    op.labels = blocks.iter().map(|b| b.label().to_string()).collect();
    Ok(op)
}

/// Semi-axis of the information ellipsoid `{dm : dm^T I dm <= 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidAxis<T: Scalar> {
    pub eigenvalue: T,
    /// `1/sqrt(lambda)`, or `None` along (numerically) null directions.
    pub length: Option<T>,
    pub direction: DVector<T>,
}

impl<T: Scalar> EllipsoidAxis<T> {
    pub fn is_unbounded(&self) -> bool {
        self.length.is_none()
    }
}

/// Semi-axes in order of increasing length. Eigenvalues at or below
/// `rel_tol * lambda_max` are reported as unbounded directions.
pub fn ellipsoid_axes<T: Scalar>(op: &InfoOperator<T>, rel_tol: T) -> Vec<EllipsoidAxis<T>> {
    let (vals, vecs) = eigh_desc(&op.to_dense());
    let lmax = vals.iter().fold(T::zero(), |a, &b| a.max(b));
    vals.iter()
        .enumerate()
        .map(|(i, &l)| EllipsoidAxis {
            eigenvalue: l,
            length: (lmax > T::zero() && l > rel_tol * lmax).then(|| T::one() / l.sqrt()),
            direction: vecs.column(i).into_owned(),
        })
        .collect()
}
