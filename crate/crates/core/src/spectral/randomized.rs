use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::modes::{Metric, ModeSet};
use crate::error::{Error, Result};
use crate::linalg::{eigh_desc, fix_sign, symmetrize};
use crate::opcore::InfoOperator;
use crate::scalar::Scalar;

pub const DEFAULT_OVERSAMPLE: usize = 8;
pub const DEFAULT_POWER_ITERS: usize = 2;

fn apply_columns<T: Scalar>(op: &InfoOperator<T>, x: &DMatrix<T>) -> DMatrix<T> {
    let mut y = DMatrix::zeros(x.nrows(), x.ncols());
    for j in 0..x.ncols() {
        let col = op
            .apply(&x.column(j).into_owned())
            .expect("probe block has operator dimension");
        y.set_column(j, &col);
    }
    y
}

fn orthonormalize<T: Scalar>(y: DMatrix<T>) -> DMatrix<T> {
    y.qr().q()
}

/// Randomized range finder with subspace (power) iterations, followed by a
/// Rayleigh-Ritz step on the captured range. Only operator actions are used.
/// The Gaussian test matrix is drawn from a ChaCha stream seeded by `seed`.
pub fn randomized_eig<T: Scalar>(
    op: &InfoOperator<T>,
    k: usize,
    oversample: usize,
    power_iters: usize,
    seed: u64,
) -> Result<ModeSet<T>> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} modes of an operator of dimension {n}"
        )));
    }
    let l = (k + oversample).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DMatrix::from_fn(n, l, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        T::lit(z)
    });
    let mut q = orthonormalize(apply_columns(op, &omega));
    for _ in 0..power_iters {
        q = orthonormalize(apply_columns(op, &q));
    }
    let aq = apply_columns(op, &q);
    let b = symmetrize(&q.tr_mul(&aq));
    let (vals, vecs) = eigh_desc(&b);
    let eigenvalues = vals.rows(0, k).into_owned();
    let mut modes = DMatrix::zeros(n, k);
    let mut residual_norms = DVector::zeros(k);
    for i in 0..k {
        let u = vecs.column(i).into_owned();
        let mut psi = &q * &u;
        let mut a_psi = &aq * &u;
        if fix_sign(&mut psi) {
            a_psi.neg_mut();
        }
        residual_norms[i] = (a_psi - &psi * eigenvalues[i]).norm();
        modes.set_column(i, &psi);
    }
    Ok(ModeSet {
        eigenvalues,
        modes,
        metric: Metric::Euclidean,
        residual_norms,
        whitened: None,
    })
}
