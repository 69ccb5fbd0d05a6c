use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::opcore::InfoOperator;
use crate::scalar::Scalar;

/// Stochastic diagonal estimate with per-entry standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagEstimate<T: Scalar> {
    pub mean: DVector<T>,
    /// Sample standard error of the mean; `None` with a single probe.
    pub std_err: Option<DVector<T>>,
    pub n_probes: usize,
}

/// Rademacher probing: the average of `z .* (I z)` over `n_probes`
/// independent sign vectors.
pub fn estimate_diag<T: Scalar>(
    op: &InfoOperator<T>,
    n_probes: usize,
    seed: u64,
) -> Result<DiagEstimate<T>> {
    if n_probes == 0 {
        return Err(Error::InvalidArgument("estimate_diag needs at least one probe".into()));
    }
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = DVector::<T>::zeros(n);
    let mut m2 = DVector::<T>::zeros(n);
    let mut z = DVector::<T>::zeros(n);
    for p in 0..n_probes {
        for zi in z.iter_mut() {
            *zi = if rng.random_bool(0.5) { T::one() } else { -T::one() };
        }
        let az = op.apply(&z)?;
        let count = T::from_count(p + 1);
        for i in 0..n {
            // Welford update
            let x = z[i] * az[i];
            let delta = x - mean[i];
            mean[i] += delta / count;
            m2[i] += delta * (x - mean[i]);
        }
    }
    let std_err = (n_probes > 1).then(|| {
        let denom = T::from_count(n_probes - 1) * T::from_count(n_probes);
        m2.map(|v| (v.max(T::zero()) / denom).sqrt())
    });
    Ok(DiagEstimate {
        mean,
        std_err,
        n_probes,
    })
}
