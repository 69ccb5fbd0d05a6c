//! Gaussian priors, likelihood-informed subspaces and weak-direction gains.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh_desc, symmetry_defect, symmetrize};
use crate::opcore::{InfoOperator, ObservationBlock};
use crate::scalar::Scalar;
use crate::spectral::{Metric, ModeSet};

pub const DEFAULT_TAU: f64 = 1.0;
pub const DEFAULT_TAU_WEAK: f64 = 1e-2;

/// Gaussian prior `N(m_pr, Q_pr^{-1})`.
///
/// The symmetric covariance square root `C^{1/2} = V diag(q^{-1/2}) V^T` is
/// formed once from the eigendecomposition of the precision.
#[derive(Clone, Debug)]
pub struct PriorModel<T: Scalar> {
    precision: DMatrix<T>,
    mean: DVector<T>,
    cov_sqrt: DMatrix<T>,
}

impl<T: Scalar> PriorModel<T> {
    pub fn new(precision: DMatrix<T>, mean: DVector<T>) -> Result<Self> {
        let n = precision.nrows();
        check_dim("prior precision", n, precision.ncols())?;
        check_dim("prior mean", n, mean.len())?;
        let scale = precision.amax().max(T::lit(f64::MIN_POSITIVE));
        if symmetry_defect(&precision) > T::lit(1e-12) * scale {
            return Err(Error::NotSpd("prior precision is not symmetric".into()));
        }
        let precision = symmetrize(&precision);
        let (q, v) = eigh_desc(&precision);
        let q_min = q.iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b));
        if n == 0 || q_min <= T::eps() * T::from_count(n) * q[0] {
            return Err(Error::NotSpd("prior precision is not positive definite".into()));
        }
        let inv_root = q.map(|x| T::one() / x.sqrt());
        let cov_sqrt = symmetrize(&(&v * DMatrix::from_diagonal(&inv_root) * v.transpose()));
        Ok(Self {
            precision,
            mean,
            cov_sqrt,
        })
    }

    /// `Q = gamma D^T D + eps I`, `D` the `(n-1) x n` first-difference
    /// stencil, zero mean.
    pub fn difference_precision(n: usize, gamma: T, eps: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("difference prior needs n >= 2".into()));
        }
        if !(gamma > T::zero()) || !(eps > T::zero()) {
            return Err(Error::InvalidArgument("gamma and eps must be positive".into()));
        }
        let mut q = DMatrix::from_diagonal_element(n, n, eps);
        for e in 0..n - 1 {
            q[(e, e)] += gamma;
            q[(e + 1, e + 1)] += gamma;
            q[(e, e + 1)] -= gamma;
            q[(e + 1, e)] -= gamma;
        }
        Self::new(q, DVector::zeros(n))
    }

    pub fn dim(&self) -> usize {
        self.precision.nrows()
    }

    pub fn precision(&self) -> &DMatrix<T> {
        &self.precision
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    pub fn with_mean(mut self, mean: DVector<T>) -> Result<Self> {
        check_dim("prior mean", self.dim(), mean.len())?;
        self.mean = mean;
        Ok(self)
    }

    pub fn cov_sqrt(&self) -> &DMatrix<T> {
        &self.cov_sqrt
    }

    pub fn cov_sqrt_apply(&self, v: &DVector<T>) -> Result<DVector<T>> {
        check_dim("cov_sqrt_apply", self.dim(), v.len())?;
        Ok(&self.cov_sqrt * v)
    }

    pub fn covariance(&self) -> DMatrix<T> {
        symmetrize(&(&self.cov_sqrt * &self.cov_sqrt))
    }

    /// `max |C^{1/2} Q C^{1/2} - I|`.
    pub fn sqrt_defect(&self) -> T {
        let n = self.dim();
        (&self.cov_sqrt * &self.precision * &self.cov_sqrt - DMatrix::identity(n, n)).amax()
    }
}

/// Likelihood-informed subspace: prior-relative modes above a threshold.
#[derive(Clone, Debug)]
pub struct LisResult<T: Scalar> {
    pub retained: ModeSet<T>,
    pub tau: T,
    pub variance_ratios: DVector<T>,
}

#[derive(Serialize)]
struct LisRecord<'a> {
    tau: f64,
    eigenvalues: Vec<f64>,
    variance_ratios: Vec<f64>,
    modes_csv: Option<&'a str>,
}

impl<T: Scalar> LisResult<T> {
    pub fn len(&self) -> usize {
        self.retained.k()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self, modes_csv: Option<&str>) -> Result<String> {
        let rec = LisRecord {
            tau: self.tau.as_f64(),
            eigenvalues: self.retained.eigenvalues.iter().map(|x| x.as_f64()).collect(),
            variance_ratios: self.variance_ratios.iter().map(|x| x.as_f64()).collect(),
            modes_csv,
        };
        Ok(serde_json::to_string_pretty(&rec)?)
    }
}

/// Posterior-to-prior variance ratio along a prior-relative mode.
pub fn variance_ratio<T: Scalar>(lambda_pr: T) -> T {
    T::one() / (T::one() + lambda_pr.max(T::zero()))
}

pub fn lis_select<T: Scalar>(modes: &ModeSet<T>, tau: T) -> LisResult<T> {
    let keep: Vec<usize> = (0..modes.k()).filter(|&i| modes.eigenvalues[i] > tau).collect();
    let retained = modes.select(&keep);
    let variance_ratios = retained.eigenvalues.map(variance_ratio);
    LisResult {
        retained,
        tau,
        variance_ratios,
    }
}

fn whitened_basis<T: Scalar>(modes: &ModeSet<T>) -> Result<&DMatrix<T>> {
    match (&modes.whitened, modes.metric) {
        (Some(w), Metric::Prior) if w.ncols() == w.nrows() => Ok(w),
        _ => Err(Error::InvalidArgument(
            "weak/strong projectors need the full whitened prior-relative basis".into(),
        )),
    }
}

fn projector_where<T: Scalar>(modes: &ModeSet<T>, keep: impl Fn(T) -> bool) -> Result<DMatrix<T>> {
    let w = whitened_basis(modes)?;
    let n = w.nrows();
    let mut p = DMatrix::zeros(n, n);
    for i in 0..modes.k() {
        if keep(modes.eigenvalues[i]) {
            let c = w.column(i);
            p += c * c.transpose();
        }
    }
    Ok(symmetrize(&p))
}

/// Orthogonal projector (whitened coordinates) onto modes with
/// `lambda_pr < tau_weak`.
pub fn weak_projector<T: Scalar>(modes: &ModeSet<T>, tau_weak: T) -> Result<DMatrix<T>> {
    projector_where(modes, |l| l < tau_weak)
}

/// Complement of [`weak_projector`].
pub fn strong_projector<T: Scalar>(modes: &ModeSet<T>, tau_weak: T) -> Result<DMatrix<T>> {
    projector_where(modes, |l| l >= tau_weak)
}

/// Weak-direction gain `G = Pi C^{1/2} I_b C^{1/2} Pi` of a candidate block
/// and its whitened trace `g = tr G`.
pub fn weak_gain<T: Scalar>(
    candidate: &ObservationBlock<T>,
    prior: &PriorModel<T>,
    projector: &DMatrix<T>,
) -> Result<(DMatrix<T>, T)> {
    let n = prior.dim();
    check_dim("candidate parameters", n, candidate.n_params())?;
    check_dim("projector rows", n, projector.nrows())?;
    check_dim("projector cols", n, projector.ncols())?;
    // G = A^T A with A = W S Pi, so g = ||A||_F^2 is nonnegative by construction.
    let a = candidate.whitened_jacobian() * prior.cov_sqrt() * projector;
    let g = a.norm_squared();
    Ok((symmetrize(&a.tr_mul(&a)), g))
}

/// `Q_pr + I`.
pub fn posterior_precision<T: Scalar>(op: &InfoOperator<T>, prior: &PriorModel<T>) -> Result<DMatrix<T>> {
    check_dim("posterior precision", prior.dim(), op.dim())?;
    Ok(symmetrize(&(prior.precision() + op.to_dense())))
}

pub fn posterior_covariance<T: Scalar>(op: &InfoOperator<T>, prior: &PriorModel<T>) -> Result<DMatrix<T>> {
    let q = posterior_precision(op, prior)?;
    let chol = q
        .cholesky()
        .ok_or_else(|| Error::NotSpd("posterior precision".into()))?;
    Ok(symmetrize(&chol.inverse()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::assemble_info;
    use crate::spectral::{prior_preconditioned_eig, sym_eig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn difference_stencil() {
        let p = PriorModel::<f64>::difference_precision(3, 1.0, 1.0).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 3.0, -1.0, 0.0, -1.0, 2.0]);
        assert_eq!(p.precision(), &expect);
        assert!(PriorModel::<f64>::difference_precision(2, 1.0, 0.0).is_err());
        assert!(PriorModel::<f64>::difference_precision(1, 1.0, 1.0).is_err());
        let c = DVector::from_element(5, 1.7);
        let p5 = PriorModel::<f64>::difference_precision(5, 3.0, 0.25).unwrap();
        let qf = c.dot(&(p5.precision() * &c));
        assert!((qf - 0.25 * 5.0 * 1.7 * 1.7).abs() < 1e-12);
        assert!(p5.sqrt_defect() < 1e-10);
    }

    #[test]
    fn variance_ratios() {
        assert_eq!(variance_ratio(1.0), 0.5);
        assert_eq!(variance_ratio(3.0), 0.25);
        assert_eq!(variance_ratio(0.0), 1.0);
        let op = InfoOperator::from_matrix(DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 0.0])), vec![])
            .unwrap();
        let prior = PriorModel::new(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap();
        let modes = prior_preconditioned_eig(&op, &prior, 3).unwrap();
        let lis = lis_select(&modes, 0.5);
        assert_eq!(lis.len(), 2);
        assert_eq!(lis.variance_ratios.as_slice(), &[0.25, 0.5]);
        assert!(lis_select(&modes, 10.0).is_empty());
        assert!(lis.to_json(Some("modes.csv")).unwrap().contains("\"tau\": 0.5"));
    }

    #[test]
    fn scalar_prior_relative_problem() {
        let op = InfoOperator::from_matrix(DMatrix::<f64>::from_element(1, 1, 4.0), vec![]).unwrap();
        let prior = PriorModel::new(DMatrix::from_element(1, 1, 2.0), DVector::zeros(1)).unwrap();
        let modes = prior_preconditioned_eig(&op, &prior, 1).unwrap();
        assert!((modes.eigenvalues[0] - 2.0).abs() < 1e-14);
        let phi = modes.mode(0);
        let rq = phi.dot(&(op.to_dense() * &phi)) / phi.dot(&(prior.precision() * &phi));
        assert!((rq - 2.0).abs() < 1e-14);
        let q = posterior_precision(&op, &prior).unwrap();
        assert_eq!(q[(0, 0)], 6.0);
        assert!((posterior_covariance(&op, &prior).unwrap()[(0, 0)] - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(posterior_precision(&InfoOperator::zeros(1), &prior).unwrap(), *prior.precision());
    }

    #[test]
    fn identity_prior_matches_raw() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let j = rand_mat(&mut rng, 6, 4);
        let op = assemble_info(&ObservationBlock::with_std(j, 0.5, "b").unwrap());
        let prior = PriorModel::new(DMatrix::identity(4, 4), DVector::zeros(4)).unwrap();
        let a = prior_preconditioned_eig(&op, &prior, 4).unwrap();
        let b = sym_eig(&op, 4).unwrap();
        assert!((&a.eigenvalues - &b.eigenvalues).amax() < 1e-12);
        assert!((&a.modes - &b.modes).amax() < 1e-10);
    }

    #[test]
    fn conjugate_gaussian_update() {
        // y = J m + e, m ~ N(0, C), e ~ N(0, R): C_post = C - C J^T (J C J^T + R)^{-1} J C
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.2, 1.5]);
        let r = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.1, 0.3]);
        let block = ObservationBlock::new(j.clone(), crate::NoiseCov::Dense(r.clone()), "y").unwrap();
        let prior = PriorModel::new(c.clone().try_inverse().unwrap(), DVector::zeros(2)).unwrap();
        let post = posterior_covariance(&assemble_info(&block), &prior).unwrap();
        let s = &j * &c * j.transpose() + &r;
        let oracle = &c - &c * j.transpose() * s.try_inverse().unwrap() * &j * &c;
        assert!((post - oracle).amax() < 1e-12);
    }

    #[test]
    fn projectors() {
        let op = InfoOperator::from_matrix(DMatrix::from_diagonal(&DVector::from_vec(vec![5.0, 1.0, 1e-3])), vec![])
            .unwrap();
        let prior = PriorModel::new(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap();
        let modes = prior_preconditioned_eig(&op, &prior, 3).unwrap();
        assert_eq!(weak_projector(&modes, 1e-4).unwrap(), DMatrix::zeros(3, 3));
        assert!((weak_projector(&modes, 10.0).unwrap() - DMatrix::identity(3, 3)).amax() < 1e-12);
        let pw = weak_projector(&modes, 1e-2).unwrap();
        let mut oracle = DMatrix::zeros(3, 3);
        oracle[(2, 2)] = 1.0;
        assert!((&pw - oracle).amax() < 1e-12);
        let ps = strong_projector(&modes, 1e-2).unwrap();
        assert!((&pw + ps - DMatrix::identity(3, 3)).amax() < 1e-12);
        let partial = modes.select(&[0, 1]);
        assert!(weak_projector(&partial, 1e-2).is_err());
    }

    #[test]
    fn weak_gain_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 5;
        let base = rand_mat(&mut rng, 3, n);
        let op = assemble_info(&ObservationBlock::with_std(base.clone(), 1.0, "base").unwrap());
        let prior = PriorModel::<f64>::difference_precision(n, 2.0, 0.5).unwrap();
        let modes = prior_preconditioned_eig(&op, &prior, n).unwrap();
        let pw = weak_projector(&modes, 1e-2).unwrap();
        // Existing block lives only in the strong span.
        let (_, g0) = weak_gain(&ObservationBlock::with_std(base, 1.0, "x").unwrap(), &prior, &pw).unwrap();
        assert!(g0.abs() < 1e-10);
        // A candidate whose whitened rows lie in the weak span.
        let s = prior.cov_sqrt();
        let w_weak = modes.whitened.as_ref().unwrap().column(n - 1).into_owned();
        let row = s.clone().try_inverse().unwrap() * &w_weak;
        let cand = ObservationBlock::with_std(DMatrix::from_row_slice(1, row.len(), row.as_slice()), 0.5, "w").unwrap();
        let (_, g1) = weak_gain(&cand, &prior, &pw).unwrap();
        let whitened_op = s * assemble_info(&cand).to_dense() * s;
        assert!((g1 - whitened_op.trace()).abs() < 1e-9 * g1);
        // Random candidate vs dense assembly.
        let jc = rand_mat(&mut rng, 4, n);
        let cand = ObservationBlock::with_std(jc, 0.3, "c").unwrap();
        let (gm, g) = weak_gain(&cand, &prior, &pw).unwrap();
        let oracle = &pw * s * assemble_info(&cand).to_dense() * s * &pw;
        assert!((&gm - &oracle).amax() < 1e-10 * oracle.amax().max(1.0));
        assert!((g - oracle.trace()).abs() < 1e-10 * g.max(1.0));
        let bad = ObservationBlock::with_std(DMatrix::zeros(1, n + 1), 1.0, "bad").unwrap();
        assert!(weak_gain(&bad, &prior, &pw).is_err());
    }
}
