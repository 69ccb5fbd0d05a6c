use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{max_abs, symmetry_defect};
use crate::scalar::Scalar;

/// Noise covariance of one observation block.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseCov<T: Scalar> {
    /// Independent errors; the vector holds variances.
    Diagonal(DVector<T>),
    /// Full symmetric positive-definite covariance.
    Dense(DMatrix<T>),
}

impl<T: Scalar> NoiseCov<T> {
    pub fn dim(&self) -> usize {
        match self {
            NoiseCov::Diagonal(d) => d.len(),
            NoiseCov::Dense(m) => m.nrows(),
        }
    }

    /// Isotropic covariance `sigma^2 I`.
    pub fn isotropic(n: usize, sigma: T) -> Self {
        NoiseCov::Diagonal(DVector::from_element(n, sigma * sigma))
    }

    /// Diagonal covariance from per-row standard deviations.
    pub fn from_std(std: &[T]) -> Self {
        NoiseCov::Diagonal(DVector::from_iterator(std.len(), std.iter().map(|&s| s * s)))
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        match self {
            NoiseCov::Diagonal(d) => DMatrix::from_diagonal(d),
            NoiseCov::Dense(m) => m.clone(),
        }
    }
}

/// Symmetric square-root factor of the noise covariance, `R = L L^T`.
#[derive(Clone, Debug)]
enum Whitener<T: Scalar> {
    Diagonal(DVector<T>),
    Lower(DMatrix<T>),
}

/// Jacobian of one data source together with its noise model.
#[derive(Clone, Debug)]
pub struct ObservationBlock<T: Scalar> {
    jacobian: DMatrix<T>,
    noise: NoiseCov<T>,
    label: String,
    whitener: Whitener<T>,
}

impl<T: Scalar> ObservationBlock<T> {
    /// Validates the covariance and precomputes its whitening factor.
    pub fn new(jacobian: DMatrix<T>, noise: NoiseCov<T>, label: impl Into<String>) -> Result<Self> {
        check_dim("observation block rows vs noise covariance", jacobian.nrows(), noise.dim())?;
        if jacobian.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("jacobian has non-finite entries".into()));
        }
        let whitener = match &noise {
            NoiseCov::Diagonal(d) => {
                if let Some(i) = d.iter().position(|&v| !(v > T::zero() && v.is_finite())) {
                    return Err(Error::Covariance(format!(
                        "diagonal entry {i} must be positive and finite"
                    )));
                }
                Whitener::Diagonal(d.map(|v| v.sqrt()))
            }
            NoiseCov::Dense(r) => {
                if let Some(i) = (0..r.nrows()).position(|i| !(r[(i, i)] > T::zero())) {
                    return Err(Error::Covariance(format!("diagonal entry {i} must be positive")));
                }
                if symmetry_defect(r) > T::lit(1e-12) * max_abs(r) {
                    return Err(Error::Covariance("covariance is not symmetric".into()));
                }
                let chol = r
                    .clone()
                    .cholesky()
                    .ok_or_else(|| Error::Covariance("covariance is not positive definite".into()))?;
                Whitener::Lower(chol.l())
            }
        };
        Ok(Self {
            jacobian,
            noise,
            label: label.into(),
            whitener,
        })
    }

    /// Block with independent errors of common standard deviation `sigma`.
    pub fn with_std(jacobian: DMatrix<T>, sigma: T, label: impl Into<String>) -> Result<Self> {
        let n = jacobian.nrows();
        Self::new(jacobian, NoiseCov::isotropic(n, sigma), label)
    }

    pub fn jacobian(&self) -> &DMatrix<T> {
        &self.jacobian
    }

    pub fn noise(&self) -> &NoiseCov<T> {
        &self.noise
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_obs(&self) -> usize {
        self.jacobian.nrows()
    }

    pub fn n_params(&self) -> usize {
        self.jacobian.ncols()
    }

    /// Applies `L^{-1}` to the columns of `m`.
    pub fn whiten(&self, m: &DMatrix<T>) -> DMatrix<T> {
        match &self.whitener {
            Whitener::Diagonal(s) => {
                let mut out = m.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    row /= s[i];
                }
                out
            }
            Whitener::Lower(l) => l
                .solve_lower_triangular(m)
                .expect("cholesky factor has a nonzero diagonal"),
        }
    }

    pub fn whiten_vector(&self, y: &DVector<T>) -> DVector<T> {
        match &self.whitener {
            Whitener::Diagonal(s) => y.component_div(s),
            Whitener::Lower(l) => l
                .solve_lower_triangular(y)
                .expect("cholesky factor has a nonzero diagonal"),
        }
    }

    /// Applies `R^{-1}` through the triangular factor.
    pub fn apply_precision(&self, y: &DVector<T>) -> DVector<T> {
        match &self.whitener {
            Whitener::Diagonal(s) => y.component_div(s).component_div(s),
            Whitener::Lower(l) => {
                let z = l
                    .solve_lower_triangular(y)
                    .expect("cholesky factor has a nonzero diagonal");
                l.tr_solve_lower_triangular(&z)
                    .expect("cholesky factor has a nonzero diagonal")
            }
        }
    }

    /// Noise-whitened Jacobian `L^{-1} J`.
    pub fn whitened_jacobian(&self) -> DMatrix<T> {
        self.whiten(&self.jacobian)
    }

    /// `||J v||^2_{R^{-1}}`, the noise-weighted output energy of `v`.
    pub fn output_energy(&self, v: &DVector<T>) -> Result<T> {
        check_dim("output energy", self.n_params(), v.len())?;
        let w = self.whiten_vector(&(&self.jacobian * v));
        Ok(w.norm_squared())
    }

    /// Same block with the Jacobian rows and noise replaced.
    pub(crate) fn with_noise(&self, noise: NoiseCov<T>, label: String) -> Result<Self> {
        Self::new(self.jacobian.clone(), noise, label)
    }
}
