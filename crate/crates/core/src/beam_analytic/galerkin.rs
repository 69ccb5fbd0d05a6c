//! Semi-analytic spectrum of the single-sensor kernel operator.
//!
//! The moment-product kernel is the Green's function of `d^4/ds^4` with
//! simply supported ends, `sum_n 2 sin(n pi s) sin(n pi t) / (n pi)^4`. The
//! sensor-weighted operator is therefore `F F^*` with
//! `F u = mu(s) sum_n (n pi)^-2 u_n sqrt(2) sin(n pi s)`, and its nonzero
//! spectrum equals that of `H = D G D`, `D = diag((n pi)^-2)` and
//! `G_nm = int_0^1 2 sin(n pi s) sin(m pi s) mu(s)^2 ds`. Every entry of `G`
//! is integrated exactly from piecewise antiderivatives.

use nalgebra::{DMatrix, DVector};

use super::{midpoint_grid, mu_right, BeamSpec};
use crate::error::{Error, Result};
use crate::linalg::{eigh_desc, fix_sign, symmetrize};
use crate::scalar::Scalar;
use crate::spectral::{Metric, ModeSet};

/// Multiplier applied to the sine expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SensorWeight {
    /// Adjoint moment of the rotation sensor.
    Sensor,
    /// `mu = 1`: plain sine modes with eigenvalues `(n pi)^-4`.
    Unweighted,
}

/// `int_a^b cos(k pi s) ds`
fn int_cos<T: Scalar>(k: usize, a: T, b: T) -> T {
    if k == 0 {
        return b - a;
    }
    let w = T::from_count(k) * T::pi();
    ((w * b).sin() - (w * a).sin()) / w
}

/// `int_a^b s cos(k pi s) ds`
fn int_s_cos<T: Scalar>(k: usize, a: T, b: T) -> T {
    if k == 0 {
        return (b * b - a * a) / T::lit(2.0);
    }
    let w = T::from_count(k) * T::pi();
    let f = |s: T| s * (w * s).sin() / w + (w * s).cos() / (w * w);
    f(b) - f(a)
}

/// `int_a^b s^2 cos(k pi s) ds`
fn int_s2_cos<T: Scalar>(k: usize, a: T, b: T) -> T {
    if k == 0 {
        return (b * b * b - a * a * a) / T::lit(3.0);
    }
    let w = T::from_count(k) * T::pi();
    let two = T::lit(2.0);
    let f = |s: T| {
        s * s * (w * s).sin() / w + two * s * (w * s).cos() / (w * w) - two * (w * s).sin() / (w * w * w)
    };
    f(b) - f(a)
}

/// `int_0^1 mu(s)^2 cos(k pi s) ds`
fn weight_cosine<T: Scalar>(k: usize, rho: T, weight: SensorWeight) -> T {
    match weight {
        SensorWeight::Unweighted => int_cos(k, T::zero(), T::one()),
        SensorWeight::Sensor => {
            let one = T::one();
            // s^2 left of the sensor, (1-s)^2 = 1 - 2s + s^2 right of it
            int_s2_cos(k, T::zero(), rho) + int_cos(k, rho, one) - T::lit(2.0) * int_s_cos(k, rho, one)
                + int_s2_cos(k, rho, one)
        }
    }
}

/// Exact Gram matrix `G_nm = int 2 sin(n pi s) sin(m pi s) mu^2 ds`.
fn weighted_gram<T: Scalar>(n_series: usize, rho: T, weight: SensorWeight) -> DMatrix<T> {
    let c: Vec<T> = (0..=2 * n_series).map(|k| weight_cosine(k, rho, weight)).collect();
    DMatrix::from_fn(n_series, n_series, |i, j| {
        let (n, m) = (i + 1, j + 1);
        c[n.abs_diff(m)] - c[n + m]
    })
}

/// Coupling coefficients `B_in = int_0^1 sqrt2 sin(i pi s) mu(s) sqrt2 sin(n pi s) ds`
/// for `i < n_basis`, `n < n_series` (one-based frequencies).
pub fn sine_coupling<T: Scalar>(rho: T, n_basis: usize, n_series: usize) -> DMatrix<T> {
    let one = T::one();
    DMatrix::from_fn(n_basis, n_series, |r, c| {
        let (i, n) = (r + 1, c + 1);
        let p = i.abs_diff(n);
        let q = i + n;
        // mu = -s + [s > rho]
        -(int_s_cos(p, T::zero(), one) - int_s_cos(q, T::zero(), one)) + (int_cos(p, rho, one) - int_cos(q, rho, one))
    })
}

/// Leading eigenpairs of the continuous kernel operator on `[0, L]`.
#[derive(Clone, Debug)]
pub struct GalerkinModes<T: Scalar> {
    /// Dimensional eigenvalues (units `P^2 L^4 / sigma^2`).
    pub eigenvalues: DVector<T>,
    /// Eigenvalues of the normalized operator on `[0, 1]`.
    pub normalized: DVector<T>,
    /// Eigenvectors of `H`, one column per mode.
    pub coefficients: DMatrix<T>,
    pub rho: T,
    pub weight: SensorWeight,
    residuals: DVector<T>,
}

impl<T: Scalar> GalerkinModes<T> {
    pub fn compute(spec: &BeamSpec<T>, n_series: usize, k: usize, weight: SensorWeight) -> Result<Self> {
        if k == 0 || n_series < k {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= k <= n_series, got k = {k}, n_series = {n_series}"
            )));
        }
        let g = weighted_gram(n_series, spec.rho, weight);
        let d = DVector::from_fn(n_series, |i, _| {
            let w = T::from_count(i + 1) * T::pi();
            T::one() / (w * w)
        });
        let h = symmetrize(&DMatrix::from_fn(n_series, n_series, |i, j| d[i] * g[(i, j)] * d[j]));
        let (vals, vecs) = eigh_desc(&h);
        let normalized = vals.rows(0, k).into_owned();
        let coefficients = vecs.columns(0, k).into_owned();
        let residuals = DVector::from_fn(k, |i, _| {
            let u = coefficients.column(i);
            (&h * u - u * normalized[i]).norm()
        });
        Ok(Self {
            eigenvalues: &normalized * (spec.kernel_scale() * spec.length),
            normalized,
            coefficients,
            rho: spec.rho,
            weight,
            residuals,
        })
    }

    pub fn k(&self) -> usize {
        self.normalized.len()
    }

    /// Mode `i` at normalized position `s`, unit norm in `L^2(0, 1)`.
    pub fn evaluate(&self, i: usize, s: T) -> T {
        let mut acc = T::zero();
        let root2 = T::lit(2.0).sqrt();
        for (j, &u) in self.coefficients.column(i).iter().enumerate() {
            let w = T::from_count(j + 1) * T::pi();
            acc += u * root2 * (w * s).sin() / (w * w);
        }
        let m = match self.weight {
            SensorWeight::Sensor => mu_right(self.rho, s),
            SensorWeight::Unweighted => T::one(),
        };
        m * acc / self.normalized[i].sqrt()
    }

    /// Samples the modes on an `n`-point midpoint grid, normalized to unit
    /// Euclidean length with the crate's sign rule. Eigenvalues are the
    /// dimensional ones.
    pub fn to_mode_set(&self, n: usize) -> ModeSet<T> {
        let s = midpoint_grid::<T>(n);
        let k = self.k();
        let mut modes = DMatrix::zeros(n, k);
        for i in 0..k {
            let mut col = DVector::from_fn(n, |j, _| self.evaluate(i, s[j]));
            let norm = col.norm();
            if norm > T::zero() {
                col /= norm;
            }
            fix_sign(&mut col);
            modes.set_column(i, &col);
        }
        ModeSet {
            eigenvalues: self.eigenvalues.clone(),
            modes,
            metric: Metric::Euclidean,
            residual_norms: self.residuals.clone(),
            whitened: None,
        }
    }
}

/// Leading `k` sensor-weighted modes from an `n_series`-term sine expansion.
pub fn galerkin_modes<T: Scalar>(spec: &BeamSpec<T>, n_series: usize, k: usize) -> Result<GalerkinModes<T>> {
    GalerkinModes::compute(spec, n_series, k, SensorWeight::Sensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam_analytic::nystrom_operator;
    use crate::spectral::sym_eig;

    fn spec() -> BeamSpec<f64> {
        BeamSpec::new(2.0, 3.0, 0.5, 0.25, 1.0).unwrap()
    }

    #[test]
    fn antiderivatives_against_quadrature() {
        let n = 20_000;
        let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            let h = (b - a) / n as f64;
            let mut acc = f(a) + f(b);
            for i in 1..n {
                acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        for k in [0usize, 1, 3, 17] {
            let w = k as f64 * std::f64::consts::PI;
            let (a, b) = (0.2, 0.9);
            assert!((int_cos(k, a, b) - simpson(&|s| (w * s).cos(), a, b)).abs() < 1e-12);
            assert!((int_s_cos(k, a, b) - simpson(&|s| s * (w * s).cos(), a, b)).abs() < 1e-12);
            assert!((int_s2_cos(k, a, b) - simpson(&|s| s * s * (w * s).cos(), a, b)).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_is_symmetric() {
        let b = sine_coupling(0.3, 12, 12);
        assert!((&b - b.transpose()).amax() == 0.0);
    }

    #[test]
    fn coupling_parseval_matches_gram() {
        let rho = 0.25;
        let b = sine_coupling::<f64>(rho, 4000, 6);
        let g = weighted_gram(6, rho, SensorWeight::Sensor);
        // mu has a jump, so the coupling tail decays like 1/i^2
        assert!((b.tr_mul(&b) - g).amax() < 1e-3);
    }

    #[test]
    fn unweighted_limit_is_sine_basis() {
        let sp = spec();
        let gm = GalerkinModes::compute(&sp, 40, 5, SensorWeight::Unweighted).unwrap();
        for n in 1..=5 {
            let want = (1.0 / (n as f64 * std::f64::consts::PI)).powi(4);
            assert!((gm.normalized[n - 1] - want).abs() < 1e-14 * want.max(1e-6));
            let scale = sp.kernel_scale() * sp.length;
            assert!((gm.eigenvalues[n - 1] - want * scale).abs() < 1e-12 * want * scale);
            let s = 0.137;
            let expect = 2f64.sqrt() * (n as f64 * std::f64::consts::PI * s).sin();
            assert!((gm.evaluate(n - 1, s).abs() - expect.abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_nystrom_spectrum() {
        let sp = spec();
        let gm = galerkin_modes(&sp, 200, 5).unwrap();
        let ny = sym_eig(&nystrom_operator(&sp, 400).unwrap(), 5).unwrap();
        for i in 0..5 {
            let rel = (gm.eigenvalues[i] - ny.eigenvalues[i]).abs() / ny.eigenvalues[i];
            assert!(rel < 1e-4, "mode {i}: rel {rel}");
        }
        let sampled = gm.to_mode_set(400);
        for i in 0..3 {
            let overlap = sampled.mode(i).dot(&ny.mode(i)).abs();
            assert!(overlap > 0.999, "mode {i}: overlap {overlap}");
        }
    }

    #[test]
    fn bad_sizes() {
        assert!(galerkin_modes(&spec(), 3, 4).is_err());
        assert!(galerkin_modes(&spec(), 3, 0).is_err());
    }
}
