//! Closed-form kernels for a simply supported beam observed by a single
//! rotation sensor under a moving point load.
//!
//! Positions are normalized, `s = x / L`. A sensor at `rho` reads the
//! rotation at `x = rho L` for every load position `z` of a dense uniform
//! sweep with noise `sigma`. Perturbing the compliance `v = 1/EI` then
//! produces the kernel
//!
//! `K(s, t) = (P^2 L^3 / sigma^2) mu(s) mu(t) int_0^1 M(s; z) M(t; z) dz`
//!
//! with `M(s; z) = min(s, z)(1 - max(s, z))` the triangular moment influence
//! and `mu` the adjoint moment of a unit couple at the sensor.

mod galerkin;

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::csvio::{fmt_f64, write_row};
use crate::error::{Error, Result};
use crate::opcore::InfoOperator;
use crate::scalar::Scalar;

pub use galerkin::{galerkin_modes, sine_coupling, GalerkinModes, SensorWeight};

/// Physical description of the single-sensor moving-load experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec<T> {
    pub length: T,
    pub load: T,
    pub sigma: T,
    pub rho: T,
    pub ei0: T,
}

impl<T: Scalar> BeamSpec<T> {
    pub fn new(length: T, load: T, sigma: T, rho: T, ei0: T) -> Result<Self> {
        let spec = Self {
            length,
            load,
            sigma,
            rho,
            ei0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.length, self.load, self.sigma, self.ei0]
            .iter()
            .all(|&x| x > T::zero() && x.is_finite());
        if !positive {
            return Err(Error::InvalidArgument(
                "beam length, load, sigma and EI0 must be positive".into(),
            ));
        }
        if !(self.rho > T::zero() && self.rho < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "sensor position rho = {} must lie in (0, 1)",
                self.rho.as_f64()
            )));
        }
        Ok(())
    }

    /// `P^2 L^3 / sigma^2`, the dimensional prefactor of the kernel.
    pub fn kernel_scale(&self) -> T {
        let p = self.load;
        let l = self.length;
        p * p * l * l * l / (self.sigma * self.sigma)
    }

    /// `kappa_v = P^2 L^3 / (3 sigma^2)`.
    pub fn kappa_v(&self) -> T {
        self.kernel_scale() / T::lit(3.0)
    }
}

/// Value of the adjoint moment, which jumps by one at the sensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mu<T> {
    Value(T),
    Jump { left: T, right: T },
}

impl<T: Scalar> Mu<T> {
    pub fn left(&self) -> T {
        match *self {
            Mu::Value(v) => v,
            Mu::Jump { left, .. } => left,
        }
    }

    /// Right limit; the convention used wherever a single value is needed.
    pub fn right(&self) -> T {
        match *self {
            Mu::Value(v) => v,
            Mu::Jump { right, .. } => right,
        }
    }

    pub fn is_jump(&self) -> bool {
        matches!(self, Mu::Jump { .. })
    }
}

/// Adjoint bending moment `-s` left of the sensor and `1 - s` right of it.
pub fn mu<T: Scalar>(rho: T, s: T) -> Mu<T> {
    if s < rho {
        Mu::Value(-s)
    } else if s > rho {
        Mu::Value(T::one() - s)
    } else {
        Mu::Jump {
            left: -s,
            right: T::one() - s,
        }
    }
}

pub fn mu_left<T: Scalar>(rho: T, s: T) -> T {
    mu(rho, s).left()
}

pub fn mu_right<T: Scalar>(rho: T, s: T) -> T {
    mu(rho, s).right()
}

/// Normalized triangular moment influence `min(s,z)(1 - max(s,z))`.
pub fn moment_influence<T: Scalar>(s: T, zeta: T) -> T {
    s.min(zeta) * (T::one() - s.max(zeta))
}

/// `int_0^1 M(s; z) M(t; z) dz = a(1-b)(2b - a^2 - b^2)/6`, `a = min`, `b = max`.
pub fn moment_product_integral<T: Scalar>(s: T, sbar: T) -> T {
    let a = s.min(sbar);
    let b = s.max(sbar);
    a * (T::one() - b) * (T::lit(2.0) * b - a * a - b * b) / T::lit(6.0)
}

/// Full compliance kernel. At `s = rho` the right limit of `mu` is used.
pub fn full_kernel<T: Scalar>(spec: &BeamSpec<T>, s: T, sbar: T) -> T {
    // product of the two mu values first, so the result is exactly symmetric
    let m = mu_right(spec.rho, s) * mu_right(spec.rho, sbar);
    spec.kernel_scale() * m * moment_product_integral(s, sbar)
}

/// `mu(s)^2 s^2 (1-s)^2`, the density without its `kappa_v` prefactor.
/// Accepts `rho` anywhere in `[0, 1]`, so the end-sensor limits can be
/// explored; at `s = rho` the right limit is used.
pub fn normalized_density<T: Scalar>(rho: T, s: T) -> T {
    let m = mu_right(rho, s);
    let q = s * (T::one() - s);
    m * m * q * q
}

/// Pointwise information density `kappa_v mu(s)^2 s^2 (1-s)^2`.
pub fn diag_density<T: Scalar>(spec: &BeamSpec<T>, s: T) -> T {
    spec.kappa_v() * normalized_density(spec.rho, s)
}

/// Both one-sided density values at `s`; equal away from the sensor.
pub fn diag_density_sided<T: Scalar>(spec: &BeamSpec<T>, s: T) -> (T, T) {
    let q = s * (T::one() - s);
    let m = mu(spec.rho, s);
    let k = spec.kappa_v() * q * q;
    (k * m.left() * m.left(), k * m.right() * m.right())
}

/// `density(rho+) / density(rho-) = (1-rho)^2 / rho^2`.
pub fn jump_ratio<T: Scalar>(rho: T) -> T {
    let r = (T::one() - rho) / rho;
    r * r
}

/// Kernel for stiffness perturbations, `v(s)^2 K(s,t) v(t)^2`, with `v` the
/// compliance field evaluated at normalized positions.
pub fn ei_kernel<T: Scalar>(spec: &BeamSpec<T>, v_field: impl Fn(T) -> T, s: T, sbar: T) -> Result<T> {
    let vs = v_field(s);
    let vt = v_field(sbar);
    if !(vs > T::zero() && vt > T::zero()) {
        return Err(Error::InvalidArgument("compliance field must be positive".into()));
    }
    Ok(vs * vs * full_kernel(spec, s, sbar) * vt * vt)
}

/// Kernel assembled from a finite sweep of `n_z + 1` equally spaced load
/// positions with trapezoid weights. Converges to [`full_kernel`] as
/// `O(n_z^-2)`.
pub fn discrete_kernel<T: Scalar>(spec: &BeamSpec<T>, s: T, sbar: T, n_z: usize) -> T {
    let h = T::one() / T::from_count(n_z);
    let mut acc = T::zero();
    for k in 0..=n_z {
        let z = T::from_count(k) * h;
        let w = if k == 0 || k == n_z { h / T::lit(2.0) } else { h };
        acc += w * moment_influence(s, z) * moment_influence(sbar, z);
    }
    spec.kernel_scale() * mu_right(spec.rho, s) * mu_right(spec.rho, sbar) * acc
}

/// Midpoints of `n` equal cells on `[0, 1]`.
pub fn midpoint_grid<T: Scalar>(n: usize) -> DVector<T> {
    let h = T::one() / T::from_count(n);
    DVector::from_fn(n, |i, _| (T::from_count(i) + T::lit(0.5)) * h)
}

/// Kernel values `K(s_i, s_j)` on the midpoint grid.
pub fn kernel_matrix<T: Scalar>(spec: &BeamSpec<T>, n: usize) -> DMatrix<T> {
    let s = midpoint_grid::<T>(n);
    DMatrix::from_fn(n, n, |i, j| full_kernel(spec, s[i], s[j]))
}

/// Midpoint-rule Nystrom discretization of the integral operator on
/// `[0, L]`: `K(s_i, s_j) L / n`. Its eigenvalues approximate those of the
/// continuous operator.
pub fn nystrom_operator<T: Scalar>(spec: &BeamSpec<T>, n: usize) -> Result<InfoOperator<T>> {
    let w = spec.length / T::from_count(n);
    InfoOperator::from_matrix(kernel_matrix(spec, n) * w, vec!["nystrom".into()])
}

/// Writes `# kernel rho=<rho> n=<n>` followed by the midpoint-grid kernel.
pub fn write_kernel_csv<T: Scalar, W: Write>(w: &mut W, spec: &BeamSpec<T>, n: usize) -> Result<()> {
    writeln!(w, "# kernel rho={} n={}", fmt_f64(spec.rho.as_f64()), n)?;
    let k = kernel_matrix(spec, n);
    for i in 0..n {
        write_row(w, k.row(i).iter().map(|x| x.as_f64()))?;
    }
    Ok(())
}

/// Density curve on `n + 1` equispaced points plus the sensor location.
/// At `s = rho` two rows are written: left limit, then right limit.
pub fn write_density_csv<T: Scalar, W: Write>(w: &mut W, spec: &BeamSpec<T>, n: usize) -> Result<()> {
    writeln!(
        w,
        "# density rho={} kappa_v={} n={}",
        fmt_f64(spec.rho.as_f64()),
        fmt_f64(spec.kappa_v().as_f64()),
        n
    )?;
    writeln!(w, "s,density")?;
    let rho = spec.rho.as_f64();
    let mut pts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    if !pts.contains(&rho) {
        pts.push(rho);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    for s in pts {
        let (l, r) = diag_density_sided(spec, T::lit(s));
        if s == rho {
            write_row(w, [s, l.as_f64()])?;
        }
        write_row(w, [s, r.as_f64()])?;
    }
    Ok(())
}
