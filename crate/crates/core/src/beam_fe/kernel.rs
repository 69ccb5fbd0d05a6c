use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::system::{BeamSystem, Sample};
use super::MovingLoadCase;
use crate::csvio::{fmt_f64, write_row};
use crate::error::{Error, Result};
use crate::opcore::{InfoOperator, NoiseCov, ObservationBlock};
use crate::scalar::Scalar;

/// Parameter field the kernel refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelParam {
    /// Compliance `v = 1/EI`.
    Compliance,
    /// Rigidity `EI`; the compliance kernel times `v^2` on both sides.
    Ei,
}

/// Kernel values at sample points together with their quadrature weights.
#[derive(Clone, Debug)]
pub struct KernelGrid<T: Scalar> {
    pub x: DVector<T>,
    pub weights: DVector<T>,
    pub matrix: DMatrix<T>,
}

impl<T: Scalar> KernelGrid<T> {
    pub fn diagonal(&self) -> DVector<T> {
        self.matrix.diagonal()
    }

    /// Symmetric quadrature discretization `W^{1/2} K W^{1/2}`.
    pub fn weighted_operator(&self) -> Result<InfoOperator<T>> {
        let r = self.weights.map(|w| w.sqrt());
        let n = r.len();
        InfoOperator::from_matrix(
            DMatrix::from_fn(n, n, |i, j| r[i] * self.matrix[(i, j)] * r[j]),
            vec!["fe_kernel".into()],
        )
    }

    /// `# kernel rho=<rho> n=<n>` then the kernel rows.
    pub fn write_csv<W: Write>(&self, w: &mut W, rho: T) -> Result<()> {
        writeln!(w, "# kernel rho={} n={}", fmt_f64(rho.as_f64()), self.x.len())?;
        for i in 0..self.matrix.nrows() {
            write_row(w, self.matrix.row(i).iter().map(|x| x.as_f64()))?;
        }
        Ok(())
    }
}

/// Per-case kernel factors `K(r, z_k; x) = mu_r(x) M_k(x)` at `points`
/// (optionally times `-v(x)^2`), evaluated in parallel in case order.
fn kernel_factors<T: Scalar>(
    system: &BeamSystem<T>,
    sensor: T,
    cases: &[MovingLoadCase<T>],
    points: &[(usize, T)],
    param: KernelParam,
) -> Result<Vec<DVector<T>>> {
    if cases.is_empty() {
        return Err(Error::InvalidArgument("kernel assembly needs at least one load case".into()));
    }
    let lam = system.solve_adjoint(sensor)?;
    let ei = system.mesh().ei();
    let scale = DVector::from_fn(points.len(), |i, _| {
        let (e, xi) = points[i];
        let mu = system.element_moment(&lam, e, xi).expect("point inside mesh");
        match param {
            KernelParam::Compliance => mu,
            KernelParam::Ei => {
                let v = T::one() / ei[e];
                -v * v * mu
            }
        }
    });
    cases
        .par_iter()
        .map(|c| {
            let u = system.solve_primal(c)?;
            Ok(DVector::from_fn(points.len(), |i, _| {
                let (e, xi) = points[i];
                scale[i] * system.element_moment(&u, e, xi).expect("point inside mesh")
            }))
        })
        .collect()
}

fn accumulate<T: Scalar>(factors: &[DVector<T>], cases: &[MovingLoadCase<T>]) -> DMatrix<T> {
    let n = factors.first().map_or(0, |f| f.len());
    let mut k = DMatrix::zeros(n, n);
    for (f, c) in factors.iter().zip(cases) {
        let w = c.weight / (c.sigma * c.sigma);
        k.ger(w, f, f, T::one());
    }
    k
}

/// Discrete information kernel `sum_k (w_k / sigma_k^2) K_k(x) K_k(x')` on
/// the two Gauss points of every element.
pub fn assemble_kernel<T: Scalar>(
    system: &BeamSystem<T>,
    sensor: T,
    cases: &[MovingLoadCase<T>],
    param: KernelParam,
) -> Result<KernelGrid<T>> {
    let samples: Vec<Sample<T>> = system.samples();
    let points: Vec<(usize, T)> = samples.iter().map(|s| (s.element, s.xi)).collect();
    let factors = kernel_factors(system, sensor, cases, &points, param)?;
    Ok(KernelGrid {
        x: DVector::from_iterator(samples.len(), samples.iter().map(|s| s.x)),
        weights: DVector::from_iterator(samples.len(), samples.iter().map(|s| s.weight)),
        matrix: accumulate(&factors, cases),
    })
}

/// Kernel at arbitrary positions (each located in the mesh; interior nodes
/// use the element on their right). Weights are zero.
pub fn assemble_kernel_at<T: Scalar>(
    system: &BeamSystem<T>,
    sensor: T,
    cases: &[MovingLoadCase<T>],
    positions: &[T],
    param: KernelParam,
) -> Result<KernelGrid<T>> {
    let points = positions
        .iter()
        .map(|&x| system.mesh().locate(x))
        .collect::<Result<Vec<_>>>()?;
    let factors = kernel_factors(system, sensor, cases, &points, param)?;
    Ok(KernelGrid {
        x: DVector::from_row_slice(positions),
        weights: DVector::zeros(positions.len()),
        matrix: accumulate(&factors, cases),
    })
}

/// Jacobian of the stacked tilts `theta(r_j; z_k)` (case-major rows) with
/// respect to elementwise log-stiffness `p_e = log(EI_e / EI_0)`:
/// `d theta / d p_e = -int_e mu_r M_k / EI_e dx`, integrated exactly by
/// two-point Gauss. Row noise is the case's `sigma`.
pub fn static_tilt_jacobian<T: Scalar>(
    system: &BeamSystem<T>,
    sensors: &[T],
    cases: &[MovingLoadCase<T>],
) -> Result<ObservationBlock<T>> {
    let samples = system.samples();
    let ei = system.mesh().ei();
    let n_el = system.mesh().n_elements();
    let mus = sensors
        .iter()
        .map(|&r| system.solve_adjoint(r).and_then(|l| system.moment_samples(&l)))
        .collect::<Result<Vec<_>>>()?;
    let moments = cases
        .par_iter()
        .map(|c| system.solve_primal(c).and_then(|u| system.moment_samples(&u)))
        .collect::<Result<Vec<_>>>()?;
    let ns = sensors.len();
    let mut j = DMatrix::zeros(cases.len() * ns, n_el);
    let mut std = Vec::with_capacity(cases.len() * ns);
    for (k, m) in moments.iter().enumerate() {
        for (s, mu) in mus.iter().enumerate() {
            let row = k * ns + s;
            for (i, smp) in samples.iter().enumerate() {
                j[(row, smp.element)] -= smp.weight * mu[i] * m[i] / ei[smp.element];
            }
            std.push(cases[k].sigma);
        }
    }
    ObservationBlock::new(j, NoiseCov::from_std(&std), "static_tilt")
}
