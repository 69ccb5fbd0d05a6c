//! Harmonic point forcing of a simply supported beam observed through the
//! log magnitude of frequency-response functions.
//!
//! The Green's function is the modal series
//! `G(x, z) = (2/L) sum_n sin(n pi x/L) sin(n pi z/L) / D_n(omega)` with
//! `D_n = EI (n pi/L)^4 - rhoA omega^2 + i omega c_d`. It is evaluated as the
//! closed-form static Green's function plus the series of dynamic
//! corrections `1/D_n - 1/K_n`, whose terms decay like `n^-8`; curvature
//! sums then converge like `n^-6` instead of `n^-2`.
//!
//! A log-stiffness perturbation `EI(x) = EI e^{p(x)}` changes the FRF by
//! `dH/dp(x) = -F EI G''(r, x) G''(x, z)`, and the log-magnitude
//! sensitivity is `Re(dH / H)`.

mod fe;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam_analytic::{moment_influence, moment_product_integral};
use crate::error::{Error, Result};
use crate::opcore::{NoiseCov, ObservationBlock};
use crate::scalar::Scalar;

pub use fe::{FeFrfModel, FrfRow};

pub const DEFAULT_N_MODES: usize = 60;

/// Relative magnitude below which an FRF is treated as an antiresonance.
pub const ANTIRESONANCE_TOL: f64 = 1e-14;

/// Uniform beam under harmonic point forcing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicSpec<T> {
    pub ei0: T,
    pub rho_a: T,
    /// Viscous damping per unit length and velocity.
    pub c_d: T,
    pub length: T,
    /// Force amplitude (constant over frequency).
    pub force: T,
    /// Sensor position (length units).
    pub sensor: T,
    /// Excitation positions (length units).
    pub excitations: Vec<T>,
    /// Angular frequencies (rad/s).
    pub frequencies: Vec<T>,
    pub sigma_log: T,
    pub n_modes: usize,
}

pub(crate) fn cabs<T: Scalar>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

impl<T: Scalar> DynamicSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.ei0, self.rho_a, self.length, self.force, self.sigma_log];
        if pos.iter().any(|&x| !(x > T::zero() && x.is_finite())) {
            return Err(Error::InvalidArgument(
                "EI0, rhoA, L, force and sigma_log must be positive".into(),
            ));
        }
        if !(self.c_d >= T::zero()) {
            return Err(Error::InvalidArgument("damping must be nonnegative".into()));
        }
        if self.n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
        }
        for &x in std::iter::once(&self.sensor).chain(&self.excitations) {
            if !(x >= T::zero() && x <= self.length) {
                return Err(Error::OutsideDomain {
                    position: x.as_f64(),
                    length: self.length.as_f64(),
                });
            }
        }
        if self.frequencies.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::InvalidArgument("frequencies must be positive".into()));
        }
        Ok(())
    }

    /// Modal stiffness `EI (n pi / L)^4`.
    pub fn modal_stiffness(&self, n: usize) -> T {
        let k = T::from_count(n) * T::pi() / self.length;
        self.ei0 * k * k * k * k
    }

    /// Undamped natural frequency `(n pi/L)^2 sqrt(EI/rhoA)`.
    pub fn natural_frequency(&self, n: usize) -> T {
        (self.modal_stiffness(n) / self.rho_a).sqrt()
    }

    /// `D_n(omega)`.
    pub fn modal_denominator(&self, n: usize, omega: T) -> Complex<T> {
        Complex::new(self.modal_stiffness(n) - self.rho_a * omega * omega, omega * self.c_d)
    }

    /// Damping coefficient giving modal damping ratio `zeta` on `mode`.
    pub fn damping_for_ratio(&self, zeta: T, mode: usize) -> T {
        T::lit(2.0) * zeta * self.rho_a * self.natural_frequency(mode)
    }

    /// Modal damping ratio of `mode`.
    pub fn damping_ratio(&self, mode: usize) -> T {
        self.c_d / (T::lit(2.0) * self.rho_a * self.natural_frequency(mode))
    }

    /// `n` frequencies spread over modes 1-3 (from `0.6 omega_1` to
    /// `1.2 omega_3`, geometric spacing). Points within 0.1% of an undamped
    /// resonance are nudged off it when the beam is undamped.
    pub fn default_frequencies(&self, n: usize) -> Vec<T> {
        let lo = T::lit(0.6) * self.natural_frequency(1);
        let hi = T::lit(1.2) * self.natural_frequency(3);
        let ratio = hi / lo;
        (0..n)
            .map(|i| {
                let t = if n > 1 { T::from_count(i) / T::from_count(n - 1) } else { T::zero() };
                let mut w = lo * ratio.powf(t);
                if self.c_d == T::zero() {
                    for m in 1..=4 {
                        let wn = self.natural_frequency(m);
                        if ((w - wn) / wn).abs() < T::lit(1e-3) {
                            w = wn * T::lit(1.002);
                        }
                    }
                }
                w
            })
            .collect()
    }
}

/// Modal series evaluated at one frequency.
pub(crate) struct Series<'a, T: Scalar> {
    spec: &'a DynamicSpec<T>,
    omega: T,
    /// `1/D_n - 1/K_n`, `n = 1..=n_modes`.
    corr: Vec<Complex<T>>,
    /// `1/D_n`, for the plain modal terms.
    inv_d: Vec<Complex<T>>,
}

impl<'a, T: Scalar> Series<'a, T> {
    pub(crate) fn new(spec: &'a DynamicSpec<T>, omega: T) -> Result<Self> {
        let mut corr = Vec::with_capacity(spec.n_modes);
        let mut inv_d = Vec::with_capacity(spec.n_modes);
        for n in 1..=spec.n_modes {
            let d = spec.modal_denominator(n, omega);
            let kn = spec.modal_stiffness(n);
            if !(cabs(d) > T::lit(1e-12) * kn) {
                return Err(Error::Resonance {
                    mode: n,
                    omega: omega.as_f64(),
                });
            }
            let inv = Complex::new(T::one(), T::zero()) / d;
            inv_d.push(inv);
            corr.push(inv - Complex::new(T::one() / kn, T::zero()));
        }
        Ok(Self {
            spec,
            omega,
            corr,
            inv_d,
        })
    }

    fn sines(&self, x: T) -> impl Iterator<Item = T> + '_ {
        let a = T::pi() * x / self.spec.length;
        (1..=self.spec.n_modes).map(move |n| (a * T::from_count(n)).sin())
    }

    /// `G(x, z)` and the sum of the magnitudes of its parts.
    fn g_with_scale(&self, x: T, z: T) -> (Complex<T>, T) {
        let l = self.spec.length;
        let stat = l * l * l / self.spec.ei0 * moment_product_integral(x / l, z / l);
        let two_l = T::lit(2.0) / l;
        let mut acc = Complex::new(stat, T::zero());
        let mut scale = stat.abs();
        for ((sx, sz), c) in self.sines(x).zip(self.sines(z)).zip(&self.corr) {
            let t = *c * (two_l * sx * sz);
            acc += t;
            scale += cabs(t);
        }
        (acc, scale)
    }

    pub(crate) fn g(&self, x: T, z: T) -> Complex<T> {
        self.g_with_scale(x, z).0
    }

    /// `d^2 G / dx^2 (x, z)`.
    pub(crate) fn gxx(&self, x: T, z: T) -> Complex<T> {
        let l = self.spec.length;
        let stat = -l / self.spec.ei0 * moment_influence(x / l, z / l);
        let two_l = T::lit(2.0) / l;
        let mut acc = Complex::new(stat, T::zero());
        for (n, ((sx, sz), c)) in self.sines(x).zip(self.sines(z)).zip(&self.corr).enumerate() {
            let k = T::from_count(n + 1) * T::pi() / l;
            acc -= *c * (two_l * k * k * sx * sz);
        }
        acc
    }

    pub(crate) fn modal_terms(&self, x: T, z: T) -> Vec<Complex<T>> {
        let two_l = T::lit(2.0) / self.spec.length;
        self.sines(x)
            .zip(self.sines(z))
            .zip(&self.inv_d)
            .map(|((sx, sz), c)| *c * (two_l * sx * sz))
            .collect()
    }

    /// FRF with the antiresonance check.
    pub(crate) fn frf_checked(&self, z: T) -> Result<Complex<T>> {
        let (g, scale) = self.g_with_scale(self.spec.sensor, z);
        let h = g * self.spec.force;
        if !(cabs(g) > T::lit(ANTIRESONANCE_TOL) * scale) {
            return Err(Error::Antiresonance {
                z: z.as_f64(),
                omega: self.omega.as_f64(),
                magnitude: cabs(h).as_f64(),
            });
        }
        Ok(h)
    }
}

/// Green's function at normalized positions `chi`, `s`.
pub fn greens_function<T: Scalar>(spec: &DynamicSpec<T>, chi: T, s: T, omega: T) -> Result<Complex<T>> {
    let l = spec.length;
    Ok(Series::new(spec, omega)?.g(chi * l, s * l))
}

/// Plain modal terms `(2/L) sin sin / D_n` at normalized positions.
pub fn modal_terms<T: Scalar>(spec: &DynamicSpec<T>, chi: T, s: T, omega: T) -> Result<Vec<Complex<T>>> {
    let l = spec.length;
    Ok(Series::new(spec, omega)?.modal_terms(chi * l, s * l))
}

/// `H(r, z; omega) = F G(r, z)` at the configured sensor for excitation `z`.
pub fn frf<T: Scalar>(spec: &DynamicSpec<T>, z: T, omega: T) -> Result<Complex<T>> {
    Series::new(spec, omega)?.frf_checked(z)
}

/// Discretization of the log-stiffness field.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamGrid<T> {
    /// Pointwise densities at these positions.
    Points(Vec<T>),
    /// Piecewise-constant coordinates on elements bounded by these nodes.
    Elements(Vec<T>),
}

impl<T: Scalar> ParamGrid<T> {
    pub fn len(&self) -> usize {
        match self {
            ParamGrid::Points(p) => p.len(),
            ParamGrid::Elements(n) => n.len().saturating_sub(1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform element grid with `n_el` elements over `[0, length]`.
    pub fn uniform_elements(length: T, n_el: usize) -> Self {
        ParamGrid::Elements((0..=n_el).map(|i| length * T::from_count(i) / T::from_count(n_el)).collect())
    }
}

const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// `int_a^b f` by 8-point Gauss on each piece between the breakpoints.
fn integrate_split<T: Scalar>(a: T, b: T, breaks: &[T], f: impl Fn(T) -> Complex<T>) -> Complex<T> {
    let mut cuts = vec![a];
    for &x in breaks {
        if x > a && x < b {
            cuts.push(x);
        }
    }
    cuts.push(b);
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let half = T::lit(0.5);
    let mut acc = Complex::new(T::zero(), T::zero());
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = (lo + hi) * half;
        let rad = (hi - lo) * half;
        for &(t, wt) in &GAUSS8 {
            acc += f(mid + rad * T::lit(t)) * (rad * T::lit(wt));
        }
    }
    acc
}

fn sensitivity_row<T: Scalar>(series: &Series<'_, T>, z: T, grid: &ParamGrid<T>) -> Result<DVector<T>> {
    let spec = series.spec;
    let h = series.frf_checked(z)?;
    let scale = -spec.force * spec.ei0;
    let r = spec.sensor;
    let entries: Vec<Complex<T>> = match grid {
        ParamGrid::Points(xs) => xs.iter().map(|&x| series.gxx(x, r) * series.gxx(x, z)).collect(),
        ParamGrid::Elements(nodes) => nodes
            .windows(2)
            .map(|w| integrate_split(w[0], w[1], &[r, z], |x| series.gxx(x, r) * series.gxx(x, z)))
            .collect(),
    };
    Ok(DVector::from_iterator(
        entries.len(),
        entries.into_iter().map(|e| (e * scale / h).re),
    ))
}

/// `Re(dH/dp / H)` over the grid: pointwise for [`ParamGrid::Points`],
/// integrated over each element for [`ParamGrid::Elements`].
pub fn log_frf_sensitivity<T: Scalar>(
    spec: &DynamicSpec<T>,
    z: T,
    omega: T,
    grid: &ParamGrid<T>,
) -> Result<DVector<T>> {
    sensitivity_row(&Series::new(spec, omega)?, z, grid)
}

/// Rows over all `(excitation k, frequency q)` pairs, `k` outer. Pairs at
/// an antiresonance are returned separately.
fn all_rows<T: Scalar>(
    spec: &DynamicSpec<T>,
    grid: &ParamGrid<T>,
) -> Result<(Vec<DVector<T>>, Vec<(usize, usize)>)> {
    spec.validate()?;
    let series = spec
        .frequencies
        .iter()
        .map(|&w| Series::new(spec, w))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..spec.excitations.len())
        .flat_map(|k| (0..spec.frequencies.len()).map(move |q| (k, q)))
        .collect();
    let results: Vec<Result<DVector<T>>> = pairs
        .par_iter()
        .map(|&(k, q)| sensitivity_row(&series[q], spec.excitations[k], grid))
        .collect();
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (pair, res) in pairs.into_iter().zip(results) {
        match res {
            Ok(row) => rows.push(row),
            Err(Error::Antiresonance { z, omega, .. }) => {
                log::warn!("antiresonance at z = {z}, omega = {omega}; row excluded");
                excluded.push(pair);
            }
            Err(e) => return Err(e),
        }
    }
    Ok((rows, excluded))
}

/// Pointwise dynamic information density with its exclusions.
#[derive(Clone, Debug)]
pub struct DynamicDensity<T: Scalar> {
    pub x: DVector<T>,
    pub values: DVector<T>,
    /// `(excitation, frequency)` index pairs skipped at antiresonances.
    pub excluded: Vec<(usize, usize)>,
}

/// `sum_q sum_k sigma_log^-2 Re(dH/dp(x) / H)^2` at `points`.
pub fn dynamic_info_density<T: Scalar>(spec: &DynamicSpec<T>, points: &[T]) -> Result<DynamicDensity<T>> {
    let (rows, excluded) = all_rows(spec, &ParamGrid::Points(points.to_vec()))?;
    let w = T::one() / (spec.sigma_log * spec.sigma_log);
    let mut values = DVector::zeros(points.len());
    for r in &rows {
        values += r.component_mul(r) * w;
    }
    Ok(DynamicDensity {
        x: DVector::from_row_slice(points),
        values,
        excluded,
    })
}

/// Log-magnitude FRF observation block with its exclusions.
#[derive(Clone, Debug)]
pub struct DynamicBlock<T: Scalar> {
    pub block: ObservationBlock<T>,
    pub excluded: Vec<(usize, usize)>,
}

/// Stacked sensitivity rows (excitation outer, frequency inner) with
/// isotropic noise `sigma_log`.
pub fn dynamic_jacobian<T: Scalar>(spec: &DynamicSpec<T>, grid: &ParamGrid<T>) -> Result<DynamicBlock<T>> {
    let (rows, excluded) = all_rows(spec, grid)?;
    let j = DMatrix::from_fn(rows.len(), grid.len(), |i, c| rows[i][c]);
    let block = ObservationBlock::new(j, NoiseCov::isotropic(rows.len(), spec.sigma_log), "dynamic_log_frf")?;
    Ok(DynamicBlock { block, excluded })
}
