//! Damaged-beam stiffness identification from static tilt data, dynamic
//! log-FRF data, or both, in elementwise log-stiffness coordinates
//! `p_e = log(EI_e / EI0)`.
//!
//! Every residual block is whitened by its noise standard deviation before
//! it is differentiated, so the Gram matrix of the stacked Jacobian is the
//! information operator and blocks fuse by addition.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam_dynamic::{DynamicSpec, FeFrfModel};
use crate::beam_fe::{static_tilt_jacobian, BeamMesh, BeamSystem, MovingLoadCase};
use crate::error::{Error, Result};
use crate::prior::PriorModel;

/// Which observation blocks enter an inversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Blocks {
    Static,
    Dynamic,
    Hybrid,
}

impl Blocks {
    pub fn as_str(self) -> &'static str {
        match self {
            Blocks::Static => "static",
            Blocks::Dynamic => "dynamic",
            Blocks::Hybrid => "hybrid",
        }
    }

    fn uses_static(self) -> bool {
        self != Blocks::Dynamic
    }

    fn uses_dynamic(self) -> bool {
        self != Blocks::Static
    }
}

impl fmt::Display for Blocks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Blocks {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(Blocks::Static),
            "dynamic" => Ok(Blocks::Dynamic),
            "hybrid" => Ok(Blocks::Hybrid),
            other => Err(Error::Parse(format!("unknown block set `{other}`"))),
        }
    }
}

/// Smooth localized stiffness loss `EI = EI0 (1 - depth * bump)`, with a
/// raised-cosine bump centred at `center * L` of half-width `half_width * L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DamageProfile {
    pub depth: f64,
    pub center: f64,
    pub half_width: f64,
}

impl Default for DamageProfile {
    fn default() -> Self {
        Self {
            depth: 0.4,
            center: 0.7,
            half_width: 0.08,
        }
    }
}

impl DamageProfile {
    /// Relative rigidity `EI / EI0` at normalized position `s`.
    pub fn factor(&self, s: f64) -> f64 {
        let t = (s - self.center) / self.half_width;
        if t.abs() >= 1.0 {
            1.0
        } else {
            1.0 - self.depth * 0.5 * (1.0 + (std::f64::consts::PI * t).cos())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StaticTest {
    /// Tilt sensor positions (length units).
    pub sensors: Vec<f64>,
    /// Number of equally spaced load positions, ends included.
    pub n_loads: usize,
    pub load: f64,
    pub sigma: f64,
}

impl Default for StaticTest {
    fn default() -> Self {
        Self {
            sensors: vec![2.5, 6.0],
            n_loads: 41,
            load: 1.0e4,
            sigma: 1.0e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicTest {
    pub sensor: f64,
    pub excitations: Vec<f64>,
    pub n_frequencies: usize,
    /// Explicit angular frequencies; when empty a default grid over modes
    /// 1-3 of the healthy beam is used.
    pub frequencies: Vec<f64>,
    pub force: f64,
    pub sigma_log: f64,
    pub damping_ratio: f64,
}

impl Default for DynamicTest {
    fn default() -> Self {
        Self {
            sensor: 3.0,
            excitations: vec![1.5, 5.5, 8.0],
            n_frequencies: 12,
            frequencies: Vec::new(),
            force: 1.0,
            sigma_log: 0.01,
            damping_ratio: 0.01,
        }
    }
}

/// Benchmark description, as read from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub length: f64,
    pub n_elements: usize,
    pub ei0: f64,
    pub rho_a: f64,
    pub damage: DamageProfile,
    #[serde(rename = "static")]
    pub static_test: StaticTest,
    #[serde(rename = "dynamic")]
    pub dynamic_test: DynamicTest,
    pub gamma_pr: f64,
    pub eps_pr: f64,
    pub seed: u64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            length: 10.0,
            n_elements: 20,
            ei0: 1.0e7,
            rho_a: 100.0,
            damage: DamageProfile::default(),
            static_test: StaticTest::default(),
            dynamic_test: DynamicTest::default(),
            gamma_pr: 10.0,
            eps_pr: 1.0e-2,
            seed: 7,
        }
    }
}

/// Validated benchmark with its derived geometry.
#[derive(Clone, Debug)]
pub struct FusionBenchmark {
    config: FusionConfig,
    mesh: BeamMesh<f64>,
    cases: Vec<MovingLoadCase<f64>>,
    frequencies: Vec<f64>,
    c_d: f64,
    prior: PriorModel<f64>,
}

fn config_err(key: &str, msg: &str) -> Error {
    Error::InvalidArgument(format!("{key}: {msg}"))
}

impl FusionBenchmark {
    pub fn new(config: FusionConfig) -> Result<Self> {
        let c = &config;
        let len = c.length;
        if !(len > 0.0) {
            return Err(config_err("length", "must be positive"));
        }
        if c.n_elements < 2 {
            return Err(config_err("n_elements", "must be at least 2"));
        }
        if !(c.ei0 > 0.0) || !(c.rho_a > 0.0) {
            return Err(config_err("ei0", "EI0 and rho_a must be positive"));
        }
        let d = &c.damage;
        if !(d.depth >= 0.0 && d.depth < 1.0) {
            return Err(config_err("damage.depth", "must lie in [0, 1)"));
        }
        if !(d.half_width > 0.0 && d.center - d.half_width >= 0.5 && d.center + d.half_width <= 1.0) {
            return Err(config_err("damage.center", "damaged region must lie in the right half-span"));
        }
        let st = &c.static_test;
        if st.sensors.is_empty() || st.sensors.iter().any(|&r| !(r > 0.0 && r < len)) {
            return Err(config_err("static.sensors", "need interior sensor positions"));
        }
        if st.n_loads < 2 || !(st.sigma > 0.0) || !(st.load > 0.0) {
            return Err(config_err("static.sigma", "need n_loads >= 2 and positive load, sigma"));
        }
        let dy = &c.dynamic_test;
        if !(dy.sensor > 0.0 && dy.sensor < len) || dy.excitations.iter().any(|&z| !(z > 0.0 && z < len)) {
            return Err(config_err("dynamic.sensor", "sensor and excitations must be interior"));
        }
        if !(dy.sigma_log > 0.0 && dy.force > 0.0 && dy.damping_ratio >= 0.0) {
            return Err(config_err("dynamic.sigma_log", "need positive sigma_log and force"));
        }
        if !(c.gamma_pr > 0.0 && c.eps_pr > 0.0) {
            return Err(config_err("gamma_pr", "prior weights must be positive"));
        }

        let mesh = BeamMesh::uniform(len, c.n_elements, c.ei0)?;
        let cases = MovingLoadCase::uniform_sweep(&mesh, st.n_loads, st.load, st.sigma)?;
        let mut healthy = DynamicSpec {
            ei0: c.ei0,
            rho_a: c.rho_a,
            c_d: 0.0,
            length: len,
            force: dy.force,
            sensor: dy.sensor,
            excitations: dy.excitations.clone(),
            frequencies: Vec::new(),
            sigma_log: dy.sigma_log,
            n_modes: crate::beam_dynamic::DEFAULT_N_MODES,
        };
        let c_d = healthy.damping_for_ratio(dy.damping_ratio, 1);
        healthy.c_d = c_d;
        let frequencies = if dy.frequencies.is_empty() {
            healthy.default_frequencies(dy.n_frequencies)
        } else {
            dy.frequencies.clone()
        };
        if frequencies.iter().any(|&w| !(w > 0.0)) {
            return Err(config_err("dynamic.frequencies", "must be positive"));
        }
        let prior = PriorModel::difference_precision(c.n_elements, c.gamma_pr, c.eps_pr)?;
        Ok(Self {
            config,
            mesh,
            cases,
            frequencies,
            c_d,
            prior,
        })
    }

    pub fn config(&self) -> &FusionConfig {
        &self.config
    }

    pub fn n_params(&self) -> usize {
        self.config.n_elements
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn damping(&self) -> f64 {
        self.c_d
    }

    pub fn prior(&self) -> &PriorModel<f64> {
        &self.prior
    }

    /// Element midpoints.
    pub fn element_centers(&self) -> Vec<f64> {
        (0..self.mesh.n_elements()).map(|e| self.mesh.element_midpoint(e)).collect()
    }

    /// True log-stiffness, the damage profile sampled at element midpoints.
    pub fn p_true(&self) -> DVector<f64> {
        let len = self.config.length;
        DVector::from_iterator(
            self.n_params(),
            self.element_centers().into_iter().map(|x| self.config.damage.factor(x / len).ln()),
        )
    }

    pub fn ei_field(&self, p: &DVector<f64>) -> Vec<f64> {
        p.iter().map(|v| self.config.ei0 * v.exp()).collect()
    }

    fn mesh_at(&self, p: &DVector<f64>) -> Result<BeamMesh<f64>> {
        if p.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                context: "log-stiffness vector",
                expected: self.n_params(),
                found: p.len(),
            });
        }
        self.mesh.with_ei(self.ei_field(p))
    }

    fn frf_model(&self, p: &DVector<f64>) -> Result<FeFrfModel<f64>> {
        FeFrfModel::new(self.mesh_at(p)?, self.config.rho_a, self.c_d, self.config.dynamic_test.force)
    }

    fn dynamic_pairs(&self) -> Vec<(f64, f64)> {
        let dy = &self.config.dynamic_test;
        dy.excitations
            .iter()
            .flat_map(|&z| self.frequencies.iter().map(move |&w| (z, w)))
            .collect()
    }

    pub fn n_static(&self) -> usize {
        self.config.static_test.sensors.len() * self.cases.len()
    }

    pub fn n_dynamic(&self) -> usize {
        self.config.dynamic_test.excitations.len() * self.frequencies.len()
    }

    /// Static tilts, load-case major.
    pub fn static_forward(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let sys = BeamSystem::assemble(&self.mesh_at(p)?)?;
        let sensors = &self.config.static_test.sensors;
        let mut out = Vec::with_capacity(self.n_static());
        for case in &self.cases {
            out.extend(sys.tilts(sensors, case)?);
        }
        Ok(DVector::from_vec(out))
    }

    /// `log|H|`, excitation major, frequency minor.
    pub fn dynamic_forward(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let model = self.frf_model(p)?;
        let r = self.config.dynamic_test.sensor;
        let vals = self
            .dynamic_pairs()
            .par_iter()
            .map(|&(z, w)| model.frf(r, z, w).map(|h| h.norm().ln()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// Whitened static Jacobian with respect to `p`.
    pub fn static_jacobian(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        let sys = BeamSystem::assemble(&self.mesh_at(p)?)?;
        Ok(static_tilt_jacobian(&sys, &self.config.static_test.sensors, &self.cases)?.whitened_jacobian())
    }

    /// Whitened dynamic Jacobian with respect to `p`.
    pub fn dynamic_jacobian(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        let model = self.frf_model(p)?;
        let r = self.config.dynamic_test.sensor;
        let rows = self
            .dynamic_pairs()
            .par_iter()
            .map(|&(z, w)| model.log_frf_row(r, z, w).map(|fr| fr.row))
            .collect::<Result<Vec<_>>>()?;
        let s = 1.0 / self.config.dynamic_test.sigma_log;
        Ok(DMatrix::from_fn(rows.len(), self.n_params(), |i, j| s * rows[i][j]))
    }

    /// Stacked whitened Jacobian of the selected blocks (static rows first).
    pub fn jacobian(&self, p: &DVector<f64>, blocks: Blocks) -> Result<DMatrix<f64>> {
        let mut parts = Vec::new();
        if blocks.uses_static() {
            parts.push(self.static_jacobian(p)?);
        }
        if blocks.uses_dynamic() {
            parts.push(self.dynamic_jacobian(p)?);
        }
        Ok(vstack(&parts, self.n_params()))
    }

    /// Whitened residual `(y - f(p)) / sigma` of the selected blocks.
    pub fn residual(&self, data: &FusionData, p: &DVector<f64>, blocks: Blocks) -> Result<DVector<f64>> {
        let mut out = Vec::new();
        if blocks.uses_static() {
            let s = self.config.static_test.sigma;
            let f = self.static_forward(p)?;
            out.extend(data.static_obs.iter().zip(f.iter()).map(|(y, f)| (y - f) / s));
        }
        if blocks.uses_dynamic() {
            let s = self.config.dynamic_test.sigma_log;
            let f = self.dynamic_forward(p)?;
            out.extend(data.dynamic_obs.iter().zip(f.iter()).map(|(y, f)| (y - f) / s));
        }
        Ok(DVector::from_vec(out))
    }
}

fn vstack(parts: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let rows: usize = parts.iter().map(|m| m.nrows()).sum();
    let mut out = DMatrix::zeros(rows, n);
    let mut r0 = 0;
    for m in parts {
        out.view_mut((r0, 0), (m.nrows(), n)).copy_from(m);
        r0 += m.nrows();
    }
    out
}

/// Synthetic observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionData {
    pub static_obs: DVector<f64>,
    pub dynamic_obs: DVector<f64>,
}

/// Forward model at the true field plus Gaussian noise of the declared
/// standard deviations times `noise_scale` (0 gives exact data).
pub fn synthesize_data(bench: &FusionBenchmark, seed: u64, noise_scale: f64) -> Result<FusionData> {
    let p = bench.p_true();
    let mut static_obs = bench.static_forward(&p)?;
    let mut dynamic_obs = bench.dynamic_forward(&p)?;
    if noise_scale != 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ss = noise_scale * bench.config.static_test.sigma;
        for v in static_obs.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += ss * e;
        }
        let sd = noise_scale * bench.config.dynamic_test.sigma_log;
        for v in dynamic_obs.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += sd * e;
        }
    }
    Ok(FusionData {
        static_obs,
        dynamic_obs,
    })
}

/// Gauss-Newton controls.
#[derive(Clone, Copy, Debug)]
pub struct GnOptions {
    pub max_iter: usize,
    pub step_tol: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Largest accepted change of any coordinate per iteration (trust cap).
    pub max_step: f64,
    /// Also start hybrid solves from the single-block estimates.
    pub multi_start: bool,
}

impl Default for GnOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            step_tol: 1e-8,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 40,
            max_step: 0.5,
            multi_start: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MapResult {
    pub p_map: DVector<f64>,
    /// Per-coordinate posterior standard deviation at `p_map`.
    pub band: DVector<f64>,
    pub iterations: usize,
    /// Objective value at the start and after every accepted step.
    pub misfit_history: Vec<f64>,
    pub converged: bool,
}

fn objective(r: &DVector<f64>, q: &DMatrix<f64>, dp: &DVector<f64>) -> f64 {
    0.5 * r.norm_squared() + 0.5 * dp.dot(&(q * dp))
}

/// Damped Gauss-Newton for
/// `1/2 |r(p)|^2 + 1/2 (p - p0)^T Q (p - p0)`, where `model(p)` returns the
/// whitened residual `r` and the whitened forward Jacobian `J = -dr/dp`.
pub fn gauss_newton<F>(mut model: F, prior: &PriorModel<f64>, p_init: DVector<f64>, opts: GnOptions) -> Result<MapResult>
where
    F: FnMut(&DVector<f64>, bool) -> Result<(DVector<f64>, Option<DMatrix<f64>>)>,
{
    let q = prior.precision();
    let p0 = prior.mean();
    let mut p = p_init;
    let (mut r, mut j) = model(&p, true)?;
    let mut phi = objective(&r, q, &(&p - p0));
    let mut history = vec![phi];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let jm = j.take().ok_or_else(|| Error::InvalidArgument("model returned no Jacobian".into()))?;
        let h = jm.transpose() * &jm + q;
        // negative gradient
        let g = jm.transpose() * &r - q * (&p - p0);
        let chol = h
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotSpd("Gauss-Newton normal matrix".into()))?;
        let mut step = chol.solve(&g);
        let big = step.amax();
        if big > opts.max_step {
            step *= opts.max_step / big;
        }
        let slope = g.dot(&step);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial = &p + &step * alpha;
            match model(&trial, false) {
                Ok((rt, _)) => {
                    let phit = objective(&rt, q, &(&trial - p0));
                    if phit <= phi - opts.armijo * alpha * slope {
                        accepted = Some((trial, phit));
                        break;
                    }
                }
                Err(e @ (Error::NotSpd(_) | Error::DimensionMismatch { .. })) => return Err(e),
                Err(_) => {}
            }
            alpha *= opts.backtrack;
        }
        iterations += 1;
        let Some((trial, phit)) = accepted else {
            if (&step * alpha).norm() < opts.step_tol || slope.abs() <= 1e-14 * phi.max(1e-300) {
                converged = true;
                break;
            }
            return Err(Error::Stagnation {
                iteration: iterations,
                misfit: phi,
            });
        };
        let moved = (&trial - &p).norm();
        p = trial;
        phi = phit;
        history.push(phi);
        let (rn, jn) = model(&p, true)?;
        r = rn;
        j = jn;
        if moved < opts.step_tol {
            converged = true;
            break;
        }
    }
    let jm = j.unwrap_or_else(|| DMatrix::zeros(0, p.len()));
    let band = band_from(&jm, q)?;
    Ok(MapResult {
        p_map: p,
        band,
        iterations,
        misfit_history: history,
        converged,
    })
}

fn band_from(j: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DVector<f64>> {
    let h = j.transpose() * j + q;
    let inv = h
        .cholesky()
        .ok_or_else(|| Error::NotSpd("posterior precision".into()))?
        .inverse();
    Ok(inv.diagonal().map(f64::sqrt))
}

/// MAP estimate of the log-stiffness from the selected blocks, starting at
/// the prior mean.
pub fn gauss_newton_map(bench: &FusionBenchmark, data: &FusionData, blocks: Blocks) -> Result<MapResult> {
    gauss_newton_map_with(bench, data, blocks, GnOptions::default())
}

pub fn gauss_newton_map_with(
    bench: &FusionBenchmark,
    data: &FusionData,
    blocks: Blocks,
    opts: GnOptions,
) -> Result<MapResult> {
    let model = |p: &DVector<f64>, want_j: bool| -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
        let r = bench.residual(data, p, blocks)?;
        let j = if want_j { Some(bench.jacobian(p, blocks)?) } else { None };
        Ok((r, j))
    };
    let mean = bench.prior.mean().clone();
    if blocks != Blocks::Hybrid || !opts.multi_start {
        return gauss_newton(model, &bench.prior, mean, opts);
    }
    // The log-FRF misfit is not convex; start the fused solve from the prior
    // mean and from each single-block estimate and keep the best optimum.
    let mut starts = vec![mean];
    let mut iterations = 0;
    for single in [Blocks::Static, Blocks::Dynamic] {
        if let Ok(r) = gauss_newton_map_with(bench, data, single, opts) {
            iterations += r.iterations;
            starts.push(r.p_map);
        }
    }
    let mut best: Option<MapResult> = None;
    let mut last_err = None;
    for p in starts {
        match gauss_newton(model, &bench.prior, p, opts) {
            Ok(r) => {
                iterations += r.iterations;
                let better = best
                    .as_ref()
                    .is_none_or(|b| r.misfit_history.last() < b.misfit_history.last());
                if better {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(mut r) => {
            r.iterations = iterations;
            Ok(r)
        }
        None => Err(last_err.unwrap_or(Error::Stagnation {
            iteration: 0,
            misfit: f64::NAN,
        })),
    }
}

/// `sqrt(diag((J^T J + Q)^-1))` with the whitened Jacobian of `blocks` at `p`.
pub fn posterior_band(bench: &FusionBenchmark, p: &DVector<f64>, blocks: Blocks) -> Result<DVector<f64>> {
    band_from(&bench.jacobian(p, blocks)?, bench.prior.precision())
}

/// Diagonal information densities (per unit length) at the healthy field.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub x: Vec<f64>,
    pub static_density: Vec<f64>,
    pub dynamic_density: Vec<f64>,
    /// Diagonal of the Gram matrix of the stacked hybrid Jacobian.
    pub hybrid_density: Vec<f64>,
}

impl DensityReport {
    /// Largest `|hybrid - static - dynamic| / max(hybrid)`.
    pub fn additivity_defect(&self) -> f64 {
        let scale = self.hybrid_density.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        self.hybrid_density
            .iter()
            .zip(self.static_density.iter().zip(&self.dynamic_density))
            .map(|(h, (s, d))| (h - s - d).abs())
            .fold(0.0, f64::max)
            / scale
    }
}

fn column_energy(j: &DMatrix<f64>) -> Vec<f64> {
    j.column_iter().map(|c| c.norm_squared()).collect()
}

pub fn density_report(bench: &FusionBenchmark) -> Result<DensityReport> {
    let p0 = DVector::zeros(bench.n_params());
    let js = bench.static_jacobian(&p0)?;
    let jd = bench.dynamic_jacobian(&p0)?;
    let jh = vstack(&[js.clone(), jd.clone()], bench.n_params());
    let h: Vec<f64> = (0..bench.n_params()).map(|e| bench.mesh.element_length(e)).collect();
    let per_len = |v: Vec<f64>| v.into_iter().zip(&h).map(|(a, b)| a / b).collect::<Vec<_>>();
    Ok(DensityReport {
        x: bench.element_centers(),
        static_density: per_len(column_energy(&js)),
        dynamic_density: per_len(column_energy(&jd)),
        hybrid_density: per_len(column_energy(&jh)),
    })
}

/// Relative L2 error of the reconstructed rigidity.
pub fn ei_error(bench: &FusionBenchmark, p: &DVector<f64>) -> f64 {
    let t = bench.ei_field(&bench.p_true());
    let m = bench.ei_field(p);
    let num: f64 = t.iter().zip(&m).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = t.iter().map(|a| a * a).sum();
    (num / den).sqrt()
}

#[cfg(test)]
mod tests;
