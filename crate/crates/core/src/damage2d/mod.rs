//! Plane-stress damage identification on a beam-like rectangle.
//!
//! The domain `[0, L] x [0, H]` is split into `ny x nx` rectangular
//! bilinear cells, each carrying one damage value `d` with modulus
//! `E = E0 (kappa + (1 - kappa)(1 - d))`. The bottom-left corner is pinned
//! and the bottom-right corner rests on a roller. Load cases are downward
//! uniform tractions over a short footprint of the top edge. Sensors sample
//! axial strain `du_x/dx`, vertical displacement `u_y` and the rotation-like
//! slope `du_y/dx`.
//!
//! Cell and field storage is row-major with row 0 at the bottom edge.

mod mesh;

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvio::write_row;
use crate::error::{Error, Result};
use crate::opcore::{assemble_info, InfoOperator, NoiseCov, ObservationBlock};
use crate::spectral::{sym_eig, ModeSet};

pub use mesh::PlaneMesh;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadConfig {
    /// Total downward force of one load case (per unit thickness times
    /// thickness, i.e. force units).
    pub magnitude: f64,
    /// Footprint width as a fraction of the length.
    pub footprint: f64,
    /// Footprint centres as fractions of the length.
    pub positions: Vec<f64>,
}

impl Default for LoadConfig {
    fn default() -> Self {
        Self {
            magnitude: 1.0,
            footprint: 0.04,
            positions: (0..8).map(|i| (i as f64 + 0.5) / 8.0).collect(),
        }
    }
}

/// Sensor coordinates as `[x / L, y / H]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorLayout {
    pub strain: Vec<[f64; 2]>,
    pub displacement: Vec<[f64; 2]>,
    pub rotation: Vec<[f64; 2]>,
}

impl Default for SensorLayout {
    fn default() -> Self {
        let xs: Vec<f64> = (1..=7).map(|i| i as f64 / 8.0).collect();
        let mut strain: Vec<[f64; 2]> = xs.iter().map(|&x| [x, 0.15]).collect();
        strain.extend(xs.iter().map(|&x| [x, 0.85]));
        Self {
            strain,
            displacement: vec![[0.25, 0.5], [0.5, 0.5], [0.75, 0.5]],
            rotation: vec![[1.0 / 6.0, 0.5], [0.5, 0.5], [5.0 / 6.0, 0.5]],
        }
    }
}

/// Noise standard deviation of each sensor type relative to the RMS of its
/// noise-free readings at the nominal field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub strain: f64,
    pub displacement: f64,
    pub rotation: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            strain: 0.1,
            displacement: 0.002,
            rotation: 0.002,
        }
    }
}

/// Smooth true damage: `peak * exp(-((s - cx)/rx)^2/2 - ((t - cy)/ry)^2/2)`
/// in normalized coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrueDamage {
    pub peak: f64,
    pub center: [f64; 2],
    pub radius: [f64; 2],
}

impl Default for TrueDamage {
    fn default() -> Self {
        Self {
            peak: 0.6,
            center: [0.62, 0.15],
            radius: [0.06, 0.15],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Damage2DConfig {
    pub length: f64,
    pub height: f64,
    /// Damage cells along x.
    pub nx: usize,
    /// Damage cells along y.
    pub ny: usize,
    pub e0: f64,
    pub poisson: f64,
    pub thickness: f64,
    pub kappa: f64,
    pub load: LoadConfig,
    pub sensors: SensorLayout,
    pub noise: NoiseConfig,
    pub damage: TrueDamage,
    pub k: usize,
    pub clamp: [f64; 2],
    pub fd_step: f64,
    /// Modal coefficient penalty relative to the leading eigenvalue.
    pub penalty_rel: f64,
    pub seed: u64,
}

impl Default for Damage2DConfig {
    fn default() -> Self {
        Self {
            length: 10.0,
            height: 1.0,
            nx: 81,
            ny: 17,
            e0: 1.0,
            poisson: 0.3,
            thickness: 1.0,
            kappa: 0.2,
            load: LoadConfig::default(),
            sensors: SensorLayout::default(),
            noise: NoiseConfig::default(),
            damage: TrueDamage::default(),
            k: 8,
            clamp: [0.0, 0.9],
            fd_step: 1e-6,
            penalty_rel: 1e-6,
            seed: 2024,
        }
    }
}

impl Damage2DConfig {
    /// Reduced 9 x 41 grid with the same layout.
    pub fn test_scale() -> Self {
        Self {
            nx: 41,
            ny: 9,
            ..Self::default()
        }
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_sensors(&self) -> usize {
        self.sensors.strain.len() + self.sensors.displacement.len() + self.sensors.rotation.len()
    }

    pub fn n_obs(&self) -> usize {
        self.n_sensors() * self.load.positions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| Err(Error::InvalidArgument(format!("{key}: {msg}")));
        if !(self.length > 0.0 && self.height > 0.0) {
            return bad("length", "length and height must be positive");
        }
        if self.nx == 0 || self.ny == 0 {
            return bad("nx", "grid must have at least one cell per direction");
        }
        if !(self.e0 > 0.0 && self.thickness > 0.0) {
            return bad("e0", "modulus and thickness must be positive");
        }
        if !(self.poisson > -1.0 && self.poisson < 0.5) {
            return bad("poisson", "must lie in (-1, 0.5)");
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad("kappa", "must lie in (0, 1)");
        }
        if self.k == 0 {
            return bad("k", "must be at least 1");
        }
        if !(self.clamp[0] <= self.clamp[1] && self.clamp[1] < 1.0 / (1.0 - self.kappa)) {
            return bad("clamp", "bounds must be ordered and keep the modulus positive");
        }
        if !(self.fd_step > 0.0) {
            return bad("fd_step", "must be positive");
        }
        if !(self.penalty_rel >= 0.0) {
            return bad("penalty_rel", "must be nonnegative");
        }
        if self.load.positions.is_empty() || !(self.load.footprint > 0.0) {
            return bad("load.positions", "need at least one load case with positive footprint");
        }
        for &p in &self.load.positions {
            let half = self.load.footprint / 2.0;
            if !(p - half >= 0.0 && p + half <= 1.0) {
                return bad("load.positions", "footprint must lie on the top edge");
            }
        }
        let all = self
            .sensors
            .strain
            .iter()
            .chain(&self.sensors.displacement)
            .chain(&self.sensors.rotation);
        for s in all {
            if !(s[0] >= 0.0 && s[0] <= 1.0 && s[1] >= 0.0 && s[1] <= 1.0) {
                return Err(Error::OutsideDomain {
                    position: s[0] * self.length,
                    length: self.length,
                });
            }
        }
        let n = &self.noise;
        if !(n.strain > 0.0 && n.displacement > 0.0 && n.rotation > 0.0) {
            return bad("noise", "relative noise levels must be positive");
        }
        Ok(())
    }
}

/// Damage value per cell, row-major from the bottom row.
#[derive(Clone, Debug, PartialEq)]
pub struct DamageField {
    pub ny: usize,
    pub nx: usize,
    pub values: DVector<f64>,
}

impl DamageField {
    pub fn zeros(ny: usize, nx: usize) -> Self {
        Self::constant(ny, nx, 0.0)
    }

    pub fn constant(ny: usize, nx: usize, d: f64) -> Self {
        Self {
            ny,
            nx,
            values: DVector::from_element(ny * nx, d),
        }
    }

    pub fn from_vector(ny: usize, nx: usize, values: DVector<f64>) -> Result<Self> {
        if values.len() != ny * nx {
            return Err(Error::DimensionMismatch {
                context: "damage field",
                expected: ny * nx,
                found: values.len(),
            });
        }
        Ok(Self { ny, nx, values })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.nx + col]
    }

    /// Projection onto `[lo, hi]`.
    pub fn clamped(&self, lo: f64, hi: f64) -> Self {
        Self {
            values: self.values.map(|v| v.clamp(lo, hi)),
            ..self.clone()
        }
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# field ny={} nx={}", self.ny, self.nx)?;
        for r in 0..self.ny {
            write_row(w, (0..self.nx).map(|c| self.get(r, c)))?;
        }
        Ok(())
    }
}

/// Sensor kinds in stacking order within a load case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Strain,
    Displacement,
    Rotation,
}

/// Assembled benchmark model.
#[derive(Clone, Debug)]
pub struct Damage2D {
    config: Damage2DConfig,
    mesh: PlaneMesh,
    loads: Vec<DVector<f64>>,
    sensors: Vec<(SensorKind, f64, f64)>,
    /// Per-row noise standard deviation.
    sigma: DVector<f64>,
}

impl Damage2D {
    pub fn new(config: Damage2DConfig) -> Result<Self> {
        config.validate()?;
        let mesh = PlaneMesh::new(&config)?;
        let loads = config
            .load
            .positions
            .iter()
            .map(|&p| mesh.top_traction(p * config.length, config.load.footprint * config.length, config.load.magnitude))
            .collect();
        let (l, h) = (config.length, config.height);
        let s = &config.sensors;
        let sensors = s
            .strain
            .iter()
            .map(|p| (SensorKind::Strain, p[0] * l, p[1] * h))
            .chain(s.displacement.iter().map(|p| (SensorKind::Displacement, p[0] * l, p[1] * h)))
            .chain(s.rotation.iter().map(|p| (SensorKind::Rotation, p[0] * l, p[1] * h)))
            .collect();
        let mut model = Self {
            config,
            mesh,
            loads,
            sensors,
            sigma: DVector::zeros(0),
        };
        model.sigma = model.noise_levels()?;
        Ok(model)
    }

    pub fn config(&self) -> &Damage2DConfig {
        &self.config
    }

    pub fn mesh(&self) -> &PlaneMesh {
        &self.mesh
    }

    pub fn n_cells(&self) -> usize {
        self.config.n_cells()
    }

    pub fn n_obs(&self) -> usize {
        self.sensors.len() * self.loads.len()
    }

    pub fn sigma(&self) -> &DVector<f64> {
        &self.sigma
    }

    /// Sensor kind of every observation row.
    pub fn row_kinds(&self) -> Vec<SensorKind> {
        (0..self.loads.len())
            .flat_map(|_| self.sensors.iter().map(|s| s.0))
            .collect()
    }

    fn check_field(&self, field: &DamageField) -> Result<()> {
        if field.values.len() != self.n_cells() {
            return Err(Error::DimensionMismatch {
                context: "damage field",
                expected: self.n_cells(),
                found: field.values.len(),
            });
        }
        Ok(())
    }

    /// Cell moduli `E0 (kappa + (1 - kappa)(1 - d))`.
    pub fn moduli(&self, field: &DamageField) -> Result<Vec<f64>> {
        self.check_field(field)?;
        let (e0, k) = (self.config.e0, self.config.kappa);
        let e: Vec<f64> = field.values.iter().map(|d| e0 * (k + (1.0 - k) * (1.0 - d))).collect();
        if e.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument("damage makes the modulus nonpositive".into()));
        }
        Ok(e)
    }

    /// Nodal displacements for every load case, scaled by `load_scale`.
    pub fn solve_scaled(&self, field: &DamageField, load_scale: f64) -> Result<Vec<DVector<f64>>> {
        let ldl = self.mesh.factorize(&self.moduli(field)?)?;
        Ok(self
            .loads
            .iter()
            .map(|f| ldl.solve(&self.mesh.constrain_rhs(f * load_scale)))
            .collect())
    }

    pub fn solve(&self, field: &DamageField) -> Result<Vec<DVector<f64>>> {
        self.solve_scaled(field, 1.0)
    }

    /// Sensor readings of one displacement state.
    pub fn observe(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let vals = self
            .sensors
            .iter()
            .map(|&(kind, x, y)| {
                let (ux_x, uy, uy_x) = self.mesh.sample(u, x, y)?;
                Ok(match kind {
                    SensorKind::Strain => ux_x,
                    SensorKind::Displacement => uy,
                    SensorKind::Rotation => uy_x,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// Stacked observations, load case major.
    pub fn forward(&self, field: &DamageField) -> Result<DVector<f64>> {
        let mut out = Vec::with_capacity(self.n_obs());
        for u in self.solve(field)? {
            out.extend(self.observe(&u)?.iter());
        }
        Ok(DVector::from_vec(out))
    }

    fn noise_levels(&self) -> Result<DVector<f64>> {
        let y = self.forward(&DamageField::zeros(self.config.ny, self.config.nx))?;
        let kinds = self.row_kinds();
        let rel = |k: SensorKind| match k {
            SensorKind::Strain => self.config.noise.strain,
            SensorKind::Displacement => self.config.noise.displacement,
            SensorKind::Rotation => self.config.noise.rotation,
        };
        let rms = |k: SensorKind| {
            let (s, n) = kinds
                .iter()
                .zip(y.iter())
                .filter(|(kk, _)| **kk == k)
                .fold((0.0, 0usize), |(s, n), (_, v)| (s + v * v, n + 1));
            (s / n.max(1) as f64).sqrt()
        };
        let levels = [SensorKind::Strain, SensorKind::Displacement, SensorKind::Rotation].map(|k| rel(k) * rms(k));
        Ok(DVector::from_iterator(
            kinds.len(),
            kinds.iter().map(|k| levels[*k as usize]),
        ))
    }

    /// True damage field sampled at cell centres.
    pub fn true_field(&self) -> DamageField {
        let c = &self.config;
        let t = &c.damage;
        let values = DVector::from_iterator(
            c.n_cells(),
            (0..c.ny).flat_map(|r| (0..c.nx).map(move |col| (r, col))).map(|(r, col)| {
                let s = (col as f64 + 0.5) / c.nx as f64;
                let y = (r as f64 + 0.5) / c.ny as f64;
                let a = (s - t.center[0]) / t.radius[0];
                let b = (y - t.center[1]) / t.radius[1];
                t.peak * (-0.5 * (a * a + b * b)).exp()
            }),
        );
        DamageField {
            ny: c.ny,
            nx: c.nx,
            values,
        }
    }

    /// Noisy observations at the true field.
    pub fn synthesize(&self, seed: u64) -> Result<DVector<f64>> {
        let mut y = self.forward(&self.true_field())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (v, s) in y.iter_mut().zip(self.sigma.iter()) {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += s * e;
        }
        Ok(y)
    }

    /// Raw central-difference Jacobian `dY/dd` (columns in cell order).
    pub fn fd_jacobian_raw(&self, field: &DamageField, step: f64) -> Result<DMatrix<f64>> {
        if !(step > 0.0) {
            return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
        }
        let base = self.moduli(field)?;
        let slope = self.config.e0 * (1.0 - self.config.kappa);
        let cols = (0..self.n_cells())
            .into_par_iter()
            .map(|c| {
                // K+ (u+ - u-) = (K- - K+) u-: the central difference without
                // subtracting two nearly equal solutions.
                let mut plus = base.clone();
                plus[c] -= slope * step;
                let mut minus = base.clone();
                minus[c] += slope * step;
                let ldl_p = self.mesh.factorize(&plus)?;
                let ldl_m = self.mesh.factorize(&minus)?;
                let mut col = Vec::with_capacity(self.n_obs());
                for f in &self.loads {
                    let um = ldl_m.solve(&self.mesh.constrain_rhs(f.clone()));
                    let du = ldl_p.solve(&self.mesh.cell_force(c, &um, minus[c] - plus[c]));
                    col.extend(self.observe(&du)?.iter().map(|v| v / (2.0 * step)));
                }
                Ok(DVector::from_vec(col))
            })
            .collect::<Result<Vec<DVector<f64>>>>()?;
        let m = self.n_obs();
        let mut j = DMatrix::zeros(m, cols.len());
        for (c, col) in cols.iter().enumerate() {
            j.set_column(c, col);
        }
        let y = self.forward(field)?;
        let ymax = y.amax();
        let jmax = j.amax();
        if jmax * step < 1e-12 * ymax {
            log::warn!("finite-difference step {step} is too small: differences fall below 1e-12 of the readings");
        }
        Ok(j)
    }

    /// Whitened-noise observation block of the FD Jacobian.
    pub fn fd_jacobian(&self, field: &DamageField, step: f64) -> Result<ObservationBlock<f64>> {
        let j = self.fd_jacobian_raw(field, step)?;
        ObservationBlock::new(j, NoiseCov::from_std(self.sigma.as_slice()), "damage2d")
    }
}

/// Leading modes of the information operator and the spectrum ratio.
#[derive(Clone, Debug)]
pub struct ModeReport {
    pub operator: InfoOperator<f64>,
    pub modes: ModeSet<f64>,
    /// `lambda_1 / lambda_k`.
    pub ratio: f64,
}

/// Euclidean modes of `J^T R^-1 J` at `field`.
pub fn mode_report(model: &Damage2D, field: &DamageField, k: usize) -> Result<ModeReport> {
    let block = model.fd_jacobian(field, model.config.fd_step)?;
    let operator = assemble_info(&block);
    let modes = sym_eig(&operator, k)?;
    let ratio = modes.eigenvalues[0] / modes.eigenvalues[k - 1];
    Ok(ModeReport {
        operator,
        modes,
        ratio,
    })
}

/// Linearized MAP restricted to the span of the leading modes.
#[derive(Clone, Debug)]
pub struct SubspaceMap {
    /// Clamped reconstruction.
    pub field: DamageField,
    /// Unclamped update `m - m0` (lies in the retained span).
    pub update: DVector<f64>,
    pub coefficients: DVector<f64>,
    pub penalty: f64,
}

/// Solves `min_c 1/2 |r - J Psi c|^2_{R^-1} + alpha/2 |c|^2` with
/// `r = y - Y(m0)`, then clamps `m0 + Psi c` to the configured bounds.
/// `penalty` defaults to `penalty_rel * lambda_1`.
pub fn subspace_map(
    model: &Damage2D,
    block: &ObservationBlock<f64>,
    nominal: &DamageField,
    data: &DVector<f64>,
    modes: &ModeSet<f64>,
    k: usize,
    penalty: Option<f64>,
) -> Result<SubspaceMap> {
    if k == 0 || k > modes.k() {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={}", modes.k())));
    }
    let psi = modes.modes.columns(0, k).into_owned();
    let y0 = model.forward(nominal)?;
    let r = block.whiten_vector(&(data - y0));
    let w = block.whitened_jacobian();
    let a = &w * &psi;
    let alpha = penalty.unwrap_or(model.config.penalty_rel * modes.eigenvalues[0]);
    let mut h = a.transpose() * &a;
    for i in 0..k {
        h[(i, i)] += alpha;
    }
    let rhs = a.transpose() * r;
    let c = h
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&rhs))
        .or_else(|| h.lu().solve(&rhs))
        .ok_or_else(|| Error::Singular("reduced normal matrix".into()))?;
    let update = &psi * &c;
    let raw = DamageField::from_vector(nominal.ny, nominal.nx, &nominal.values + &update)?;
    let [lo, hi] = model.config.clamp;
    Ok(SubspaceMap {
        field: raw.clamped(lo, hi),
        update,
        coefficients: c,
        penalty: alpha,
    })
}

/// End-to-end benchmark outputs.
#[derive(Clone, Debug)]
pub struct Damage2DReport {
    pub truth: DamageField,
    pub reconstruction: SubspaceMap,
    pub modes: ModeSet<f64>,
    pub ratio: f64,
    pub rank: usize,
    /// `|P(m_map - m_true)| / |P(m0 - m_true)|` with `P` the retained
    /// projector.
    pub subspace_error_ratio: f64,
}

/// Runs the benchmark at the undamaged nominal field with `k` modes.
pub fn run_benchmark(model: &Damage2D, k: usize, seed: u64) -> Result<Damage2DReport> {
    let c = model.config();
    let nominal = DamageField::zeros(c.ny, c.nx);
    let block = model.fd_jacobian(&nominal, c.fd_step)?;
    let operator = assemble_info(&block);
    let modes = sym_eig(&operator, k)?;
    let rank = crate::linalg::numerical_rank(&operator.to_dense(), 1e-10);
    let data = model.synthesize(seed)?;
    let reconstruction = subspace_map(model, &block, &nominal, &data, &modes, k, None)?;
    let truth = model.true_field();
    let psi = &modes.modes;
    let project = |v: DVector<f64>| psi * (psi.transpose() * v);
    let err_map = project(&reconstruction.field.values - &truth.values).norm();
    let err_prior = project(&nominal.values - &truth.values).norm();
    Ok(Damage2DReport {
        ratio: modes.eigenvalues[0] / modes.eigenvalues[k - 1],
        truth,
        reconstruction,
        modes,
        rank,
        subspace_error_ratio: err_map / err_prior,
    })
}

#[cfg(test)]
mod tests;
