use locinfo::beam_analytic::{
    diag_density, galerkin_modes, jump_ratio, write_density_csv, write_kernel_csv, BeamSpec,
};
use serde::{Deserialize, Serialize};

use crate::config::{invalid, load, require, Failure};
use crate::output::Output;
use crate::Common;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamAnalyticConfig {
    pub length: f64,
    pub load: f64,
    pub sigma: f64,
    pub ei0: f64,
    /// Sensor position as a fraction of the span.
    pub rho: f64,
    /// Cells of the kernel grid and intervals of the density curve.
    pub grid: usize,
    pub n_series: usize,
    pub k: usize,
}

impl Default for BeamAnalyticConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            load: 1.0,
            sigma: 1.0,
            ei0: 1.0,
            rho: 0.25,
            grid: 400,
            n_series: 200,
            k: 5,
        }
    }
}

#[derive(Serialize)]
struct Summary {
    rho: f64,
    kappa_v: f64,
    /// Left over right limit of the density at the sensor.
    jump_ratio: f64,
    /// Location (fraction of span) of the density maximum on the grid.
    density_argmax: f64,
    density_max: f64,
    galerkin_eigenvalues: Vec<f64>,
    n_series: usize,
}

pub fn run(common: &Common, rho: Option<f64>, grid: Option<usize>, k: Option<usize>) -> Result<(), Failure> {
    let mut cfg: BeamAnalyticConfig = load(common.config.as_deref())?;
    cfg.rho = rho.unwrap_or(cfg.rho);
    cfg.grid = grid.unwrap_or(cfg.grid);
    cfg.k = k.unwrap_or(cfg.k);
    require(cfg.grid >= 2, "grid", "need at least 2 cells")?;
    require(cfg.k >= 1 && cfg.k <= cfg.n_series, "k", "must lie in 1..=n_series")?;
    let spec = BeamSpec::new(cfg.length, cfg.load, cfg.sigma, cfg.rho, cfg.ei0).map_err(invalid)?;
    let mut out = Output::create(&common.out)?;

    out.write("density.csv", "csv", "diagonal information density (both limits at the sensor)", |w| {
        write_density_csv(w, &spec, cfg.grid)
    })?;
    out.write("kernel.csv", "csv", "closed-form kernel on the midpoint grid", |w| {
        write_kernel_csv(w, &spec, cfg.grid)
    })?;

    let (mut s_max, mut d_max) = (0.0, f64::NEG_INFINITY);
    for i in 0..=cfg.grid {
        let s = i as f64 / cfg.grid as f64;
        let d = diag_density(&spec, s);
        if d > d_max {
            (s_max, d_max) = (s, d);
        }
    }
    let modes = galerkin_modes(&spec, cfg.n_series, cfg.k)?;
    let summary = Summary {
        rho: cfg.rho,
        kappa_v: spec.kappa_v(),
        jump_ratio: jump_ratio(cfg.rho),
        density_argmax: s_max,
        density_max: d_max,
        galerkin_eigenvalues: modes.eigenvalues.iter().copied().collect(),
        n_series: cfg.n_series,
    };
    out.write_json("summary.json", "jump ratio, density peak and leading eigenvalues", &summary)?;
    out.finish("beam-analytic", common, None, &cfg)
}
