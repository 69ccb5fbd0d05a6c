use locinfo::beam_fe::{assemble_kernel, BeamMesh, BeamSystem, KernelParam, MovingLoadCase};
use locinfo::csvio::write_row;
use locinfo::spectral::sym_eig;
use serde::{Deserialize, Serialize};

use crate::config::{invalid, load, require, Failure};
use crate::output::Output;
use crate::Common;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoSpanConfig {
    pub spans: [f64; 2],
    pub n_per_span: usize,
    pub ei0: f64,
    /// Sensor position as a fraction of the total length.
    pub rho: f64,
    pub n_loads: usize,
    pub load: f64,
    pub sigma: f64,
    /// `compliance` or `ei`.
    pub param: String,
    pub k: usize,
}

impl Default for TwoSpanConfig {
    fn default() -> Self {
        Self {
            spans: [1.0, 1.0],
            n_per_span: 64,
            ei0: 1.0,
            rho: 0.25,
            n_loads: 81,
            load: 1.0,
            sigma: 1.0,
            param: "compliance".into(),
            k: 5,
        }
    }
}

#[derive(Serialize)]
struct Summary {
    sensor: f64,
    support_positions: Vec<f64>,
    /// Kernel diagonal at the sample point nearest each support.
    support_density: Vec<f64>,
    symmetry_defect: f64,
    eigenvalues: Vec<f64>,
    n_elements: usize,
    n_loads: usize,
}

pub fn run(common: &Common, rho: Option<f64>, grid: Option<usize>, k: Option<usize>) -> Result<(), Failure> {
    let mut cfg: TwoSpanConfig = load(common.config.as_deref())?;
    cfg.rho = rho.unwrap_or(cfg.rho);
    cfg.n_loads = grid.unwrap_or(cfg.n_loads);
    cfg.k = k.unwrap_or(cfg.k);
    let param = match cfg.param.as_str() {
        "compliance" => KernelParam::Compliance,
        "ei" => KernelParam::Ei,
        other => return Err(Failure::Config(format!("param: unknown parameterization `{other}`"))),
    };
    require(cfg.rho > 0.0 && cfg.rho < 1.0, "rho", "must lie in (0, 1)")?;
    require(cfg.k >= 1, "k", "must be at least 1")?;
    let mesh = BeamMesh::two_span(cfg.spans[0], cfg.spans[1], cfg.n_per_span, cfg.ei0).map_err(invalid)?;
    let sensor = cfg.rho * mesh.length();
    let cases = MovingLoadCase::uniform_sweep(&mesh, cfg.n_loads, cfg.load, cfg.sigma).map_err(invalid)?;
    let mut out = Output::create(&common.out)?;

    let system = BeamSystem::assemble(&mesh)?;
    let grid = assemble_kernel(&system, sensor, &cases, param)?;
    let op = grid.weighted_operator()?;
    require(cfg.k <= op.dim(), "k", "exceeds the number of sample points")?;
    let modes = sym_eig(&op, cfg.k)?;

    out.write("kernel.csv", "csv", "FE kernel on the element Gauss points", |w| grid.write_csv(w, cfg.rho))?;
    out.write("density.csv", "csv", "kernel diagonal over x", |w| {
        use std::io::Write;
        writeln!(w, "x,density")?;
        for (x, d) in grid.x.iter().zip(grid.diagonal().iter()) {
            write_row(w, [*x, *d])?;
        }
        Ok(())
    })?;
    out.write("modes.csv", "csv", "leading modes of the quadrature-weighted kernel", |w| modes.write_csv(w))?;

    let supports = mesh.support_positions();
    let diag = grid.diagonal();
    let nearest = |p: f64| {
        (0..grid.x.len())
            .min_by(|&a, &b| (grid.x[a] - p).abs().total_cmp(&(grid.x[b] - p).abs()))
            .map(|i| diag[i])
            .unwrap_or(0.0)
    };
    let summary = Summary {
        sensor,
        support_density: supports.iter().map(|&p| nearest(p)).collect(),
        support_positions: supports,
        symmetry_defect: locinfo::linalg::symmetry_defect(&grid.matrix),
        eigenvalues: modes.eigenvalues.iter().copied().collect(),
        n_elements: mesh.n_elements(),
        n_loads: cfg.n_loads,
    };
    out.write_json("summary.json", "support values, symmetry and spectrum", &summary)?;
    out.finish("beam-two-span", common, None, &cfg)
}
