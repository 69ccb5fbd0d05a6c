use std::io::Write;

use locinfo::csvio::write_row;
use locinfo::fusion::{FusionBenchmark, FusionConfig};
use locinfo::linalg::min_eigenvalue;
use locinfo::opcore::{schur_complement, DEFAULT_PINV_TOL};
use locinfo::{JointInfoBlocks, NoiseCov};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::{invalid, load, require, Failure};
use crate::output::Output;
use crate::Common;

#[derive(Serialize)]
struct Summary {
    pinv_tol: f64,
    n_interest: usize,
    n_nuisance: usize,
    trace_marginal: f64,
    trace_effective: f64,
    /// Smallest eigenvalue of `I_mm - I_m|n` (nonnegative up to round-off).
    min_eig_loss: f64,
}

#[derive(Serialize)]
struct Echo<'a> {
    pinv_tol: f64,
    #[serde(flatten)]
    config: &'a FusionConfig,
}

/// Static tilt test with one unknown zero offset per sensor: the offsets are
/// eliminated and the effective log-stiffness information reported.
pub fn run(common: &Common, tau: Option<f64>) -> Result<(), Failure> {
    let cfg: FusionConfig = load(common.config.as_deref())?;
    let pinv_tol = tau.unwrap_or(DEFAULT_PINV_TOL);
    require(pinv_tol > 0.0, "tau", "must be positive")?;
    let bench = FusionBenchmark::new(cfg.clone()).map_err(invalid)?;
    let mut out = Output::create(&common.out)?;

    let n = bench.n_params();
    let jm = bench.static_jacobian(&DVector::zeros(n))?;
    let n_sensors = cfg.static_test.sensors.len();
    // Case-major rows: row r belongs to sensor r % n_sensors.
    let sigma = cfg.static_test.sigma;
    let jn = DMatrix::from_fn(jm.nrows(), n_sensors, |r, j| if r % n_sensors == j { 1.0 / sigma } else { 0.0 });
    let joint = JointInfoBlocks::from_jacobians(&jm, &jn, NoiseCov::isotropic(jm.nrows(), 1.0))?;
    let effective = schur_complement(&joint, pinv_tol).to_dense();
    let marginal = joint.mm.clone();

    out.write("schur.csv", "csv", "effective information after eliminating sensor offsets", |w| {
        writeln!(w, "# info_operator n={n}")?;
        for i in 0..n {
            write_row(w, effective.row(i).iter().copied())?;
        }
        Ok(())
    })?;
    let x = bench.element_centers();
    out.write("loss.csv", "csv", "marginal and effective diagonal per element", |w| {
        writeln!(w, "x,marginal,effective")?;
        for e in 0..n {
            write_row(w, [x[e], marginal[(e, e)], effective[(e, e)]])?;
        }
        Ok(())
    })?;
    let summary = Summary {
        pinv_tol,
        n_interest: n,
        n_nuisance: n_sensors,
        trace_marginal: marginal.trace(),
        trace_effective: effective.trace(),
        min_eig_loss: min_eigenvalue(&(&marginal - &effective)),
    };
    out.write_json("summary.json", "traces and loss ordering check", &summary)?;
    out.finish("schur", common, None, &Echo { pinv_tol, config: &cfg })
}
