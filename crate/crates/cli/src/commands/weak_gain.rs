use std::io::Write;

use locinfo::csvio::write_row;
use locinfo::fusion::{FusionBenchmark, FusionConfig};
use locinfo::opcore::assemble_info;
use locinfo::prior::{weak_gain, weak_projector};
use locinfo::spectral::prior_preconditioned_eig;
use locinfo::ObservationBlock;
use nalgebra::DVector;
use serde::Serialize;

use crate::config::{invalid, load, require, Failure};
use crate::output::Output;
use crate::Common;

#[derive(Serialize)]
struct Summary {
    tau: f64,
    /// Whitened directions of the static design below `tau`.
    n_weak: usize,
    prior_relative_eigenvalues: Vec<f64>,
    candidates: Vec<Candidate>,
}

#[derive(Serialize)]
struct Candidate {
    label: String,
    gain: f64,
}

#[derive(Serialize)]
struct Echo<'a> {
    tau: f64,
    #[serde(flatten)]
    config: &'a FusionConfig,
}

/// Ranks each dynamic excitation (and all of them together) by its gain in
/// the weakly informed subspace left by the static test at the healthy
/// field.
pub fn run(common: &Common, tau: Option<f64>) -> Result<(), Failure> {
    let cfg: FusionConfig = load(common.config.as_deref())?;
    let tau = tau.unwrap_or(1e-2);
    require(tau > 0.0, "tau", "must be positive")?;
    let bench = FusionBenchmark::new(cfg.clone()).map_err(invalid)?;
    let mut out = Output::create(&common.out)?;

    let n = bench.n_params();
    let p0 = DVector::zeros(n);
    let current = ObservationBlock::with_std(bench.static_jacobian(&p0)?, 1.0, "static")?;
    let modes = prior_preconditioned_eig(&assemble_info(&current), bench.prior(), n)?;
    let projector = weak_projector(&modes, tau)?;
    let n_weak = modes.eigenvalues.iter().filter(|&&l| l < tau).count();

    let mut sets: Vec<(String, Vec<f64>)> = cfg
        .dynamic_test
        .excitations
        .iter()
        .map(|&z| (format!("excitation@{z}"), vec![z]))
        .collect();
    sets.push(("all_excitations".into(), cfg.dynamic_test.excitations.clone()));
    let mut candidates = Vec::new();
    for (label, zs) in sets {
        let mut c = cfg.clone();
        c.dynamic_test.excitations = zs;
        let b = FusionBenchmark::new(c).map_err(invalid)?;
        let block = ObservationBlock::with_std(b.dynamic_jacobian(&p0)?, 1.0, label.clone())?;
        let (_, gain) = weak_gain(&block, bench.prior(), &projector)?;
        candidates.push(Candidate { label, gain });
    }

    out.write("weak_gain.csv", "csv", "candidate index and scalar weak-direction gain", |w| {
        writeln!(w, "candidate,gain")?;
        for (i, c) in candidates.iter().enumerate() {
            write_row(w, [i as f64, c.gain])?;
        }
        Ok(())
    })?;
    let summary = Summary {
        tau,
        n_weak,
        prior_relative_eigenvalues: modes.eigenvalues.iter().copied().collect(),
        candidates,
    };
    out.write_json("weak_gain.json", "weak subspace size and per-candidate gains", &summary)?;
    out.finish("weak-gain", common, None, &Echo { tau, config: &cfg })
}
