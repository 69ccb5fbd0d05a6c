use locinfo::damage2d::{run_benchmark, Damage2D, Damage2DConfig, DamageField};
use serde::Serialize;

use crate::config::{invalid, load, require, Failure};
use crate::output::Output;
use crate::Common;

#[derive(Serialize)]
struct Spectrum {
    eigenvalues: Vec<f64>,
    /// `lambda_1 / lambda_k`.
    ratio: f64,
    rank: usize,
    n_obs: usize,
    n_cells: usize,
    penalty: f64,
    coefficients: Vec<f64>,
    /// Retained-subspace error of the reconstruction over that of the prior
    /// mean.
    subspace_error_ratio: f64,
}

fn parse_grid(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Config(format!("grid: expected NYxNX, got `{s}`"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn run(common: &Common, k: Option<usize>, grid: Option<String>) -> Result<(), Failure> {
    let mut cfg: Damage2DConfig = load(common.config.as_deref())?;
    cfg.k = k.unwrap_or(cfg.k);
    cfg.seed = common.seed.unwrap_or(cfg.seed);
    if let Some(g) = grid {
        (cfg.ny, cfg.nx) = parse_grid(&g)?;
    }
    cfg.validate().map_err(invalid)?;
    require(cfg.k <= cfg.n_cells(), "k", "exceeds the number of cells")?;
    let model = Damage2D::new(cfg.clone()).map_err(invalid)?;
    let mut out = Output::create(&common.out)?;

    let rep = run_benchmark(&model, cfg.k, cfg.seed)?;
    out.write("field_true.csv", "csv", "true damage field", |w| rep.truth.write_csv(w))?;
    out.write("field_map.csv", "csv", "clamped subspace MAP reconstruction", |w| {
        rep.reconstruction.field.write_csv(w)
    })?;
    for i in 0..cfg.k {
        let map = DamageField::from_vector(cfg.ny, cfg.nx, rep.modes.mode(i))?;
        let name = format!("mode_{:02}.csv", i + 1);
        out.write(&name, "csv", &format!("information mode {} as a cell map", i + 1), |w| map.write_csv(w))?;
    }
    let spectrum = Spectrum {
        eigenvalues: rep.modes.eigenvalues.iter().copied().collect(),
        ratio: rep.ratio,
        rank: rep.rank,
        n_obs: model.n_obs(),
        n_cells: model.n_cells(),
        penalty: rep.reconstruction.penalty,
        coefficients: rep.reconstruction.coefficients.iter().copied().collect(),
        subspace_error_ratio: rep.subspace_error_ratio,
    };
    out.write_json("spectrum.json", "leading eigenvalues, rank and reconstruction error", &spectrum)?;
    out.finish("damage2d", common, Some(cfg.seed), &cfg)
}
