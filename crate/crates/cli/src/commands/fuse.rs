use std::io::Write;

use locinfo::csvio::write_row;
use locinfo::fusion::{
    density_report, ei_error, gauss_newton_map, synthesize_data, Blocks, FusionBenchmark, FusionConfig,
};
use serde::Serialize;

use crate::config::{invalid, load, Failure};
use crate::output::Output;
use crate::Common;

#[derive(Serialize)]
struct Convergence {
    blocks: &'static str,
    iterations: usize,
    converged: bool,
    misfit_history: Vec<f64>,
    /// Relative L2 error of the reconstructed rigidity.
    ei_relative_error: f64,
    density_additivity_defect: f64,
}

#[derive(Serialize)]
struct Echo<'a> {
    blocks: &'static str,
    #[serde(flatten)]
    config: &'a FusionConfig,
}

pub fn run(common: &Common, blocks: &str) -> Result<(), Failure> {
    let blocks: Blocks = blocks
        .parse()
        .map_err(|_| Failure::Config(format!("blocks: expected static, dynamic or hybrid, got `{blocks}`")))?;
    let mut cfg: FusionConfig = load(common.config.as_deref())?;
    cfg.seed = common.seed.unwrap_or(cfg.seed);
    let bench = FusionBenchmark::new(cfg.clone()).map_err(invalid)?;
    let mut out = Output::create(&common.out)?;

    let data = synthesize_data(&bench, cfg.seed, 1.0)?;
    let map = gauss_newton_map(&bench, &data, blocks)?;
    let x = bench.element_centers();
    let ei_true = bench.ei_field(&bench.p_true());
    let ei_map = bench.ei_field(&map.p_map);
    let lo = bench.ei_field(&(&map.p_map - &map.band));
    let hi = bench.ei_field(&(&map.p_map + &map.band));
    out.write("reconstruction.csv", "csv", "true and MAP rigidity with one-sigma band", |w| {
        writeln!(w, "x,EI_true,EI_map,band_lo,band_hi")?;
        for e in 0..x.len() {
            write_row(w, [x[e], ei_true[e], ei_map[e], lo[e], hi[e]])?;
        }
        Ok(())
    })?;
    let dens = density_report(&bench)?;
    out.write("density.csv", "csv", "static, dynamic and hybrid information densities", |w| {
        writeln!(w, "x,static,dynamic,hybrid")?;
        for e in 0..dens.x.len() {
            write_row(w, [dens.x[e], dens.static_density[e], dens.dynamic_density[e], dens.hybrid_density[e]])?;
        }
        Ok(())
    })?;
    let conv = Convergence {
        blocks: blocks.as_str(),
        iterations: map.iterations,
        converged: map.converged,
        misfit_history: map.misfit_history.clone(),
        ei_relative_error: ei_error(&bench, &map.p_map),
        density_additivity_defect: dens.additivity_defect(),
    };
    out.write_json("convergence.json", "Gauss-Newton history and reconstruction error", &conv)?;
    let echo = Echo {
        blocks: blocks.as_str(),
        config: &cfg,
    };
    out.finish("fuse-benchmark", common, Some(cfg.seed), &echo)
}
