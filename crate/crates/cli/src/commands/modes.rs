use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use locinfo::spectral::{mass_weighted_eig, prior_preconditioned_eig, sym_eig};
use locinfo::{InfoOperator, PriorModel};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::{invalid, load, require, Failure};
use crate::output::Output;
use crate::Common;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesConfig {
    pub k: usize,
    /// `euclidean`, `mass` (uniform cell weights `1/n`) or `prior`
    /// (first-difference precision).
    pub metric: String,
    pub gamma_pr: f64,
    pub eps_pr: f64,
}

impl Default for ModesConfig {
    fn default() -> Self {
        Self {
            k: 6,
            metric: "euclidean".into(),
            gamma_pr: 1.0,
            eps_pr: 1e-2,
        }
    }
}

#[derive(Serialize)]
struct Echo<'a> {
    input: String,
    #[serde(flatten)]
    config: &'a ModesConfig,
}

pub fn run(common: &Common, input: &Path, k: Option<usize>, metric: Option<String>) -> Result<(), Failure> {
    let mut cfg: ModesConfig = load(common.config.as_deref())?;
    cfg.k = k.unwrap_or(cfg.k);
    if let Some(m) = metric {
        cfg.metric = m;
    }
    let file = File::open(input).map_err(|e| Failure::Config(format!("input: {}: {e}", input.display())))?;
    let op = InfoOperator::<f64>::read_csv(BufReader::new(file))
        .map_err(|e| Failure::Config(format!("input: {}: {e}", input.display())))?;
    let n = op.dim();
    require(cfg.k >= 1 && cfg.k <= n, "k", &format!("must lie in 1..={n}"))?;
    let modes = match cfg.metric.as_str() {
        "euclidean" => sym_eig(&op, cfg.k)?,
        "mass" => mass_weighted_eig(&op, &(DMatrix::identity(n, n) / n as f64), cfg.k)?,
        "prior" => {
            let prior = PriorModel::difference_precision(n, cfg.gamma_pr, cfg.eps_pr).map_err(invalid)?;
            prior_preconditioned_eig(&op, &prior, cfg.k)?
        }
        other => return Err(Failure::Config(format!("metric: unknown metric `{other}`"))),
    };
    let mut out = Output::create(&common.out)?;
    out.write("modes.csv", "csv", "eigenvalues (first row) and mode components", |w| modes.write_csv(w))?;
    out.write("modes.json", "json", "mode set with metric tag and residuals", |w| {
        use std::io::Write;
        writeln!(w, "{}", modes.to_json()?)?;
        Ok(())
    })?;
    let echo = Echo {
        input: input.display().to_string(),
        config: &cfg,
    };
    out.finish("modes", common, None, &echo)
}
