//! Order selection for autoregressive models.

use std::path::PathBuf;

use clap::Args;
use cposterior::arorder::{generate_misspec_ar, log_marginals_over_orders, MisspecArConfig};
use cposterior::coarsening::SimplexVector;
use cposterior::io::read_univariate_csv;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{check_positive, data_path, finish, read_common, Alpha, Common, CommonDefaults, FieldReader};
use crate::runner::{Cell, CellOutput, Driver};

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct ArFields {
    /// Largest order considered; the posterior covers k = 0..=kmax.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Known noise standard deviation of the model.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Prior standard deviation of each coefficient.
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Generator coefficients, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// Generator noise standard deviation.
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Amplitude of the generator's sin(t) term.
    #[arg(long, allow_hyphen_values = true)]
    pub sin_amp: Option<f64>,
    /// Series CSV (header `x`) used instead of simulated data.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArSpec {
    #[serde(flatten)]
    pub common: Common,
    pub kmax: usize,
    pub sigma: f64,
    pub sigma0: f64,
    pub theta: Vec<f64>,
    pub noise_sd: f64,
    pub sin_amp: f64,
    pub data: Option<PathBuf>,
    #[serde(skip)]
    pub series: Option<Vec<f64>>,
}

pub fn resolve(map: Map<String, Value>) -> anyhow::Result<ArSpec> {
    let mut r = FieldReader::new(map);
    let data = data_path(&mut r);
    let series = match &data {
        Some(p) => match read_univariate_csv(p) {
            Ok(x) => Some(x),
            Err(e) => {
                r.error("data", format!("{}: {e}", p.display()));
                None
            }
        },
        None => None,
    };
    let defaults = CommonDefaults { alpha: vec![Alpha(500.0), Alpha(f64::INFINITY)], n: vec![10_000], replicates: 1 };
    let common = read_common(&mut r, defaults, series.as_ref().map(|x| x.len()), 1);
    if data.is_some() && common.replicates != 1 {
        r.error("replicates", "must be 1 when data is read from a file");
    }
    let generator = MisspecArConfig::default();
    let kmax = r.get_or("kmax", 20);
    let sigma = r.get_or("sigma", 1.0);
    let sigma0 = r.get_or("sigma0", 1.0);
    let theta = r.get_or("theta", generator.theta);
    let noise_sd = r.get_or("noise_sd", generator.noise_sd);
    let sin_amp = r.get_or("sin_amp", generator.sin_amp);
    check_positive(&mut r, "sigma", sigma);
    check_positive(&mut r, "sigma0", sigma0);
    if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
        r.error("noise_sd", format!("must be finite and >= 0, got {noise_sd}"));
    }
    if theta.iter().chain([&sin_amp]).any(|v| !v.is_finite()) {
        r.error("theta", "generator parameters must be finite");
    }
    finish(r, ArSpec { common, kmax, sigma, sigma0, theta, noise_sd, sin_amp, data, series })
}

impl Driver for ArSpec {
    fn kind(&self) -> &'static str {
        "ar"
    }

    fn seed(&self) -> u64 {
        self.common.seed
    }

    fn cells(&self) -> Vec<Cell> {
        let c = &self.common;
        let mut cells = Vec::new();
        for &alpha in &c.alpha {
            for &n in &c.n {
                for rep in 0..c.replicates {
                    cells.push(Cell::new(2, c.seed, alpha, n, rep, 0));
                }
            }
        }
        cells
    }

    fn summary_columns(&self) -> Vec<String> {
        std::iter::once("mode".to_string()).chain((0..=self.kmax).map(|k| format!("p_k{k}"))).collect()
    }

    fn raw_table(&self) -> Option<(&'static str, Vec<String>)> {
        Some(("log_marginals", ["k", "log_marginal", "posterior"].map(String::from).to_vec()))
    }

    fn run_cell(&self, cell: &Cell, _save_traces: bool) -> anyhow::Result<CellOutput> {
        let x = match &self.series {
            Some(x) => x.clone(),
            None => {
                let cfg = MisspecArConfig { theta: self.theta.clone(), noise_sd: self.noise_sd, sin_amp: self.sin_amp };
                generate_misspec_ar(cell.n, &cfg, &mut cell.data_rng())?
            }
        };
        let cfg = cell.alpha.config()?;
        let log_m = log_marginals_over_orders(&x, self.kmax, self.sigma, self.sigma0, &cfg)?;
        let post = SimplexVector::from_log_weights(&log_m)?;
        let mut summary = vec![post.argmax().into()];
        summary.extend(post.as_slice().iter().map(|&p| p.into()));
        let raw = (0..=self.kmax).map(|k| vec![k.into(), log_m[k].into(), post.as_slice()[k].into()]).collect();
        Ok(CellOutput { summary, raw, files: Vec::new() })
    }

    fn spec(&self) -> Value {
        serde_json::to_value(self).expect("spec serializes")
    }
}
