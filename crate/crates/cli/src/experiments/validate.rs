//! Monte-Carlo check of the small-sample correction.

use clap::Args;
use cposterior::coarsening::{small_sample_lhs_mc, small_sample_rhs, SimplexVector};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{finish, read_common, Alpha, Common, CommonDefaults, FieldReader};
use crate::runner::{Cell, CellOutput, Driver};

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct ValidateFields {
    /// Monte-Carlo draws per cell.
    #[arg(long)]
    pub draws: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidateSpec {
    #[serde(flatten)]
    pub common: Common,
    /// Distributions `p = s` to test (config file only).
    pub distributions: Vec<Vec<f64>>,
    pub draws: usize,
}

pub fn resolve(map: Map<String, Value>) -> anyhow::Result<ValidateSpec> {
    let mut r = FieldReader::new(map);
    let defaults = CommonDefaults { alpha: vec![Alpha(10.0), Alpha(50.0)], n: vec![50, 200], replicates: 1 };
    let common = read_common(&mut r, defaults, None, 1);
    if common.alpha.iter().any(|a| a.is_inf()) {
        r.error("alpha", "the small-sample correction needs finite alpha");
    }
    let distributions: Vec<Vec<f64>> = r.get_or("distributions", vec![vec![0.35, 0.65], vec![0.2, 0.3, 0.5]]);
    if distributions.is_empty() {
        r.error("distributions", "list must not be empty");
    }
    for (i, d) in distributions.iter().enumerate() {
        if d.len() < 2 || d.iter().any(|v| !(*v > 0.0)) || SimplexVector::new(d.clone()).is_err() {
            r.error("distributions", format!("entry {i} must have >= 2 positive weights summing to 1, got {d:?}"));
        }
    }
    let draws = r.get_or("draws", 20_000);
    if draws < 2 {
        r.error("draws", "must be >= 2");
    }
    finish(r, ValidateSpec { common, distributions, draws })
}

impl Driver for ValidateSpec {
    fn kind(&self) -> &'static str {
        "validate"
    }

    fn seed(&self) -> u64 {
        self.common.seed
    }

    fn cells(&self) -> Vec<Cell> {
        let c = &self.common;
        let mut cells = Vec::new();
        for (variant, _) in self.distributions.iter().enumerate() {
            for &alpha in &c.alpha {
                for &n in &c.n {
                    for rep in 0..c.replicates {
                        cells.push(Cell::new(5, c.seed, alpha, n, rep, variant));
                    }
                }
            }
        }
        cells
    }

    fn summary_columns(&self) -> Vec<String> {
        ["distribution", "k", "estimate", "std_error", "rhs"].map(String::from).to_vec()
    }

    fn run_cell(&self, cell: &Cell, _save_traces: bool) -> anyhow::Result<CellOutput> {
        let s = SimplexVector::new(self.distributions[cell.variant].clone())?;
        let cfg = cell.alpha.config()?;
        let mc = small_sample_lhs_mc(&s, &s, cell.n, &cfg, self.draws, &mut cell.chain_rng())?;
        let rhs = small_sample_rhs(&s, &s, cell.n, &cfg)?;
        Ok(CellOutput {
            summary: vec![cell.variant.into(), s.len().into(), mc.estimate.into(), mc.std_error.into(), rhs.into()],
            ..Default::default()
        })
    }

    fn spec(&self) -> Value {
        serde_json::to_value(self).expect("spec serializes")
    }
}
