//! Toy hypothesis test: `H₀: θ = 1/2` against `H₁: θ ~ U(0, 1)`.

use std::collections::BTreeMap;

use clap::Args;
use cposterior::conjugate::{toy_approx_cposterior, toy_exact_cposterior, toy_standard_posterior};
use cposterior::mathcore::sample_unit;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{finish, read_common, Alpha, Common, CommonDefaults, FieldReader};
use crate::output::{Field, Table};
use crate::runner::{Cell, CellOutput, Driver};

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct BernoulliFields {
    /// Success probability of the simulated trials.
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BernoulliSpec {
    #[serde(flatten)]
    pub common: Common,
    pub theta: f64,
}

pub fn resolve(map: Map<String, Value>) -> anyhow::Result<BernoulliSpec> {
    let mut r = FieldReader::new(map);
    let defaults = CommonDefaults {
        alpha: vec![Alpha(1250.0), Alpha(f64::INFINITY)],
        n: vec![10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000],
        replicates: 1000,
    };
    let common = read_common(&mut r, defaults, None, 1);
    let theta = r.get_or("theta", 0.51);
    if !(0.0..=1.0).contains(&theta) {
        r.error("theta", format!("must lie in [0, 1], got {theta}"));
    }
    finish(r, BernoulliSpec { common, theta })
}

impl Driver for BernoulliSpec {
    fn kind(&self) -> &'static str {
        "bernoulli"
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
                    // Every n reads a prefix of the same replicate sequence.
                    let mut cell = Cell::new(1, c.seed, alpha, 0, rep, 0);
                    cell.n = n;
                    cells.push(cell);
                }
            }
        }
        cells
    }

    fn summary_columns(&self) -> Vec<String> {
        ["successes", "xbar", "standard", "approx", "exact"].map(String::from).to_vec()
    }

    fn run_cell(&self, cell: &Cell, _save_traces: bool) -> anyhow::Result<CellOutput> {
        let mut rng = cell.data_rng();
        let successes = (0..cell.n).filter(|_| sample_unit(&mut rng) < self.theta).count();
        let xbar = successes as f64 / cell.n as f64;
        let cfg = cell.alpha.config()?;
        Ok(CellOutput {
            summary: vec![
                successes.into(),
                xbar.into(),
                toy_standard_posterior(cell.n, xbar)?.into(),
                toy_approx_cposterior(cell.n, xbar, &cfg)?.into(),
                toy_exact_cposterior(cell.n, xbar, &cfg)?.into(),
            ],
            ..Default::default()
        })
    }

    fn aggregate(&self, done: &[(&Cell, &CellOutput)]) -> Option<(&'static str, Table)> {
        let mut sums: BTreeMap<(usize, usize), (usize, [f64; 3])> = BTreeMap::new();
        for (cell, out) in done {
            let ai = self.common.alpha.iter().position(|a| *a == cell.alpha).unwrap_or(0);
            let ni = self.common.n.iter().position(|n| *n == cell.n).unwrap_or(0);
            let e = sums.entry((ai, ni)).or_insert((0, [0.0; 3]));
            e.0 += 1;
            for (k, f) in out.summary[2..5].iter().enumerate() {
                if let Field::Float(v) = f {
                    e.1[k] += v;
                }
            }
        }
        let mut t = Table::new(
            ["alpha", "n", "replicates", "mean_standard", "mean_approx", "mean_exact"].map(String::from).to_vec(),
        );
        for ((ai, ni), (count, s)) in sums {
            let c = count as f64;
            t.push(vec![
                self.common.alpha[ai].to_string().into(),
                self.common.n[ni].into(),
                count.into(),
                (s[0] / c).into(),
                (s[1] / c).into(),
                (s[2] / c).into(),
            ]);
        }
        Some(("means", t))
    }

    fn spec(&self) -> Value {
        serde_json::to_value(self).expect("spec serializes")
    }
}
