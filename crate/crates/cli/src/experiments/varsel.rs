//! Spike-and-slab variable selection.

use std::path::PathBuf;

use clap::Args;
use cposterior::io::read_regression_csv;
use cposterior::varsel::{
    generate_varsel_data, run_chain, standardize_dataset, trace_summaries, RegressionDataset, VarselPriors,
};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{
    check_positive, check_sweeps, data_path, finish, read_common, Alpha, Common, CommonDefaults, FieldReader,
};
use crate::output::{Field, Table};
use crate::runner::{Cell, CellOutput, Driver};

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct VarselFields {
    /// Total Gibbs sweeps per chain.
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Sweeps discarded before recording.
    #[arg(long)]
    pub burnin: Option<usize>,
    /// Beta(r, s) prior on the inclusion rate: r.
    #[arg(long)]
    pub r: Option<f64>,
    /// Beta(r, s) prior on the inclusion rate: s (default 2p).
    #[arg(long)]
    pub s: Option<f64>,
    /// Slab precision.
    #[arg(long)]
    pub l0: Option<f64>,
    /// Gamma(a, b) prior on the noise precision: a.
    #[arg(long)]
    pub a: Option<f64>,
    /// Gamma(a, b) prior on the noise precision: b.
    #[arg(long)]
    pub b: Option<f64>,
    /// Regression CSV (covariate columns plus `y`), standardized before use.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VarselSpec {
    #[serde(flatten)]
    pub common: Common,
    pub sweeps: usize,
    pub burnin: usize,
    pub priors: PriorValues,
    pub data: Option<PathBuf>,
    /// Names of the columns in the design matrix, constant first.
    pub columns: Vec<String>,
    #[serde(skip)]
    pub dataset: Option<RegressionDataset>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PriorValues {
    pub r: f64,
    pub s: f64,
    pub l0: f64,
    pub a: f64,
    pub b: f64,
}

/// Covariates of the simulated design: a constant plus five skew-normal columns.
const SIMULATED_P: usize = 6;

pub fn resolve(map: Map<String, Value>) -> anyhow::Result<VarselSpec> {
    let mut r = FieldReader::new(map);
    let data = data_path(&mut r);
    let mut columns: Vec<String> =
        std::iter::once("const".to_string()).chain((2..=SIMULATED_P).map(|j| format!("x{j}"))).collect();
    let dataset = match &data {
        Some(p) => match read_regression_csv(p).map_err(anyhow::Error::from).and_then(|raw| {
            let names = raw.names.clone();
            Ok((standardize_dataset(&raw.x, &raw.y, Some(&raw.names))?, names))
        }) {
            Ok((d, names)) => {
                columns = std::iter::once("const".to_string()).chain(names).collect();
                Some(d)
            }
            Err(e) => {
                r.error("data", format!("{}: {e:#}", p.display()));
                None
            }
        },
        None => None,
    };
    let defaults = CommonDefaults { alpha: vec![Alpha(50.0), Alpha(f64::INFINITY)], n: vec![10_000], replicates: 1 };
    let common = read_common(&mut r, defaults, dataset.as_ref().map(|d| d.n()), 1);
    let sweeps = r.get_or("sweeps", 20_000);
    let burnin = r.get_or("burnin", 2_000);
    check_sweeps(&mut r, sweeps, burnin);
    let p = dataset.as_ref().map_or(SIMULATED_P, |d| d.p());
    let d = VarselPriors::default_for(p);
    let priors = PriorValues {
        r: r.get_or("r", d.r),
        s: r.get_or("s", d.s),
        l0: r.get_or("l0", d.l0),
        a: r.get_or("a", d.a),
        b: r.get_or("b", d.b),
    };
    for (key, v) in [("r", priors.r), ("s", priors.s), ("l0", priors.l0), ("a", priors.a), ("b", priors.b)] {
        check_positive(&mut r, key, v);
    }
    finish(r, VarselSpec { common, sweeps, burnin, priors, data, columns, dataset })
}

impl VarselSpec {
    fn p(&self) -> usize {
        self.columns.len()
    }

    fn priors(&self) -> anyhow::Result<VarselPriors> {
        let v = self.priors;
        Ok(VarselPriors::new(v.r, v.s, v.l0, v.a, v.b)?)
    }
}

impl Driver for VarselSpec {
    fn kind(&self) -> &'static str {
        "varsel"
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
                    cells.push(Cell::new(3, c.seed, alpha, n, rep, 0));
                }
            }
        }
        cells
    }

    fn summary_columns(&self) -> Vec<String> {
        let p = self.p();
        let mut cols = vec!["k_mode".to_string()];
        cols.extend((0..=p).map(|k| format!("p_k{k}")));
        cols.extend((1..=p).map(|j| format!("incl_{j}")));
        for j in 1..=p {
            cols.extend(["q025", "q50", "q975"].map(|q| format!("beta{j}_{q}")));
        }
        cols
    }

    fn run_cell(&self, cell: &Cell, save_traces: bool) -> anyhow::Result<CellOutput> {
        let data = match &self.dataset {
            Some(d) => d.clone(),
            None => generate_varsel_data(cell.n, &mut cell.data_rng())?,
        };
        let cfg = cell.alpha.config()?;
        let trace = run_chain(&data, &self.priors()?, &cfg, self.sweeps, self.burnin, cell.chain_rng())?;
        let s = trace_summaries(&trace, None)?;
        let mode = s.k_pmf.iter().enumerate().fold(0, |best, (k, &v)| if v > s.k_pmf[best] { k } else { best });
        let mut summary: Vec<Field> = vec![mode.into()];
        summary.extend(s.k_pmf.iter().map(|&v| v.into()));
        summary.extend(s.inclusion.iter().map(|&v| v.into()));
        for q in &s.quantiles {
            summary.extend(q.iter().map(|&v| v.into()));
        }
        let mut files = Vec::new();
        if save_traces {
            let mut cols = vec!["sweep".to_string(), "lambda".to_string()];
            cols.extend((1..=data.p()).map(|j| format!("beta{j}")));
            let mut t = Table::new(cols);
            for (i, st) in trace.states().iter().enumerate() {
                let mut row: Vec<Field> = vec![(trace.burnin() + i + 1).into(), st.lambda.into()];
                row.extend(st.beta.iter().map(|&b| b.into()));
                t.push(row);
            }
            files.push((format!("traces/{}", cell.id()), t));
        }
        Ok(CellOutput { summary, raw: Vec::new(), files })
    }

    fn spec(&self) -> Value {
        serde_json::to_value(self).expect("spec serializes")
    }
}
