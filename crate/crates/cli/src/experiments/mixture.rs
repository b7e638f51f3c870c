//! Gaussian mixtures with an unknown number of components.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use cposterior::io::read_univariate_csv;
use cposterior::mixture::{
    data_dependent_priors, density_overlay, generate_skew_mixture, posterior_on_k, run_chain_with_rates, MixturePriors,
    StepSizes,
};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{check_sweeps, data_path, finish, read_common, Alpha, Common, CommonDefaults, FieldReader};
use crate::output::{Field, Table};
use crate::runner::{linspace, Cell, CellOutput, Driver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PriorChoice {
    /// μ ~ N(0, 5²), log λ ~ N(0, 2²).
    Default,
    /// Centred and scaled on the data.
    Data,
}

#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct MixtureFields {
    /// Maximum number of components.
    #[arg(long)]
    pub m: Option<usize>,
    /// Total MH sweeps per chain.
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Sweeps discarded before recording.
    #[arg(long)]
    pub burnin: Option<usize>,
    /// Random-walk sd for μ.
    #[arg(long)]
    pub step_mu: Option<f64>,
    /// Random-walk sd for log λ.
    #[arg(long)]
    pub step_log_lambda: Option<f64>,
    /// Random-walk sd for log v.
    #[arg(long)]
    pub step_log_v: Option<f64>,
    /// Prior family for the component parameters.
    #[arg(long, value_enum)]
    pub priors: Option<PriorChoice>,
    /// Univariate CSV (header `x`) used instead of simulated data.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Post-burn-in state indices to export as density overlays.
    #[arg(long, value_delimiter = ',')]
    pub overlay_states: Option<Vec<usize>>,
    /// Overlay grid range `lo,hi` (default: data range padded by 10%).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub overlay_range: Option<Vec<f64>>,
    /// Number of overlay grid points.
    #[arg(long)]
    pub overlay_points: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixtureSpec {
    #[serde(flatten)]
    pub common: Common,
    pub m: usize,
    pub sweeps: usize,
    pub burnin: usize,
    pub steps: StepValues,
    pub priors: PriorChoice,
    pub data: Option<PathBuf>,
    pub overlay_states: Vec<usize>,
    pub overlay_range: Option<[f64; 2]>,
    pub overlay_points: usize,
    #[serde(skip)]
    pub series: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepValues {
    pub mu: f64,
    pub log_lambda: f64,
    pub log_v: f64,
}

pub fn resolve(map: Map<String, Value>) -> anyhow::Result<MixtureSpec> {
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
    let defaults = CommonDefaults { alpha: vec![Alpha(100.0), Alpha(f64::INFINITY)], n: vec![2000], replicates: 1 };
    let common = read_common(&mut r, defaults, series.as_ref().map(|x| x.len()), 2);
    let m = r.get_or("m", 10);
    if m < 2 {
        r.error("m", format!("must be >= 2, got {m}"));
    }
    let sweeps = r.get_or("sweeps", 50_000);
    let burnin = r.get_or("burnin", 5_000);
    check_sweeps(&mut r, sweeps, burnin);
    let d = StepSizes::default();
    let steps = StepValues {
        mu: r.get_or("step_mu", d.mu),
        log_lambda: r.get_or("step_log_lambda", d.log_lambda),
        log_v: r.get_or("step_log_v", d.log_v),
    };
    for (key, v) in [("step_mu", steps.mu), ("step_log_lambda", steps.log_lambda), ("step_log_v", steps.log_v)] {
        if !(v >= 0.0) || !v.is_finite() {
            r.error(key, format!("must be finite and >= 0, got {v}"));
        }
    }
    let priors = r.get_or("priors", PriorChoice::Default);
    let overlay_states: Vec<usize> = r.get_or("overlay_states", Vec::new());
    if let Some(&bad) = overlay_states.iter().find(|&&i| sweeps > burnin && i >= sweeps - burnin) {
        r.error(
            "overlay_states",
            format!("index {bad} is beyond the {} recorded states", sweeps.saturating_sub(burnin)),
        );
    }
    let overlay_range = match r.get::<Vec<f64>>("overlay_range") {
        None => None,
        Some(v) if v.len() == 2 && v[0] < v[1] && v.iter().all(|x| x.is_finite()) => Some([v[0], v[1]]),
        Some(v) => {
            r.error("overlay_range", format!("needs two finite values lo < hi, got {v:?}"));
            None
        }
    };
    let overlay_points = r.get_or("overlay_points", 200);
    if overlay_points < 2 {
        r.error("overlay_points", "must be >= 2");
    }
    finish(
        r,
        MixtureSpec {
            common,
            m,
            sweeps,
            burnin,
            steps,
            priors,
            data,
            overlay_states,
            overlay_range,
            overlay_points,
            series,
        },
    )
}

impl Driver for MixtureSpec {
    fn kind(&self) -> &'static str {
        "mixture"
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
                    cells.push(Cell::new(4, c.seed, alpha, n, rep, 0));
                }
            }
        }
        cells
    }

    fn summary_columns(&self) -> Vec<String> {
        let mut cols = vec!["k_mode".to_string()];
        cols.extend((1..=self.m).map(|k| format!("p_k{k}")));
        cols.push("accept_mu_lambda".into());
        cols.push("accept_v".into());
        cols
    }

    fn run_cell(&self, cell: &Cell, save_traces: bool) -> anyhow::Result<CellOutput> {
        let x = match &self.series {
            Some(x) => x.clone(),
            None => generate_skew_mixture(cell.n, &mut cell.data_rng())?,
        };
        let priors = match self.priors {
            PriorChoice::Default => MixturePriors::default_for(self.m)?,
            PriorChoice::Data => data_dependent_priors(&x, self.m)?,
        };
        let steps = StepSizes::new(self.steps.mu, self.steps.log_lambda, self.steps.log_v)?;
        let cfg = cell.alpha.config()?;
        let (trace, rates) =
            run_chain_with_rates(&x, &priors, &cfg, self.sweeps, self.burnin, &steps, cell.chain_rng())?;
        let pk = posterior_on_k(&trace, priors.c)?;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let mut summary: Vec<Field> = vec![(pk.argmax() + 1).into()];
        summary.extend(pk.as_slice().iter().map(|&v| v.into()));
        summary.push(mean(&rates.mu_lambda).into());
        summary.push(mean(&rates.v).into());

        let mut files = Vec::new();
        if save_traces {
            let m = self.m;
            let mut cols = vec!["sweep".to_string(), "k".to_string()];
            for name in ["v", "mu", "lambda"] {
                cols.extend((1..=m).map(|i| format!("{name}{i}")));
            }
            let mut t = Table::new(cols);
            for (i, s) in trace.states().iter().enumerate() {
                let mut row: Vec<Field> = vec![(trace.burnin() + i + 1).into(), s.k(priors.c).into()];
                row.extend(s.v.iter().chain(&s.mu).chain(&s.lambda).map(|&v| Field::from(v)));
                t.push(row);
            }
            files.push((format!("traces/{}", cell.id()), t));
        }
        if !self.overlay_states.is_empty() {
            let [lo, hi] = self.overlay_range.unwrap_or_else(|| {
                let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let pad = 0.1 * (hi - lo).max(1e-9);
                [lo - pad, hi + pad]
            });
            let grid = linspace(lo, hi, self.overlay_points);
            for &idx in &self.overlay_states {
                let overlay = density_overlay(&trace.states()[idx], priors.c, &grid)?;
                let mut cols = vec!["x".to_string(), "density".to_string()];
                cols.extend((1..=self.m).map(|i| format!("component{i}")));
                let mut t = Table::new(cols);
                for (g, &xg) in grid.iter().enumerate() {
                    let mut row: Vec<Field> = vec![xg.into(), overlay.total[g].into()];
                    row.extend(overlay.components.iter().map(|c| Field::from(c[g])));
                    t.push(row);
                }
                files.push((format!("overlays/{}_state{idx}", cell.id()), t));
            }
        }
        Ok(CellOutput { summary, raw: Vec::new(), files })
    }

    fn spec(&self) -> Value {
        serde_json::to_value(self).expect("spec serializes")
    }
}
