//! Spike-and-slab linear regression under a power likelihood.
//!
//! Model: `W ~ Beta(r, s)`; each `β_j ~ N(0, 1/L₀)` with probability `W`,
//! otherwise `β_j = 0`; `λ ~ Ga(a, b)`; `y_i | β, λ ~ N(βᵀx_i, 1/λ)`. With `W`
//! integrated out, the target is `π(β, λ) p(y | β, λ)^ζ` and both full
//! conditionals stay in closed form. Exact zeros in `β` encode exclusion.
//!
//! The sampler keeps the residual vector `y − Xβ` up to date, so updating one
//! coefficient costs `O(n)`.

use nalgebra::{DMatrix, DVector};

use crate::coarsening::CoarseningConfig;
use crate::error::{domain, Error, Result};
use crate::mathcore::{sample_gamma, sample_standard_normal, sample_unit, MultivariateSkewNormal, RandomSource};
use crate::trace::{check_sweeps, empirical_cdf, quantile_sorted, ChainTrace};

/// Design matrix `X` (n×p) and targets `y` (n).
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionDataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl RegressionDataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return domain("regression data needs n >= 1 and p >= 1");
        }
        if x.nrows() != y.len() {
            return Err(Error::Shape { expected: x.nrows(), found: y.len() });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return domain("regression data contains non-finite values");
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.x.as_slice()[j * n..(j + 1) * n]
    }
}

/// Hyperparameters: `W ~ Beta(r, s)`, slab precision `l0`, `λ ~ Ga(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarselPriors {
    pub r: f64,
    pub s: f64,
    pub l0: f64,
    pub a: f64,
    pub b: f64,
}

impl VarselPriors {
    pub fn new(r: f64, s: f64, l0: f64, a: f64, b: f64) -> Result<Self> {
        for (name, v) in [("r", r), ("s", s), ("L0", l0), ("a", a), ("b", b)] {
            if !(v > 0.0) || !v.is_finite() {
                return domain(format!("prior hyperparameter {name} must be finite and > 0, got {v}"));
            }
        }
        Ok(Self { r, s, l0, a, b })
    }

    /// `r = 1, s = 2p, L₀ = 1, a = b = 1`, favouring O(1) nonzero coefficients
    /// whatever the number of covariates.
    pub fn default_for(p: usize) -> Self {
        Self { r: 1.0, s: 2.0 * p as f64, l0: 1.0, a: 1.0, b: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarselState {
    pub beta: Vec<f64>,
    pub lambda: f64,
}

impl VarselState {
    /// Number of nonzero coefficients.
    pub fn k(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }
}

fn check_inputs(state: &VarselState, data: &RegressionDataset, zeta: f64) -> Result<()> {
    if state.beta.len() != data.p() {
        return Err(Error::Shape { expected: data.p(), found: state.beta.len() });
    }
    if !(state.lambda > 0.0) || !state.lambda.is_finite() {
        return domain(format!("lambda must be finite and > 0, got {}", state.lambda));
    }
    if !(0.0..=1.0).contains(&zeta) {
        return domain(format!("zeta must lie in [0, 1], got {zeta}"));
    }
    Ok(())
}

fn residuals(beta: &[f64], data: &RegressionDataset) -> Vec<f64> {
    let mut r: Vec<f64> = data.y.as_slice().to_vec();
    for (j, &bj) in beta.iter().enumerate() {
        if bj != 0.0 {
            for (ri, xij) in r.iter_mut().zip(data.column(j)) {
                *ri -= bj * xij;
            }
        }
    }
    r
}

/// Shape and rate of `λ | β, y`: `(a + nζ/2, b + (ζ/2)·Σ(y_i − βᵀx_i)²)`.
pub fn lambda_conditional(
    state: &VarselState,
    data: &RegressionDataset,
    priors: &VarselPriors,
    zeta: f64,
) -> Result<(f64, f64)> {
    check_inputs(state, data, zeta)?;
    let rss: f64 = residuals(&state.beta, data).iter().map(|r| r * r).sum();
    Ok(lambda_params(rss, data.n(), priors, zeta))
}

fn lambda_params(rss: f64, n: usize, priors: &VarselPriors, zeta: f64) -> (f64, f64) {
    (priors.a + 0.5 * n as f64 * zeta, priors.b + 0.5 * zeta * rss)
}

/// Quantities of the `β_j` full conditional given the residual with `β_j`'s
/// own contribution still included.
struct CoefConditional {
    prob_zero: f64,
    mean: f64,
    precision: f64,
}

#[allow(clippy::too_many_arguments)]
fn coef_conditional(
    beta: &[f64],
    j: usize,
    resid: &[f64],
    col: &[f64],
    col_sq: f64,
    lambda: f64,
    priors: &VarselPriors,
    zeta: f64,
) -> CoefConditional {
    let others_nonzero = beta.iter().enumerate().filter(|&(l, b)| l != j && *b != 0.0).count() as f64;
    let others_zero = (beta.len() - 1) as f64 - others_nonzero;
    // δ = resid + β_j x_j, so Σ δ_i x_ij = Σ resid_i x_ij + β_j Σ x_ij².
    let rx: f64 = resid.iter().zip(col).map(|(r, x)| r * x).sum();
    let dx = rx + beta[j] * col_sq;
    let lz = lambda * zeta;
    let precision = priors.l0 + lz * col_sq;
    let mean = lz * dx / precision;
    let log_odds =
        0.5 * (priors.l0 / precision).ln() + 0.5 * precision * mean * mean + (priors.r + others_nonzero).ln()
            - (priors.s + others_zero).ln();
    CoefConditional { prob_zero: logistic(-log_odds), mean, precision }
}

/// `1 / (1 + exp(−t))` without overflow.
fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Probability that the Gibbs update sets `β_j = 0` (the spike), given all
/// other coefficients and `λ`.
pub fn beta_inclusion_probability(
    j: usize,
    state: &VarselState,
    data: &RegressionDataset,
    priors: &VarselPriors,
    zeta: f64,
) -> Result<f64> {
    check_inputs(state, data, zeta)?;
    if j >= data.p() {
        return domain(format!("coefficient index {j} out of range for p = {}", data.p()));
    }
    let resid = residuals(&state.beta, data);
    let col = data.column(j);
    let col_sq = col.iter().map(|x| x * x).sum();
    Ok(coef_conditional(&state.beta, j, &resid, col, col_sq, state.lambda, priors, zeta).prob_zero)
}

/// Reusable buffers for repeated sweeps over the same dataset.
struct Workspace {
    col_sq: Vec<f64>,
    resid: Vec<f64>,
}

impl Workspace {
    fn new(data: &RegressionDataset) -> Self {
        let col_sq = (0..data.p()).map(|j| data.column(j).iter().map(|x| x * x).sum()).collect();
        Self { col_sq, resid: Vec::new() }
    }
}

/// Scan `β_1..β_p` in order at fixed `λ`; `ws.resid` must equal `y − Xβ`.
fn update_coefficients(
    beta: &mut [f64],
    lambda: f64,
    data: &RegressionDataset,
    priors: &VarselPriors,
    zeta: f64,
    ws: &mut Workspace,
    rng: &mut RandomSource,
) {
    for j in 0..beta.len() {
        let col = data.column(j);
        let cond = coef_conditional(beta, j, &ws.resid, col, ws.col_sq[j], lambda, priors, zeta);
        let new = if sample_unit(rng) < cond.prob_zero {
            0.0
        } else {
            cond.mean + sample_standard_normal(rng) / cond.precision.sqrt()
        };
        let change = new - beta[j];
        if change != 0.0 {
            for (r, x) in ws.resid.iter_mut().zip(col) {
                *r -= change * x;
            }
        }
        beta[j] = new;
    }
}

fn sweep_in_place(
    state: &mut VarselState,
    data: &RegressionDataset,
    priors: &VarselPriors,
    zeta: f64,
    ws: &mut Workspace,
    rng: &mut RandomSource,
) {
    ws.resid = residuals(&state.beta, data);
    let rss: f64 = ws.resid.iter().map(|r| r * r).sum();
    let (shape, rate) = lambda_params(rss, data.n(), priors, zeta);
    state.lambda = sample_gamma(rng, shape, rate);
    update_coefficients(&mut state.beta, state.lambda, data, priors, zeta, ws, rng);
}

/// One Gibbs sweep: `λ`, then `β_1, …, β_p`.
pub fn gibbs_sweep(
    state: &VarselState,
    data: &RegressionDataset,
    priors: &VarselPriors,
    zeta: f64,
    rng: &mut RandomSource,
) -> Result<VarselState> {
    check_inputs(state, data, zeta)?;
    let mut next = state.clone();
    sweep_in_place(&mut next, data, priors, zeta, &mut Workspace::new(data), rng);
    Ok(next)
}

/// One scan of `β_1, …, β_p` with `λ` held at `state.lambda`.
pub fn beta_scan(
    state: &VarselState,
    data: &RegressionDataset,
    priors: &VarselPriors,
    zeta: f64,
    rng: &mut RandomSource,
) -> Result<VarselState> {
    check_inputs(state, data, zeta)?;
    let mut next = state.clone();
    let mut ws = Workspace::new(data);
    ws.resid = residuals(&next.beta, data);
    update_coefficients(&mut next.beta, next.lambda, data, priors, zeta, &mut ws, rng);
    Ok(next)
}

/// Runs a chain from `β = 0`, `λ = a/b`, keeping the sweeps after `burnin`.
pub fn run_chain(
    data: &RegressionDataset,
    priors: &VarselPriors,
    cfg: &CoarseningConfig,
    sweeps: usize,
    burnin: usize,
    rng: RandomSource,
) -> Result<ChainTrace<VarselState>> {
    let init = VarselState { beta: vec![0.0; data.p()], lambda: priors.a / priors.b };
    run_chain_from(init, data, priors, cfg, sweeps, burnin, rng)
}

/// As [`run_chain`] with an explicit initial state.
pub fn run_chain_from(
    init: VarselState,
    data: &RegressionDataset,
    priors: &VarselPriors,
    cfg: &CoarseningConfig,
    sweeps: usize,
    burnin: usize,
    mut rng: RandomSource,
) -> Result<ChainTrace<VarselState>> {
    check_sweeps(sweeps, burnin)?;
    let zeta = cfg.zeta(data.n());
    check_inputs(&init, data, zeta)?;
    let (seed, stream) = (rng.seed(), rng.stream());
    let mut ws = Workspace::new(data);
    let mut state = init;
    let mut states = Vec::with_capacity(sweeps - burnin);
    for sweep in 0..sweeps {
        sweep_in_place(&mut state, data, priors, zeta, &mut ws, &mut rng);
        if sweep >= burnin {
            states.push(state.clone());
        }
    }
    ChainTrace::new(states, burnin, sweeps, seed, stream)
}

/// A draw from the prior: `W ~ Beta(r, s)`, then spike/slab per coefficient, and `λ ~ Ga(a, b)`.
pub fn sample_prior(p: usize, priors: &VarselPriors, rng: &mut RandomSource) -> VarselState {
    let g1 = sample_gamma(rng, priors.r, 1.0);
    let g2 = sample_gamma(rng, priors.s, 1.0);
    let w = g1 / (g1 + g2);
    let beta = (0..p)
        .map(|_| if sample_unit(rng) < w { sample_standard_normal(rng) / priors.l0.sqrt() } else { 0.0 })
        .collect();
    VarselState { beta, lambda: sample_gamma(rng, priors.a, priors.b) }
}

/// Posterior summaries of a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct VarselSummary {
    /// Fraction of states with `β_j ≠ 0`.
    pub inclusion: Vec<f64>,
    /// Empirical pmf of the number of nonzero coefficients over `0..=p`.
    pub k_pmf: Vec<f64>,
    /// Type-7 quantiles at 0.025, 0.5 and 0.975 per coefficient.
    pub quantiles: Vec<[f64; 3]>,
    /// Grid on which the CDFs are evaluated.
    pub cdf_grid: Vec<f64>,
    /// `cdf[j][g]` = fraction of states with `β_j ≤ cdf_grid[g]`.
    pub cdf: Vec<Vec<f64>>,
}

pub const SUMMARY_QUANTILES: [f64; 3] = [0.025, 0.5, 0.975];

/// Summarizes a trace; `grid = None` uses 201 points spanning the sampled range.
pub fn trace_summaries(trace: &ChainTrace<VarselState>, grid: Option<&[f64]>) -> Result<VarselSummary> {
    let states = trace.states();
    if states.is_empty() {
        return Err(Error::Usage("cannot summarize an empty trace".into()));
    }
    let p = states[0].beta.len();
    let t = states.len() as f64;
    let mut k_pmf = vec![0.0; p + 1];
    for s in states {
        k_pmf[s.k()] += 1.0 / t;
    }
    let sorted: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut v: Vec<f64> = states.iter().map(|s| s.beta[j]).collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let inclusion = (0..p).map(|j| states.iter().filter(|s| s.beta[j] != 0.0).count() as f64 / t).collect();
    let quantiles = sorted.iter().map(|v| SUMMARY_QUANTILES.map(|q| quantile_sorted(v, q))).collect();
    let cdf_grid = match grid {
        Some(g) => g.to_vec(),
        None => {
            let lo = sorted.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = sorted.iter().map(|v| v[v.len() - 1]).fold(f64::NEG_INFINITY, f64::max);
            let width = (hi - lo).max(1e-12);
            (0..=200).map(|i| lo + width * i as f64 / 200.0).collect()
        }
    };
    let cdf = sorted.iter().map(|v| empirical_cdf(v, &cdf_grid)).collect();
    Ok(VarselSummary { inclusion, k_pmf, quantiles, cdf_grid, cdf })
}

/// Intercept and slope of the simulated mean function.
pub const VARSEL_TRUE_BETA: [f64; 2] = [-1.0, 4.0];

/// Shape vector of the covariate skew-normal.
pub const VARSEL_SHAPE: [f64; 5] = [0.6, 2.7, -3.3, -4.9, -2.5];

/// Scale matrix of the covariate skew-normal (strongly correlated covariates).
pub const VARSEL_OMEGA: [[f64; 5]; 5] = [
    [1.0, -0.89, 0.93, -0.91, 0.98],
    [-0.89, 1.0, -0.94, 0.97, -0.91],
    [0.93, -0.94, 1.0, -0.96, 0.97],
    [-0.91, 0.97, -0.96, 1.0, -0.93],
    [0.98, -0.91, 0.97, -0.93, 1.0],
];

/// The covariate distribution `SN₅(Ω, a)` used by [`generate_varsel_data`].
pub fn varsel_covariate_distribution() -> MultivariateSkewNormal {
    let omega = DMatrix::from_fn(5, 5, |i, j| VARSEL_OMEGA[i][j]);
    MultivariateSkewNormal::new(omega, DVector::from_row_slice(&VARSEL_SHAPE))
        .expect("covariate scale matrix is positive definite")
}

/// `n` rows with `x_1 = 1`, `x_2..x_6` standardized skew-normal covariates and
/// `y = −1 + 4(x_2 + x_2²/16) + ε`, `ε ~ N(0, 1)`.
pub fn generate_varsel_data(n: usize, rng: &mut RandomSource) -> Result<RegressionDataset> {
    if n == 0 {
        return domain("dataset size must be >= 1");
    }
    let dist = varsel_covariate_distribution();
    let mut x = DMatrix::zeros(n, 6);
    let mut y = DVector::zeros(n);
    let [b1, b2] = VARSEL_TRUE_BETA;
    for i in 0..n {
        let z = dist.sample_standardized(rng);
        x[(i, 0)] = 1.0;
        for j in 0..5 {
            x[(i, j + 1)] = z[j];
        }
        let x2 = z[0];
        y[i] = b1 + b2 * (x2 + x2 * x2 / 16.0) + sample_standard_normal(rng);
    }
    RegressionDataset::new(x, y)
}

/// Centers and scales each raw covariate and `y` by its sample mean and
/// standard deviation (divisor `n`), then prepends a constant column of ones.
/// `names`, when given, label the raw columns in error messages.
pub fn standardize_dataset(
    raw_x: &DMatrix<f64>,
    raw_y: &DVector<f64>,
    names: Option<&[String]>,
) -> Result<RegressionDataset> {
    let (n, p) = raw_x.shape();
    if n == 0 {
        return domain("dataset must have at least one row");
    }
    if raw_y.len() != n {
        return Err(Error::Shape { expected: n, found: raw_y.len() });
    }
    let label = |j: usize| match names.and_then(|v| v.get(j)) {
        Some(name) => format!("'{name}'"),
        None => format!("{}", j + 1),
    };
    let mut x = DMatrix::zeros(n, p + 1);
    x.column_mut(0).fill(1.0);
    for j in 0..p {
        let col = standardize(raw_x.column(j).iter().copied())
            .ok_or_else(|| Error::Domain(format!("covariate column {} has zero variance", label(j))))?;
        x.column_mut(j + 1).copy_from_slice(&col);
    }
    let y = standardize(raw_y.iter().copied()).ok_or_else(|| Error::Domain("target y has zero variance".into()))?;
    RegressionDataset::new(x, DVector::from_vec(y))
}

fn standardize(values: impl Iterator<Item = f64> + Clone) -> Option<Vec<f64>> {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.clone().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if !(sd > 0.0) || sd <= 1e-12 * mean.abs() {
        return None;
    }
    Some(values.map(|v| (v - mean) / sd).collect())
}

/// `α = 2σ²/δ²`: expected mean-function shift `±δ` under noise sd `σ`.
pub fn alpha_from_delta(sigma: f64, delta: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(delta > 0.0) || !sigma.is_finite() || !delta.is_finite() {
        return domain(format!("sigma and delta must be finite and > 0, got ({sigma}, {delta})"));
    }
    Ok(2.0 * sigma * sigma / (delta * delta))
}
