//! Univariate Gaussian mixture with a prior on the number of components,
//! sampled from its power posterior by random-walk Metropolis–Hastings.
//!
//! Up to `m` components are kept. Component `i` has raw weight
//! `g(v_i) = max(v_i − c, 0)`, so it is switched off when `v_i ≤ c`, and the
//! mixture weights are `w_i = g(v_i) / Σ_l g(v_l)`. With `v_i ~ Ga(a, b)`
//! conditioned on at least one active component, the number of active
//! components `k` has prior `Binomial(k | m, p) 1(k > 0)` with `p = Pr(v_i > c)`.
//!
//! The sampler targets the density over `(v, μ, log λ)`:
//!
//! ```text
//! Π_i Ga(v_i | a, b) N(μ_i | μ₀, σ_μ²) N(log λ_i | m_λ, σ_λ²) · Π_j (Σ_i w_i N(x_j | μ_i, 1/λ_i))^ζ
//! ```
//!
//! A sweep proposes a joint Gaussian step on `(μ_i, log λ_i)` for every `i`,
//! then a Gaussian step on `log v_i` for every `i` (with the `v_i′/v_i`
//! Jacobian). Moves on inactive components leave the likelihood unchanged
//! and cost `O(1)`; moves on active ones cost `O(n k)`.

use crate::coarsening::CoarseningConfig;
use crate::coarsening::SimplexVector;
use crate::error::{domain, Error, Result};
use crate::mathcore::{
    binomial_ln_pmf, gamma_ln_pdf, gamma_quantile, log_sum_exp, normal_ln_pdf, sample_gamma, sample_normal,
    sample_standard_normal, sample_unit, RandomSource, SkewNormal,
};
use crate::trace::{check_sweeps, ChainTrace};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixturePriors {
    /// Maximum number of components.
    pub m: usize,
    /// Shape and rate of the `v_i` prior.
    pub a: f64,
    pub b: f64,
    /// Activation threshold on `v_i`.
    pub c: f64,
    pub mu_mean: f64,
    pub mu_sd: f64,
    pub log_lambda_mean: f64,
    pub log_lambda_sd: f64,
}

impl MixturePriors {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: usize,
        a: f64,
        b: f64,
        c: f64,
        mu_mean: f64,
        mu_sd: f64,
        log_lambda_mean: f64,
        log_lambda_sd: f64,
    ) -> Result<Self> {
        if m == 0 {
            return domain("mixture needs m >= 1 components");
        }
        for (name, v) in [("a", a), ("b", b), ("c", c), ("mu_sd", mu_sd), ("log_lambda_sd", log_lambda_sd)] {
            if !(v > 0.0) || !v.is_finite() {
                return domain(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if !mu_mean.is_finite() || !log_lambda_mean.is_finite() {
            return domain("prior means must be finite");
        }
        Ok(Self { m, a, b, c, mu_mean, mu_sd, log_lambda_mean, log_lambda_sd })
    }

    /// `a = 1/m`, `b = 1`, `c` with `Pr(v_i > c) = 1/m`, `μ_i ~ N(0, 5²)`,
    /// `log λ_i ~ N(0, 2²)`.
    pub fn default_for(m: usize) -> Result<Self> {
        let (a, c) = sparse_weight_prior(m)?;
        Self::new(m, a, 1.0, c, 0.0, 5.0, 0.0, 2.0)
    }

    /// Prior probability that a given component is active.
    pub fn inclusion_probability(&self) -> f64 {
        crate::mathcore::regularized_gamma_q(self.a, self.b * self.c).expect("validated gamma parameters")
    }
}

/// `(a, c)` with `a = 1/m`, `b = 1` and `Pr(v > c) = 1/m`.
fn sparse_weight_prior(m: usize) -> Result<(f64, f64)> {
    if m < 2 {
        return domain(format!("inclusion probability 1/m needs m >= 2, got {m}"));
    }
    let a = 1.0 / m as f64;
    Ok((a, threshold_from_inclusion(a, 1.0, a)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureState {
    pub v: Vec<f64>,
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl MixtureState {
    /// Number of active components, `#{i : v_i > c}`.
    pub fn k(&self, c: f64) -> usize {
        self.v.iter().filter(|&&v| v > c).count()
    }

    pub fn weights(&self, c: f64) -> Result<Vec<f64>> {
        weights_from_v(&self.v, c)
    }

    fn check(&self, m: usize) -> Result<()> {
        for len in [self.v.len(), self.mu.len(), self.lambda.len()] {
            if len != m {
                return Err(Error::Shape { expected: m, found: len });
            }
        }
        if self.lambda.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return domain("component precisions must be finite and > 0");
        }
        Ok(())
    }
}

/// `w_i = g(v_i) / Σ g(v_l)` with `g(v) = max(v − c, 0)`.
pub fn weights_from_v(v: &[f64], c: f64) -> Result<Vec<f64>> {
    let g: Vec<f64> = v.iter().map(|&vi| (vi - c).max(0.0)).collect();
    let total: f64 = g.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Constraint(format!("no v_i exceeds the threshold c = {c}")));
    }
    Ok(g.into_iter().map(|gi| gi / total).collect())
}

/// The threshold `c` with `Pr(v > c) = p` for `v ~ Ga(a, b)`.
pub fn threshold_from_inclusion(a: f64, b: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("inclusion probability must lie in (0, 1), got {p}"));
    }
    gamma_quantile(a, b, 1.0 - p)
}

/// `π(k) ∝ Binomial(k | m, p)` on `k = 1..=m`; entry `i` is `k = i + 1`.
pub fn induced_prior_on_k(m: usize, p: f64) -> Result<SimplexVector> {
    if m == 0 {
        return domain("m must be >= 1");
    }
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("inclusion probability must lie in (0, 1), got {p}"));
    }
    let log_w: Vec<f64> = (1..=m as u64).map(|k| binomial_ln_pmf(k, m as u64, p)).collect();
    SimplexVector::from_log_weights(&log_w)
}

fn component_ln_pdf(x: f64, mu: f64, log_lambda: f64) -> f64 {
    let d = x - mu;
    -0.5 * log_lambda.exp() * d * d + 0.5 * log_lambda - LN_SQRT_2PI
}

fn log_prior(state: &MixtureState, priors: &MixturePriors) -> f64 {
    (0..state.v.len())
        .map(|i| {
            gamma_ln_pdf(state.v[i], priors.a, priors.b)
                + normal_ln_pdf(state.mu[i], priors.mu_mean, priors.mu_sd)
                + normal_ln_pdf(state.lambda[i].ln(), priors.log_lambda_mean, priors.log_lambda_sd)
        })
        .sum()
}

/// Unnormalized log power-posterior density over `(v, μ, log λ)`; `−∞` when
/// no component is active. Evaluated directly from its definition.
pub fn log_power_posterior_density(
    state: &MixtureState,
    data: &[f64],
    priors: &MixturePriors,
    zeta: f64,
) -> Result<f64> {
    state.check(priors.m)?;
    if data.is_empty() {
        return domain("mixture data must be non-empty");
    }
    let weights = match weights_from_v(&state.v, priors.c) {
        Ok(w) => w,
        Err(_) => return Ok(f64::NEG_INFINITY),
    };
    let prior = log_prior(state, priors);
    if zeta == 0.0 {
        return Ok(prior);
    }
    let active: Vec<usize> = (0..priors.m).filter(|&i| weights[i] > 0.0).collect();
    let mut terms = vec![0.0; active.len()];
    let mut log_lik = 0.0;
    for &x in data {
        for (t, &i) in terms.iter_mut().zip(&active) {
            *t = weights[i].ln() + component_ln_pdf(x, state.mu[i], state.lambda[i].ln());
        }
        log_lik += log_sum_exp(&terms);
    }
    Ok(prior + zeta * log_lik)
}

/// Proposal standard deviations of the random walks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSizes {
    pub mu: f64,
    pub log_lambda: f64,
    pub log_v: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        Self { mu: 0.2, log_lambda: 0.2, log_v: 0.3 }
    }
}

impl StepSizes {
    pub fn new(mu: f64, log_lambda: f64, log_v: f64) -> Result<Self> {
        for v in [mu, log_lambda, log_v] {
            if !(v >= 0.0) || !v.is_finite() {
                return domain(format!("step sizes must be finite and >= 0, got {v}"));
            }
        }
        Ok(Self { mu, log_lambda, log_v })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    MuLambda,
    V,
}

/// One recorded MH proposal.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub kind: MoveKind,
    pub component: usize,
    pub current: MixtureState,
    pub proposed: MixtureState,
    /// Log Jacobian of the proposal (`log v′ − log v` for v-moves, else 0).
    pub log_jacobian: f64,
    pub accept_prob: f64,
    pub accepted: bool,
}

/// Acceptance flags of one sweep, per component.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepAcceptance {
    pub mu_lambda: Vec<bool>,
    pub v: Vec<bool>,
}

/// Sampler state with a per-point cache of the component densities.
///
/// For each data point `j` there is a reference level `r_j`, and for each
/// active component `l` the cache holds `e[l][j] = exp(ℓ_lj − r_j)` where
/// `ℓ_lj = ln N(x_j | μ_l, 1/λ_l)`. A proposal on component `i` rebuilds the
/// sum over the other active components from the cache and adds the new term,
/// so nothing is ever subtracted. Points whose sum leaves the safe range are
/// evaluated exactly in log space and get a fresh reference on acceptance.
struct Sampler<'a> {
    x: &'a [f64],
    priors: &'a MixturePriors,
    zeta: f64,
    steps: StepSizes,
    state: MixtureState,
    log_lambda: Vec<f64>,
    g: Vec<f64>,
    e: Vec<Vec<f64>>,
    reference: Vec<f64>,
    /// `Σ_j ln Σ_l w_l N(x_j | μ_l, 1/λ_l)`, without the power.
    log_lik: f64,
    rest: Vec<f64>,
    new_row: Vec<f64>,
    flagged: Vec<usize>,
}

const SAFE_LO: f64 = 1e-280;
const SAFE_HI: f64 = 1e280;

impl<'a> Sampler<'a> {
    fn new(state: MixtureState, x: &'a [f64], priors: &'a MixturePriors, zeta: f64, steps: StepSizes) -> Result<Self> {
        state.check(priors.m)?;
        if x.is_empty() {
            return domain("mixture data must be non-empty");
        }
        if !(0.0..=1.0).contains(&zeta) {
            return domain(format!("zeta must lie in [0, 1], got {zeta}"));
        }
        weights_from_v(&state.v, priors.c)?;
        let m = priors.m;
        let n = x.len();
        let g = state.v.iter().map(|&v| (v - priors.c).max(0.0)).collect();
        let log_lambda = state.lambda.iter().map(|l| l.ln()).collect();
        let mut s = Self {
            x,
            priors,
            zeta,
            steps,
            state,
            log_lambda,
            g,
            e: vec![Vec::new(); m],
            reference: vec![0.0; n],
            log_lik: 0.0,
            rest: vec![0.0; n],
            new_row: vec![0.0; n],
            flagged: Vec::new(),
        };
        if s.uses_likelihood() {
            for l in 0..m {
                s.e[l] = vec![0.0; n];
            }
            for j in 0..n {
                s.rereference(j);
            }
            s.log_lik = s.full_log_lik();
        }
        Ok(s)
    }

    fn uses_likelihood(&self) -> bool {
        self.zeta > 0.0
    }

    fn g_total(&self) -> f64 {
        self.g.iter().sum()
    }

    fn rereference(&mut self, j: usize) {
        let xj = self.x[j];
        let mut top = f64::NEG_INFINITY;
        for l in 0..self.g.len() {
            if self.g[l] > 0.0 {
                top = top.max(component_ln_pdf(xj, self.state.mu[l], self.log_lambda[l]));
            }
        }
        self.reference[j] = top;
        for l in 0..self.g.len() {
            if self.g[l] > 0.0 {
                self.e[l][j] = (component_ln_pdf(xj, self.state.mu[l], self.log_lambda[l]) - top).exp();
            }
        }
    }

    fn full_log_lik(&self) -> f64 {
        let mut total = 0.0;
        for j in 0..self.x.len() {
            let s: f64 = (0..self.g.len()).filter(|&l| self.g[l] > 0.0).map(|l| self.g[l] * self.e[l][j]).sum();
            total += s.ln() + self.reference[j];
        }
        total - self.x.len() as f64 * self.g_total().ln()
    }

    /// Exact `ln Σ_l g_l N(x_j | ·)` with component `i` replaced by `(g_i, μ_i, log λ_i)`.
    fn exact_point(&self, j: usize, i: usize, gi: f64, mu_i: f64, ll_i: f64) -> f64 {
        let xj = self.x[j];
        let mut terms = Vec::with_capacity(self.g.len());
        for l in 0..self.g.len() {
            let (gl, mu, ll) =
                if l == i { (gi, mu_i, ll_i) } else { (self.g[l], self.state.mu[l], self.log_lambda[l]) };
            if gl > 0.0 {
                terms.push(gl.ln() + component_ln_pdf(xj, mu, ll));
            }
        }
        log_sum_exp(&terms)
    }

    /// Log-likelihood with component `i` set to `(g_i, μ_i, log λ_i)`.
    /// When `fresh_row` is set the cache row for `i` is recomputed into
    /// `new_row`; otherwise the existing row is used. Marks out-of-range
    /// points in `flagged`.
    fn proposal_log_lik(&mut self, i: usize, gi: f64, mu_i: f64, ll_i: f64, fresh_row: bool) -> f64 {
        let n = self.x.len();
        self.flagged.clear();
        self.rest.iter_mut().for_each(|r| *r = 0.0);
        for l in 0..self.g.len() {
            if l != i && self.g[l] > 0.0 {
                let gl = self.g[l];
                for (r, e) in self.rest.iter_mut().zip(&self.e[l]) {
                    *r += gl * e;
                }
            }
        }
        if gi > 0.0 && fresh_row {
            let lam = ll_i.exp();
            let half = 0.5 * ll_i - LN_SQRT_2PI;
            for j in 0..n {
                let d = self.x[j] - mu_i;
                self.new_row[j] = (-0.5 * lam * d * d + half - self.reference[j]).exp();
            }
        }
        let g_total: f64 = (0..self.g.len()).map(|l| if l == i { gi } else { self.g[l] }).sum();
        let mut total = 0.0;
        for j in 0..n {
            let s = if gi > 0.0 {
                let e = if fresh_row { self.new_row[j] } else { self.e[i][j] };
                self.rest[j] + gi * e
            } else {
                self.rest[j]
            };
            if s > SAFE_LO && s < SAFE_HI {
                total += s.ln() + self.reference[j];
            } else {
                self.flagged.push(j);
                total += self.exact_point(j, i, gi, mu_i, ll_i);
            }
        }
        total - n as f64 * g_total.ln()
    }

    fn accept_cache(&mut self, i: usize, fresh_row: bool, log_lik: f64) {
        if fresh_row {
            std::mem::swap(&mut self.e[i], &mut self.new_row);
        }
        self.log_lik = log_lik;
        let flagged = std::mem::take(&mut self.flagged);
        for &j in &flagged {
            self.rereference(j);
        }
        self.flagged = flagged;
    }

    fn move_mu_lambda(&mut self, i: usize, rng: &mut RandomSource, log: Option<&mut Vec<Transition>>) -> bool {
        let p = self.priors;
        let mu = self.state.mu[i];
        let ll = self.log_lambda[i];
        let mu_new = mu + self.steps.mu * sample_standard_normal(rng);
        let ll_new = ll + self.steps.log_lambda * sample_standard_normal(rng);
        let u = sample_unit(rng);
        let lam_new = if ll_new == ll { self.state.lambda[i] } else { ll_new.exp() };

        let mut log_ratio = if lam_new > 0.0 && lam_new.is_finite() {
            normal_ln_pdf(mu_new, p.mu_mean, p.mu_sd) - normal_ln_pdf(mu, p.mu_mean, p.mu_sd)
                + normal_ln_pdf(ll_new, p.log_lambda_mean, p.log_lambda_sd)
                - normal_ln_pdf(ll, p.log_lambda_mean, p.log_lambda_sd)
        } else {
            f64::NEG_INFINITY
        };
        let active = self.g[i] > 0.0;
        let mut new_log_lik = self.log_lik;
        if active && self.uses_likelihood() && log_ratio > f64::NEG_INFINITY {
            new_log_lik = self.proposal_log_lik(i, self.g[i], mu_new, ll_new, true);
            log_ratio += self.zeta * (new_log_lik - self.log_lik);
        }
        let accepted = u.ln() < log_ratio;
        if let Some(log) = log {
            let mut proposed = self.state.clone();
            proposed.mu[i] = mu_new;
            proposed.lambda[i] = lam_new;
            log.push(Transition {
                kind: MoveKind::MuLambda,
                component: i,
                current: self.state.clone(),
                proposed,
                log_jacobian: 0.0,
                accept_prob: log_ratio.exp().min(1.0),
                accepted,
            });
        }
        if accepted {
            self.state.mu[i] = mu_new;
            self.state.lambda[i] = lam_new;
            self.log_lambda[i] = ll_new;
            if active && self.uses_likelihood() {
                self.accept_cache(i, true, new_log_lik);
            }
        }
        accepted
    }

    fn move_v(&mut self, i: usize, rng: &mut RandomSource, log: Option<&mut Vec<Transition>>) -> bool {
        let p = self.priors;
        let v = self.state.v[i];
        let log_v_new = v.ln() + self.steps.log_v * sample_standard_normal(rng);
        let u = sample_unit(rng);
        let v_new = if log_v_new == v.ln() { v } else { log_v_new.exp() };
        let g_new = (v_new - p.c).max(0.0);
        let log_jacobian = log_v_new - v.ln();

        let others: f64 = (0..self.g.len()).filter(|&l| l != i).map(|l| self.g[l]).sum();
        let mut log_ratio = if v_new > 0.0 && v_new.is_finite() && others + g_new > 0.0 {
            gamma_ln_pdf(v_new, p.a, p.b) - gamma_ln_pdf(v, p.a, p.b) + log_jacobian
        } else {
            f64::NEG_INFINITY
        };
        let was_active = self.g[i] > 0.0;
        let touches_lik = (was_active || g_new > 0.0) && self.uses_likelihood();
        let fresh_row = !was_active && g_new > 0.0;
        let mut new_log_lik = self.log_lik;
        if touches_lik && log_ratio > f64::NEG_INFINITY {
            new_log_lik = self.proposal_log_lik(i, g_new, self.state.mu[i], self.log_lambda[i], fresh_row);
            log_ratio += self.zeta * (new_log_lik - self.log_lik);
        }
        let accepted = u.ln() < log_ratio;
        if let Some(log) = log {
            let mut proposed = self.state.clone();
            proposed.v[i] = v_new;
            log.push(Transition {
                kind: MoveKind::V,
                component: i,
                current: self.state.clone(),
                proposed,
                log_jacobian,
                accept_prob: log_ratio.exp().min(1.0),
                accepted,
            });
        }
        if accepted {
            self.state.v[i] = v_new;
            self.g[i] = g_new;
            if touches_lik {
                if fresh_row && self.e[i].len() != self.x.len() {
                    self.e[i] = vec![0.0; self.x.len()];
                }
                self.accept_cache(i, fresh_row, new_log_lik);
            }
        }
        accepted
    }

    fn sweep(&mut self, rng: &mut RandomSource, mut log: Option<&mut Vec<Transition>>) -> SweepAcceptance {
        let m = self.priors.m;
        let mu_lambda = (0..m).map(|i| self.move_mu_lambda(i, rng, log.as_deref_mut())).collect();
        let v = (0..m).map(|i| self.move_v(i, rng, log.as_deref_mut())).collect();
        SweepAcceptance { mu_lambda, v }
    }
}

/// One MH sweep from `state`.
pub fn mh_sweep(
    state: &MixtureState,
    data: &[f64],
    priors: &MixturePriors,
    zeta: f64,
    steps: &StepSizes,
    rng: &mut RandomSource,
) -> Result<(MixtureState, SweepAcceptance)> {
    let mut sampler = Sampler::new(state.clone(), data, priors, zeta, *steps)?;
    let flags = sampler.sweep(rng, None);
    Ok((sampler.state, flags))
}

/// As [`mh_sweep`], also returning every proposal with its acceptance probability.
pub fn mh_sweep_logged(
    state: &MixtureState,
    data: &[f64],
    priors: &MixturePriors,
    zeta: f64,
    steps: &StepSizes,
    rng: &mut RandomSource,
) -> Result<(MixtureState, SweepAcceptance, Vec<Transition>)> {
    let mut sampler = Sampler::new(state.clone(), data, priors, zeta, *steps)?;
    let mut log = Vec::with_capacity(2 * priors.m);
    let flags = sampler.sweep(rng, Some(&mut log));
    Ok((sampler.state, flags, log))
}

/// Draws `v`, `μ`, `λ` from the prior, redrawing `v` until a component is active.
pub fn sample_prior(priors: &MixturePriors, rng: &mut RandomSource) -> MixtureState {
    let m = priors.m;
    let v = loop {
        let v: Vec<f64> = (0..m).map(|_| sample_gamma(rng, priors.a, priors.b)).collect();
        if v.iter().any(|&vi| vi > priors.c) {
            break v;
        }
    };
    let mu = (0..m).map(|_| sample_normal(rng, priors.mu_mean, priors.mu_sd)).collect();
    let lambda = (0..m).map(|_| sample_normal(rng, priors.log_lambda_mean, priors.log_lambda_sd).exp()).collect();
    MixtureState { v, mu, lambda }
}

/// Acceptance rates of a chain, per component.
#[derive(Clone, Debug, PartialEq)]
pub struct AcceptanceRates {
    pub mu_lambda: Vec<f64>,
    pub v: Vec<f64>,
}

/// Runs a chain from a prior draw, keeping the states after `burnin`.
pub fn run_chain(
    data: &[f64],
    priors: &MixturePriors,
    cfg: &CoarseningConfig,
    sweeps: usize,
    burnin: usize,
    steps: &StepSizes,
    rng: RandomSource,
) -> Result<ChainTrace<MixtureState>> {
    run_chain_with_rates(data, priors, cfg, sweeps, burnin, steps, rng).map(|(t, _)| t)
}

/// As [`run_chain`], also reporting post-burn-in acceptance rates.
pub fn run_chain_with_rates(
    data: &[f64],
    priors: &MixturePriors,
    cfg: &CoarseningConfig,
    sweeps: usize,
    burnin: usize,
    steps: &StepSizes,
    mut rng: RandomSource,
) -> Result<(ChainTrace<MixtureState>, AcceptanceRates)> {
    check_sweeps(sweeps, burnin)?;
    let (seed, stream) = (rng.seed(), rng.stream());
    let init = sample_prior(priors, &mut rng);
    let zeta = cfg.zeta(data.len());
    let mut sampler = Sampler::new(init, data, priors, zeta, *steps)?;
    let m = priors.m;
    let mut counts = (vec![0usize; m], vec![0usize; m]);
    let mut states = Vec::with_capacity(sweeps - burnin);
    for sweep in 0..sweeps {
        let flags = sampler.sweep(&mut rng, None);
        if sweep >= burnin {
            for i in 0..m {
                counts.0[i] += flags.mu_lambda[i] as usize;
                counts.1[i] += flags.v[i] as usize;
            }
            states.push(sampler.state.clone());
        }
    }
    let kept = (sweeps - burnin) as f64;
    let rates = AcceptanceRates {
        mu_lambda: counts.0.iter().map(|&c| c as f64 / kept).collect(),
        v: counts.1.iter().map(|&c| c as f64 / kept).collect(),
    };
    Ok((ChainTrace::new(states, burnin, sweeps, seed, stream)?, rates))
}

/// Empirical pmf of `k` over `1..=m` (entry `i` is `k = i + 1`).
pub fn posterior_on_k(trace: &ChainTrace<MixtureState>, c: f64) -> Result<SimplexVector> {
    let states = trace.states();
    if states.is_empty() {
        return Err(Error::Usage("cannot summarize an empty trace".into()));
    }
    let m = states[0].v.len();
    let mut counts = vec![0.0; m];
    for s in states {
        let k = s.k(c);
        if k == 0 {
            return Err(Error::Constraint("trace contains a state with no active component".into()));
        }
        counts[k - 1] += 1.0;
    }
    SimplexVector::from_unnormalized(counts)
}

/// Location, scale and shape of one skew-normal mixture component.
pub type SkewComponent = (f64, f64, f64);

/// The two equally weighted components `SN(−4, 1, 5)` and `SN(−1, 2, 5)`.
pub const SKEW_MIXTURE_COMPONENTS: [SkewComponent; 2] = [(-4.0, 1.0, 5.0), (-1.0, 2.0, 5.0)];

/// `n` draws from `½ SN(−4, 1, 5) + ½ SN(−1, 2, 5)`.
pub fn generate_skew_mixture(n: usize, rng: &mut RandomSource) -> Result<Vec<f64>> {
    generate_skew_mixture_with(n, &SKEW_MIXTURE_COMPONENTS, rng)
}

/// `n` draws from an equal-weight mixture of two skew-normals.
pub fn generate_skew_mixture_with(
    n: usize,
    components: &[SkewComponent; 2],
    rng: &mut RandomSource,
) -> Result<Vec<f64>> {
    if n == 0 {
        return domain("sample size must be >= 1");
    }
    let dists = [
        SkewNormal::new(components[0].0, components[0].1, components[0].2)?,
        SkewNormal::new(components[1].0, components[1].1, components[1].2)?,
    ];
    Ok((0..n)
        .map(|_| {
            let pick = (sample_unit(rng) >= 0.5) as usize;
            dists[pick].sample(rng)
        })
        .collect())
}

/// Priors centred on the data: `μ_i ~ N(x̄, σ̂²)`, `log λ_i ~ N(log(4/σ̂²), 2²)`,
/// `a = 1/m`, `b = 1`, `Pr(v_i > c) = 1/m`. `σ̂` uses divisor `n − 1`.
pub fn data_dependent_priors(x: &[f64], m: usize) -> Result<MixturePriors> {
    if x.len() < 2 {
        return domain("data-dependent priors need at least two observations");
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) || !var.is_finite() {
        return domain("data-dependent priors need non-constant, finite data");
    }
    let (a, c) = sparse_weight_prior(m)?;
    MixturePriors::new(m, a, 1.0, c, mean, var.sqrt(), (4.0 / var).ln(), 2.0)
}

/// Mixture density and weighted component densities on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOverlay {
    pub grid: Vec<f64>,
    pub total: Vec<f64>,
    /// `components[i][g] = w_i N(grid[g] | μ_i, 1/λ_i)`; zero for inactive components.
    pub components: Vec<Vec<f64>>,
}

pub fn density_overlay(state: &MixtureState, c: f64, grid: &[f64]) -> Result<DensityOverlay> {
    let w = weights_from_v(&state.v, c)?;
    let components: Vec<Vec<f64>> =
        (0..w.len())
            .map(|i| {
                grid.iter()
                    .map(|&x| {
                        if w[i] > 0.0 {
                            w[i] * component_ln_pdf(x, state.mu[i], state.lambda[i].ln()).exp()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
    let total = (0..grid.len()).map(|g| components.iter().map(|c| c[g]).sum()).collect();
    Ok(DensityOverlay { grid: grid.to_vec(), total, components })
}
