//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test -p cposterior --test acceptance -- 3 5`.

#![allow(clippy::needless_range_loop)]

#[path = "../src/testutil/quad.rs"]
#[allow(dead_code, unused_imports)]
mod quad;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use cposterior::arorder::{
    ar_suff_stats, cposterior_over_orders, generate_misspec_ar, log_coarsened_marginal, log_marginals_over_orders,
    ARModelSpec, MisspecArConfig,
};
use cposterior::coarsening::{
    asymptotic_reweight, chi_squared, mahalanobis_chi_squared, relative_entropy, small_sample_lhs_mc, small_sample_rhs,
    CoarseningConfig, SimplexVector,
};
use cposterior::conjugate::{
    log_marginal_power_likelihood, power_update, toy_approx_cposterior, toy_exact_cposterior, toy_standard_posterior,
    BernoulliBeta, NormalKnownVariance,
};
use cposterior::mathcore::{
    ln_beta, ln_gamma, normal_cdf, sample_gamma, sample_standard_normal, sample_unit, RandomSource,
};
use cposterior::mixture::{
    self, generate_skew_mixture, induced_prior_on_k, log_power_posterior_density, mh_sweep, posterior_on_k,
    MixturePriors, MixtureState, StepSizes,
};
use cposterior::varsel::{
    self, beta_inclusion_probability, beta_scan, generate_varsel_data, trace_summaries, RegressionDataset,
    VarselPriors, VarselState,
};
use nalgebra::{DMatrix, DVector};

const SEED: u64 = 7331;

/// Collects failed checks and informational notes for one criterion.
#[derive(Default)]
struct Report {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Report {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

struct Criterion {
    title: &'static str,
    budget: Duration,
    run: fn(&mut Report),
}

fn main() {
    let criteria = [
        Criterion { title: "toy Bernoulli c-posterior", budget: Duration::from_secs(60), run: criterion_1 },
        Criterion {
            title: "toy exact c-posterior vs rejection oracle",
            budget: Duration::from_secs(120),
            run: criterion_2,
        },
        Criterion { title: "AR order selection", budget: Duration::from_secs(60), run: criterion_3 },
        Criterion { title: "variable selection", budget: Duration::from_secs(600), run: criterion_4 },
        Criterion { title: "variable-selection kernel", budget: Duration::from_secs(120), run: criterion_5 },
        Criterion { title: "mixture number of components", budget: Duration::from_secs(1200), run: criterion_6 },
        Criterion { title: "mixture kernel", budget: Duration::from_secs(300), run: criterion_7 },
        Criterion {
            title: "divergence identities and small-sample correction",
            budget: Duration::from_secs(60),
            run: criterion_8,
        },
        Criterion {
            title: "alpha = inf reductions and determinism",
            budget: Duration::from_secs(300),
            run: criterion_9,
        },
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let number = i + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let mut report = Report::default();
        let start = Instant::now();
        (c.run)(&mut report);
        let elapsed = start.elapsed();
        report.check(
            elapsed <= c.budget,
            format!("runtime {:.1}s exceeds {}s", elapsed.as_secs_f64(), c.budget.as_secs()),
        );
        let status = if report.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {number}: {status} {} ({:.1}s)", c.title, elapsed.as_secs_f64());
        for n in &report.notes {
            println!("    {n}");
        }
        for f in &report.failures {
            println!("    failed: {f}");
        }
        if !report.failures.is_empty() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// Independent reference formulas.

fn ln_normal(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * PI).ln()
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            if a == 0.0 {
                0.0
            } else if b == 0.0 {
                f64::INFINITY
            } else {
                a * (a / b).ln()
            }
        })
        .sum()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn mean_of(rows: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; rows[0].len()];
    for r in rows {
        for (o, v) in out.iter_mut().zip(r) {
            *o += v / rows.len() as f64;
        }
    }
    out
}

/// Mean and batch-means standard error of a correlated series.
fn batch_means(series: &[f64], batches: usize) -> (f64, f64) {
    let size = series.len() / batches;
    let means: Vec<f64> =
        (0..batches).map(|b| series[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn fmt_pmf(p: &[f64]) -> String {
    p.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------------------

fn criterion_1(r: &mut Report) {
    let cfg = CoarseningConfig::new(1250.0).unwrap();
    let grid = [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000];
    let reps = 200;
    let mut max_gap: f64 = 0.0;
    for (ti, theta) in [0.51, 0.56].into_iter().enumerate() {
        let (mut exact_sum, mut standard_sum) = (0.0, 0.0);
        for rep in 0..reps {
            let mut rng = RandomSource::new(SEED, (1000 * ti + rep) as u64);
            let mut successes = 0usize;
            let mut next = 0;
            for i in 1..=grid[grid.len() - 1] {
                successes += (sample_unit(&mut rng) < theta) as usize;
                if i == grid[next] {
                    let xbar = successes as f64 / i as f64;
                    let exact = toy_exact_cposterior(i, xbar, &cfg).unwrap();
                    let approx = toy_approx_cposterior(i, xbar, &cfg).unwrap();
                    max_gap = max_gap.max((exact - approx).abs());
                    if next == grid.len() - 1 {
                        exact_sum += exact;
                        standard_sum += toy_standard_posterior(i, xbar).unwrap();
                    }
                    next += 1;
                }
            }
        }
        let (exact, standard) = (exact_sum / reps as f64, standard_sum / reps as f64);
        r.note(format!("theta {theta}: mean Pr(H0) at n=1e4 c-posterior {exact:.4}, standard {standard:.4}"));
        if theta == 0.51 {
            r.check(exact > 0.8, format!("theta 0.51 c-posterior {exact} <= 0.8"));
            r.check(standard < 0.1, format!("theta 0.51 standard {standard} >= 0.1"));
        } else {
            r.check(exact < 0.1, format!("theta 0.56 c-posterior {exact} >= 0.1"));
        }
    }
    let at_mean: Vec<String> = [10_000usize, 20_000, 50_000]
        .iter()
        .map(|&n| format!("n={n} {:.3}", toy_standard_posterior(n, 0.51).unwrap()))
        .collect();
    r.note(format!("standard Pr(H0) with xbar fixed at 0.51: {}", at_mean.join(", ")));
    r.note(format!("max |exact - approx| {max_gap:.4}"));
    r.check(max_gap <= 0.02, format!("exact vs approximate gap {max_gap} > 0.02"));
}

fn criterion_2(r: &mut Report) {
    let proposals = 1_000_000;
    let cases = [(5usize, 2usize), (10, 4), (20, 13), (30, 16)];
    for (ci, &(n, s_obs)) in cases.iter().enumerate() {
        for (ai, alpha) in [5.0, 50.0].into_iter().enumerate() {
            let cfg = CoarseningConfig::new(alpha).unwrap();
            let xbar = s_obs as f64 / n as f64;
            let observed = [1.0 - xbar, xbar];
            let mut rng = RandomSource::new(SEED, (10 * ci + ai) as u64);
            let (mut accepted, mut accepted_h0) = (0u64, 0u64);
            for _ in 0..proposals {
                let h0 = sample_unit(&mut rng) < 0.5;
                let theta = if h0 { 0.5 } else { sample_unit(&mut rng) };
                let s = (0..n).filter(|_| sample_unit(&mut rng) < theta).count();
                let ideal = s as f64 / n as f64;
                let radius = -(1.0 - sample_unit(&mut rng)).ln() / alpha;
                if kl(&observed, &[1.0 - ideal, ideal]) < radius {
                    accepted += 1;
                    accepted_h0 += h0 as u64;
                }
            }
            let est = accepted_h0 as f64 / accepted as f64;
            let se = (est * (1.0 - est) / accepted as f64).sqrt();
            let exact = toy_exact_cposterior(n, xbar, &cfg).unwrap();
            r.note(format!(
                "n={n} s={s_obs} alpha={alpha}: exact {exact:.4}, oracle {est:.4} (se {se:.4}, {accepted} accepted)"
            ));
            r.check((exact - est).abs() <= 3.0 * se, format!("n={n} alpha={alpha}: |{exact} - {est}| > 3se ({se})"));
        }
    }
}

fn ar_quadrature(x: &[f64], k: usize, sigma: f64, sigma0: f64, zeta: f64) -> f64 {
    let at = |t: usize, l: usize| if t >= l { x[t - l] } else { 0.0 };
    let log_lik = |theta: &[f64]| -> f64 {
        (0..x.len())
            .map(|t| {
                let mean: f64 = theta.iter().enumerate().map(|(l, th)| th * at(t, l + 1)).sum();
                ln_normal(x[t], mean, sigma)
            })
            .sum()
    };
    match k {
        1 => quad::integrate_log(|a| zeta * log_lik(&[a]) + ln_normal(a, 0.0, sigma0), -30.0, 30.0),
        _ => quad::integrate_log_2d(
            |a, b| zeta * log_lik(&[a, b]) + ln_normal(a, 0.0, sigma0) + ln_normal(b, 0.0, sigma0),
            -25.0,
            25.0,
        ),
    }
}

fn criterion_3(r: &mut Report) {
    let alphas = [100.0, 300.0, 500.0, 800.0, 1200.0];
    let mut c_post: Vec<Vec<Vec<f64>>> = vec![Vec::new(); alphas.len()];
    let mut standard = Vec::new();
    for seed in 0..5 {
        let mut rng = RandomSource::new(SEED, 300 + seed);
        let x = generate_misspec_ar(10_000, &MisspecArConfig::default(), &mut rng).unwrap();
        for (i, &alpha) in alphas.iter().enumerate() {
            let cfg = CoarseningConfig::new(alpha).unwrap();
            c_post[i].push(cposterior_over_orders(&x, 20, 1.0, 1.0, &cfg, None).unwrap().into_vec());
        }
        standard
            .push(cposterior_over_orders(&x, 20, 1.0, 1.0, &CoarseningConfig::standard(), None).unwrap().into_vec());
    }
    for (i, &alpha) in alphas.iter().enumerate() {
        let avg = mean_of(&c_post[i]);
        let mode = argmax(&avg);
        r.note(format!("alpha {alpha}: mode {mode}, mass at 4 {:.3}", avg[4]));
        r.check(mode == 4, format!("alpha {alpha}: mode {mode} != 4"));
        if alpha == 500.0 {
            r.check(avg[4] >= 0.5, format!("alpha 500: mass at k=4 {} < 0.5", avg[4]));
        }
    }
    let std_mode = argmax(&mean_of(&standard));
    r.note(format!("standard posterior mode {std_mode}"));
    r.check(std_mode > 4, format!("standard posterior mode {std_mode} <= 4"));

    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = RandomSource::new(SEED, 350 + seed);
        for n in 3..=10 {
            let x: Vec<f64> = (0..n).map(|_| 3.0 * sample_unit(&mut rng) - 1.5).collect();
            let alpha = 2.0 + 20.0 * sample_unit(&mut rng);
            let sigma = 0.6 + sample_unit(&mut rng);
            let sigma0 = 0.6 + sample_unit(&mut rng);
            let cfg = CoarseningConfig::new(alpha).unwrap();
            for k in 1..=2 {
                let spec = ARModelSpec::new(k, sigma, sigma0).unwrap();
                let closed = log_coarsened_marginal(&x, &spec, &cfg).unwrap();
                let oracle = ar_quadrature(&x, k, sigma, sigma0, cfg.zeta(n));
                worst = worst.max((closed - oracle).abs());
            }
        }
    }
    r.note(format!("max |closed form - quadrature| {worst:.2e} over 160 instances"));
    r.check(worst < 1e-8, format!("quadrature mismatch {worst:e}"));
}

fn criterion_4(r: &mut Report) {
    let priors = VarselPriors::default_for(6);
    let c_cfg = CoarseningConfig::new(50.0).unwrap();
    for rep in 0..3u64 {
        let mut rng = RandomSource::new(SEED, 400 + rep);
        let data = generate_varsel_data(5000, &mut rng).unwrap();
        let c_trace = varsel::run_chain(&data, &priors, &c_cfg, 20_000, 2_000, rng.split(1)).unwrap();
        let s_trace =
            varsel::run_chain(&data, &priors, &CoarseningConfig::standard(), 20_000, 2_000, rng.split(2)).unwrap();
        let c = trace_summaries(&c_trace, None).unwrap();
        let s = trace_summaries(&s_trace, None).unwrap();
        let c_mode = argmax(&c.k_pmf);
        let s_mode = argmax(&s.k_pmf);
        let (b1, b2) = (c.quantiles[0], c.quantiles[1]);
        r.note(format!(
            "replicate {rep}: c-mode {c_mode}, standard mode {s_mode}, beta1 [{:.3}, {:.3}], beta2 [{:.3}, {:.3}], inclusion 3..6 {}",
            b1[0],
            b1[2],
            b2[0],
            b2[2],
            fmt_pmf(&c.inclusion[2..])
        ));
        r.check(c_mode == 2, format!("replicate {rep}: c-posterior mode {c_mode} != 2"));
        r.check(s_mode >= 3, format!("replicate {rep}: standard mode {s_mode} < 3"));
        r.check(b1[0] <= -1.0 && -1.0 <= b1[2], format!("replicate {rep}: beta1 interval misses -1"));
        r.check(b2[0] <= 4.0 && 4.0 <= b2[2], format!("replicate {rep}: beta2 interval misses 4"));
        for (j, &p) in c.inclusion.iter().enumerate().skip(2) {
            r.check(p < 0.5, format!("replicate {rep}: inclusion of beta{} is {p}", j + 1));
        }
    }
}

/// `Pr(β_j = 0 | rest)` by integrating the slab numerically.
fn spike_probability_by_quadrature(
    j: usize,
    state: &VarselState,
    data: &RegressionDataset,
    priors: &VarselPriors,
    zeta: f64,
) -> f64 {
    let (n, p) = (data.n(), data.p());
    let x = data.x();
    let y = data.y();
    let log_lik = |bj: f64| -> f64 {
        let mut rss = 0.0;
        for i in 0..n {
            let mut fit = 0.0;
            for l in 0..p {
                fit += x[(i, l)] * if l == j { bj } else { state.beta[l] };
            }
            rss += (y[i] - fit) * (y[i] - fit);
        }
        -0.5 * state.lambda * zeta * rss
    };
    let others = (0..p).filter(|&l| l != j && state.beta[l] != 0.0).count() as f64;
    let zeros = (p - 1) as f64 - others;
    // Beta-Bernoulli predictive odds of the slab given the other coefficients.
    let log_slab_prior = (priors.r + others).ln() - (priors.s + zeros).ln();
    let sd0 = 1.0 / priors.l0.sqrt();
    let log_slab = log_slab_prior + quad::integrate_log(|b| log_lik(b) + ln_normal(b, 0.0, sd0), -40.0, 40.0);
    let log_spike = log_lik(0.0);
    1.0 / (1.0 + (log_slab - log_spike).exp())
}

fn random_dataset(n: usize, p: usize, rng: &mut RandomSource) -> RegressionDataset {
    let x = DMatrix::from_fn(n, p, |_, _| 2.0 * sample_unit(rng) - 1.0);
    let y = DVector::from_fn(n, |_, _| 3.0 * sample_unit(rng) - 1.5);
    RegressionDataset::new(x, y).unwrap()
}

fn criterion_5(r: &mut Report) {
    let mut rng = RandomSource::new(SEED, 500);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = 2 + (sample_unit(&mut rng) * 4.0) as usize;
        let p = 1 + (sample_unit(&mut rng) * 3.0) as usize;
        let data = random_dataset(n, p, &mut rng);
        let priors = VarselPriors::new(
            0.5 + sample_unit(&mut rng),
            0.5 + 3.0 * sample_unit(&mut rng),
            0.3 + 2.0 * sample_unit(&mut rng),
            1.0,
            1.0,
        )
        .unwrap();
        let beta: Vec<f64> =
            (0..p).map(|_| if sample_unit(&mut rng) < 0.5 { 0.0 } else { 2.0 * sample_unit(&mut rng) - 1.0 }).collect();
        let state = VarselState { beta, lambda: 0.3 + 3.0 * sample_unit(&mut rng) };
        let zeta = 0.05 + 0.95 * sample_unit(&mut rng);
        let j = (sample_unit(&mut rng) * p as f64) as usize;
        let got = beta_inclusion_probability(j, &state, &data, &priors, zeta).unwrap();
        let oracle = spike_probability_by_quadrature(j, &state, &data, &priors, zeta);
        worst = worst.max((got - oracle).abs());
    }
    r.note(format!("max |kernel - quadrature| {worst:.2e} over 50 instances"));
    r.check(worst < 1e-8, format!("inclusion probability mismatch {worst:e}"));

    // One coefficient with λ fixed: successive scans are independent draws.
    let data = random_dataset(3, 1, &mut rng);
    let priors = VarselPriors::new(1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
    let zeta = 0.4;
    let mut state = VarselState { beta: vec![0.0], lambda: 1.7 };
    let exact_zero = spike_probability_by_quadrature(0, &state, &data, &priors, zeta);
    // Slab mean and sd from quadrature moments of the conditional slab density.
    let x = data.x().column(0).into_owned();
    let y = data.y().clone();
    let lambda = state.lambda;
    let log_slab = |b: f64| -0.5 * lambda * zeta * (&y - &x * b).norm_squared() + ln_normal(b, 0.0, 1.0);
    let norm = quad::integrate(|b| log_slab(b).exp(), -40.0, 40.0, 400);
    let slab_mean = quad::integrate(|b| b * log_slab(b).exp(), -40.0, 40.0, 400) / norm;
    let sweeps = 100_000;
    let (mut zeros, mut slab_sum) = (0usize, 0.0);
    let mut chain_rng = RandomSource::new(SEED, 501);
    for _ in 0..sweeps {
        state = beta_scan(&state, &data, &priors, zeta, &mut chain_rng).unwrap();
        if state.beta[0] == 0.0 {
            zeros += 1;
        } else {
            slab_sum += state.beta[0];
        }
    }
    let freq = zeros as f64 / sweeps as f64;
    let se = (exact_zero * (1.0 - exact_zero) / sweeps as f64).sqrt();
    r.note(format!("fixed-lambda chain: Pr(beta=0) {freq:.4} vs exact {exact_zero:.4} (se {se:.4})"));
    r.check((freq - exact_zero).abs() <= 3.0 * se, format!("spike frequency {freq} vs {exact_zero}"));
    let slab_draws = (sweeps - zeros) as f64;
    let slab_var = quad::integrate(|b| (b - slab_mean).powi(2) * log_slab(b).exp(), -40.0, 40.0, 400) / norm;
    let slab_se = (slab_var / slab_draws).sqrt();
    let slab_avg = slab_sum / slab_draws;
    r.note(format!("slab mean {slab_avg:.4} vs exact {slab_mean:.4} (se {slab_se:.4})"));
    r.check((slab_avg - slab_mean).abs() <= 3.0 * slab_se, format!("slab mean {slab_avg} vs {slab_mean}"));
}

fn criterion_6(r: &mut Report) {
    let priors = MixturePriors::default_for(10).unwrap();
    let steps = StepSizes::new(0.2, 0.2, 2.0).unwrap();
    let configs = [("alpha=100", CoarseningConfig::new(100.0).unwrap()), ("alpha=inf", CoarseningConfig::standard())];
    let mut modes = [[0usize; 3]; 2];
    for (ni, n) in [100usize, 2000, 10_000].into_iter().enumerate() {
        for (ci, (label, cfg)) in configs.iter().enumerate() {
            let mut pmfs = Vec::new();
            for seed in 0..3u64 {
                let mut rng = RandomSource::new(SEED, 600 + seed);
                let data = generate_skew_mixture(n, &mut rng).unwrap();
                let trace =
                    mixture::run_chain(&data, &priors, cfg, 50_000, 5_000, &steps, rng.split(1 + ci as u64)).unwrap();
                pmfs.push(posterior_on_k(&trace, priors.c).unwrap().into_vec());
            }
            let avg = mean_of(&pmfs);
            modes[ci][ni] = argmax(&avg) + 1;
            r.note(format!("n={n} {label}: mode {}, pmf over k=1..10: {}", modes[ci][ni], fmt_pmf(&avg)));
        }
    }
    r.check(modes[0][1] == 2, format!("c-posterior mode at n=2000 is {}", modes[0][1]));
    r.check(modes[0][2] == 2, format!("c-posterior mode at n=1e4 is {}", modes[0][2]));
    r.check(
        modes[1][2] > modes[1][1],
        format!("standard mode does not increase: {} at n=2000, {} at n=1e4", modes[1][1], modes[1][2]),
    );
}

fn criterion_7(r: &mut Report) {
    let priors = MixturePriors::default_for(10).unwrap();
    let data = [0.0];

    // Induced prior on k, pooling k >= 5.
    let steps = StepSizes::new(1.0, 1.0, 4.0).unwrap();
    let mut rng = RandomSource::new(SEED, 700);
    let mut state = mixture::sample_prior(&priors, &mut rng);
    let sweeps = 400_000;
    let cells = 5;
    let mut series: Vec<Vec<f64>> = (0..cells).map(|_| Vec::with_capacity(sweeps)).collect();
    for _ in 0..sweeps {
        state = mh_sweep(&state, &data, &priors, 0.0, &steps, &mut rng).unwrap().0;
        let k = state.k(priors.c);
        for (c, s) in series.iter_mut().enumerate() {
            s.push(((k.min(cells) == c + 1) as u8) as f64);
        }
    }
    let prior_k = induced_prior_on_k(10, priors.inclusion_probability()).unwrap();
    let mut target: Vec<f64> = prior_k.as_slice()[..cells - 1].to_vec();
    target.push(prior_k.as_slice()[cells - 1..].iter().sum());
    for (c, s) in series.iter().enumerate() {
        let (freq, se) = batch_means(s, 200);
        let label = if c + 1 == cells { format!("k>={cells}") } else { format!("k={}", c + 1) };
        r.note(format!("zeta=0 {label}: frequency {freq:.4}, prior {:.4} (se {se:.4})", target[c]));
        r.check((freq - target[c]).abs() <= 3.0 * se, format!("zeta=0 {label}: {freq} vs {}", target[c]));
    }

    // The μ prior, from thinned draws pooled over components.
    let steps = StepSizes::new(6.0, 2.0, 3.0).unwrap();
    let mut rng = RandomSource::new(SEED, 701);
    let mut state = mixture::sample_prior(&priors, &mut rng);
    let mut draws = Vec::new();
    for sweep in 1..=100_000 {
        state = mh_sweep(&state, &data, &priors, 0.0, &steps, &mut rng).unwrap().0;
        if sweep % 25 == 0 {
            draws.extend_from_slice(&state.mu);
        }
    }
    draws.sort_by(|a, b| a.total_cmp(b));
    let m = draws.len() as f64;
    let ks = draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf((x - priors.mu_mean) / priors.mu_sd);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max);
    let critical = 1.9496 / m.sqrt();
    r.note(format!("zeta=0 mu: KS {ks:.4} vs critical {critical:.4} on {} draws", draws.len()));
    r.check(ks < critical, format!("mu prior KS {ks} >= {critical}"));

    // One component, λ held fixed: μ against a gridded target.
    let priors = MixturePriors::new(1, 1.0, 1.0, 0.1, 0.0, 5.0, 0.0, 2.0).unwrap();
    let data = [0.4, 1.1, -0.3, 0.9, 1.6];
    let lambda: f64 = 2.0;
    let zeta = 0.5;
    let log_target = |mu: f64| {
        ln_normal(mu, priors.mu_mean, priors.mu_sd)
            + zeta * data.iter().map(|&x| ln_normal(x, mu, lambda.powf(-0.5))).sum::<f64>()
    };
    let (lo, hi, bins) = (-1.5, 2.7, 42);
    let width = (hi - lo) / bins as f64;
    let mut exact: Vec<f64> = (0..bins)
        .map(|b| quad::integrate(|mu| log_target(mu).exp(), lo + b as f64 * width, lo + (b + 1) as f64 * width, 4))
        .collect();
    let total: f64 = exact.iter().sum();
    exact.iter_mut().for_each(|e| *e /= total);
    let steps = StepSizes::new(0.5, 0.0, 0.3).unwrap();
    let mut rng = RandomSource::new(SEED, 702);
    let mut state = MixtureState { v: vec![1.0], mu: vec![0.0], lambda: vec![lambda] };
    let mut hist = vec![0.0; bins];
    let mut inside = 0.0;
    let sweeps = 200_000;
    for _ in 0..sweeps {
        state = mh_sweep(&state, &data, &priors, zeta, &steps, &mut rng).unwrap().0;
        let b = ((state.mu[0] - lo) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            hist[b as usize] += 1.0;
            inside += 1.0;
        }
    }
    let tv: f64 = 0.5 * hist.iter().zip(&exact).map(|(h, e)| (h / inside - e).abs()).sum::<f64>();
    r.note(format!("single component: TV {tv:.4}, {:.4} of draws on the grid", inside / sweeps as f64));
    r.check(inside / sweeps as f64 > 0.999, "single-component draws leave the grid");
    r.check(tv < 0.05, format!("single-component TV {tv} >= 0.05"));
}

fn random_simplex(k: usize, rng: &mut RandomSource) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - sample_unit(rng)).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

fn criterion_8(r: &mut Report) {
    let mut rng = RandomSource::new(SEED, 800);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = 2 + (sample_unit(&mut rng) * 9.0) as usize;
        let p = SimplexVector::new(random_simplex(k, &mut rng)).unwrap();
        let q = SimplexVector::new(random_simplex(k, &mut rng)).unwrap();
        let chi = chi_squared(&p, &q).unwrap();
        let maha = mahalanobis_chi_squared(&p, &q).unwrap();
        worst = worst.max((chi - maha).abs() / chi.max(1.0));
    }
    r.note(format!("Mahalanobis vs chi-squared: max relative gap {worst:.2e}"));
    r.check(worst <= 1e-12, format!("Mahalanobis identity gap {worst:e}"));

    let mut worst_ratio: f64 = 0.0;
    for _ in 0..500 {
        let k = 2 + (sample_unit(&mut rng) * 6.0) as usize;
        let q: Vec<f64> = random_simplex(k, &mut rng).iter().map(|v| 0.5 * v + 0.5 / k as f64).collect();
        let mut d: Vec<f64> = (0..k).map(|_| sample_standard_normal(&mut rng)).collect();
        let mean = d.iter().sum::<f64>() / k as f64;
        d.iter_mut().for_each(|v| *v -= mean);
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        d.iter_mut().for_each(|v| *v /= norm);
        for t in [0.01, 0.003, 0.001] {
            let p: Vec<f64> = q.iter().zip(&d).map(|(qi, di)| qi + t * di).collect();
            let ps = SimplexVector::from_unnormalized(p).unwrap();
            let qs = SimplexVector::new(q.clone()).unwrap();
            let ratio = 2.0 * relative_entropy(&ps, &qs).unwrap() / chi_squared(&ps, &qs).unwrap();
            worst_ratio = worst_ratio.max((ratio - 1.0).abs() / t);
            r.check((ratio - 1.0).abs() <= 5.0 * t, format!("Taylor ratio {ratio} at t={t}, k={k}"));
        }
    }
    r.note(format!("Taylor property: max |2D/chi2 - 1| / t = {worst_ratio:.3}"));

    for (label, s) in [("k=2", vec![0.35, 0.65]), ("k=3", vec![0.2, 0.3, 0.5])] {
        let s = SimplexVector::new(s).unwrap();
        for n in [50, 200] {
            for alpha in [10.0, 50.0] {
                let cfg = CoarseningConfig::new(alpha).unwrap();
                let mc = small_sample_lhs_mc(&s, &s, n, &cfg, 20_000, &mut rng).unwrap();
                let rhs = small_sample_rhs(&s, &s, n, &cfg).unwrap();
                let tol = (3.0 * mc.std_error).max(0.15 * rhs);
                r.note(format!(
                    "{label} n={n} alpha={alpha}: Monte Carlo {:.4} (se {:.4}), correction {rhs:.4}",
                    mc.estimate, mc.std_error
                ));
                r.check(
                    (mc.estimate - rhs).abs() <= tol,
                    format!("{label} n={n} alpha={alpha}: {} vs {rhs}", mc.estimate),
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Textbook samplers for the α = ∞ comparison. They consume random numbers in
// the same order as the library samplers but recompute everything from scratch.

fn textbook_varsel_sweep(
    state: &mut VarselState,
    data: &RegressionDataset,
    priors: &VarselPriors,
    rng: &mut RandomSource,
) {
    let (n, p) = (data.n(), data.p());
    let x = data.x();
    let y = data.y();
    let resid = |beta: &[f64]| -> DVector<f64> { y - x * DVector::from_column_slice(beta) };
    let rss = resid(&state.beta).norm_squared();
    state.lambda = sample_gamma(rng, priors.a + 0.5 * n as f64, priors.b + 0.5 * rss);
    for j in 0..p {
        let mut without = state.beta.clone();
        without[j] = 0.0;
        let delta = resid(&without);
        let xj = x.column(j);
        let precision = priors.l0 + state.lambda * xj.norm_squared();
        let mean = state.lambda * xj.dot(&delta) / precision;
        let k_other = without.iter().filter(|b| **b != 0.0).count() as f64;
        let log_odds_slab =
            0.5 * (priors.l0 / precision).ln() + 0.5 * precision * mean * mean + (priors.r + k_other).ln()
                - (priors.s + (p - 1) as f64 - k_other).ln();
        let prob_zero = 1.0 / (1.0 + log_odds_slab.exp());
        state.beta[j] =
            if sample_unit(rng) < prob_zero { 0.0 } else { mean + sample_standard_normal(rng) / precision.sqrt() };
    }
}

fn textbook_mixture_log_target(state: &MixtureState, data: &[f64], priors: &MixturePriors) -> f64 {
    let g: Vec<f64> = state.v.iter().map(|v| (v - priors.c).max(0.0)).collect();
    let total: f64 = g.iter().sum();
    if total <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let ln_gamma_pdf =
        |v: f64| priors.a * priors.b.ln() - ln_gamma(priors.a).unwrap() + (priors.a - 1.0) * v.ln() - priors.b * v;
    let mut lp = 0.0;
    for i in 0..priors.m {
        lp += ln_gamma_pdf(state.v[i])
            + ln_normal(state.mu[i], priors.mu_mean, priors.mu_sd)
            + ln_normal(state.lambda[i].ln(), priors.log_lambda_mean, priors.log_lambda_sd);
    }
    for &x in data {
        let mut dens = 0.0;
        for i in 0..priors.m {
            let lam = state.lambda[i];
            dens += g[i] / total * (lam / (2.0 * PI)).sqrt() * (-0.5 * lam * (x - state.mu[i]).powi(2)).exp();
        }
        lp += dens.ln();
    }
    lp
}

fn textbook_mixture_sweep(
    state: &mut MixtureState,
    data: &[f64],
    priors: &MixturePriors,
    steps: &StepSizes,
    rng: &mut RandomSource,
) {
    for i in 0..priors.m {
        let mut prop = state.clone();
        prop.mu[i] += steps.mu * sample_standard_normal(rng);
        let ll = state.lambda[i].ln() + steps.log_lambda * sample_standard_normal(rng);
        prop.lambda[i] = ll.exp();
        let u = sample_unit(rng);
        if u.ln() < textbook_mixture_log_target(&prop, data, priors) - textbook_mixture_log_target(state, data, priors)
        {
            *state = prop;
        }
    }
    for i in 0..priors.m {
        let mut prop = state.clone();
        prop.v[i] = (state.v[i].ln() + steps.log_v * sample_standard_normal(rng)).exp();
        let u = sample_unit(rng);
        // Target over log v_i picks up a factor v_i.
        let log_ratio = textbook_mixture_log_target(&prop, data, priors) + prop.v[i].ln()
            - textbook_mixture_log_target(state, data, priors)
            - state.v[i].ln();
        if u.ln() < log_ratio {
            *state = prop;
        }
    }
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn criterion_9(r: &mut Report) {
    let inf = CoarseningConfig::standard();
    let mut rng = RandomSource::new(SEED, 900);

    for n in [1usize, 7, 1000, 1_000_000] {
        r.check(
            inf.zeta(n) == 1.0 && inf.effective_sample_size(n) == n as f64,
            format!("zeta or effective size at n={n}"),
        );
    }

    // Toy posteriors.
    let mut worst: f64 = 0.0;
    for n in [1usize, 5, 40, 333, 5000] {
        for s in [0, n / 3, n / 2, n] {
            let xbar = s as f64 / n as f64;
            let standard = toy_standard_posterior(n, xbar).unwrap();
            let ln_odds = ln_beta(1.0 + s as f64, 1.0 + (n - s) as f64).unwrap() + n as f64 * 2f64.ln();
            let textbook = 1.0 / (1.0 + ln_odds.exp());
            worst = worst.max((standard - textbook).abs());
            worst = worst.max((toy_approx_cposterior(n, xbar, &inf).unwrap() - standard).abs());
            worst = worst.max((toy_exact_cposterior(n, xbar, &inf).unwrap() - standard).abs());
        }
    }
    r.check(worst <= 1e-12, format!("toy posterior gap {worst:e}"));

    // Conjugate updates.
    let family = BernoulliBeta;
    let prior = BernoulliBeta::prior(2.0, 3.0);
    let flips: Vec<bool> = (0..50).map(|_| sample_unit(&mut rng) < 0.3).collect();
    let s = flips.iter().filter(|b| **b).count() as f64;
    let post = power_update(&family, &prior, &flips, inf.zeta(flips.len())).unwrap();
    let (a, b) = BernoulliBeta::beta_shape(&post);
    r.check(close(a, 2.0 + s, 1e-12) && close(b, 3.0 + 50.0 - s, 1e-12), format!("Beta update ({a}, {b})"));
    let lm = log_marginal_power_likelihood(&family, &prior, &flips, 1.0).unwrap();
    let textbook = ln_beta(2.0 + s, 53.0 - s).unwrap() - ln_beta(2.0, 3.0).unwrap();
    r.check(close(lm, textbook, 1e-12), format!("Beta-Bernoulli marginal {lm} vs {textbook}"));

    let (sigma, mean0, sd0) = (1.3, 0.4, 2.1);
    let family = NormalKnownVariance::new(sigma).unwrap();
    let prior = family.prior(mean0, sd0);
    let xs: Vec<f64> = (0..40).map(|_| 1.0 + 2.0 * sample_standard_normal(&mut rng)).collect();
    let nx = xs.len() as f64;
    let lm = log_marginal_power_likelihood(&family, &prior, &xs, inf.zeta(xs.len())).unwrap();
    // x ~ N(m·1, σ²I + s²11ᵀ), via the rank-one determinant and inverse.
    let (s2, t2) = (sigma * sigma, sd0 * sd0);
    let dev: Vec<f64> = xs.iter().map(|x| x - mean0).collect();
    let sum_dev: f64 = dev.iter().sum();
    let quad_form = (dev.iter().map(|d| d * d).sum::<f64>() - t2 / (s2 + nx * t2) * sum_dev * sum_dev) / s2;
    let log_det = nx * s2.ln() + (1.0 + nx * t2 / s2).ln();
    let textbook = -0.5 * (nx * (2.0 * PI).ln() + log_det + quad_form);
    r.check(close(lm, textbook, 1e-12), format!("normal marginal {lm} vs {textbook}"));
    let post = power_update(&family, &prior, &xs, 1.0).unwrap();
    let (pm, psd) = family.mean_sd(&post);
    let prec = 1.0 / t2 + nx / s2;
    let textbook_mean = (mean0 / t2 + xs.iter().sum::<f64>() / s2) / prec;
    r.check(
        close(pm, textbook_mean, 1e-12) && close(psd, prec.powf(-0.5), 1e-12),
        format!("normal update ({pm}, {psd})"),
    );

    // Finite-grid reweighting puts all mass on the closest hypothesis.
    let grid_prior = SimplexVector::new(vec![0.2, 0.3, 0.5]).unwrap();
    let rw = asymptotic_reweight(&grid_prior, &[0.3, 0.1, 0.2], &inf).unwrap();
    r.check(rw.as_slice() == [0.0, 1.0, 0.0], format!("reweighting at alpha=inf {:?}", rw.as_slice()));

    // AR marginal against the Gaussian evidence N(x | 0, σ²I + σ₀² XXᵀ).
    let x = generate_misspec_ar(60, &MisspecArConfig::default(), &mut rng).unwrap();
    let (sigma, sigma0) = (1.1, 0.7);
    let all = log_marginals_over_orders(&x, 3, sigma, sigma0, &inf).unwrap();
    for k in 0..=3 {
        let n = x.len();
        let design = DMatrix::from_fn(n, k, |t, l| if t > l { x[t - l - 1] } else { 0.0 });
        let cov = DMatrix::identity(n, n) * (sigma * sigma) + &design * design.transpose() * (sigma0 * sigma0);
        let chol = cov.cholesky().unwrap();
        let xv = DVector::from_column_slice(&x);
        let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let textbook = -0.5 * (n as f64 * (2.0 * PI).ln() + log_det + xv.dot(&chol.solve(&xv)));
        let spec = ARModelSpec::new(k, sigma, sigma0).unwrap();
        let single = log_coarsened_marginal(&x, &spec, &inf).unwrap();
        r.check(close(single, textbook, 1e-12), format!("AR({k}) marginal {single} vs {textbook}"));
        r.check(all[k] == single, format!("AR({k}) marginal over orders differs from single order"));
    }
    let stats = ar_suff_stats(&x, 3, sigma).unwrap();
    r.check(stats.order() == 3, "AR statistics order");

    // Variable selection at α = ∞ against a from-scratch Gibbs sampler.
    let data = generate_varsel_data(200, &mut rng).unwrap();
    let priors = VarselPriors::default_for(data.p());
    let trace = varsel::run_chain(&data, &priors, &inf, 300, 1, RandomSource::new(SEED, 901)).unwrap();
    let mut tb_rng = RandomSource::new(SEED, 901);
    let mut tb = VarselState { beta: vec![0.0; data.p()], lambda: priors.a / priors.b };
    let mut worst: f64 = 0.0;
    textbook_varsel_sweep(&mut tb, &data, &priors, &mut tb_rng);
    for s in trace.states() {
        textbook_varsel_sweep(&mut tb, &data, &priors, &mut tb_rng);
        for (a, b) in s.beta.iter().zip(&tb.beta) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
            r.check((*a == 0.0) == (*b == 0.0), "varsel spike pattern differs from textbook sampler");
        }
        worst = worst.max((s.lambda - tb.lambda).abs() / tb.lambda.max(1.0));
    }
    r.note(format!("varsel alpha=inf vs textbook Gibbs: max relative gap {worst:.2e}"));
    r.check(worst <= 1e-12, format!("varsel gap {worst:e}"));

    // Mixture at α = ∞ against a from-scratch Metropolis-Hastings sampler.
    let data = generate_skew_mixture(150, &mut rng).unwrap();
    let priors = MixturePriors::default_for(4).unwrap();
    let steps = StepSizes::new(0.3, 0.3, 1.0).unwrap();
    let mut worst_density: f64 = 0.0;
    let mut probe_rng = RandomSource::new(SEED, 902);
    for _ in 0..50 {
        let s = mixture::sample_prior(&priors, &mut probe_rng);
        let got = log_power_posterior_density(&s, &data, &priors, inf.zeta(data.len())).unwrap();
        let textbook = textbook_mixture_log_target(&s, &data, &priors);
        worst_density = worst_density.max((got - textbook).abs() / textbook.abs().max(1.0));
    }
    r.check(worst_density <= 1e-12, format!("mixture density gap {worst_density:e}"));
    let trace = mixture::run_chain(&data, &priors, &inf, 300, 1, &steps, RandomSource::new(SEED, 903)).unwrap();
    let mut tb_rng = RandomSource::new(SEED, 903);
    let mut tb = mixture::sample_prior(&priors, &mut tb_rng);
    textbook_mixture_sweep(&mut tb, &data, &priors, &steps, &mut tb_rng);
    let mut worst: f64 = 0.0;
    for s in trace.states() {
        textbook_mixture_sweep(&mut tb, &data, &priors, &steps, &mut tb_rng);
        for (a, b) in s.v.iter().chain(&s.mu).chain(&s.lambda).zip(tb.v.iter().chain(&tb.mu).chain(&tb.lambda)) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    r.note(format!("mixture alpha=inf vs textbook MH: max relative gap {worst:.2e}; density gap {worst_density:.2e}"));
    r.check(worst <= 1e-12, format!("mixture chain gap {worst:e}"));

    // Byte determinism under a fixed seed.
    let same = |label: &str, a: Vec<u64>, b: Vec<u64>, r: &mut Report| {
        r.check(a == b, format!("{label} is not deterministic"))
    };
    let ar = |s| generate_misspec_ar(500, &MisspecArConfig::default(), &mut RandomSource::new(s, 1)).unwrap();
    same("AR generator", bits(&ar(5)), bits(&ar(5)), r);
    let mix = |s| generate_skew_mixture(500, &mut RandomSource::new(s, 2)).unwrap();
    same("mixture generator", bits(&mix(5)), bits(&mix(5)), r);
    let vs = |s| {
        let d = generate_varsel_data(100, &mut RandomSource::new(s, 3)).unwrap();
        let mut out = d.x().as_slice().to_vec();
        out.extend_from_slice(d.y().as_slice());
        out
    };
    same("varsel generator", bits(&vs(5)), bits(&vs(5)), r);
    let cfg = CoarseningConfig::new(50.0).unwrap();
    let vchain = |s| {
        let t = varsel::run_chain(
            &data_for_determinism(),
            &VarselPriors::default_for(6),
            &cfg,
            200,
            20,
            RandomSource::new(s, 4),
        )
        .unwrap();
        t.states().iter().flat_map(|st| st.beta.iter().copied().chain([st.lambda])).collect::<Vec<f64>>()
    };
    same("varsel chain", bits(&vchain(5)), bits(&vchain(5)), r);
    let mpriors = MixturePriors::default_for(10).unwrap();
    let mchain = |s| {
        let t = mixture::run_chain(&mix(6), &mpriors, &cfg, 200, 20, &StepSizes::default(), RandomSource::new(s, 5))
            .unwrap();
        t.states()
            .iter()
            .flat_map(|st| st.v.iter().chain(&st.mu).chain(&st.lambda).copied().collect::<Vec<f64>>())
            .collect::<Vec<f64>>()
    };
    same("mixture chain", bits(&mchain(5)), bits(&mchain(5)), r);
    let lhs = |s| {
        let p = SimplexVector::new(vec![0.2, 0.8]).unwrap();
        let e = small_sample_lhs_mc(&p, &p, 30, &cfg, 1000, &mut RandomSource::new(s, 6)).unwrap();
        vec![e.estimate, e.std_error]
    };
    same("small-sample Monte Carlo", bits(&lhs(5)), bits(&lhs(5)), r);
    let prior_draw = |s| {
        let st = varsel::sample_prior(6, &VarselPriors::default_for(6), &mut RandomSource::new(s, 7));
        let mut out = st.beta.clone();
        out.push(st.lambda);
        let ms = mixture::sample_prior(&mpriors, &mut RandomSource::new(s, 8));
        out.extend(ms.v.iter().chain(&ms.mu).chain(&ms.lambda));
        out
    };
    same("prior draws", bits(&prior_draw(5)), bits(&prior_draw(5)), r);
    r.check(bits(&ar(5)) != bits(&ar(6)), "different seeds give identical AR series");
}

fn data_for_determinism() -> RegressionDataset {
    generate_varsel_data(150, &mut RandomSource::new(SEED, 950)).unwrap()
}
