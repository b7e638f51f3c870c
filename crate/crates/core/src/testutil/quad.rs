//! Composite Gauss–Legendre quadrature for oracle values in tests.
//!
//! Shared with the integration tests through `#[path]` includes, so this file
//! only depends on `std`.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `∫_a^b f` by `panels` panels of a 20-point rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(&weights) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    total * 0.5 * h
}

/// Locates the region of `[lo, hi]` where `log_f` is within 60 nats of its
/// maximum on a coarse grid. Returns `(max, a, b)`.
fn support(log_f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, grid: usize) -> (f64, f64, f64) {
    let step = (hi - lo) / grid as f64;
    let vals: Vec<f64> = (0..=grid).map(|i| log_f(lo + i as f64 * step)).collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = vals.iter().position(|v| *v > max - 60.0).unwrap();
    let last = vals.iter().rposition(|v| *v > max - 60.0).unwrap();
    let a = lo + (first as f64 - 1.0).max(0.0) * step;
    let b = lo + ((last + 1).min(grid)) as f64 * step;
    (max, a, b)
}

/// `ln ∫_lo^hi exp(log_f)`, for smooth unimodal-ish integrands.
pub fn integrate_log<F: Fn(f64) -> f64>(log_f: F, lo: f64, hi: f64) -> f64 {
    let (max, a, b) = support(&log_f, lo, hi, 8000);
    max + integrate(|x| (log_f(x) - max).exp(), a, b, 400).ln()
}

/// `ln ∬ exp(log_f)` over the box `[lo, hi]²`.
pub fn integrate_log_2d<F: Fn(f64, f64) -> f64>(log_f: F, lo: f64, hi: f64) -> f64 {
    let grid = 400;
    let step = (hi - lo) / grid as f64;
    let mut max = f64::NEG_INFINITY;
    for i in 0..=grid {
        for j in 0..=grid {
            max = max.max(log_f(lo + i as f64 * step, lo + j as f64 * step));
        }
    }
    let (mut a0, mut b0, mut a1, mut b1) = (hi, lo, hi, lo);
    for i in 0..=grid {
        for j in 0..=grid {
            let (x, y) = (lo + i as f64 * step, lo + j as f64 * step);
            if log_f(x, y) > max - 60.0 {
                a0 = a0.min(x);
                b0 = b0.max(x);
                a1 = a1.min(y);
                b1 = b1.max(y);
            }
        }
    }
    let (a0, b0) = ((a0 - step).max(lo), (b0 + step).min(hi));
    let (a1, b1) = ((a1 - step).max(lo), (b1 + step).min(hi));
    let (nodes, weights) = gauss_legendre(12);
    let panels = 80;
    let h0 = (b0 - a0) / panels as f64;
    let h1 = (b1 - a1) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let m0 = a0 + (p as f64 + 0.5) * h0;
        for (x, wx) in nodes.iter().zip(&weights) {
            let u = m0 + 0.5 * h0 * x;
            for q in 0..panels {
                let m1 = a1 + (q as f64 + 0.5) * h1;
                for (y, wy) in nodes.iter().zip(&weights) {
                    let v = m1 + 0.5 * h1 * y;
                    total += wx * wy * (log_f(u, v) - max).exp();
                }
            }
        }
    }
    max + (total * 0.25 * h0 * h1).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_known_functions() {
        let v = integrate(|x| x.cos(), 0.0, std::f64::consts::FRAC_PI_2, 4);
        assert!((v - 1.0).abs() < 1e-14);
        let g = integrate_log(|x| -0.5 * x * x, -30.0, 30.0);
        assert!((g - (2.0 * std::f64::consts::PI).sqrt().ln()).abs() < 1e-12);
        let g2 = integrate_log_2d(|x, y| -0.5 * (x * x + y * y), -20.0, 20.0);
        assert!((g2 - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-10);
    }
}
