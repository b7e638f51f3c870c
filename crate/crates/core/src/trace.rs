//! Post-burn-in sampler output with the metadata needed to reproduce it.

use crate::error::{Error, Result};

/// Recorded states of one chain. `states` holds only the sweeps after
/// `burnin`, so `states.len() == sweeps - burnin`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrace<S> {
    states: Vec<S>,
    burnin: usize,
    sweeps: usize,
    seed: u64,
    stream: u64,
}

impl<S> ChainTrace<S> {
    pub fn new(states: Vec<S>, burnin: usize, sweeps: usize, seed: u64, stream: u64) -> Result<Self> {
        if burnin >= sweeps {
            return Err(Error::Usage(format!("burnin ({burnin}) must be < sweeps ({sweeps})")));
        }
        if states.len() != sweeps - burnin {
            return Err(Error::Shape { expected: sweeps - burnin, found: states.len() });
        }
        Ok(Self { states, burnin, sweeps, seed, stream })
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn burnin(&self) -> usize {
        self.burnin
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

pub(crate) fn check_sweeps(sweeps: usize, burnin: usize) -> Result<()> {
    if sweeps <= burnin {
        return Err(Error::Usage(format!("sweeps ({sweeps}) must exceed burnin ({burnin})")));
    }
    Ok(())
}

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman–Fan type 7). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Empirical CDF of `sorted` at each grid point.
pub fn empirical_cdf(sorted: &[f64], grid: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    grid.iter().map(|&g| sorted.partition_point(|&v| v <= g) as f64 / n).collect()
}
