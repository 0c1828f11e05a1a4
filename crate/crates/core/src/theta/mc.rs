//! Randomized quasi-Monte Carlo over the unit cube: Kronecker points with a
//! seeded random shift per batch, batches run in parallel and reduced in a
//! fixed order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 1000;
pub const MIN_BATCHES: usize = 32;
const GROUPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub batches: usize,
    /// Truncation tolerance for every theta sum evaluated by the integrand.
    pub tol: f64,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        Self::with_batches(samples, seed, MIN_BATCHES)
    }

    pub fn with_batches(samples: usize, seed: u64, batches: usize) -> Result<Self> {
        if samples < MIN_SAMPLES {
            return Err(Error::Input(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
        }
        if batches < MIN_BATCHES {
            return Err(Error::Input(format!("need at least {MIN_BATCHES} batches, got {batches}")));
        }
        if samples < batches {
            return Err(Error::Input("fewer samples than batches".into()));
        }
        Ok(McConfig { samples, seed, batches, tol: super::DEFAULT_TOL })
    }

    pub fn with_tol(self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Input(format!("tolerance must lie in (0, 1), got {tol}")));
        }
        Ok(McConfig { tol, ..self })
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, sigma: 0.0 }
    }

    /// `a·self + b`.
    pub fn affine(self, a: f64, b: f64) -> Self {
        Estimate { value: a * self.value + b, sigma: a.abs() * self.sigma }
    }

    /// Sum with independent errors added in quadrature.
    pub fn plus(self, other: Estimate) -> Self {
        Estimate { value: self.value + other.value, sigma: self.sigma.hypot(other.sigma) }
    }

    pub fn agrees_with(&self, target: f64, sigmas: f64, abs: f64) -> bool {
        (self.value - target).abs() <= sigmas * self.sigma + abs
    }
}

/// Generator of the `d`-dimensional Kronecker sequence: powers of the
/// inverse of the positive root of `x^{d+1} = x + 1`.
fn kronecker_step(d: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|k| phi.powi(-(k as i32)).fract()).collect()
}

fn batch_mean<F>(dim: usize, count: usize, seed: u64, batch: usize, f: &F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let step = kronecker_step(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let mut u = vec![0.0; dim];
    let (mut sum, mut used) = (0.0, 0usize);
    for k in 0..count {
        for i in 0..dim {
            u[i] = (shift[i] + k as f64 * step[i]).fract();
        }
        let v = f(&u);
        // The integrands have integrable log singularities; a sample landing
        // exactly on one carries no weight.
        if v.is_finite() {
            sum += v;
            used += 1;
        }
    }
    sum / used.max(1) as f64
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Estimates `∫_{[0,1]^dim} f`. The value is the median of group means and
/// `σ` the spread of the batch means over `√batches`.
pub fn integrate<F>(dim: usize, mc: &McConfig, f: F) -> Estimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let b = mc.batches;
    let means: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|i| {
            let count = mc.samples / b + usize::from(i < mc.samples % b);
            batch_mean(dim, count, mc.seed, i, &f)
        })
        .collect();
    let groups: Vec<f64> = (0..GROUPS)
        .map(|g| {
            let part = &means[g * b / GROUPS..(g + 1) * b / GROUPS];
            part.iter().sum::<f64>() / part.len() as f64
        })
        .collect();
    let mean = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    Estimate { value: median(groups), sigma: (var / b as f64).sqrt() }
}
