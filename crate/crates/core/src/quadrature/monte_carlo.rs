//! Seeded, stratified Monte Carlo over the unit hypercube.
//!
//! The integrand receives a point u ∈ (0, 1)^dim and is responsible for
//! mapping it onto the physical domain and dividing by the importance
//! density. The first coordinate is stratified into `n_strata` equal slabs;
//! sample `i` lands in stratum `i mod n_strata`. Draws come from Philox
//! keyed by the seed and countered by the global sample index, so a chunk
//! partition never changes which numbers a sample sees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::philox::SampleStream;
use super::{QuadResult, ERROR_FLOOR};
use crate::error::{Error, Result};

pub const MIN_SAMPLES: u64 = 10_000;
const CHUNK: u64 = 8192;
const MAX_DIM: usize = 16;

/// Sampling plan. Importance scales are multipliers on the natural
/// momentum (1/z) and frequency (c/z) scales chosen by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPlan {
    pub seed: u64,
    pub n_samples: u64,
    pub n_strata: u32,
    pub momentum_scale: f64,
    pub frequency_scale: f64,
    /// Weight of the wide exponential component of each magnitude density.
    pub tail_weight: f64,
    /// Mean of the wide component relative to the main one.
    pub tail_factor: f64,
    /// Flag results whose 1σ relative error exceeds this.
    pub rel_tol: Option<f64>,
}

impl McPlan {
    pub fn new(seed: u64, n_samples: u64) -> Result<Self> {
        let plan = Self {
            seed,
            n_samples,
            n_strata: 16,
            momentum_scale: 1.0,
            frequency_scale: 1.0,
            tail_weight: 0.25,
            tail_factor: 10.0,
            rel_tol: None,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::Configuration(format!(
                "Monte Carlo plan needs at least {MIN_SAMPLES} samples, got {}",
                self.n_samples
            )));
        }
        if self.n_strata == 0 || u64::from(self.n_strata) * 2 > self.n_samples {
            return Err(Error::Configuration(format!(
                "n_strata = {} is incompatible with {} samples",
                self.n_strata, self.n_samples
            )));
        }
        if !(self.tail_weight >= 0.0 && self.tail_weight < 1.0 && self.tail_factor >= 1.0) {
            return Err(Error::Configuration("importance tail must have weight in [0, 1) and factor >= 1".into()));
        }
        if !(self.momentum_scale > 0.0 && self.frequency_scale > 0.0) {
            return Err(Error::Configuration("importance scales must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_samples(self, n_samples: u64) -> Self {
        Self { n_samples, ..self }
    }
}

/// Running mean and squared deviation of one stratum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StratumStats {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl StratumStats {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &StratumStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += d * nb / n as f64;
        self.m2 += other.m2 + d * d * na * nb / n as f64;
        self.n = n;
    }
}

/// Per-stratum sufficient statistics. Merging is associative, so chunk
/// results (or whole runs with different seeds) combine in any grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McAccumulator {
    pub strata: Vec<StratumStats>,
}

impl McAccumulator {
    pub fn new(n_strata: u32) -> Self {
        Self { strata: vec![StratumStats::default(); n_strata as usize] }
    }

    pub fn merge(&mut self, other: &McAccumulator) {
        assert_eq!(self.strata.len(), other.strata.len(), "stratum layouts differ");
        for (a, b) in self.strata.iter_mut().zip(&other.strata) {
            a.merge(b);
        }
    }

    pub fn n_samples(&self) -> u64 {
        self.strata.iter().map(|s| s.n).sum()
    }

    /// Stratified estimate Σ_h mean_h/H with variance Σ_h s_h²/(n_h H²).
    pub fn result(&self, rel_tol: Option<f64>) -> QuadResult {
        let h = self.strata.len() as f64;
        let mut value = 0.0;
        let mut var = 0.0;
        for s in &self.strata {
            value += s.mean / h;
            if s.n > 1 {
                var += s.m2 / (s.n - 1) as f64 / s.n as f64 / (h * h);
            }
        }
        let err_est = var.sqrt();
        let converged = rel_tol.map_or(true, |t| err_est <= t * value.abs().max(ERROR_FLOOR));
        QuadResult { value, err_est, n_evals: self.n_samples(), converged }
    }
}

fn run_chunk<F>(f: &F, dim: usize, plan: &McPlan, start: u64, end: u64) -> Result<McAccumulator>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let h = u64::from(plan.n_strata);
    let mut acc = McAccumulator::new(plan.n_strata);
    let mut u = [0.0; MAX_DIM];
    let u = &mut u[..dim];
    for i in start..end {
        SampleStream::new(plan.seed, i, 0).fill(u);
        let stratum = i % h;
        u[0] = (stratum as f64 + u[0]) / h as f64;
        let v = f(u)?;
        if !v.is_finite() {
            return Err(Error::NonFinite { coordinates: u.to_vec() });
        }
        acc.strata[stratum as usize].push(v);
    }
    Ok(acc)
}

/// Accumulates the plan's samples without reducing them to an estimate.
pub(crate) fn mc_accumulate<F>(f: F, dim: usize, plan: &McPlan) -> Result<McAccumulator>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    plan.validate()?;
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Configuration(format!("unsupported Monte Carlo dimension {dim}")));
    }
    let n_chunks = plan.n_samples.div_ceil(CHUNK);
    let chunks: Vec<McAccumulator> = (0..n_chunks)
        .into_par_iter()
        .map(|k| run_chunk(&f, dim, plan, k * CHUNK, ((k + 1) * CHUNK).min(plan.n_samples)))
        .collect::<Result<_>>()?;
    // fixed left fold keeps the result bit-identical for any thread count
    let mut total = McAccumulator::new(plan.n_strata);
    for c in &chunks {
        total.merge(c);
    }
    Ok(total)
}

/// Stratified importance-sampled estimate of ∫_{(0,1)^dim} f(u) du.
pub fn mc_integrate<F>(f: F, dim: usize, plan: &McPlan) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    Ok(mc_accumulate(f, dim, plan)?.result(plan.rel_tol))
}
