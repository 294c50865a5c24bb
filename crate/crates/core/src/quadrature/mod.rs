//! Integration machinery shared by the mean-potential and variance engines.

mod adaptive;
mod double_sum;
pub mod gauss;
mod monte_carlo;
pub mod philox;

pub(crate) use adaptive::semi_infinite_traced;
pub use adaptive::{
    integrate_adaptive_1d, integrate_semi_infinite, try_integrate_adaptive_1d,
    try_integrate_semi_infinite, AdaptiveOptions,
};
pub use double_sum::{double_sum_adaptive, DoubleSumOptions};
pub use monte_carlo::{mc_integrate, McAccumulator, McPlan, StratumStats, MIN_SAMPLES};

use serde::{Deserialize, Serialize};

/// Relative tolerances are measured against max(|value|, ERROR_FLOOR).
pub const ERROR_FLOOR: f64 = 1e-30;

/// Outcome of any integration routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    /// Absolute error estimate (1σ for Monte Carlo).
    pub err_est: f64,
    pub n_evals: u64,
    pub converged: bool,
}

impl QuadResult {
    pub fn exact(value: f64) -> Self {
        Self { value, err_est: 0.0, n_evals: 0, converged: true }
    }

    pub fn relative_error(&self) -> f64 {
        self.err_est / self.value.abs().max(ERROR_FLOOR)
    }

    pub fn meets(&self, rel_tol: f64) -> bool {
        self.err_est <= rel_tol * self.value.abs().max(ERROR_FLOOR)
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self { value: self.value * factor, err_est: self.err_est * factor.abs(), ..self }
    }
}
