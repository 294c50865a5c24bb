//! Anti-diagonal summation of doubly infinite series Σ_{n,m} t(n, m).

use super::QuadResult;

const ZERO_RUN_LIMIT: u32 = 16;

#[derive(Debug, Clone, Copy)]
pub struct DoubleSumOptions {
    /// First index for both n and m.
    pub start: u32,
    /// Stop once an anti-diagonal contributes less than this fraction of
    /// the running total, twice in a row.
    pub tail_tol: f64,
    /// Largest n + m examined before giving up.
    pub max_rank: u32,
    /// t(n, m) = t(m, n): evaluate n ≤ m only and double off-diagonal terms.
    pub symmetric: bool,
}

impl DoubleSumOptions {
    pub fn new(tail_tol: f64) -> Self {
        Self { start: 0, tail_tol, max_rank: 4096, symmetric: false }
    }

    pub fn starting_at(self, start: u32) -> Self {
        Self { start, ..self }
    }

    pub fn symmetric(self) -> Self {
        Self { symmetric: true, ..self }
    }
}

/// Sums `term` by anti-diagonals n + m = r. Each term's `err_est` is
/// combined in quadrature; the geometric extrapolation of the remaining
/// anti-diagonals is added to the error budget.
pub fn double_sum_adaptive<E>(
    mut term: impl FnMut(u32, u32) -> Result<QuadResult, E>,
    opts: DoubleSumOptions,
) -> Result<QuadResult, E> {
    let mut total = 0.0;
    let mut var = 0.0;
    let mut n_evals = 0u64;
    let mut previous_diag: Option<f64> = None;
    let mut quiet = 0;
    let mut rank = 2 * opts.start;
    let mut zero_run = 0;

    while rank <= opts.max_rank {
        let mut diag = 0.0;
        for n in opts.start..=(rank - opts.start) {
            let m = rank - n;
            if opts.symmetric && n > m {
                break;
            }
            let t = term(n, m)?;
            let weight = if opts.symmetric && n != m { 2.0 } else { 1.0 };
            diag += weight * t.value;
            var += (weight * t.err_est).powi(2);
            n_evals += t.n_evals;
        }
        total += diag;

        if total == 0.0 {
            // leading anti-diagonals may vanish identically; give up on an all-zero series late
            zero_run += 1;
            if zero_run >= ZERO_RUN_LIMIT {
                return Ok(QuadResult { value: 0.0, err_est: var.sqrt(), n_evals, converged: true });
            }
            rank += 1;
            continue;
        }
        let small = diag.abs() <= opts.tail_tol * total.abs();
        let ratio = previous_diag.map(|p| if p == 0.0 { 0.0 } else { (diag / p).abs() });
        let decaying = ratio.is_some_and(|r| r < 1.0);
        quiet = if small && (decaying || diag == 0.0) { quiet + 1 } else { 0 };
        if quiet >= 2 {
            let r = ratio.unwrap_or(0.0);
            let tail = diag.abs() * r / (1.0 - r);
            return Ok(QuadResult { value: total, err_est: var.sqrt() + tail, n_evals, converged: true });
        }
        previous_diag = Some(diag);
        rank += 1;
    }
    log::warn!("double sum reached rank cap {} without decaying", opts.max_rank);
    Ok(QuadResult { value: total, err_est: var.sqrt() + total.abs(), n_evals, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;
    use std::f64::consts::E;

    fn exact(f: impl Fn(u32, u32) -> f64) -> impl FnMut(u32, u32) -> Result<QuadResult, Infallible> {
        move |n, m| Ok(QuadResult::exact(f(n, m)))
    }

    #[test]
    fn geometric_double_sum() {
        let tol = 1e-6;
        let r = double_sum_adaptive(exact(|n, m| 0.5f64.powi((n + m) as i32)), DoubleSumOptions::new(tol).starting_at(1))
            .unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() <= tol, "{r:?}");
        assert!((r.value - 1.0).abs() <= r.err_est);
    }

    #[test]
    fn zeroed_rows_match_offset_start() {
        let tol = 1e-8;
        let f = |n: u32, m: u32| if n == 0 || m == 0 { 0.0 } else { 0.3f64.powi(n as i32) * 0.6f64.powi(m as i32) };
        let a = double_sum_adaptive(exact(f), DoubleSumOptions::new(tol)).unwrap();
        let b = double_sum_adaptive(exact(f), DoubleSumOptions::new(tol).starting_at(1)).unwrap();
        assert!((a.value - b.value).abs() <= 2.0 * tol * b.value);
    }

    #[test]
    fn exponential_double_sum() {
        let tol = 1e-7;
        let r = double_sum_adaptive(exact(|n, m| (-f64::from(n + m)).exp()), DoubleSumOptions::new(tol).starting_at(1))
            .unwrap();
        let target = (1.0 / (E - 1.0)).powi(2);
        assert!(((r.value - target) / target).abs() <= tol);
    }

    #[test]
    fn symmetric_evaluation_matches_full() {
        let f = |n: u32, m: u32| 1.0 / ((n * n + m * m + 1) as f64).powi(3);
        let mut calls = 0;
        let full = double_sum_adaptive(exact(f), DoubleSumOptions::new(1e-9).starting_at(1)).unwrap();
        let sym = double_sum_adaptive(
            |n, m| {
                calls += 1;
                Ok::<_, Infallible>(QuadResult::exact(f(n, m)))
            },
            DoubleSumOptions::new(1e-9).starting_at(1).symmetric(),
        )
        .unwrap();
        assert!(((full.value - sym.value) / full.value).abs() < 1e-12);
        assert!(calls > 0);
    }

    #[test]
    fn identically_zero_series() {
        let r = double_sum_adaptive(exact(|_, _| 0.0), DoubleSumOptions::new(1e-6)).unwrap();
        assert!(r.converged);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn non_decaying_series_is_flagged() {
        let mut opts = DoubleSumOptions::new(1e-6).starting_at(1);
        opts.max_rank = 40;
        let r = double_sum_adaptive(exact(|_, _| 1.0), opts).unwrap();
        assert!(!r.converged);
    }
}
