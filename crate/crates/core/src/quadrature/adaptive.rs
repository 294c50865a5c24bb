//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::convert::Infallible;

use super::{QuadResult, ERROR_FLOOR};

// Kronrod abscissae (non-negative half); odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    /// Absolute tolerance; the target is max(abs_tol, rel_tol·|I|).
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl AdaptiveOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self { rel_tol, abs_tol: 0.0, max_intervals: 2000 }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<(f64, f64), E> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    Ok((value, err))
}

/// Adaptive bisection on [a, b] until the summed |Kronrod − Gauss| error
/// meets the tolerance, or the interval budget is exhausted.
pub fn try_integrate_adaptive_1d<E>(
    f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    opts: AdaptiveOptions,
) -> Result<QuadResult, E> {
    Ok(adaptive_traced(f, a, b, opts)?.0)
}

/// Same as [`try_integrate_adaptive_1d`], also returning the estimate
/// before the last refinement step.
pub(crate) fn adaptive_traced<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    opts: AdaptiveOptions,
) -> Result<(QuadResult, f64), E> {
    let (v, e) = gk15(&mut f, a, b)?;
    let mut n_evals = 15u64;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, err: e });
    let mut total = v;
    let mut total_err = e;
    let mut previous = f64::NAN;

    let target = |total: f64| opts.abs_tol.max(opts.rel_tol * total.abs().max(ERROR_FLOOR));
    while total_err > target(total) && heap.len() < opts.max_intervals {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        n_evals += 30;
        previous = total;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
    }
    // re-sum to shed accumulated rounding from the running updates
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let err_est: f64 = heap.iter().map(|s| s.err).sum();
    let converged = err_est <= target(value);
    if !converged {
        log::debug!("adaptive quadrature stopped at {value:e} (previous {previous:e}), err {err_est:e}");
    }
    Ok((QuadResult { value, err_est, n_evals, converged }, previous))
}

pub fn integrate_adaptive_1d(f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> QuadResult {
    let mut f = f;
    let r: Result<_, Infallible> =
        try_integrate_adaptive_1d(|x| Ok(f(x)), a, b, AdaptiveOptions::relative(rel_tol));
    match r {
        Ok(r) => r,
        Err(never) => match never {},
    }
}

/// ∫₀^∞ f(x) dx through x = s·t/(1 − t), t ∈ [0, 1).
pub fn try_integrate_semi_infinite<E>(
    f: impl FnMut(f64) -> Result<f64, E>,
    scale: f64,
    opts: AdaptiveOptions,
) -> Result<QuadResult, E> {
    Ok(semi_infinite_traced(f, scale, opts)?.0)
}

pub(crate) fn semi_infinite_traced<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    scale: f64,
    opts: AdaptiveOptions,
) -> Result<(QuadResult, f64), E> {
    adaptive_traced(
        |t| {
            let one_minus = 1.0 - t;
            let x = scale * t / one_minus;
            let jac = scale / (one_minus * one_minus);
            let v = f(x)?;
            Ok(if v == 0.0 { 0.0 } else { v * jac })
        },
        0.0,
        1.0,
        opts,
    )
}

pub fn integrate_semi_infinite(f: impl FnMut(f64) -> f64, scale: f64, rel_tol: f64) -> QuadResult {
    let mut f = f;
    let r: Result<_, Infallible> =
        try_integrate_semi_infinite(|x| Ok(f(x)), scale, AdaptiveOptions::relative(rel_tol));
    match r {
        Ok(r) => r,
        Err(never) => match never {},
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn check(r: QuadResult, exact: f64, tol: f64) {
        assert!(r.converged, "{r:?}");
        assert!((r.value - exact).abs() <= tol * exact.abs(), "{} vs {exact}", r.value);
    }

    #[test]
    fn polynomial() {
        check(integrate_adaptive_1d(|x| x * x, 0.0, 1.0, 1e-10), 1.0 / 3.0, 1e-10);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate_adaptive_1d(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-8);
        check(r, 2.0, 1e-8);
        assert!(r.n_evals > 15);
    }

    #[test]
    fn sine() {
        check(integrate_adaptive_1d(f64::sin, 0.0, PI, 1e-12), 2.0, 1e-12);
    }

    #[test]
    fn semi_infinite_examples() {
        check(integrate_semi_infinite(|x| (-x).exp(), 1.0, 1e-10), 1.0, 1e-10);
        check(integrate_semi_infinite(|x| x * (-x / 5.0).exp(), 5.0, 1e-10), 25.0, 1e-10);
        check(integrate_semi_infinite(|x| (-x * x).exp(), 1.0, 1e-10), PI.sqrt() / 2.0, 1e-10);
    }

    #[test]
    fn transform_is_scale_exact() {
        let reference = integrate_semi_infinite(|x| (-x).exp(), 1.0, 1e-12);
        for k in -3..=3 {
            let s = 10f64.powi(k);
            let r = integrate_semi_infinite(|x| (-x / s).exp(), s, 1e-12);
            assert!((r.value / s - reference.value).abs() < 1e-14);
            assert!((r.value / s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let r = try_integrate_adaptive_1d::<Infallible>(
            |x| Ok((1.0 / x).sin() / x),
            1e-6,
            1.0,
            AdaptiveOptions { rel_tol: 1e-14, abs_tol: 0.0, max_intervals: 8 },
        )
        .unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn errors_propagate() {
        let r = try_integrate_adaptive_1d(
            |x| if x > 0.5 { Err("boom") } else { Ok(x) },
            0.0,
            1.0,
            AdaptiveOptions::relative(1e-8),
        );
        assert_eq!(r.unwrap_err(), "boom");
    }
}
