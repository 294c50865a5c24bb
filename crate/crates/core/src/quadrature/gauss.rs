//! Gauss–Legendre nodes and tensor-product rules.
//!
//! Used as a deterministic reference for the Monte Carlo engine; nothing in
//! the production integration path depends on it.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1],
/// by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Tensor-product Gauss rule over the box ∏ [lo_i, hi_i] with `orders[i]`
/// points along axis i.
pub fn product_gauss(f: impl Fn(&[f64]) -> f64, bounds: &[(f64, f64)], orders: &[usize]) -> f64 {
    assert_eq!(bounds.len(), orders.len());
    let rules: Vec<(Vec<f64>, Vec<f64>)> = bounds
        .iter()
        .zip(orders)
        .map(|(&(lo, hi), &n)| {
            let (x, w) = gauss_legendre(n);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            (x.iter().map(|t| mid + half * t).collect(), w.iter().map(|wi| wi * half).collect())
        })
        .collect();
    let dim = bounds.len();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        for d in 0..dim {
            point[d] = rules[d].0[idx[d]];
            weight *= rules[d].1[idx[d]];
        }
        total += weight * f(&point);
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < orders[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == dim {
                return total;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((s - exact).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn product_rule_on_a_box() {
        let v = product_gauss(|p| p[0] * p[1] * p[1] + p[2], &[(0.0, 1.0), (0.0, 2.0), (-1.0, 1.0)], &[3, 3, 2]);
        // ∫x dx · ∫y² dy · 2 + 0 = 0.5 · 8/3 · 2
        assert!((v - 8.0 / 3.0).abs() < 1e-12);
    }
}
