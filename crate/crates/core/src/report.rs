//! Tabular output of evaluated points and z-grids.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::variance::FPoint;

pub const CSV_HEADER: [&str; 8] =
    ["z_over_lambda_p", "F", "F_err", "n_samples", "regime", "U_mean", "prefactor", "fingerprint"];

/// Decimal scientific notation with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

/// [`sig12`], empty for `None`.
pub fn opt12(x: Option<f64>) -> String {
    x.map(sig12).unwrap_or_default()
}

/// Extra trailing columns, written after the fixed schema.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtraColumns {
    pub names: Vec<String>,
    /// One row of preformatted cells per point.
    pub rows: Vec<Vec<String>>,
}

/// CSV text for `points`, every row stamped with `fingerprint`.
pub fn f_points_csv(points: &[FPoint], fingerprint: &str, extra: Option<&ExtraColumns>) -> Result<String> {
    let unsafe_cell = |c: &str| c.contains([',', '\n', '"']);
    if unsafe_cell(fingerprint) {
        return Err(Error::Configuration(format!("fingerprint '{fingerprint}' is not CSV-safe")));
    }
    if let Some(e) = extra {
        if e.rows.len() != points.len() || e.rows.iter().any(|r| r.len() != e.names.len()) {
            return Err(Error::Configuration("extra columns do not match the points".into()));
        }
        if e.names.iter().chain(e.rows.iter().flatten()).any(|c| unsafe_cell(c)) {
            return Err(Error::Configuration("extra cells must not contain commas, quotes or newlines".into()));
        }
    }
    let mut out = CSV_HEADER.join(",");
    if let Some(e) = extra {
        for n in &e.names {
            out.push(',');
            out.push_str(n);
        }
    }
    out.push('\n');
    for (i, p) in points.iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{}",
            sig12(p.z),
            sig12(p.f),
            sig12(p.f_err),
            p.n_samples,
            p.regime,
            sig12(p.u_mean),
            opt12(p.prefactor),
            fingerprint
        );
        if let Some(e) = extra {
            for v in &e.rows[i] {
                out.push(',');
                out.push_str(v);
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// `points` values from `min` to `max`, logarithmically or linearly spaced.
pub fn z_grid(min: f64, max: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::Configuration("the z-grid is empty".into()));
    }
    if !(min > 0.0 && max.is_finite() && max >= min) || (points > 1 && max == min) {
        return Err(Error::Configuration(format!("bad z-grid [{min}, {max}] with {points} points")));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let step = |i: usize| i as f64 / (points - 1) as f64;
    let mut g: Vec<f64> = (0..points)
        .map(|i| if log { (min.ln() + step(i) * (max / min).ln()).exp() } else { min + step(i) * (max - min) })
        .collect();
    g[0] = min;
    g[points - 1] = max;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variance::RegimeTag;

    fn point(z: f64) -> FPoint {
        FPoint {
            z,
            f: 1.0 / 3.0,
            f_err: 2.5e-7,
            n_samples: 1000,
            regime: RegimeTag::Intermediate,
            u_mean: -1.234e-9,
            prefactor: None,
            converged: true,
        }
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(sig12(-2.0e-20), "-2.00000000000e-20");
        let back: f64 = sig12(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn header_and_rows() {
        let csv = f_points_csv(&[point(3.0), point(4.0)], "abc", None).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "z_over_lambda_p,F,F_err,n_samples,regime,U_mean,prefactor,fingerprint");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "3.00000000000e0,3.33333333333e-1,2.50000000000e-7,1000,intermediate,-1.23400000000e-9,,abc");
    }

    #[test]
    fn extra_columns_follow_the_schema() {
        let extra = ExtraColumns { names: vec!["asym".into()], rows: vec![vec![sig12(2.0)], vec![opt12(None)]] };
        let csv = f_points_csv(&[point(1.0), point(2.0)], "f", Some(&extra)).unwrap();
        assert!(csv.starts_with("z_over_lambda_p,F,F_err,n_samples,regime,U_mean,prefactor,fingerprint,asym\n"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",f,2.00000000000e0"));
        assert!(csv.lines().nth(2).unwrap().ends_with(",f,"));
        let bad = ExtraColumns { names: vec!["asym".into()], rows: vec![] };
        assert!(f_points_csv(&[point(1.0)], "f", Some(&bad)).is_err());
        assert!(f_points_csv(&[point(1.0)], "a,b", None).is_err());
    }

    #[test]
    fn grids() {
        let g = z_grid(3.0, 30.0, 5, true).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!((g[0], g[4]), (3.0, 30.0));
        assert!((g[2] - 90f64.sqrt()).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(z_grid(1.0, 2.0, 3, false).unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(z_grid(5.0, 5.0, 1, true).unwrap(), vec![5.0]);
        assert!(z_grid(1.0, 2.0, 0, true).is_err());
        assert!(z_grid(-1.0, 2.0, 3, true).is_err());
        assert!(z_grid(2.0, 1.0, 3, true).is_err());
        assert!(z_grid(2.0, 2.0, 3, true).is_err());
    }
}
