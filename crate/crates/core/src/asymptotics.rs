//! Closed-form asymptotic laws for Ū and F, and the fits used to compare
//! computed points against them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::units::REDUCED_LIGHT_SPEED as C;
use crate::variance::FPoint;

/// F(z/λ_p)⁴ in λ_p ≪ z ≪ λ_γ.
pub const C1: f64 = 8.0e-5;
/// F(λ_γ/λ_p)⁴(z/λ_γ)^{9/2} for z ≫ λ_γ.
pub const C2: f64 = 3.9e-5;
/// Amplitude of the thermal law.
pub const C3: f64 = 115.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AsymptoteKind {
    MeanRetarded,
    MeanThermal,
    FNear,
    FIntermediate,
    FFar,
    FThermal,
}

impl AsymptoteKind {
    pub const ALL: [AsymptoteKind; 6] = [
        Self::MeanRetarded,
        Self::MeanThermal,
        Self::FNear,
        Self::FIntermediate,
        Self::FFar,
        Self::FThermal,
    ];

    /// Constant multiplying the law, if it has one.
    pub fn constant(self) -> Option<f64> {
        match self {
            Self::FIntermediate => Some(C1),
            Self::FFar => Some(C2),
            Self::FThermal => Some(C3),
            _ => None,
        }
    }
}

impl std::str::FromStr for AsymptoteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "meanretarded" => Ok(Self::MeanRetarded),
            "meanthermal" => Ok(Self::MeanThermal),
            "fnear" | "near" => Ok(Self::FNear),
            "fintermediate" | "intermediate" => Ok(Self::FIntermediate),
            "ffar" | "far" => Ok(Self::FFar),
            "fthermal" | "thermal" => Ok(Self::FThermal),
            _ => Err(Error::Configuration(format!("unknown asymptote '{s}'"))),
        }
    }
}

impl std::fmt::Display for AsymptoteKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::MeanRetarded => "mean-retarded",
            Self::MeanThermal => "mean-thermal",
            Self::FNear => "f-near",
            Self::FIntermediate => "f-intermediate",
            Self::FFar => "f-far",
            Self::FThermal => "f-thermal",
        })
    }
}

fn thermal_wavelength(config: &Configuration) -> Result<f64> {
    config
        .lambda_t
        .ok_or_else(|| Error::Domain("thermal asymptote requested at T = 0".into()))
}

/// Shape of the law with its constant set to 1.
fn unit_law(kind: AsymptoteKind, z: f64, config: &Configuration) -> Result<f64> {
    match kind {
        AsymptoteKind::FIntermediate => Ok(z.powi(-4)),
        AsymptoteKind::FFar => {
            let lg = config.lambda_gamma();
            Ok(lg.powi(-4) * (lg / z).powf(4.5))
        }
        AsymptoteKind::FThermal => {
            let lt = thermal_wavelength(config)?;
            let lg = config.lambda_gamma();
            Ok(lt.powi(-4) * (1.0 + lt / lg).powf(-0.5) * (z / lt).powi(3) * (-8.0 * PI * z / lt).exp())
        }
        AsymptoteKind::FNear => Err(Error::Domain("the near-field law has no known constant".into())),
        _ => Err(Error::Domain(format!("{kind} is not an F asymptote"))),
    }
}

/// F asymptote at z/λ_p.
#[allow(non_snake_case)]
pub fn asymptote_F(kind: AsymptoteKind, z: f64, config: &Configuration) -> Result<f64> {
    let c = kind
        .constant()
        .ok_or_else(|| Error::Domain(format!("{kind} has no F constant")))?;
    Ok(c * unit_law(kind, z, config)?)
}

/// Mean-potential asymptote at z/λ_p in units of ħω_p.
pub fn asymptote_mean(kind: AsymptoteKind, z: f64, config: &Configuration) -> Result<f64> {
    let alpha0 = config.sphere.alpha0;
    match kind {
        AsymptoteKind::MeanRetarded => Ok(-3.0 * C * alpha0 / (32.0 * PI * PI * z.powi(4))),
        AsymptoteKind::MeanThermal => {
            let lt = thermal_wavelength(config)?;
            Ok(-C * alpha0 / (16.0 * PI * lt * z.powi(3)))
        }
        _ => Err(Error::Domain(format!("{kind} is not a mean-potential asymptote"))),
    }
}

/// z/λ_p where the intermediate and far laws cross: λ_γ(c2/c1)².
pub fn crossover_distance(lambda_gamma: f64) -> f64 {
    lambda_gamma * (C2 / C1).powi(2)
}

/// Straight-line fit y = intercept + slope·x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub slope_err: f64,
    pub intercept: f64,
    pub intercept_err: f64,
    pub n_points: usize,
}

/// Weighted least squares with weights 1/σ²; with any σ = 0 the fit is
/// unweighted and the errors come from the residual scatter.
pub fn fit_linear(x: &[f64], y: &[f64], sigma: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 3 || y.len() != n || sigma.len() != n {
        return Err(Error::Domain(format!("a fit needs at least 3 matched points, got {n}")));
    }
    let weighted = sigma.iter().all(|s| *s > 0.0 && s.is_finite());
    let w: Vec<f64> = if weighted { sigma.iter().map(|s| 1.0 / (s * s)).collect() } else { vec![1.0; n] };
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let xm = sx / sw;
    let ym = sy / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * (x - xm) * (y - ym)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let (slope_var, intercept_var) = if weighted {
        (1.0 / sxx, 1.0 / sw + xm * xm / sxx)
    } else {
        let rss: f64 = x.iter().zip(y).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let s2 = rss / (n - 2) as f64;
        (s2 / sxx, s2 * (1.0 / sw + xm * xm / sxx))
    };
    Ok(LinearFit { slope, slope_err: slope_var.sqrt(), intercept, intercept_err: intercept_var.sqrt(), n_points: n })
}

/// Slope of ln F against ln z over points with z in `window` (inclusive).
/// Non-positive F values are dropped with a warning.
pub fn fit_loglog_slope(points: &[(f64, f64, f64)], window: (f64, f64)) -> Result<LinearFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut s = Vec::new();
    for &(z, f, err) in points.iter().filter(|p| p.0 >= window.0 && p.0 <= window.1) {
        if !(f > 0.0) {
            log::warn!("dropping non-positive F = {f:e} at z = {z} from the log-log fit");
            continue;
        }
        x.push(z.ln());
        y.push(f.ln());
        s.push(err / f);
    }
    if x.len() < 3 {
        return Err(Error::Domain(format!("only {} usable points in the fit window", x.len())));
    }
    fit_linear(&x, &y, &s)
}

/// Stored constant against the value refitted from computed points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub kind: AsymptoteKind,
    pub reference: f64,
    pub fitted: f64,
    pub fitted_err: f64,
    pub ratio: f64,
}

/// Refits the constant of `kind` as the error-weighted mean of F/law over
/// `points`. The stored constants are never modified.
pub fn calibrate(kind: AsymptoteKind, points: &[FPoint], config: &Configuration) -> Result<CalibrationEntry> {
    let reference = kind
        .constant()
        .ok_or_else(|| Error::Domain(format!("{kind} has no constant to calibrate")))?;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut plain = Vec::new();
    for p in points {
        let law = unit_law(kind, p.z, config)?;
        let v = p.f / law;
        let e = p.f_err / law;
        plain.push(v);
        if e > 0.0 {
            num += v / (e * e);
            den += 1.0 / (e * e);
        }
    }
    if plain.is_empty() {
        return Err(Error::Domain("no points to calibrate against".into()));
    }
    let (fitted, fitted_err) = if den > 0.0 {
        (num / den, den.powf(-0.5))
    } else {
        (plain.iter().sum::<f64>() / plain.len() as f64, 0.0)
    };
    Ok(CalibrationEntry { kind, reference, fitted, fitted_err, ratio: fitted / reference })
}
