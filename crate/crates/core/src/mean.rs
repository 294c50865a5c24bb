//! Mean Casimir–Polder potential of the sphere above a specular plate.
//!
//! In reduced units (energies in ħω_p)
//!
//! Ū(z) = (1/c²) ∫₀^∞ dξ/2π ∫₀^∞ q dq/2π  ξ²α(iξ) e^{−2κz}/(2κ) Σ_p (ε_p⁺·ε_p⁻) r_p,
//!
//! and at finite temperature ∫dξ/2π → (1/(2πλ_T)) Σ'_n over ξ_n = n/λ_T.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::electrodynamics::{check_frequency, polarization_dot, LayerResponse, Medium, Polarization, Sphere, TransverseMode};
use crate::error::{Error, Result};
use crate::quadrature::{semi_infinite_traced, AdaptiveOptions, QuadResult};
use crate::units::REDUCED_LIGHT_SPEED as C;

const RESIDUE_LIMIT: f64 = 1e-10;
const MAX_MATSUBARA_TERMS: u32 = 1_000_000;

/// What reflects: a material plate, or the ideal mirror r_TE = −1, r_TM = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Surface {
    Material(Medium),
    PerfectMirror,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanPotentialRequest {
    /// z/λ_p.
    pub z: f64,
    pub surface: Surface,
    pub sphere: Sphere,
    /// λ_T/λ_p; `None` at T = 0.
    pub lambda_t: Option<f64>,
    pub tolerance: f64,
}

impl MeanPotentialRequest {
    pub fn new(config: &Configuration, z: f64, tolerance: f64) -> Self {
        Self { z, surface: Surface::Material(config.medium), sphere: config.sphere, lambda_t: config.lambda_t, tolerance }
    }

    pub fn perfect_mirror(self) -> Self {
        Self { surface: Surface::PerfectMirror, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(Error::Domain(format!("separation must be > 0, got {}", self.z)));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 0.1) {
            return Err(Error::Configuration(format!("tolerance must lie in (0, 0.1), got {}", self.tolerance)));
        }
        Ok(())
    }
}

/// Σ_p (ε_p⁺·ε_p⁻) r_p = r_TE − r_TM (1 + 2q²c²/ξ²).
fn reflection_sum(surface: &Surface, xi: f64, q: f64) -> Result<f64> {
    let tm_dot = -(1.0 + 2.0 * q * q * C * C / (xi * xi));
    match surface {
        Surface::PerfectMirror => {
            check_frequency(xi)?;
            Ok(-1.0 + tm_dot)
        }
        Surface::Material(medium) => {
            let resp = LayerResponse::new(medium, xi, q)?;
            let sum: Complex64 = resp.r_vm(Polarization::TE) + resp.r_vm(Polarization::TM) * tm_dot;
            let residue = sum.im.abs() / sum.re.abs().max(f64::MIN_POSITIVE);
            if residue > RESIDUE_LIMIT {
                return Err(Error::ImaginaryResidue { residue });
            }
            Ok(sum.re)
        }
    }
}

/// ξ²α(iξ) e^{−2κz}/(2κ) Σ_p (ε_p⁺·ε_p⁻) r_vm,p, with the 1/c² and the
/// measures left to the caller. The dot products come from the explicit
/// vacuum polarization vectors.
pub fn mean_integrand(xi: f64, q: f64, z: f64, medium: &Medium, sphere: &Sphere) -> Result<f64> {
    let resp = LayerResponse::new(medium, xi, q)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for pol in Polarization::ALL {
        let mode = TransverseMode::new(q, 0.0, pol);
        sum += polarization_dot(&mode, &mode, xi)? * resp.r_vm(pol);
    }
    let residue = sum.im.abs() / sum.re.abs().max(f64::MIN_POSITIVE);
    if residue > RESIDUE_LIMIT {
        return Err(Error::ImaginaryResidue { residue });
    }
    let kappa = resp.kappa;
    Ok(xi * xi * sphere.polarizability(xi) * (-2.0 * kappa * z).exp() / (2.0 * kappa) * sum.re)
}

/// e^{2ξz/c} ∫ q dq/2π ξ²α e^{−2κz}/(2κ) Σ, integrated over κ − ξ/c.
fn scaled_inner(req: &MeanPotentialRequest, xi: f64, rel_tol: f64) -> Result<QuadResult> {
    let k0 = xi / C;
    let z = req.z;
    let alpha = req.sphere.polarizability(xi);
    let (r, previous) = semi_infinite_traced(
        |t| {
            // q dq = κ dκ, and κ·1/(2κ) = 1/2
            let q = (t * (t + 2.0 * k0)).sqrt();
            let s = reflection_sum(&req.surface, xi, q)?;
            Ok::<_, Error>(xi * xi * alpha * 0.5 * (-2.0 * t * z).exp() * s / (2.0 * std::f64::consts::PI))
        },
        1.0 / z,
        AdaptiveOptions::relative(rel_tol),
    )?;
    if !r.converged {
        return Err(Error::NonConvergence { last: r.value, previous });
    }
    Ok(r)
}

fn static_limit(req: &MeanPotentialRequest) -> f64 {
    // ξ → 0: ξ² r_TE → 0 and r_TM → 1 for any conductor, leaving
    // ∫ q dq/2π e^{−2qz}/(2q) (−2q²c²α(0)) = −c²α(0)/(8πz³)
    let reflects = match req.surface {
        Surface::PerfectMirror => true,
        Surface::Material(m) => m.strength > 0.0,
    };
    if reflects {
        -C * C * req.sphere.alpha0 / (8.0 * std::f64::consts::PI * req.z.powi(3))
    } else {
        0.0
    }
}

/// Ū(z) at T = 0 in units of ħω_p.
#[allow(non_snake_case)]
pub fn mean_cp_T0(req: &MeanPotentialRequest) -> Result<QuadResult> {
    req.validate()?;
    let z = req.z;
    let inner_tol = 0.1 * req.tolerance;
    let mut inner_evals = 0u64;
    let (r, previous) = semi_infinite_traced(
        |xi| {
            if xi == 0.0 {
                return Ok(0.0);
            }
            let v = (-2.0 * xi * z / C).exp();
            if v == 0.0 {
                return Ok(0.0);
            }
            let inner = scaled_inner(req, xi, inner_tol)?;
            inner_evals += inner.n_evals;
            Ok::<_, Error>(v * inner.value / (2.0 * std::f64::consts::PI))
        },
        C / z,
        AdaptiveOptions::relative(0.5 * req.tolerance),
    )?;
    if !r.converged {
        return Err(Error::NonConvergence { last: r.value / (C * C), previous: previous / (C * C) });
    }
    let r = QuadResult { n_evals: r.n_evals + inner_evals, ..r };
    Ok(r.scaled(1.0 / (C * C)))
}

/// Ū(z, T) by Matsubara summation, n = 0 at half weight in closed form.
#[allow(non_snake_case)]
pub fn mean_cp_T(req: &MeanPotentialRequest) -> Result<QuadResult> {
    req.validate()?;
    let lambda_t = req
        .lambda_t
        .ok_or_else(|| Error::Domain("finite-temperature potential requested at T = 0".into()))?;
    let z = req.z;
    let zero = 0.5 * static_limit(req);
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut n_evals = 0u64;
    let mut quiet = 0;
    let mut previous_term = f64::NAN;
    for n in 1..=MAX_MATSUBARA_TERMS {
        let xi = f64::from(n) / lambda_t;
        let damping = (-2.0 * xi * z / C).exp();
        let term = if damping == 0.0 {
            QuadResult::exact(0.0)
        } else {
            scaled_inner(req, xi, 0.1 * req.tolerance)?.scaled(damping)
        };
        n_evals += term.n_evals;
        sum += term.value;
        err += term.err_est;
        let total = zero + sum;
        if term.value.abs() <= 0.1 * req.tolerance * total.abs() && term.value.abs() <= previous_term.abs() {
            quiet += 1;
            if quiet >= 2 {
                let ratio = if previous_term == 0.0 { 0.0 } else { (term.value / previous_term).abs() };
                let tail = if ratio < 1.0 { term.value.abs() * ratio / (1.0 - ratio) } else { term.value.abs() };
                let scale = 1.0 / (2.0 * std::f64::consts::PI * lambda_t * C * C);
                return Ok(QuadResult {
                    value: total * scale,
                    err_est: (err + tail) * scale,
                    n_evals,
                    converged: true,
                });
            }
        } else {
            quiet = 0;
        }
        previous_term = term.value;
    }
    Err(Error::NonConvergence { last: (zero + sum), previous: (zero + sum - previous_term) })
}

/// T = 0 or Matsubara evaluation according to the request.
pub fn mean_cp(req: &MeanPotentialRequest) -> Result<QuadResult> {
    match req.lambda_t {
        Some(_) => mean_cp_T(req),
        None => mean_cp_T0(req),
    }
}
