//! A fully reduced physical configuration: plate, sphere and temperature
//! expressed through the ratios λ_γ/λ_p, λ₀/λ_p and λ_T/λ_p.

use serde::{Deserialize, Serialize};

use crate::electrodynamics::{Medium, Sphere};
use crate::error::{Error, Result};
use crate::units::{
    fluctuation_prefactor, DerivedScales, Environment, Model, SphereSpec, CONSTANTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub medium: Medium,
    pub sphere: Sphere,
    /// λ_T/λ_p, absent at T = 0.
    pub lambda_t: Option<f64>,
    /// (2πλ_F)²ℓ/(λ_γ²λ_p) when a concrete material is known.
    pub prefactor: Option<f64>,
}

impl Configuration {
    /// Configuration from length ratios alone; `lambda_gamma` = λ_γ/λ_p
    /// (infinite for γ = 0), `lambda0` = λ₀/λ_p.
    pub fn from_ratios(lambda_gamma: f64, model: Model, lambda0: f64) -> Result<Self> {
        if !(lambda_gamma > 0.0) {
            return Err(Error::Configuration(format!("lambda_gamma/lambda_p must be > 0, got {lambda_gamma}")));
        }
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::Configuration(format!("lambda_0/lambda_p must be > 0, got {lambda0}")));
        }
        Ok(Self {
            medium: Medium::with_model(1.0 / lambda_gamma, model),
            sphere: Sphere::with_wavelength_ratio(lambda0)?,
            lambda_t: None,
            prefactor: None,
        })
    }

    /// Reduces SI material, sphere and environment data.
    pub fn from_physical(scales: &DerivedScales, sphere: &SphereSpec, environment: &Environment) -> Result<Self> {
        let alpha0 = sphere.alpha0 / (CONSTANTS.eps0 * scales.lambda_p.powi(3));
        Ok(Self {
            medium: Medium::from_scales(scales),
            sphere: Sphere::new(alpha0, sphere.omega0 / scales.omega_p)?,
            lambda_t: environment.thermal_wavelength().map(|l| l / scales.lambda_p),
            prefactor: Some(fluctuation_prefactor(scales)),
        })
    }

    /// Sets λ_T/λ_p; `None` means T = 0.
    pub fn with_thermal_wavelength(self, lambda_t: Option<f64>) -> Result<Self> {
        if let Some(l) = lambda_t {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Configuration(format!("lambda_T/lambda_p must be > 0, got {l}")));
            }
        }
        Ok(Self { lambda_t, ..self })
    }

    pub fn with_prefactor(self, prefactor: f64) -> Self {
        Self { prefactor: Some(prefactor), ..self }
    }

    pub fn with_model(self, model: Model) -> Self {
        Self { medium: Medium { model, ..self.medium }, ..self }
    }

    /// λ_γ/λ_p = ω_p/γ.
    pub fn lambda_gamma(&self) -> f64 {
        1.0 / self.medium.gamma
    }

    /// λ₀/λ_p.
    pub fn lambda0(&self) -> f64 {
        1.0 / self.sphere.omega0
    }
}
