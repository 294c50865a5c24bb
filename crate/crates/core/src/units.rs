//! Physical constants, material parameterization and derived scales.
//!
//! Internally every computation runs in reduced units: lengths in units of
//! the plasma wavelength λ_p = 2πc/ω_p, frequencies in units of ω_p and
//! polarizabilities in units of ε₀λ_p³. The speed of light is then
//! [`REDUCED_LIGHT_SPEED`] = 1/(2π) and energies come out in units of ħω_p.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in reduced units (λ_p ω_p).
pub const REDUCED_LIGHT_SPEED: f64 = 1.0 / (2.0 * PI);

/// Fixed SI constants (CODATA 2018; exact where the SI defines them).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant [J·s].
    pub hbar: f64,
    /// Speed of light [m/s].
    pub c: f64,
    /// Vacuum permittivity [F/m].
    pub eps0: f64,
    /// Boltzmann constant [J/K].
    pub kb: f64,
    /// Electron mass [kg].
    pub me: f64,
    /// Elementary charge [C].
    pub e: f64,
}

/// ħ = 1.05457e-34, c = 2.99792e8, ε₀ = 8.85419e-12, k_B = 1.38065e-23,
/// m_e = 9.10938e-31, e = 1.60218e-19.
pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    c: 299_792_458.0,
    eps0: 8.854_187_812_8e-12,
    kb: 1.380_649e-23,
    me: 9.109_383_701_5e-31,
    e: 1.602_176_634e-19,
};

/// Permittivity model of the plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Drude,
    Plasma,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Model::Drude => f.write_str("drude"),
            Model::Plasma => f.write_str("plasma"),
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "drude" => Ok(Model::Drude),
            "plasma" => Ok(Model::Plasma),
            other => Err(Error::Configuration(format!("unknown model '{other}'"))),
        }
    }
}

/// Electron-gas description of the plate.
///
/// Either `(electron_density, mean_free_path)` or
/// `(plasma_frequency, relaxation_rate)` must be complete. When both pairs
/// are given the first one wins and the second is cross-checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    /// n [1/m³].
    pub electron_density: Option<f64>,
    /// ℓ [m].
    pub mean_free_path: Option<f64>,
    /// ω_p [rad/s].
    pub plasma_frequency: Option<f64>,
    /// γ [rad/s].
    pub relaxation_rate: Option<f64>,
    pub model: Model,
}

impl MaterialSpec {
    pub fn from_density(n: f64, mean_free_path: f64, model: Model) -> Self {
        Self {
            electron_density: Some(n),
            mean_free_path: Some(mean_free_path),
            plasma_frequency: None,
            relaxation_rate: None,
            model,
        }
    }

    pub fn from_frequencies(omega_p: f64, gamma: f64, model: Model) -> Self {
        Self {
            electron_density: None,
            mean_free_path: None,
            plasma_frequency: Some(omega_p),
            relaxation_rate: Some(gamma),
            model,
        }
    }
}

/// On-disk material preset, `{name, n_per_m3, mean_free_path_m, model}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialPreset {
    pub name: String,
    pub n_per_m3: f64,
    pub mean_free_path_m: f64,
    pub model: Model,
}

const GOLD_JSON: &str = include_str!("../../../presets/gold.json");
const NICHROME_JSON: &str = include_str!("../../../presets/nichrome.json");

impl MaterialPreset {
    pub fn from_json(text: &str) -> Result<Self> {
        let preset: MaterialPreset = serde_json::from_str(text)?;
        if !(preset.n_per_m3 > 0.0 && preset.mean_free_path_m > 0.0) {
            return Err(Error::Configuration(format!(
                "preset '{}' needs positive density and mean free path",
                preset.name
            )));
        }
        Ok(preset)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Presets shipped with the crate: `gold` and `nichrome`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gold" | "au" => Self::from_json(GOLD_JSON),
            "nichrome" | "nicr" => Self::from_json(NICHROME_JSON),
            other => Err(Error::Configuration(format!("unknown material preset '{other}'"))),
        }
    }

    pub fn spec(&self) -> MaterialSpec {
        MaterialSpec::from_density(self.n_per_m3, self.mean_free_path_m, self.model)
    }
}

/// Every length and frequency scale derived from a [`MaterialSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    pub electron_density: f64,
    pub omega_p: f64,
    /// γ; zero for a dissipationless plasma.
    pub gamma: f64,
    pub lambda_p: f64,
    /// 2πc/γ; infinite when γ = 0.
    pub lambda_gamma: f64,
    pub k_f: f64,
    pub lambda_f: f64,
    pub v_f: f64,
    /// v_F/γ; infinite when γ = 0.
    pub mean_free_path: f64,
    /// ε₀ω_p²/γ [S/m]; infinite when γ = 0.
    pub sigma0: f64,
    pub model: Model,
}

impl DerivedScales {
    /// k_F ℓ, the weak-disorder parameter.
    pub fn kf_l(&self) -> f64 {
        self.k_f * self.mean_free_path
    }

    /// λ_γ/λ_p = ω_p/γ.
    pub fn lambda_gamma_over_lambda_p(&self) -> f64 {
        self.lambda_gamma / self.lambda_p
    }
}

/// Threshold below which the single-impurity (weak disorder) picture is
/// flagged as questionable.
pub const KF_L_WARNING_THRESHOLD: f64 = 10.0;

pub fn derive_scales(spec: &MaterialSpec) -> Result<DerivedScales> {
    let k = CONSTANTS;
    let positive = |v: Option<f64>| v.filter(|x| x.is_finite() && *x > 0.0);

    let (n, omega_p, gamma, v_f) = match (
        positive(spec.electron_density),
        positive(spec.mean_free_path),
    ) {
        (Some(n), Some(l)) => {
            let omega_p = (n * k.e * k.e / (k.eps0 * k.me)).sqrt();
            let v_f = k.hbar * (3.0 * PI * PI * n).cbrt() / k.me;
            let gamma = v_f / l;
            check_override("plasma frequency", spec.plasma_frequency, omega_p)?;
            check_override("relaxation rate", spec.relaxation_rate, gamma)?;
            (n, omega_p, gamma, v_f)
        }
        _ => {
            let omega_p = positive(spec.plasma_frequency);
            let gamma = spec.relaxation_rate.filter(|g| g.is_finite() && *g >= 0.0);
            match (omega_p, gamma) {
                (Some(omega_p), Some(gamma)) => {
                    let n = k.eps0 * k.me * omega_p * omega_p / (k.e * k.e);
                    let v_f = k.hbar * (3.0 * PI * PI * n).cbrt() / k.me;
                    (n, omega_p, gamma, v_f)
                }
                _ => {
                    return Err(Error::Configuration(
                        "material needs either (electron density, mean free path) or \
                         (plasma frequency, relaxation rate)"
                            .into(),
                    ))
                }
            }
        }
    };

    let k_f = (3.0 * PI * PI * n).cbrt();
    let (lambda_gamma, mean_free_path, sigma0) = if gamma > 0.0 {
        (2.0 * PI * k.c / gamma, v_f / gamma, k.eps0 * omega_p * omega_p / gamma)
    } else {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY)
    };
    let scales = DerivedScales {
        electron_density: n,
        omega_p,
        gamma,
        lambda_p: 2.0 * PI * k.c / omega_p,
        lambda_gamma,
        k_f,
        lambda_f: 2.0 * PI / k_f,
        v_f,
        mean_free_path,
        sigma0,
        model: spec.model,
    };
    if scales.kf_l() < KF_L_WARNING_THRESHOLD {
        log::warn!(
            "k_F l = {:.3} < {KF_L_WARNING_THRESHOLD}: weak-disorder approximation is questionable",
            scales.kf_l()
        );
    }
    Ok(scales)
}

fn check_override(what: &str, given: Option<f64>, derived: f64) -> Result<()> {
    match given {
        Some(v) if ((v - derived) / derived).abs() > 0.01 => Err(Error::Configuration(format!(
            "{what} {v:e} disagrees with the value {derived:e} derived from (n, l) by more than 1%"
        ))),
        _ => Ok(()),
    }
}

/// Strength of the relative variance, (2πλ_F)²ℓ/(λ_γ²λ_p).
///
/// Written as λ_F² v_F γ/(c²λ_p) so that γ = 0 gives exactly 0.
pub fn fluctuation_prefactor(scales: &DerivedScales) -> f64 {
    if scales.gamma == 0.0 {
        return 0.0;
    }
    let c = CONSTANTS.c;
    scales.lambda_f * scales.lambda_f * scales.v_f * scales.gamma / (c * c * scales.lambda_p)
}

/// Root-mean-square relative fluctuation scale, the square root of
/// [`fluctuation_prefactor`].
pub fn fluctuation_rms_scale(scales: &DerivedScales) -> f64 {
    fluctuation_prefactor(scales).sqrt()
}

/// λ_T = ħc/(k_B T).
pub fn thermal_wavelength(temperature: f64) -> Result<f64> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Domain(format!(
            "thermal wavelength needs T > 0, got {temperature}"
        )));
    }
    Ok(CONSTANTS.hbar * CONSTANTS.c / (CONSTANTS.kb * temperature))
}

/// Small dielectric sphere with α(ω) = α(0)ω₀²/(ω₀² − ω²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    /// α(0) [C·m²/V].
    pub alpha0: f64,
    /// ω₀ [rad/s].
    pub omega0: f64,
}

impl SphereSpec {
    pub fn new(alpha0: f64, omega0: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && omega0 > 0.0) {
            return Err(Error::Configuration(
                "sphere needs alpha0 > 0 and omega0 > 0".into(),
            ));
        }
        Ok(Self { alpha0, omega0 })
    }

    pub fn lambda0(&self) -> f64 {
        2.0 * PI * CONSTANTS.c / self.omega0
    }
}

/// Temperature of the surroundings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub temperature: f64,
}

impl Environment {
    pub fn zero_temperature() -> Self {
        Self { temperature: 0.0 }
    }

    pub fn at(temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::Configuration(format!(
                "temperature must be >= 0, got {temperature}"
            )));
        }
        Ok(Self { temperature })
    }

    /// `None` at T = 0.
    pub fn thermal_wavelength(&self) -> Option<f64> {
        thermal_wavelength(self.temperature).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gold() -> DerivedScales {
        derive_scales(&MaterialPreset::builtin("gold").unwrap().spec()).unwrap()
    }

    #[test]
    fn gold_scales() {
        let s = gold();
        assert_relative_eq!(s.lambda_p, 1.363e-7, max_relative = 1e-3);
        assert_relative_eq!(s.lambda_gamma, 5.065e-5, max_relative = 1e-3);
        assert_relative_eq!(s.mean_free_path, 37.7e-9, max_relative = 1e-12);
        assert!(s.lambda_gamma > s.lambda_p);
    }

    #[test]
    fn nichrome_relaxation_rate() {
        let s = derive_scales(&MaterialPreset::builtin("nichrome").unwrap().spec()).unwrap();
        assert_relative_eq!(s.gamma, 4.0e14, max_relative = 0.01);
    }

    #[test]
    fn unit_plasma_frequency() {
        let s = derive_scales(&MaterialSpec::from_frequencies(1.0, 1e-3, Model::Drude)).unwrap();
        assert_eq!(s.lambda_p, 2.0 * PI * CONSTANTS.c);
    }

    #[test]
    fn under_specified_material_is_rejected() {
        let spec = MaterialSpec {
            electron_density: Some(6e28),
            mean_free_path: None,
            plasma_frequency: Some(1e16),
            relaxation_rate: None,
            model: Model::Drude,
        };
        assert!(matches!(derive_scales(&spec), Err(Error::Configuration(_))));
    }

    #[test]
    fn density_pair_wins_and_mismatch_is_rejected() {
        let g = gold();
        let mut spec = MaterialPreset::builtin("gold").unwrap().spec();
        spec.plasma_frequency = Some(g.omega_p * 1.005);
        assert_eq!(derive_scales(&spec).unwrap().omega_p, g.omega_p);
        spec.plasma_frequency = Some(g.omega_p * 1.02);
        assert!(derive_scales(&spec).is_err());
    }

    #[test]
    fn mean_free_path_loop_closes() {
        let s = gold();
        assert_relative_eq!(s.v_f / s.gamma, s.mean_free_path, max_relative = 1e-12);
    }

    #[test]
    fn doubling_density_scales() {
        let a = derive_scales(&MaterialSpec::from_density(6e28, 40e-9, Model::Drude)).unwrap();
        let b = derive_scales(&MaterialSpec::from_density(12e28, 40e-9, Model::Drude)).unwrap();
        assert_relative_eq!(b.omega_p / a.omega_p, 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(b.k_f / a.k_f, 2f64.cbrt(), max_relative = 1e-12);
    }

    #[test]
    fn gold_rms_scale() {
        assert_relative_eq!(fluctuation_rms_scale(&gold()), 3.4e-5, max_relative = 0.05);
    }

    #[test]
    fn nichrome_to_gold_ratio() {
        let ni = derive_scales(&MaterialPreset::builtin("nichrome").unwrap().spec()).unwrap();
        let ratio = fluctuation_prefactor(&ni) / fluctuation_prefactor(&gold());
        // independent evaluation of the closed form: 11.5432
        assert_relative_eq!(ratio, 11.5432, max_relative = 1e-4);
        assert_relative_eq!(ratio.sqrt(), 3.3975, max_relative = 1e-4);
    }

    #[test]
    fn prefactor_vanishes_without_dissipation() {
        let g = gold();
        let s = derive_scales(&MaterialSpec::from_frequencies(g.omega_p, 0.0, Model::Plasma)).unwrap();
        assert_eq!(fluctuation_prefactor(&s), 0.0);
    }

    #[test]
    fn prefactor_is_linear_in_gamma() {
        let g = gold();
        let a = derive_scales(&MaterialSpec::from_frequencies(g.omega_p, 1e13, Model::Drude)).unwrap();
        let b = derive_scales(&MaterialSpec::from_frequencies(g.omega_p, 3e13, Model::Drude)).unwrap();
        assert_relative_eq!(
            fluctuation_prefactor(&b) / fluctuation_prefactor(&a),
            3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn thermal_wavelengths() {
        assert_relative_eq!(thermal_wavelength(300.0).unwrap(), 7.6e-6, max_relative = 0.01);
        assert_relative_eq!(thermal_wavelength(150.0).unwrap(), 1.5266e-5, max_relative = 1e-4);
        assert_relative_eq!(
            thermal_wavelength(600.0).unwrap(),
            thermal_wavelength(300.0).unwrap() / 2.0,
            max_relative = 1e-15
        );
        assert!(matches!(thermal_wavelength(0.0), Err(Error::Domain(_))));
        assert!(Environment::zero_temperature().thermal_wavelength().is_none());
    }

    #[test]
    fn preset_parsing() {
        let p = MaterialPreset::from_json(
            r#"{"name":"x","n_per_m3":1e28,"mean_free_path_m":1e-8,"model":"plasma"}"#,
        )
        .unwrap();
        assert_eq!(p.model, Model::Plasma);
        assert!(MaterialPreset::builtin("unobtainium").is_err());
    }
}
