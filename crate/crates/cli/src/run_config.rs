//! JSON run configuration, command-line overrides and resolution into the
//! reduced physics configuration.

use std::path::{Path, PathBuf};

use casimir_speckle::config::Configuration;
use casimir_speckle::electrodynamics::Sphere;
use casimir_speckle::quadrature::McPlan;
use casimir_speckle::report::z_grid;
use casimir_speckle::units::{
    derive_scales, Environment, MaterialPreset, MaterialSpec, Model, SphereSpec,
};
use casimir_speckle::variance::{KernelOptions, KernelVariant, PolarizationSum};
use casimir_speckle::verify::DEFAULT_SEED;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SAMPLES: u64 = 200_000;

/// A preset name, a path to a preset file, or an inline specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialChoice {
    Named(String),
    Inline(MaterialSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGrid {
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default = "yes")]
    pub log: bool,
    /// Explicit values; used instead of min/max/points when present.
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

fn yes() -> bool {
    true
}

impl ZGrid {
    pub fn explicit(values: Vec<f64>) -> Self {
        Self { min: None, max: None, points: None, log: true, values: Some(values) }
    }

    pub fn resolve(&self) -> Result<Vec<f64>, CliError> {
        let zs = match (&self.values, self.min, self.max, self.points) {
            (Some(v), ..) => v.clone(),
            (None, Some(min), Some(max), Some(n)) => z_grid(min, max, n, self.log).map_err(CliError::usage)?,
            _ => return Err(CliError::Usage("z_grid needs either values or min, max and points".into())),
        };
        if zs.is_empty() {
            return Err(CliError::Usage("the z-grid is empty".into()));
        }
        if zs.iter().any(|z| !(*z > 0.0 && z.is_finite())) {
            return Err(CliError::Usage("z-grid values must be finite and > 0".into()));
        }
        if zs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Usage("the z-grid must be strictly increasing".into()));
        }
        Ok(zs)
    }
}

/// Everything a run needs. Unset fields take defaults on [`RunConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Defaults to the gold preset unless `lambda_gamma` is given.
    #[serde(default)]
    pub material: Option<MaterialChoice>,
    /// λ_γ/λ_p for a material given by ratios alone (no prefactor).
    #[serde(default)]
    pub lambda_gamma: Option<f64>,
    #[serde(default)]
    pub model: Option<Model>,
    /// λ₀/λ_p, default 1.
    #[serde(default)]
    pub lambda0: Option<f64>,
    /// α(0) in ε₀λ_p³, default 1. F does not depend on it.
    #[serde(default)]
    pub alpha0: Option<f64>,
    /// Temperature in kelvin; needs a physical material.
    #[serde(default)]
    pub temperature: Option<f64>,
    /// λ_T/λ_p.
    #[serde(default)]
    pub lambda_t: Option<f64>,
    #[serde(default)]
    pub z_grid: Option<ZGrid>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub kernel_variant: Option<KernelVariant>,
    #[serde(default)]
    pub polarization_sum: Option<PolarizationSum>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Command-line values that override the JSON document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub out: Option<PathBuf>,
    pub model: Option<Model>,
    pub kernel_variant: Option<KernelVariant>,
    pub z: Option<Vec<f64>>,
}

/// The physics a run evaluates, plus where its output goes.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub effective: RunConfig,
    pub configuration: Configuration,
    pub kernel: KernelOptions,
    pub plan: McPlan,
    pub out: PathBuf,
}

pub fn load_material(name: &str) -> Result<MaterialPreset, CliError> {
    if name.ends_with(".json") || Path::new(name).is_file() {
        MaterialPreset::load(name).map_err(|e| CliError::Usage(format!("cannot load preset '{name}': {e}")))
    } else {
        MaterialPreset::builtin(name).map_err(CliError::usage)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        self.seed = o.seed.or(self.seed);
        self.samples = o.samples.or(self.samples);
        self.out = o.out.clone().or(self.out);
        self.model = o.model.or(self.model);
        self.kernel_variant = o.kernel_variant.or(self.kernel_variant);
        if let Some(z) = &o.z {
            self.z_grid = Some(ZGrid::explicit(z.clone()));
        }
        self
    }

    pub fn material_spec(&self) -> Result<Option<MaterialSpec>, CliError> {
        let mut spec = match (&self.material, self.lambda_gamma) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either a material or lambda_gamma, not both".into()))
            }
            (None, Some(_)) => return Ok(None),
            (None, None) => MaterialPreset::builtin("gold").map_err(CliError::usage)?.spec(),
            (Some(MaterialChoice::Named(n)), None) => load_material(n)?.spec(),
            (Some(MaterialChoice::Inline(s)), None) => s.clone(),
        };
        if let Some(m) = self.model {
            spec.model = m;
        }
        Ok(Some(spec))
    }

    /// Fills every default and reduces to a [`Configuration`].
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let mut eff = self.clone();
        let lambda0 = *eff.lambda0.get_or_insert(1.0);
        let alpha0 = *eff.alpha0.get_or_insert(1.0);
        let model = *eff.model.get_or_insert(Model::Drude);
        if eff.temperature.is_some() && eff.lambda_t.is_some() {
            return Err(CliError::Usage("give either temperature or lambda_t, not both".into()));
        }
        let spec = eff.material_spec()?;
        let base = match (&spec, eff.lambda_gamma) {
            (Some(spec), _) => {
                let scales = derive_scales(spec).map_err(CliError::usage)?;
                let env = match eff.temperature {
                    Some(t) => Environment::at(t).map_err(CliError::usage)?,
                    None => Environment::zero_temperature(),
                };
                let sphere = SphereSpec::new(1e-40, scales.omega_p / lambda0).map_err(CliError::usage)?;
                let cfg = Configuration::from_physical(&scales, &sphere, &env).map_err(CliError::usage)?;
                cfg
            }
            (None, Some(lg)) => {
                if eff.temperature.is_some() {
                    return Err(CliError::Usage("a temperature in kelvin needs a physical material; use lambda_t".into()));
                }
                Configuration::from_ratios(lg, model, lambda0).map_err(CliError::usage)?
            }
            (None, None) => unreachable!("material_spec defaults to gold"),
        };
        let mut cfg = base.with_model(model);
        cfg.sphere = Sphere::new(alpha0, 1.0 / lambda0).map_err(CliError::usage)?;
        if eff.lambda_t.is_some() {
            cfg = cfg.with_thermal_wavelength(eff.lambda_t).map_err(CliError::usage)?;
        }
        if eff.material.is_none() && eff.lambda_gamma.is_none() {
            eff.material = Some(MaterialChoice::Named("gold".into()));
        }
        let kernel = KernelOptions {
            variant: *eff.kernel_variant.get_or_insert(KernelVariant::B),
            polarization_sum: *eff.polarization_sum.get_or_insert(PolarizationSum::Full),
        };
        let plan = McPlan::new(*eff.seed.get_or_insert(DEFAULT_SEED), *eff.samples.get_or_insert(DEFAULT_SAMPLES))
            .map_err(CliError::usage)?;
        let out = eff.out.get_or_insert_with(|| PathBuf::from(".")).clone();
        Ok(Resolved { effective: eff, configuration: cfg, kernel, plan, out })
    }
}

pub fn parse_model(s: &str) -> Result<Model, String> {
    match s.to_ascii_lowercase().as_str() {
        "drude" => Ok(Model::Drude),
        "plasma" => Ok(Model::Plasma),
        other => Err(format!("unknown model '{other}' (expected drude or plasma)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_to_gold_at_zero_temperature() {
        let r = RunConfig::default().resolve().unwrap();
        assert!(r.configuration.lambda_t.is_none());
        assert!(r.configuration.prefactor.unwrap() > 0.0);
        assert_eq!(r.configuration.lambda0(), 1.0);
        assert_eq!(r.effective.material, Some(MaterialChoice::Named("gold".into())));
        assert_eq!(r.plan.n_samples, DEFAULT_SAMPLES);
    }

    #[test]
    fn ratios_and_overrides() {
        let json = r#"{"lambda_gamma": 100, "lambda_t": 1000, "z_grid": {"min": 3, "max": 30, "points": 4}, "seed": 5}"#;
        let cfg: RunConfig = serde_json::from_str(json).unwrap();
        let o = Overrides { seed: Some(9), model: Some(Model::Plasma), ..Default::default() };
        let r = cfg.apply(&o).resolve().unwrap();
        assert_eq!(r.plan.seed, 9);
        assert_eq!(r.configuration.lambda_t, Some(1000.0));
        assert_eq!(r.configuration.medium.model, Model::Plasma);
        assert!(r.configuration.prefactor.is_none());
        assert_eq!(r.effective.z_grid.unwrap().resolve().unwrap().len(), 4);
    }

    #[test]
    fn conflicting_or_bad_input_is_a_usage_error() {
        let both: RunConfig = serde_json::from_str(r#"{"material": "gold", "lambda_gamma": 10}"#).unwrap();
        assert!(matches!(both.resolve(), Err(CliError::Usage(_))));
        let kelvin: RunConfig = serde_json::from_str(r#"{"lambda_gamma": 10, "temperature": 300}"#).unwrap();
        assert!(matches!(kelvin.resolve(), Err(CliError::Usage(_))));
        let unknown: RunConfig = serde_json::from_str(r#"{"material": "unobtainium"}"#).unwrap();
        assert!(matches!(unknown.resolve(), Err(CliError::Usage(_))));
        assert!(serde_json::from_str::<RunConfig>(r#"{"colour": 1}"#).is_err());
        assert!(ZGrid::explicit(vec![]).resolve().is_err());
        assert!(ZGrid::explicit(vec![2.0, 1.0]).resolve().is_err());
    }

    #[test]
    fn inline_material_spec() {
        let json = r#"{"material": {"electron_density": null, "mean_free_path": null,
            "plasma_frequency": 1.37e16, "relaxation_rate": 0.0, "model": "plasma"}}"#;
        let r: RunConfig = serde_json::from_str(json).unwrap();
        let r = r.resolve().unwrap();
        assert_eq!(r.configuration.prefactor, Some(0.0));
    }

    #[test]
    fn kelvin_temperature_reduces_with_the_plasma_wavelength() {
        let r: RunConfig = serde_json::from_str(r#"{"temperature": 300}"#).unwrap();
        let lt = r.resolve().unwrap().configuration.lambda_t.unwrap();
        assert!((lt / (7.6329e-6 / 1.3631e-7) - 1.0).abs() < 1e-3);
    }
}
