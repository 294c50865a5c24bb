//! Numerical acceptance checks, run at one of three sample budgets.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    asymptote_F, asymptote_mean, calibrate, fit_linear, fit_loglog_slope, AsymptoteKind, C1, C2,
};
use crate::config::Configuration;
use crate::electrodynamics::{Medium, Sphere};
use crate::error::{Error, Result};
use crate::mean::{mean_cp, MeanPotentialRequest};
use crate::quadrature::gauss::product_gauss;
use crate::quadrature::philox::SampleStream;
use crate::quadrature::McPlan;
use crate::report::{f_points_csv, z_grid};
use crate::units::{derive_scales, fluctuation_prefactor, fluctuation_rms_scale, MaterialPreset, MaterialSpec, Model};
use crate::units::REDUCED_LIGHT_SPEED as C;
use crate::variance::{
    f_of_z, momentum_integral, momentum_scale, reflection_correlator, reflection_correlator_static_limit,
    variance_T0, variance_integrand, FPoint, KernelOptions, MomentumConfig, PolarizationQuad,
};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Smoke,
    Desk,
    Full,
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "smoke" => Ok(Self::Smoke),
            "desk" => Ok(Self::Desk),
            "full" => Ok(Self::Full),
            _ => Err(Error::Configuration(format!("unknown verification level '{s}'"))),
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Smoke => "smoke",
            Self::Desk => "desk",
            Self::Full => "full",
        })
    }
}

/// Samples and grid sizes used at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Per-point samples for the near-field slope; never below 10⁶.
    pub near_samples: u64,
    /// Per-point samples for the intermediate and far regimes.
    pub regime_samples: u64,
    pub regime_points: usize,
    /// Per Matsubara term.
    pub thermal_samples: u64,
    pub oracle_samples: u64,
    /// Gauss–Legendre order per momentum magnitude; angles use 2/3 of it.
    pub oracle_order: usize,
}

impl Level {
    pub fn budget(self) -> Budget {
        match self {
            Self::Smoke => Budget {
                near_samples: 1_000_000,
                regime_samples: 200_000,
                regime_points: 5,
                thermal_samples: 100_000,
                oracle_samples: 200_000,
                oracle_order: 12,
            },
            Self::Desk => Budget {
                near_samples: 2_000_000,
                regime_samples: 1_000_000,
                regime_points: 7,
                thermal_samples: 500_000,
                oracle_samples: 1_000_000,
                oracle_order: 16,
            },
            Self::Full => Budget {
                near_samples: 8_000_000,
                regime_samples: 4_000_000,
                regime_points: 9,
                thermal_samples: 2_000_000,
                oracle_samples: 4_000_000,
                oracle_order: 20,
            },
        }
    }
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "mean retarded asymptote"),
    (2, "thermal mean asymptote"),
    (3, "near-field variance slope"),
    (4, "intermediate regime slope and c1"),
    (5, "far regime slope and c2"),
    (6, "zero-Matsubara annihilation"),
    (7, "thermal collapse"),
    (8, "plasma-limit null"),
    (9, "material constants"),
    (10, "Monte Carlo against product quadrature"),
    (11, "bit-identical CSV"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub values: BTreeMap<String, f64>,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub level: Level,
    pub seed: u64,
    pub passed: bool,
    pub outcomes: Vec<Outcome>,
}

/// Collects checks for one criterion.
struct Checks {
    passed: bool,
    notes: Vec<String>,
    values: BTreeMap<String, f64>,
}

impl Checks {
    fn new() -> Self {
        Self { passed: true, notes: Vec::new(), values: BTreeMap::new() }
    }

    fn value(&mut self, key: &str, v: f64) -> f64 {
        self.values.insert(key.to_string(), v);
        v
    }

    fn check(&mut self, ok: bool, note: String) {
        self.passed &= ok;
        self.notes.push(if ok { note } else { format!("{note} (fails)") });
    }
}

pub fn run_criterion(id: u8, level: Level, seed: u64) -> Outcome {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1.to_string())
        .unwrap_or_else(|| format!("unknown criterion {id}"));
    let mut checks = Checks::new();
    let b = level.budget();
    let run = match id {
        1 => mean_retarded(&mut checks),
        2 => mean_thermal(&mut checks),
        3 => near_slope(&mut checks, &b, seed),
        4 => intermediate(&mut checks, &b, seed),
        5 => far(&mut checks, &b, seed),
        6 => zero_matsubara(&mut checks),
        7 => thermal_collapse(&mut checks, &b, seed),
        8 => plasma_null(&mut checks),
        9 => materials(&mut checks),
        10 => oracle(&mut checks, &b, seed),
        11 => determinism(&mut checks, seed),
        _ => Err(Error::Configuration(format!("no criterion {id}"))),
    };
    if let Err(e) = run {
        checks.check(false, format!("error: {e}"));
    }
    Outcome { id, name, passed: checks.passed, detail: checks.notes.join("; "), values: checks.values }
}

pub fn run_all(level: Level, seed: u64) -> Verdict {
    let outcomes: Vec<Outcome> = CRITERIA.iter().map(|c| run_criterion(c.0, level, seed)).collect();
    Verdict { level, seed, passed: outcomes.iter().all(|o| o.passed), outcomes }
}

fn base() -> Result<Configuration> {
    Configuration::from_ratios(100.0, Model::Drude, 1.0)
}

fn mean_retarded(ck: &mut Checks) -> Result<()> {
    let cfg = base()?;
    let u = mean_cp(&MeanPotentialRequest::new(&cfg, 100.0, 1e-6))?;
    let r = ck.value("ratio", u.value / asymptote_mean(AsymptoteKind::MeanRetarded, 100.0, &cfg)?);
    ck.check((r - 1.0).abs() <= 0.02, format!("U/U_ret at z = 100 is {r:.5}, needs 1 +- 0.02"));
    Ok(())
}

fn mean_thermal(ck: &mut Checks) -> Result<()> {
    let cfg = base()?.with_thermal_wavelength(Some(1000.0))?;
    let z = 5000.0;
    let u = mean_cp(&MeanPotentialRequest::new(&cfg, z, 1e-6))?;
    let r = ck.value("ratio", u.value / asymptote_mean(AsymptoteKind::MeanThermal, z, &cfg)?);
    ck.check((r - 1.0).abs() <= 0.05, format!("U/U_th at z = 5 lambda_T is {r:.5}, needs 1 +- 0.05"));
    Ok(())
}

fn sweep(zs: &[f64], cfg: &Configuration, samples: u64, seed: u64) -> Result<Vec<FPoint>> {
    let plan = McPlan::new(seed, samples)?;
    zs.iter().map(|&z| f_of_z(z, cfg, &KernelOptions::default(), &plan)).collect()
}

fn triples(points: &[FPoint]) -> Vec<(f64, f64, f64)> {
    points.iter().map(|p| (p.z, p.f, p.f_err)).collect()
}

fn slope_check(ck: &mut Checks, points: &[FPoint], window: (f64, f64), target: f64, tol: f64) -> Result<()> {
    let fit = fit_loglog_slope(&triples(points), window)?;
    ck.value("slope", fit.slope);
    ck.value("slope_err", fit.slope_err);
    ck.check(
        (fit.slope - target).abs() <= tol,
        format!("slope {:.3} +- {:.3}, needs {target} +- {tol}", fit.slope, fit.slope_err),
    );
    Ok(())
}

fn near_slope(ck: &mut Checks, b: &Budget, seed: u64) -> Result<()> {
    let cfg = base()?;
    let pts = sweep(&z_grid(0.02, 0.1, 5, true)?, &cfg, b.near_samples.max(1_000_000), seed)?;
    slope_check(ck, &pts, (0.02, 0.1), -3.0, 0.2)
}

fn constant_check(ck: &mut Checks, kind: AsymptoteKind, pts: &[FPoint], cfg: &Configuration, reference: f64) -> Result<()> {
    let cal = calibrate(kind, pts, cfg)?;
    ck.value("constant", cal.fitted);
    ck.value("constant_err", cal.fitted_err);
    ck.value("constant_ratio", cal.ratio);
    ck.check(
        (cal.ratio - 1.0).abs() <= 0.3,
        format!("constant {:.3e} +- {:.1e} against {reference:.1e} (ratio {:.3}), needs 1 +- 0.3", cal.fitted, cal.fitted_err, cal.ratio),
    );
    Ok(())
}

fn intermediate(ck: &mut Checks, b: &Budget, seed: u64) -> Result<()> {
    let cfg = base()?;
    let pts = sweep(&z_grid(3.0, 30.0, b.regime_points, true)?, &cfg, b.regime_samples, seed)?;
    slope_check(ck, &pts, (3.0, 30.0), -4.0, 0.15)?;
    constant_check(ck, AsymptoteKind::FIntermediate, &pts, &cfg, C1)
}

fn far(ck: &mut Checks, b: &Budget, seed: u64) -> Result<()> {
    let cfg = base()?;
    let lg = cfg.lambda_gamma();
    let pts = sweep(&z_grid(3.0 * lg, 30.0 * lg, b.regime_points, true)?, &cfg, b.regime_samples, seed)?;
    slope_check(ck, &pts, (3.0 * lg, 30.0 * lg), -4.5, 0.2)?;
    constant_check(ck, AsymptoteKind::FFar, &pts, &cfg, C2)
}

fn zero_matsubara(ck: &mut Checks) -> Result<()> {
    let cfg = base()?;
    let opts = KernelOptions::default();
    let (xi2, z) = (0.2, 0.5);
    // momenta on the sampling scale, and deep in the regime ξ ≪ γc²q²
    for (label, m) in [
        ("typical", MomentumConfig::new(0.4, 0.3, 1.0, 0.5, 2.0)?),
        ("large_q", MomentumConfig::new(10.0, 8.0, 1.0, 12.0, 2.0)?),
    ] {
        let k = |xi: f64| variance_integrand(xi, xi2, &m, z, &cfg.medium, &cfg.sphere, &opts);
        let r = ck.value(&format!("kernel_ratio_{label}"), k(1e-3)? / k(1e-4)?);
        ck.check(r >= 10.0, format!("{label} kernel(1e-3)/kernel(1e-4) = {r:.1}, needs >= 10"));
    }
    let m = MomentumConfig::new(10.0, 8.0, 1.0, 12.0, 2.0)?;
    let summed = |xi: f64| -> Result<f64> {
        PolarizationQuad::all().map(|q| Ok(reflection_correlator(xi, xi2, q, &m, &cfg.medium)?.re)).sum()
    };
    let power = ck.value("correlator_power", (summed(1e-3)? / summed(1e-5)?).ln() / 100f64.ln());
    ck.check((power - 1.0).abs() <= 0.1, format!("correlator vanishes as xi^{power:.3}, needs 1 +- 0.1"));
    let quad = PolarizationQuad::all().next().expect("sixteen quadruples");
    let signalled = matches!(reflection_correlator(0.0, xi2, quad, &m, &cfg.medium), Err(Error::StaticDivergence));
    let limit = reflection_correlator_static_limit();
    ck.check(
        signalled && limit == 0.0,
        format!("xi = 0 is signalled ({signalled}) and the n = 0 rows take the limit {limit}"),
    );
    Ok(())
}

fn thermal_collapse(ck: &mut Checks, b: &Budget, seed: u64) -> Result<()> {
    let lt = 1000.0;
    let cfg = base()?.with_thermal_wavelength(Some(lt))?;
    let pts = sweep(&z_grid(1.5 * lt, 3.0 * lt, 4, false)?, &cfg, b.thermal_samples, seed)?;
    let mut ratios = Vec::new();
    for p in &pts {
        let r = p.f / asymptote_F(AsymptoteKind::FThermal, p.z, &cfg)?;
        ck.value(&format!("ratio_z{:.0}", p.z), r);
        ratios.push(r);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ck.check(
        lo > 0.0 && hi / lo <= 2.0 && lo >= 0.5 && hi <= 2.0,
        format!("F/thermal law in [{lo:.3}, {hi:.3}], needs spread and offset within x2"),
    );
    let x: Vec<f64> = pts.iter().map(|p| p.z).collect();
    let y: Vec<f64> = pts.iter().map(|p| (p.f / p.z.powi(3)).ln()).collect();
    let s: Vec<f64> = pts.iter().map(|p| p.f_err / p.f).collect();
    let fit = fit_linear(&x, &y, &s)?;
    let rate = ck.value("rate_ratio", -fit.slope / (8.0 * PI / lt));
    ck.check((rate - 1.0).abs() <= 0.15, format!("decay rate {rate:.4} x 8pi/lambda_T, needs 1 +- 0.15"));
    Ok(())
}

fn plasma_null(ck: &mut Checks) -> Result<()> {
    let gold = derive_scales(&MaterialPreset::builtin("gold")?.spec())?;
    let plasma = derive_scales(&MaterialSpec::from_frequencies(gold.omega_p, 0.0, Model::Plasma))?;
    let p = fluctuation_prefactor(&plasma);
    let cfg = Configuration::from_ratios(f64::INFINITY, Model::Plasma, 1.0)?.with_prefactor(p);
    let plan = McPlan::new(1, 10_000)?;
    let v = variance_T0(1.0, &cfg, &KernelOptions::default(), &plan)?;
    ck.check(
        p == 0.0 && v.value == 0.0 && v.err_est == 0.0,
        format!("gamma = 0 gives prefactor {p} and variance {}", v.value),
    );
    let q = 0.1 / C;
    let m = MomentumConfig::new(q, q, 0.5, q, 1.5)?;
    let k = variance_integrand(0.1, 0.1, &m, 1.0, &Medium::plasma(), &Sphere::new(1.0, 1.0)?, &KernelOptions::default())?;
    ck.value("plasma_kernel", k);
    ck.check(k.is_finite() && k != 0.0, format!("plasma kernel at xi = 0.1, q = 0.1/c is {k:.4e}"));
    Ok(())
}

fn materials(ck: &mut Checks) -> Result<()> {
    let gold = derive_scales(&MaterialPreset::builtin("gold")?.spec())?;
    let nichrome = derive_scales(&MaterialPreset::builtin("nichrome")?.spec())?;
    let rms = ck.value("gold_rms", fluctuation_rms_scale(&gold));
    ck.check((rms / 3.4e-5 - 1.0).abs() <= 0.05, format!("gold rms scale {rms:.4e}, needs 3.4e-5 +- 5%"));
    let ratio = ck.value("nichrome_over_gold", fluctuation_prefactor(&nichrome) / fluctuation_prefactor(&gold));
    ck.check((11.0..=12.0).contains(&ratio), format!("nichrome/gold prefactor {ratio:.3}, needs 11 to 12"));
    Ok(())
}

/// Maps t ∈ [0, 1) to q = s·t/(1 − t), returning (q, dq/dt).
fn half_line(t: f64, s: f64) -> (f64, f64) {
    let u = 1.0 - t;
    (s * t / u, s / (u * u))
}

fn oracle(ck: &mut Checks, b: &Budget, seed: u64) -> Result<()> {
    let cfg = base()?;
    let opts = KernelOptions::default();
    let mut u = [0.0; 3];
    let n = b.oracle_order;
    let na = (2 * n / 3).max(8);
    let orders = [n, n, na, n, na];
    let bounds = [(0.0, 1.0), (0.0, 1.0), (0.0, 2.0 * PI), (0.0, 1.0), (0.0, 2.0 * PI)];
    let mut worst: f64 = 0.0;
    for k in 0..5u64 {
        SampleStream::new(seed, k, 0xACCE).fill(&mut u);
        let xi1 = 0.05 + 0.45 * u[0];
        let xi2 = 0.05 + 0.45 * u[1];
        let z = 0.5 + 1.5 * u[2];
        let plan = McPlan::new(seed.wrapping_add(k), b.oracle_samples)?;
        let mc = momentum_integral(xi1, xi2, z, &cfg, &opts, &plan)?;
        let (s1, s2) = (momentum_scale(xi1, z), momentum_scale(xi2, z));
        let g = product_gauss(
            |x| {
                let (qa, ja) = half_line(x[0], s1);
                let (qb, jb) = half_line(x[1], s1);
                let (qc, jc) = half_line(x[3], s2);
                match MomentumConfig::new(qa, qb, x[2], qc, x[4])
                    .and_then(|m| variance_integrand(xi1, xi2, &m, z, &cfg.medium, &cfg.sphere, &opts))
                {
                    Ok(v) => v * ja * jb * jc,
                    Err(_) => f64::NAN,
                }
            },
            &bounds,
            &orders,
        );
        let sigmas = (mc.value - g).abs() / mc.err_est;
        worst = worst.max(sigmas);
        ck.value(&format!("sigmas_{k}"), sigmas);
        ck.check(
            sigmas <= 3.0,
            format!("({xi1:.3}, {xi2:.3}, {z:.3}): MC {:.5e} +- {:.1e}, Gauss {g:.5e}, {sigmas:.2} sigma", mc.value, mc.err_est),
        );
    }
    ck.value("worst_sigmas", worst);
    Ok(())
}

fn determinism(ck: &mut Checks, seed: u64) -> Result<()> {
    let cfg = base()?;
    let zs = [0.5, 3.0, 30.0];
    let csv = || -> Result<String> { f_points_csv(&sweep(&zs, &cfg, 50_000, seed)?, "determinism", None) };
    let (a, b) = (csv()?, csv()?);
    ck.check(a == b, format!("two runs of {} bytes identical: {}", a.len(), a == b));
    Ok(())
}
