//! Disorder-induced variance δ²U(z) and the shape function F(z).
//!
//! The variance is evaluated on the imaginary frequency axis as
//!
//! δ²U = N ∫dξ₁/2π ∫dξ₂/2π ∫d²q_a d²q_b d²q_c/(2π)⁶ (2π)⁻²
//!         (ω₁²ω₂²/c⁴) α(iξ₁)α(iξ₂) e^{−(κ_a+κ_b+κ_c+κ_d)z} /(4k_a^z k_c^z)
//!         Σ_{abcd} D_{abcd} R_{abcd},
//!
//! with q_d = q_b + q_c − q_a (the bare momentum delta is consumed by this
//! substitution), R the reflection-coefficient correlator with the
//! fluctuation prefactor divided out, D the polarization weight chosen by
//! [`KernelVariant`], and N = [`VARIANCE_NORMALIZATION`]. Rotational
//! invariance fixes θ_a = 0 and contributes a factor 2π. At temperature T
//! each frequency integral becomes (1/(2πλ_T)) Σ_{n≥1}; the n = 0 terms
//! vanish identically.
//!
//! Every quantity is in reduced units; F = δ²U/(Ū² P) where P is the
//! material prefactor, so F only needs the P-stripped variance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::electrodynamics::{
    check_frequency, dot, Direction, LayerResponse, Medium, Polarization, PolarizationBasis, Sphere,
};
use crate::error::{Error, Result};
use crate::mean::{mean_cp, MeanPotentialRequest};
use crate::quadrature::{double_sum_adaptive, mc_integrate, DoubleSumOptions, McPlan, QuadResult};
use crate::units::REDUCED_LIGHT_SPEED as C;

/// Global constant between the literal Euclidean continuation and the
/// physical variance, fixed against the large-distance constants.
pub const VARIANCE_NORMALIZATION: f64 = 1.0 / (2.0 * PI);

const RESIDUE_LIMIT: f64 = 1e-10;
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// How the two sets of polarization dot products combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelVariant {
    /// (ε_a·ε_b)(ε_c·ε_d) once.
    A,
    /// (ε_a·ε_b)²(ε_c·ε_d)²: the weight of the squared potential times the
    /// weight inside the correlator.
    B,
}

impl std::str::FromStr for KernelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            other => Err(Error::Configuration(format!("unknown kernel variant '{other}' (expected a or b)"))),
        }
    }
}

impl std::fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::A => "a",
            Self::B => "b",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationSum {
    /// All 16 (a, b, c, d).
    Full,
    /// a = b and c = d only.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KernelOptions {
    pub variant: KernelVariant,
    pub polarization_sum: PolarizationSum,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { variant: KernelVariant::B, polarization_sum: PolarizationSum::Full }
    }
}

impl KernelOptions {
    pub fn with_variant(variant: KernelVariant) -> Self {
        Self { variant, ..Self::default() }
    }

    fn dot_power(&self) -> i32 {
        match self.variant {
            KernelVariant::A => 1,
            KernelVariant::B => 2,
        }
    }
}

/// Reduced momentum point; q_a lies along x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumConfig {
    pub q_a: f64,
    pub q_b: f64,
    pub theta_b: f64,
    pub q_c: f64,
    pub theta_c: f64,
}

impl MomentumConfig {
    pub fn new(q_a: f64, q_b: f64, theta_b: f64, q_c: f64, theta_c: f64) -> Result<Self> {
        if ![q_a, q_b, q_c].iter().all(|q| *q >= 0.0 && q.is_finite()) {
            return Err(Error::Domain("momentum magnitudes must be finite and >= 0".into()));
        }
        Ok(Self { q_a, q_b, theta_b, q_c, theta_c })
    }

    /// q_d = q_b + q_c − q_a as (x, y).
    pub fn q_d_vector(&self) -> (f64, f64) {
        let (sb, cb) = self.theta_b.sin_cos();
        let (sc, cc) = self.theta_c.sin_cos();
        (self.q_b * cb + self.q_c * cc - self.q_a, self.q_b * sb + self.q_c * sc)
    }

    /// Magnitude and angle of q_d.
    pub fn q_d(&self) -> (f64, f64) {
        let (x, y) = self.q_d_vector();
        (x.hypot(y), y.atan2(x))
    }

    /// Relabels (a, b, ξ₁) ↔ (c, d, ξ₂) and rotates so the new q_a lies on x.
    pub fn swapped(&self) -> Self {
        let (q_d, theta_d) = self.q_d();
        Self { q_a: self.q_c, q_b: q_d, theta_b: theta_d - self.theta_c, q_c: self.q_a, theta_c: -self.theta_c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolarizationQuad {
    pub a: Polarization,
    pub b: Polarization,
    pub c: Polarization,
    pub d: Polarization,
}

impl PolarizationQuad {
    pub fn all() -> impl Iterator<Item = PolarizationQuad> {
        (0..16).map(|k| {
            let p = |bit: u32| if k >> bit & 1 == 0 { Polarization::TE } else { Polarization::TM };
            PolarizationQuad { a: p(3), b: p(2), c: p(1), d: p(0) }
        })
    }
}

/// Wave amplitudes and polarization vectors of one leg.
struct Leg {
    resp: LayerResponse,
    basis: PolarizationBasis,
}

impl Leg {
    fn new(medium: &Medium, xi: f64, q: f64, theta: f64, direction: Direction) -> Result<Self> {
        Ok(Self { resp: LayerResponse::new(medium, xi, q)?, basis: PolarizationBasis::vacuum(q, theta, xi, direction) })
    }

    /// t^vm (1 + r^mm) for an incoming leg, t^mv (1 + r^mm) for an outgoing one.
    fn amplitude(&self, pol: Polarization, outgoing: bool) -> Complex64 {
        let t = if outgoing { self.resp.t_mv(pol) } else { self.resp.t_vm(pol) };
        t * (1.0 + self.resp.r_mm(pol))
    }
}

struct Legs {
    a: Leg,
    b: Leg,
    c: Leg,
    d: Leg,
}

impl Legs {
    fn new(xi1: f64, xi2: f64, m: &MomentumConfig, medium: &Medium) -> Result<Self> {
        check_frequency(xi1)?;
        check_frequency(xi2)?;
        let (q_d, theta_d) = m.q_d();
        Ok(Self {
            a: Leg::new(medium, xi1, m.q_a, 0.0, Direction::Up)?,
            b: Leg::new(medium, xi1, m.q_b, m.theta_b, Direction::Down)?,
            c: Leg::new(medium, xi2, m.q_c, m.theta_c, Direction::Up)?,
            d: Leg::new(medium, xi2, q_d, theta_d, Direction::Down)?,
        })
    }

    fn kappa_sum(&self) -> f64 {
        self.a.resp.kappa + self.b.resp.kappa + self.c.resp.kappa + self.d.resp.kappa
    }

    /// Everything in the correlator except the polarization-resolved factors:
    /// (πλ_p ω_p⁴/2c²) ω₁ω₂/((γ − iω₁)²(γ − iω₂)²) (−i k_a^z k_c^z)
    ///   / (k̃_a^z k̃_b^z k̃_c^z k̃_d^z (k̃_a^z + k̃_b^z + k̃_c^z + k̃_d^z)).
    fn correlator_scalar(&self, medium: &Medium) -> Complex64 {
        let (xi1, xi2) = (self.a.resp.xi, self.c.resp.xi);
        let gamma = medium.effective_gamma();
        let w1 = I * xi1;
        let w2 = I * xi2;
        let front = PI * medium.strength * medium.strength / (2.0 * C * C);
        let freq = w1 * w2 / ((gamma - I * w1).powi(2) * (gamma - I * w2).powi(2));
        let kzm = [self.a.resp.kz_metal(), self.b.resp.kz_metal(), self.c.resp.kz_metal(), self.d.resp.kz_metal()];
        let denom = kzm[0] * kzm[1] * kzm[2] * kzm[3] * (kzm[0] + kzm[1] + kzm[2] + kzm[3]);
        front * freq * (-I * self.a.resp.kz() * self.c.resp.kz()) / denom
    }
}

fn check_residue(v: Complex64) -> Result<f64> {
    let residue = v.im.abs() / v.re.abs().max(f64::MIN_POSITIVE);
    if v.re != 0.0 && residue > RESIDUE_LIMIT {
        return Err(Error::ImaginaryResidue { residue });
    }
    Ok(v.re)
}

/// Reflection-coefficient correlator for one polarization quadruple at
/// ω₁ = iξ₁, ω₂ = iξ₂, momentum delta stripped and the fluctuation
/// prefactor P divided out.
pub fn reflection_correlator(
    xi1: f64,
    xi2: f64,
    quad: PolarizationQuad,
    momenta: &MomentumConfig,
    medium: &Medium,
) -> Result<Complex64> {
    let legs = Legs::new(xi1, xi2, momenta, medium)?;
    let dab = dot(legs.a.basis.get(quad.a), legs.b.basis.get(quad.b));
    let dcd = dot(legs.c.basis.get(quad.c), legs.d.basis.get(quad.d));
    Ok(legs.correlator_scalar(medium)
        * dab
        * dcd
        * legs.a.amplitude(quad.a, false)
        * legs.b.amplitude(quad.b, true)
        * legs.c.amplitude(quad.c, false)
        * legs.d.amplitude(quad.d, true))
}

/// Analytic ξ → 0 limit of the correlator: it vanishes linearly in either
/// frequency, so any n = 0 or m = 0 Matsubara term is exactly zero.
pub fn reflection_correlator_static_limit() -> f64 {
    0.0
}

/// Density of the P-stripped variance with respect to
/// dξ₁ dξ₂ dq_a dq_b dθ_b dq_c dθ_c, summed over polarizations.
pub fn variance_integrand(
    xi1: f64,
    xi2: f64,
    momenta: &MomentumConfig,
    z: f64,
    medium: &Medium,
    sphere: &Sphere,
    opts: &KernelOptions,
) -> Result<f64> {
    let legs = Legs::new(xi1, xi2, momenta, medium)?;
    let expo = (-legs.kappa_sum() * z).exp();
    if expo == 0.0 || medium.strength == 0.0 {
        return Ok(0.0);
    }
    let power = opts.dot_power();
    // the polarization-resolved factors split into an (a, b) and a (c, d) block
    let block = |up: &Leg, down: &Leg| {
        let mut s = Complex64::new(0.0, 0.0);
        for pa in Polarization::ALL {
            for pb in Polarization::ALL {
                if opts.polarization_sum == PolarizationSum::Diagonal && pa != pb {
                    continue;
                }
                let d = dot(up.basis.get(pa), down.basis.get(pb));
                // one factor of d belongs to the correlator, the rest to the squared potential
                s += d.powi(power) * up.amplitude(pa, false) * down.amplitude(pb, true);
            }
        }
        s
    };
    let pol = block(&legs.a, &legs.b) * block(&legs.c, &legs.d);
    let w1 = I * xi1;
    let w2 = I * xi2;
    let potential = w1 * w1 * w2 * w2 / (4.0 * legs.a.resp.kz() * legs.c.resp.kz());
    let kernel = potential * legs.correlator_scalar(medium) * pol;
    let value = check_residue(kernel)?;

    let alpha = sphere.polarizability(xi1) * sphere.polarizability(xi2);
    // dξ²/(2π)², d²q³/(2π)⁶ with θ_a integrated, the bare delta's (2π)⁻²
    let measure = momenta.q_a * 2.0 * PI * momenta.q_b * momenta.q_c / (2.0 * PI).powi(10);
    Ok(VARIANCE_NORMALIZATION * measure * alpha * expo * value / C.powi(4))
}

/// Exponential mixture used for every magnitude: weight 1 − w with mean s,
/// weight w with mean f·s. Maps one uniform to (x, density).
#[derive(Debug, Clone, Copy)]
struct Mixture {
    tail_weight: f64,
    tail_factor: f64,
}

impl Mixture {
    fn from_plan(plan: &McPlan) -> Self {
        Self { tail_weight: plan.tail_weight, tail_factor: plan.tail_factor }
    }

    fn sample(&self, u: f64, scale: f64) -> (f64, f64) {
        let main = 1.0 - self.tail_weight;
        let wide = self.tail_factor * scale;
        let x = if u < main { -scale * (1.0 - u / main).ln() } else { -wide * (1.0 - (u - main) / self.tail_weight).ln() };
        (x, self.density(x, scale))
    }

    fn density(&self, x: f64, scale: f64) -> f64 {
        let wide = self.tail_factor * scale;
        (1.0 - self.tail_weight) * (-x / scale).exp() / scale + self.tail_weight * (-x / wide).exp() / wide
    }
}

/// Natural decay scale of the momentum magnitudes at frequency ξ:
/// e^{−κz} falls off on √(1/z² + 2ξ/(cz)).
pub fn momentum_scale(xi: f64, z: f64) -> f64 {
    (1.0 / (z * z) + 2.0 * xi / (C * z)).sqrt()
}

/// Natural frequency scale min(c/z, ω₀).
pub fn frequency_scale(z: f64, sphere: &Sphere) -> f64 {
    (C / z).min(sphere.omega0)
}

/// Maps five uniforms to a momentum point at fixed (ξ₁, ξ₂), returning the
/// inverse sampling density.
fn sample_momenta(u: &[f64], xi1: f64, xi2: f64, z: f64, plan: &McPlan, mix: &Mixture) -> (MomentumConfig, f64) {
    let s1 = plan.momentum_scale * momentum_scale(xi1, z);
    let s2 = plan.momentum_scale * momentum_scale(xi2, z);
    let (q_a, pa) = mix.sample(u[0], s1);
    let (q_b, pb) = mix.sample(u[1], s1);
    let (q_c, pc) = mix.sample(u[3], s2);
    let m = MomentumConfig { q_a, q_b, theta_b: 2.0 * PI * u[2], q_c, theta_c: 2.0 * PI * u[4] };
    (m, (2.0 * PI).powi(2) / (pa * pb * pc))
}

/// 5D momentum integral of [`variance_integrand`] at fixed (ξ₁, ξ₂).
pub fn momentum_integral(
    xi1: f64,
    xi2: f64,
    z: f64,
    config: &Configuration,
    opts: &KernelOptions,
    plan: &McPlan,
) -> Result<QuadResult> {
    check_frequency(xi1)?;
    check_frequency(xi2)?;
    let mix = Mixture::from_plan(plan);
    mc_integrate(
        |u| {
            let (m, weight) = sample_momenta(u, xi1, xi2, z, plan, &mix);
            Ok(weight * variance_integrand(xi1, xi2, &m, z, &config.medium, &config.sphere, opts)?)
        },
        5,
        plan,
    )
}

/// P-stripped δ²U at T = 0 by 7D Monte Carlo (ξ₁, ξ₂ and the momenta).
#[allow(non_snake_case)]
pub fn shape_variance_T0(z: f64, config: &Configuration, opts: &KernelOptions, plan: &McPlan) -> Result<QuadResult> {
    check_separation(z)?;
    let mix = Mixture::from_plan(plan);
    let sxi = plan.frequency_scale * frequency_scale(z, &config.sphere);
    mc_integrate(
        |u| {
            let (xi1, p1) = mix.sample(u[0], sxi);
            let (xi2, p2) = mix.sample(u[1], sxi);
            if xi1 == 0.0 || xi2 == 0.0 {
                return Ok(reflection_correlator_static_limit());
            }
            let (m, weight) = sample_momenta(&u[2..], xi1, xi2, z, plan, &mix);
            let v = variance_integrand(xi1, xi2, &m, z, &config.medium, &config.sphere, opts)?;
            Ok(v * weight / (p1 * p2))
        },
        7,
        plan,
    )
}

/// P-stripped δ²U at temperature T: double Matsubara sum over n, m ≥ 1 of
/// 5D momentum integrals, truncated by anti-diagonals.
#[allow(non_snake_case)]
pub fn shape_variance_T(z: f64, config: &Configuration, opts: &KernelOptions, plan: &McPlan) -> Result<QuadResult> {
    check_separation(z)?;
    let lambda_t = config
        .lambda_t
        .ok_or_else(|| Error::Domain("finite-temperature variance requested at T = 0".into()))?;
    // the integrand already carries dξ/2π per frequency; each term weighs Δξ = 1/λ_T
    let weight = 1.0 / lambda_t;
    let r = double_sum_adaptive(
        |n, m| {
            if n == 0 || m == 0 {
                return Ok(QuadResult::exact(reflection_correlator_static_limit()));
            }
            let term_plan = plan.with_seed(term_seed(plan.seed, n, m));
            let xi1 = f64::from(n) / lambda_t;
            let xi2 = f64::from(m) / lambda_t;
            Ok::<_, Error>(momentum_integral(xi1, xi2, z, config, opts, &term_plan)?.scaled(weight * weight))
        },
        DoubleSumOptions::new(1e-3).starting_at(1).symmetric(),
    )?;
    Ok(r)
}

/// Per-term seed: SplitMix64 finalizer over (seed, n, m).
fn term_seed(seed: u64, n: u32, m: u32) -> u64 {
    let mut x = seed ^ (u64::from(n) << 32 | u64::from(m)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Matsubara spacings per natural frequency scale above which
/// [`shape_variance`] replaces the sum by the T = 0 integral. The kernel
/// vanishes at ξ = 0, so Euler–Maclaurin puts the difference at about
/// 1/(12r²) relative, below 0.2% here.
pub const MATSUBARA_DENSE_RATIO: f64 = 8.0;

/// r = λ_T·min(c/z, ω₀), the number of Matsubara spacings per frequency scale.
pub fn matsubara_density(z: f64, config: &Configuration) -> Option<f64> {
    config.lambda_t.map(|lt| lt * frequency_scale(z, &config.sphere))
}

/// P-stripped δ²U at the configuration's temperature; the continuum
/// integral stands in for dense Matsubara sums.
pub fn shape_variance(z: f64, config: &Configuration, opts: &KernelOptions, plan: &McPlan) -> Result<QuadResult> {
    match matsubara_density(z, config) {
        Some(r) if r <= MATSUBARA_DENSE_RATIO => shape_variance_T(z, config, opts, plan),
        _ => shape_variance_T0(z, config, opts, plan),
    }
}

fn physical_variance(shape: impl FnOnce() -> Result<QuadResult>, config: &Configuration) -> Result<QuadResult> {
    let p = config
        .prefactor
        .ok_or_else(|| Error::Configuration("the physical variance needs a material prefactor".into()))?;
    if p == 0.0 {
        return Ok(QuadResult::exact(0.0));
    }
    Ok(shape()?.scaled(p))
}

/// δ²U at T = 0 in (ħω_p)²; exactly 0 when the prefactor vanishes (γ = 0).
#[allow(non_snake_case)]
pub fn variance_T0(z: f64, config: &Configuration, opts: &KernelOptions, plan: &McPlan) -> Result<QuadResult> {
    physical_variance(|| shape_variance_T0(z, config, opts, plan), config)
}

/// δ²U at finite temperature in (ħω_p)².
#[allow(non_snake_case)]
pub fn variance_T(z: f64, config: &Configuration, opts: &KernelOptions, plan: &McPlan) -> Result<QuadResult> {
    physical_variance(|| shape_variance_T(z, config, opts, plan), config)
}

fn check_separation(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("separation must be > 0, got {z}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeTag {
    Near,
    Intermediate,
    Far,
    Thermal,
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Near => "near",
            Self::Intermediate => "intermediate",
            Self::Far => "far",
            Self::Thermal => "thermal",
        })
    }
}

/// Near below min(λ_p, λ₀), far beyond the crossover of the intermediate and
/// far asymptotes, thermal beyond λ_T/(4π) where the n = 0 term dominates Ū.
pub fn regime(z: f64, config: &Configuration) -> RegimeTag {
    if config.lambda_t.is_some_and(|lt| z >= lt / (4.0 * PI)) {
        RegimeTag::Thermal
    } else if z < config.lambda0().min(1.0) {
        RegimeTag::Near
    } else if z >= crate::asymptotics::crossover_distance(config.lambda_gamma()) {
        RegimeTag::Far
    } else {
        RegimeTag::Intermediate
    }
}

/// One evaluated point of F(z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FPoint {
    /// z/λ_p.
    pub z: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "F_err")]
    pub f_err: f64,
    pub n_samples: u64,
    pub regime: RegimeTag,
    /// Ū in units of ħω_p.
    pub u_mean: f64,
    pub prefactor: Option<f64>,
    pub converged: bool,
}

/// F(z) = δ²U/(Ū² P) with the exact mean potential.
pub fn f_of_z(z: f64, config: &Configuration, opts: &KernelOptions, plan: &McPlan) -> Result<FPoint> {
    let mean = mean_cp(&MeanPotentialRequest::new(config, z, 1e-6))?;
    let v = shape_variance(z, config, opts, plan)?;
    let u2 = mean.value * mean.value;
    let f = v.value / u2;
    let f_err = (v.err_est / u2).hypot(2.0 * f * mean.relative_error());
    Ok(FPoint {
        z,
        f,
        f_err,
        n_samples: v.n_evals,
        regime: regime(z, config),
        u_mean: mean.value,
        prefactor: config.prefactor,
        converged: v.converged && mean.converged,
    })
}
