//! Response functions on the imaginary frequency axis ω = iξ.
//!
//! All quantities are in reduced units (see [`crate::units`]). Wave numbers
//! are carried as complex numbers with the branch k_z = iκ, κ > 0, so the
//! formulas read exactly as their real-frequency counterparts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{DerivedScales, Model, REDUCED_LIGHT_SPEED};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub type Vec3 = [Complex64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::TE, Polarization::TM];

    fn index(self) -> usize {
        match self {
            Polarization::TE => 0,
            Polarization::TM => 1,
        }
    }
}

/// Direction of a plane wave relative to the plate: `Up` is ε⁺ (moving away
/// from the surface), `Down` is ε⁻.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }
}

/// Homogeneous metal in reduced units: ε(iξ) = 1 + s/(ξ(ξ + γ)) with
/// s = (ω_p/ω_p)² = 1 for a metal and 0 for a transparent reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub model: Model,
    /// γ/ω_p, kept even for the plasma model (it then only enters the
    /// fluctuation prefactor, never the permittivity).
    pub gamma: f64,
    /// Squared plasma frequency in units of ω_p²: 1 for a metal, 0 for vacuum.
    pub strength: f64,
}

impl Medium {
    pub fn drude(gamma: f64) -> Self {
        Self { model: Model::Drude, gamma, strength: 1.0 }
    }

    pub fn plasma() -> Self {
        Self { model: Model::Plasma, gamma: 0.0, strength: 1.0 }
    }

    /// ε ≡ 1: no reflection, unit transmission.
    pub fn vacuum() -> Self {
        Self { model: Model::Plasma, gamma: 0.0, strength: 0.0 }
    }

    pub fn with_model(gamma: f64, model: Model) -> Self {
        Self { model, gamma, strength: 1.0 }
    }

    pub fn from_scales(scales: &DerivedScales) -> Self {
        Self::with_model(scales.gamma / scales.omega_p, scales.model)
    }

    /// Relaxation rate entering ε(iξ) and the conductivity correlator.
    pub fn effective_gamma(&self) -> f64 {
        match self.model {
            Model::Drude => self.gamma,
            Model::Plasma => 0.0,
        }
    }

    /// ε(iξ): Drude 1 + ω_p²/(ξ(ξ + γ)), plasma 1 + ω_p²/ξ².
    pub fn permittivity(&self, xi: f64) -> Result<f64> {
        check_frequency(xi)?;
        Ok(1.0 + self.strength / (xi * (xi + self.effective_gamma())))
    }
}

pub(crate) fn check_frequency(xi: f64) -> Result<()> {
    if xi == 0.0 {
        Err(Error::StaticDivergence)
    } else if !(xi > 0.0 && xi.is_finite()) {
        Err(Error::Domain(format!("imaginary frequency must be finite and positive, got {xi}")))
    } else {
        Ok(())
    }
}

/// Dipolar sphere in reduced units: α(0)/(ε₀λ_p³) and ω₀/ω_p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub alpha0: f64,
    pub omega0: f64,
}

impl Sphere {
    pub fn new(alpha0: f64, omega0: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && omega0 > 0.0) {
            return Err(Error::Configuration("sphere needs alpha0 > 0 and omega0 > 0".into()));
        }
        Ok(Self { alpha0, omega0 })
    }

    /// Unit polarizability with resonance wavelength λ₀ = ratio·λ_p.
    pub fn with_wavelength_ratio(lambda0_over_lambda_p: f64) -> Result<Self> {
        Self::new(1.0, 1.0 / lambda0_over_lambda_p)
    }

    /// α(iξ) = α(0)ω₀²/(ω₀² + ξ²).
    pub fn polarizability(&self, xi: f64) -> f64 {
        let w2 = self.omega0 * self.omega0;
        self.alpha0 * w2 / (w2 + xi * xi)
    }
}

/// Vacuum/metal interface response for one (ξ, q).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerResponse {
    pub xi: f64,
    pub q: f64,
    pub eps: f64,
    /// √(ξ²/c² + q²).
    pub kappa: f64,
    /// √(εξ²/c² + q²).
    pub kappa_metal: f64,
    r_vm: [Complex64; 2],
    t_vm: [Complex64; 2],
    t_mv: [Complex64; 2],
}

impl LayerResponse {
    pub fn new(medium: &Medium, xi: f64, q: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::Domain(format!("transverse wavenumber must be >= 0, got {q}")));
        }
        let eps = medium.permittivity(xi)?;
        let k0 = xi / REDUCED_LIGHT_SPEED;
        let kappa = (k0 * k0 + q * q).sqrt();
        let kappa_metal = (eps * k0 * k0 + q * q).sqrt();
        let kz = I * kappa;
        let kz_m = I * kappa_metal;
        let n = eps.sqrt();
        let r_vm = [(kz - kz_m) / (kz + kz_m), (eps * kz - kz_m) / (eps * kz + kz_m)];
        let t_vm = [2.0 * kz / (kz + kz_m), 2.0 * n * kz / (eps * kz + kz_m)];
        let t_mv = [2.0 * kz_m / (kz_m + kz), 2.0 * n * kz_m / (kz_m + eps * kz)];
        Ok(Self { xi, q, eps, kappa, kappa_metal, r_vm, t_vm, t_mv })
    }

    /// k_z = iκ.
    pub fn kz(&self) -> Complex64 {
        I * self.kappa
    }

    /// k̃_z = iκ̃.
    pub fn kz_metal(&self) -> Complex64 {
        I * self.kappa_metal
    }

    pub fn r_vm(&self, pol: Polarization) -> Complex64 {
        self.r_vm[pol.index()]
    }

    pub fn r_mm(&self, pol: Polarization) -> Complex64 {
        -self.r_vm[pol.index()]
    }

    pub fn t_vm(&self, pol: Polarization) -> Complex64 {
        self.t_vm[pol.index()]
    }

    pub fn t_mv(&self, pol: Polarization) -> Complex64 {
        self.t_mv[pol.index()]
    }
}

/// Transverse plane-wave mode: q̂ = (cos θ, sin θ, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseMode {
    pub q: f64,
    pub theta: f64,
    pub pol: Polarization,
}

impl TransverseMode {
    pub fn new(q: f64, theta: f64, pol: Polarization) -> Self {
        Self { q, theta, pol }
    }
}

/// TE and TM vectors of one (q, θ, direction) at a given k and k_z.
#[derive(Debug, Clone, Copy)]
pub struct PolarizationBasis {
    pub te: Vec3,
    pub tm: Vec3,
}

impl PolarizationBasis {
    /// ε_TE = ẑ × q̂, ε_TM^± = (q ẑ ∓ k_z q̂)/k.
    pub fn new(q: f64, theta: f64, kz: Complex64, k: Complex64, direction: Direction) -> Self {
        let (s, c) = theta.sin_cos();
        let zero = Complex64::new(0.0, 0.0);
        let te = [Complex64::new(-s, 0.0), Complex64::new(c, 0.0), zero];
        let a = -direction.sign() * kz / k;
        let tm = [a * c, a * s, Complex64::new(q, 0.0) / k];
        Self { te, tm }
    }

    /// Vacuum-side basis at imaginary frequency ξ (k = iξ/c).
    pub fn vacuum(q: f64, theta: f64, xi: f64, direction: Direction) -> Self {
        let k0 = xi / REDUCED_LIGHT_SPEED;
        let kappa = (k0 * k0 + q * q).sqrt();
        Self::new(q, theta, I * kappa, I * k0, direction)
    }

    pub fn get(&self, pol: Polarization) -> &Vec3 {
        match pol {
            Polarization::TE => &self.te,
            Polarization::TM => &self.tm,
        }
    }
}

/// Bilinear (unconjugated) product.
#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// ε_a⁺(q_a)·ε_b⁻(q_b) for vacuum modes at imaginary frequency ξ.
///
/// TE·TE = cos φ, TM·TM = (q_a q_b − k_a^z k_b^z cos φ)/k², mixed terms
/// ±(k^z/k) sin φ with φ = θ_a − θ_b. Real on the imaginary axis.
pub fn polarization_dot(a: &TransverseMode, b: &TransverseMode, xi: f64) -> Result<f64> {
    check_frequency(xi)?;
    let ea = PolarizationBasis::vacuum(a.q, a.theta, xi, Direction::Up);
    let eb = PolarizationBasis::vacuum(b.q, b.theta, xi, Direction::Down);
    let d = dot(ea.get(a.pol), eb.get(b.pol));
    debug_assert!(d.im.abs() <= 1e-12 * d.norm().max(1e-300));
    Ok(d.re)
}
