use casimir_speckle::config::Configuration;
use casimir_speckle::mean::{mean_cp, MeanPotentialRequest};
use casimir_speckle::quadrature::McPlan;
use casimir_speckle::units::Model;
use casimir_speckle::variance::{f_of_z, shape_variance_T, shape_variance_T0, KernelOptions, RegimeTag};

fn drude() -> Configuration {
    Configuration::from_ratios(100.0, Model::Drude, 1.0).unwrap()
}

#[test]
fn matsubara_variance_tends_to_the_zero_temperature_integral() {
    // r = λ_T c/z ≈ 5.3, just below the continuum switch
    let z = 30.0;
    let cold = drude();
    let warm = cold.with_thermal_wavelength(Some(1000.0)).unwrap();
    let opts = KernelOptions::default();
    let t0 = shape_variance_T0(z, &cold, &opts, &McPlan::new(3, 2_000_000).unwrap()).unwrap();
    let t = shape_variance_T(z, &warm, &opts, &McPlan::new(4, 20_000).unwrap()).unwrap();
    let sigma = t0.err_est.hypot(t.err_est);
    let rel = (t.value / t0.value - 1.0).abs();
    println!("T0 {:.5e} +- {:.1e}, Matsubara {:.5e} +- {:.1e}", t0.value, t0.err_est, t.value, t.err_est);
    assert!(rel < 0.03 || (t.value - t0.value).abs() < 3.0 * sigma, "relative gap {rel}");
}

#[test]
fn thermal_variance_collapses_faster_than_the_mean() {
    let cfg = drude().with_thermal_wavelength(Some(1000.0)).unwrap();
    let plan = McPlan::new(11, 50_000).unwrap();
    let opts = KernelOptions::default();
    let a = f_of_z(1500.0, &cfg, &opts, &plan).unwrap();
    let b = f_of_z(3000.0, &cfg, &opts, &plan).unwrap();
    assert_eq!(a.regime, RegimeTag::Thermal);
    // z³e^{−8πz/λ_T} between the two points
    let law = 8.0 * (-8.0 * std::f64::consts::PI * 1.5).exp();
    assert!((b.f / a.f / law).ln().abs() < 0.5, "ratio {} against {law}", b.f / a.f);
    let u = mean_cp(&MeanPotentialRequest::new(&cfg, 3000.0, 1e-6)).unwrap();
    assert_eq!(u.value, b.u_mean);
}
