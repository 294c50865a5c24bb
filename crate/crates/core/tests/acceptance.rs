//! One test per acceptance criterion. The budget is taken from
//! `CASIMIR_SPECKLE_LEVEL` (smoke, desk or full; default desk).

use casimir_speckle::verify::{run_criterion, Level, DEFAULT_SEED};

fn level() -> Level {
    std::env::var("CASIMIR_SPECKLE_LEVEL").ok().and_then(|s| s.parse().ok()).unwrap_or(Level::Desk)
}

fn criterion(id: u8) {
    let o = run_criterion(id, level(), DEFAULT_SEED);
    println!("{o}");
    assert!(o.passed, "{o}");
}

#[test]
fn criterion_01_mean_retarded_asymptote() {
    criterion(1);
}

#[test]
fn criterion_02_thermal_mean_asymptote() {
    criterion(2);
}

#[test]
fn criterion_03_near_field_slope() {
    criterion(3);
}

#[test]
fn criterion_04_intermediate_regime() {
    criterion(4);
}

#[test]
fn criterion_05_far_regime() {
    criterion(5);
}

#[test]
fn criterion_06_zero_matsubara_annihilation() {
    criterion(6);
}

#[test]
fn criterion_07_thermal_collapse() {
    criterion(7);
}

#[test]
fn criterion_08_plasma_null() {
    criterion(8);
}

#[test]
fn criterion_09_material_constants() {
    criterion(9);
}

#[test]
fn criterion_10_oracle_equivalence() {
    criterion(10);
}

#[test]
fn criterion_11_determinism() {
    criterion(11);
}
