use std::fmt::Write as _;
use std::path::Path;

use casimir_speckle::asymptotics::{asymptote_F, asymptote_mean, calibrate, AsymptoteKind};
use casimir_speckle::config::Configuration;
use casimir_speckle::error::Error;
use casimir_speckle::mean::{mean_cp, MeanPotentialRequest};
use casimir_speckle::report::{f_points_csv, opt12, sig12, ExtraColumns};
use casimir_speckle::units::{
    derive_scales, fluctuation_prefactor, fluctuation_rms_scale, Model, KF_L_WARNING_THRESHOLD,
};
use casimir_speckle::variance::{f_of_z, regime, FPoint, RegimeTag};
use casimir_speckle::verify::{run_criterion, Level, Verdict, CRITERIA, DEFAULT_SEED};
use serde::Serialize;

use crate::cache::{fingerprint, write_atomic, ResultCache};
use crate::run_config::{load_material, Resolved, RunConfig};
use crate::CliError;

const MEAN_TOLERANCE: f64 = 1e-6;

// stdout writes that tolerate a closed pipe
macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

fn grid(r: &Resolved) -> Result<Vec<f64>, CliError> {
    r.effective
        .z_grid
        .as_ref()
        .ok_or_else(|| CliError::Usage("no z-grid: set z_grid in the config or pass --z".into()))?
        .resolve()
}

fn echo_config(r: &Resolved) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&r.effective).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    write_atomic(&r.out.join("effective_config.json"), text.as_bytes())?;
    Ok(())
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Drude => "drude",
        Model::Plasma => "plasma",
    }
}

fn mean_asymptote(z: f64, cfg: &Configuration) -> Result<(AsymptoteKind, f64), Error> {
    let kind = match regime(z, cfg) {
        RegimeTag::Thermal => AsymptoteKind::MeanThermal,
        _ => AsymptoteKind::MeanRetarded,
    };
    Ok((kind, asymptote_mean(kind, z, cfg)?))
}

pub fn mean(rc: &RunConfig) -> Result<(), CliError> {
    let r = rc.resolve()?;
    let zs = grid(&r)?;
    let cfg = &r.configuration;
    let fp = fingerprint(cfg, &r.kernel, &r.plan);
    let mut csv = String::from("z_over_lambda_p,U_mean,U_err,asymptote,U_asymptote,asymptote_ratio,converged,fingerprint\n");
    let mut failed = 0;
    for &z in &zs {
        let (kind, asym) = mean_asymptote(z, cfg).map_err(CliError::usage)?;
        let (u, err, ok) = match mean_cp(&MeanPotentialRequest::new(cfg, z, MEAN_TOLERANCE)) {
            Ok(q) => (Some(q.value), Some(q.err_est), q.converged),
            Err(e) => {
                log::error!("mean potential at z = {z}: {e}");
                (None, None, false)
            }
        };
        if !ok {
            failed += 1;
        }
        let _ = writeln!(
            csv,
            "{},{},{},{kind},{},{},{},{fp}",
            sig12(z),
            opt12(u),
            opt12(err),
            sig12(asym),
            opt12(u.map(|u| u / asym)),
            u8::from(ok)
        );
    }
    write_atomic(&r.out.join("mean.csv"), csv.as_bytes())?;
    echo_config(&r)?;
    out!("{csv}");
    if failed > 0 {
        return Err(CliError::NonConvergence(format!("{failed} of {} points did not converge", zs.len())));
    }
    Ok(())
}

fn flagged(z: f64, cfg: &Configuration) -> FPoint {
    FPoint {
        z,
        f: f64::NAN,
        f_err: f64::NAN,
        n_samples: 0,
        regime: regime(z, cfg),
        u_mean: f64::NAN,
        prefactor: cfg.prefactor,
        converged: false,
    }
}

fn f_asymptotes(z: f64, cfg: &Configuration) -> Vec<String> {
    let law = |k| asymptote_F(k, z, cfg).ok().filter(|v: &f64| v.is_finite());
    [AsymptoteKind::FIntermediate, AsymptoteKind::FFar, AsymptoteKind::FThermal]
        .into_iter()
        .map(|k| opt12(law(k)))
        .collect()
}

pub fn fvar(rc: &RunConfig) -> Result<(), CliError> {
    let r = rc.resolve()?;
    let zs = grid(&r)?;
    let cfg = &r.configuration;
    let fp = fingerprint(cfg, &r.kernel, &r.plan);
    let cache = ResultCache::from_env(&r.out);
    log::info!("result cache at {}", cache.root().display());
    let (mut hits, mut computed, mut failed) = (0usize, 0usize, 0usize);
    let mut points = Vec::with_capacity(zs.len());
    for &z in &zs {
        if let Some(p) = cache.get(&fp, z) {
            hits += 1;
            points.push(p);
            continue;
        }
        computed += 1;
        let p = match f_of_z(z, cfg, &r.kernel, &r.plan) {
            Ok(p) => p,
            Err(e) => {
                log::error!("F at z = {z}: {e}");
                flagged(z, cfg)
            }
        };
        if p.converged {
            cache.put(&fp, &p)?;
        } else {
            failed += 1;
        }
        points.push(p);
    }
    let extra = ExtraColumns {
        names: ["F_asymptote_intermediate", "F_asymptote_far", "F_asymptote_thermal", "converged"]
            .map(String::from)
            .to_vec(),
        rows: points
            .iter()
            .map(|p| {
                let mut row = f_asymptotes(p.z, cfg);
                row.push(u8::from(p.converged).to_string());
                row
            })
            .collect(),
    };
    let csv = f_points_csv(&points, &fp, Some(&extra)).map_err(CliError::usage)?;
    write_atomic(&r.out.join("fvar.csv"), csv.as_bytes())?;
    echo_config(&r)?;
    out!("{csv}");
    eprintln!(
        "fvar: {} points ({} model), {computed} computed, {hits} cached, fingerprint {fp}",
        zs.len(),
        model_name(cfg.medium.model)
    );
    if failed > 0 {
        return Err(CliError::NonConvergence(format!("{failed} of {} points flagged", zs.len())));
    }
    Ok(())
}

#[derive(Serialize)]
struct MaterialReport {
    scales: casimir_speckle::units::DerivedScales,
    lambda_gamma_over_lambda_p: f64,
    kf_l: f64,
    weak_disorder_valid: bool,
    prefactor: f64,
    rms_scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

pub fn material(rc: &RunConfig, preset: Option<&str>, json: bool) -> Result<(), CliError> {
    let mut spec = match preset {
        Some(name) => load_material(name)?.spec(),
        None => rc
            .material_spec()?
            .ok_or_else(|| CliError::Usage("a material given only by lambda_gamma has no derived scales".into()))?,
    };
    if let Some(m) = rc.model {
        spec.model = m;
    }
    let s = derive_scales(&spec).map_err(CliError::usage)?;
    let prefactor = fluctuation_prefactor(&s);
    let report = MaterialReport {
        scales: s,
        lambda_gamma_over_lambda_p: s.lambda_gamma_over_lambda_p(),
        kf_l: s.kf_l(),
        weak_disorder_valid: s.kf_l() >= KF_L_WARNING_THRESHOLD,
        prefactor,
        rms_scale: fluctuation_rms_scale(&s),
        note: (s.gamma == 0.0).then(|| "gamma = 0: no impurity scattering, the variance vanishes identically".into()),
    };
    if json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        outln!("{text}");
        return Ok(());
    }
    outln!("model                 {}", model_name(s.model));
    outln!("electron density      {:.6e} m^-3", s.electron_density);
    outln!("plasma frequency      {:.6e} rad/s", s.omega_p);
    outln!("relaxation rate       {:.6e} rad/s", s.gamma);
    outln!("lambda_p              {:.6e} m", s.lambda_p);
    outln!("lambda_gamma          {:.6e} m ({:.4} lambda_p)", s.lambda_gamma, report.lambda_gamma_over_lambda_p);
    outln!("Fermi wavelength      {:.6e} m", s.lambda_f);
    outln!("Fermi velocity        {:.6e} m/s", s.v_f);
    outln!("mean free path        {:.6e} m", s.mean_free_path);
    outln!("dc conductivity       {:.6e} S/m", s.sigma0);
    outln!(
        "k_F l                 {:.4}{}",
        report.kf_l,
        if report.weak_disorder_valid { "" } else { " (weak-disorder picture questionable)" }
    );
    outln!("variance prefactor    {:.6e}", report.prefactor);
    outln!("rms scale             {:.6e}", report.rms_scale);
    if let Some(n) = &report.note {
        outln!("note                  {n}");
    }
    Ok(())
}

fn read_points(path: &Path, cfg: &Configuration) -> Result<Vec<FPoint>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| CliError::Usage(format!("{} has no column '{name}'", path.display())))
    };
    let (iz, i_f, ie) = (col("z_over_lambda_p")?, col("F")?, col("F_err")?);
    let mut points = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').collect();
        let num = |i: usize| -> Result<f64, CliError> {
            cells
                .get(i)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| CliError::Usage(format!("{} row {}: bad number in column {i}", path.display(), n + 2)))
        };
        let (z, f, err) = (num(iz)?, num(i_f)?, num(ie)?);
        if f.is_finite() && err.is_finite() {
            points.push(FPoint { z, f, f_err: err, regime: regime(z, cfg), ..flagged(z, cfg) });
        }
    }
    Ok(points)
}

pub fn asymptote(rc: &RunConfig, kind: &str, calibrate_from: Option<&Path>) -> Result<(), CliError> {
    let kind: AsymptoteKind = kind.parse().map_err(CliError::usage)?;
    let r = rc.resolve()?;
    let cfg = &r.configuration;
    if let Some(path) = calibrate_from {
        let tag = match kind {
            AsymptoteKind::FIntermediate => RegimeTag::Intermediate,
            AsymptoteKind::FFar => RegimeTag::Far,
            AsymptoteKind::FThermal => RegimeTag::Thermal,
            _ => return Err(CliError::Usage(format!("{kind} has no constant to calibrate"))),
        };
        // only points inside the law's own regime
        let points: Vec<FPoint> = read_points(path, cfg)?.into_iter().filter(|p| p.regime == tag).collect();
        let entry = calibrate(kind, &points, cfg).map_err(CliError::usage)?;
        let text = serde_json::to_string_pretty(&entry).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        outln!("{text}");
        return Ok(());
    }
    let zs = grid(&r)?;
    let mut csv = format!("z_over_lambda_p,{kind}\n");
    for &z in &zs {
        let v = match kind {
            AsymptoteKind::MeanRetarded | AsymptoteKind::MeanThermal => asymptote_mean(kind, z, cfg),
            _ => asymptote_F(kind, z, cfg),
        }
        .map_err(CliError::usage)?;
        let _ = writeln!(csv, "{},{}", sig12(z), sig12(v));
    }
    write_atomic(&r.out.join(format!("asymptote-{kind}.csv")), csv.as_bytes())?;
    echo_config(&r)?;
    out!("{csv}");
    Ok(())
}

pub fn verify(level: Level, criteria: &[u8], seed: Option<u64>, out: Option<&Path>, json: bool) -> Result<(), CliError> {
    let ids: Vec<u8> = if criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { criteria.to_vec() };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(CliError::Usage(format!("no criterion {bad}")));
    }
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let mut outcomes = Vec::new();
    for id in ids {
        let o = run_criterion(id, level, seed);
        if !json {
            outln!("{o}");
        }
        outcomes.push(o);
    }
    let verdict = Verdict { level, seed, passed: outcomes.iter().all(|o| o.passed), outcomes };
    let text = serde_json::to_string_pretty(&verdict).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    if json {
        outln!("{text}");
    }
    if let Some(dir) = out {
        write_atomic(&dir.join("verify.json"), text.as_bytes())?;
    }
    let failed: Vec<String> = verdict.outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("criteria {} failed at level {level}", failed.join(", "))))
    }
}
