//! On-disk cache of evaluated F(z) points keyed by configuration fingerprint.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use casimir_speckle::config::Configuration;
use casimir_speckle::quadrature::McPlan;
use casimir_speckle::variance::{FPoint, KernelOptions};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "CASIMIR_SPECKLE_CACHE";

/// Bumped whenever cached values would change for the same inputs.
const CACHE_FORMAT: u32 = 1;

#[derive(Serialize)]
struct FingerprintInput<'a> {
    format: u32,
    version: &'a str,
    configuration: &'a Configuration,
    kernel: &'a KernelOptions,
    plan: &'a McPlan,
}

/// First 16 bytes of SHA-256 over the physics-relevant configuration, the
/// kernel switches and the sampling plan, hex encoded.
pub fn fingerprint(configuration: &Configuration, kernel: &KernelOptions, plan: &McPlan) -> String {
    let input = FingerprintInput {
        format: CACHE_FORMAT,
        version: env!("CARGO_PKG_VERSION"),
        configuration,
        kernel,
        plan,
    };
    let bytes = serde_json::to_vec(&input).expect("fingerprint input serializes");
    hex::encode(&Sha256::digest(&bytes)[..16])
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let n = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = dir.join(format!(".{name}.{}.{n}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

/// One JSON file per (fingerprint, z), named by the bit pattern of z.
#[derive(Debug, Clone)]
pub struct ResultCache {
    root: PathBuf,
}

impl ResultCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// `$CASIMIR_SPECKLE_CACHE`, else `<out>/.cache`.
    pub fn from_env(out: &Path) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::new(d),
            _ => Self::new(out.join(".cache")),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entry(&self, fingerprint: &str, z: f64) -> PathBuf {
        self.root.join(fingerprint).join(format!("{:016x}.json", z.to_bits()))
    }

    pub fn get(&self, fingerprint: &str, z: f64) -> Option<FPoint> {
        let text = std::fs::read_to_string(self.entry(fingerprint, z)).ok()?;
        match serde_json::from_str::<FPoint>(&text) {
            Ok(p) if p.z.to_bits() == z.to_bits() => Some(p),
            Ok(_) => None,
            Err(e) => {
                log::warn!("ignoring unreadable cache entry for z = {z}: {e}");
                None
            }
        }
    }

    pub fn put(&self, fingerprint: &str, point: &FPoint) -> std::io::Result<()> {
        let text = serde_json::to_vec_pretty(point).map_err(std::io::Error::other)?;
        write_atomic(&self.entry(fingerprint, point.z), &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use casimir_speckle::units::Model;
    use casimir_speckle::variance::{KernelVariant, RegimeTag};

    fn cfg() -> Configuration {
        Configuration::from_ratios(100.0, Model::Drude, 1.0).unwrap()
    }

    #[test]
    fn fingerprint_covers_physics_kernel_and_plan() {
        let k = KernelOptions::default();
        let p = McPlan::new(1, 10_000).unwrap();
        let base = fingerprint(&cfg(), &k, &p);
        assert_eq!(base, fingerprint(&cfg(), &k, &p));
        assert_eq!(base.len(), 32);
        assert_ne!(base, fingerprint(&cfg().with_model(Model::Plasma), &k, &p));
        assert_ne!(base, fingerprint(&cfg().with_thermal_wavelength(Some(1e3)).unwrap(), &k, &p));
        assert_ne!(base, fingerprint(&cfg(), &KernelOptions::with_variant(KernelVariant::A), &p));
        assert_ne!(base, fingerprint(&cfg(), &k, &p.with_seed(2)));
        assert_ne!(base, fingerprint(&cfg(), &k, &p.with_samples(20_000)));
    }

    #[test]
    fn round_trip_and_exact_key() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResultCache::new(dir.path());
        let p = FPoint {
            z: 0.1 + 0.2,
            f: 1.234e-7,
            f_err: 1e-9,
            n_samples: 10_000,
            regime: RegimeTag::Near,
            u_mean: -3.0,
            prefactor: Some(1e-9),
            converged: true,
        };
        assert!(cache.get("fp", p.z).is_none());
        cache.put("fp", &p).unwrap();
        assert_eq!(cache.get("fp", p.z), Some(p));
        assert!(cache.get("fp", 0.3).is_none());
        assert!(cache.get("other", p.z).is_none());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path().join("a")).unwrap().count(), 1);
    }
}
