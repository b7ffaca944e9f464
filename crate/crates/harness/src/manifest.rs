use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::SweepConfig;
use crate::error::{HarnessError, Result};

pub const RATIO_NOTE: &str = "ratio caps (default 4) are a chosen operationalization of order-wise statements with unspecified constants";

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub hetlearn_core: &'static str,
    pub hetlearn_harness: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    /// SHA-256 of the canonical TOML form of the config.
    pub config_hash: String,
    pub seed: u64,
    pub replicates: usize,
    pub rows: usize,
    pub versions: Versions,
    pub wall_time_seconds: f64,
    pub threads: usize,
    pub notes: Vec<String>,
}

pub fn config_hash(cfg: &SweepConfig) -> String {
    let digest = Sha256::digest(cfg.to_toml_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(cfg: &SweepConfig, rows: usize, wall: Duration) -> Self {
        Self {
            experiment: cfg.experiment.name().to_string(),
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            replicates: cfg.replicates,
            rows,
            versions: Versions { hetlearn_core: hetlearn_core::VERSION, hetlearn_harness: env!("CARGO_PKG_VERSION") },
            wall_time_seconds: wall.as_secs_f64(),
            threads: rayon::current_num_threads(),
            notes: vec![RATIO_NOTE.to_string(), "medians use the lower order statistic".to_string()],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| HarnessError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_formatting_but_not_values() {
        let a = SweepConfig::from_toml_str("experiment = \"hyperplane_sweep\"\nn_grid = [200]\nreplicates = 2\nseed = 1\nzeta = 1.0\n", None).unwrap();
        let b = SweepConfig::from_toml_str("experiment=\"hyperplane_sweep\"   # same\nseed = 1\nzeta = 1.0\nreplicates = 2\nn_grid = [ 200 ]\n", None).unwrap();
        let c = SweepConfig::from_toml_str("experiment = \"hyperplane_sweep\"\nn_grid = [200]\nreplicates = 2\nseed = 2\nzeta = 1.0\n", None).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&c));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn manifest_fields() {
        let cfg = SweepConfig::from_toml_str("experiment = \"hyperplane_sweep\"\nn_grid = [200]\nreplicates = 2\nseed = 11\nzeta = 1.0\n", None).unwrap();
        let m = Manifest::new(&cfg, 3, Duration::from_millis(1500));
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["seed"], 11);
        assert_eq!(v["wall_time_seconds"], 1.5);
        assert_eq!(v["experiment"], "hyperplane_sweep");
        assert!(v["versions"]["hetlearn_core"].is_string());
    }
}
