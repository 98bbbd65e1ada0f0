//! Versioned TOML configuration. Every key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use rhc::resonator::ResonatorConfig;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    /// Root of every random draw.
    pub seed: u64,
    pub resonator: ResonatorConfig,
    pub kernel: KernelSection,
    pub capacity: CapacitySection,
    pub noise: NoiseSection,
    pub hex: HexSection,
    pub subint: SubintSection,
    pub subset_sum: SubsetSection,
    pub scene: SceneSection,
    pub baselines: BaselineSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            version: FORMAT_VERSION,
            seed: 1,
            resonator: ResonatorConfig { max_restarts: 10, ..Default::default() },
            kernel: KernelSection::default(),
            capacity: CapacitySection::default(),
            noise: NoiseSection::default(),
            hex: HexSection::default(),
            subint: SubintSection::default(),
            subset_sum: SubsetSection::default(),
            scene: SceneSection::default(),
            baselines: BaselineSection::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let config: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        if config.version != FORMAT_VERSION {
            return Err(rhc::Error::Version { found: config.version, expected: FORMAT_VERSION }.to_string());
        }
        Ok(config)
    }
}

/// Kernel of one modulus or of a residue system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub moduli: Vec<u64>,
    pub dim: usize,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self { moduli: vec![5], dim: 10_000, start: -8.0, stop: 8.0, step: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacitySection {
    pub dim: usize,
    pub k: usize,
    pub trials: usize,
    pub threshold: f64,
    pub growth: f64,
    pub min_range: u64,
    pub max_range: u64,
}

impl Default for CapacitySection {
    fn default() -> Self {
        Self { dim: 512, k: 2, trials: 100, threshold: 0.95, growth: 1.25, min_range: 100, max_range: 1 << 40 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub dim: usize,
    pub k: usize,
    /// Target range; the closest product of `k` consecutive primes is used.
    pub range: u64,
    pub kappas: Vec<f64>,
    pub trials: usize,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { dim: 512, k: 2, range: 1000, kappas: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0], trials: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HexSection {
    pub moduli: Vec<u64>,
    pub dim: usize,
    /// Heatmap spans `[−extent, extent]²`.
    pub extent: f64,
    pub steps: usize,
    /// State counts are tabulated for `m = 1..=max_m`.
    pub max_m: u64,
}

impl Default for HexSection {
    fn default() -> Self {
        Self { moduli: vec![3, 5], dim: 2048, extent: 8.0, steps: 81, max_m: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubintSection {
    pub dim: usize,
    pub k: usize,
    pub range: u64,
    pub partitions: Vec<u64>,
    pub kappas: Vec<f64>,
    pub trials: usize,
}

impl Default for SubintSection {
    fn default() -> Self {
        Self { dim: 512, k: 2, range: 1000, partitions: vec![1, 2, 4, 8], kappas: vec![1.0, 16.0], trials: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubsetSection {
    pub sizes: Vec<usize>,
    pub dims: Vec<usize>,
    /// Moduli are the co-prime triple `{m−1, m, m+1}` at or above this `m`.
    pub m: u64,
    pub trials: usize,
    pub attempts: usize,
    /// Solve this instance file instead of benchmarking.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<PathBuf>,
}

impl Default for SubsetSection {
    fn default() -> Self {
        Self { sizes: vec![4, 6, 8, 10], dims: vec![512, 1024, 2048], m: 200, trials: 50, attempts: 20, instance: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    pub dim: usize,
    pub scenes: usize,
    pub moduli: Vec<u64>,
    pub objects: usize,
    pub features: usize,
    pub coeffs_per_object: usize,
    pub patch: i64,
    /// JSON array of canonical-frame feature maps used instead of synthetic objects.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
}

impl Default for SceneSection {
    fn default() -> Self {
        Self { dim: 10_000, scenes: 50, moduli: vec![3, 5, 7], objects: 10, features: 16, coeffs_per_object: 12, patch: 12, corpus: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub thermometer_dim: usize,
    pub float_dim: usize,
    pub float_width: usize,
    pub scatter_dim: usize,
    pub scatter_p: f64,
    pub seeds: usize,
    pub max_delta: u32,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self { thermometer_dim: 100, float_dim: 100, float_width: 10, scatter_dim: 1000, scatter_p: 0.05, seeds: 50, max_delta: 40 }
    }
}
