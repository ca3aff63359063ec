//! Scan configuration files.
//!
//! ```toml
//! [scan]
//! seed = 7
//! chaining = "ascending"        # none | ascending | descending
//!
//! [[point]]
//! label = 1.09
//! integrals = "ch2_1.09.fcidump" # or: model = 1.09
//! n_alpha = 3
//! n_beta = 3
//! spin = 0.0
//! shots = 100000
//! noise = { bit_flip_prob = 0.02 }
//! recovery = { n_batches = 10, n_iterations = 10 }
//! oracle = true
//! ```
//!
//! Relative paths resolve against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SqdError};
use crate::orbopt::OrbOptConfig;
use crate::recovery::RecoveryConfig;
use crate::sampler::{Connectivity, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chaining {
    None,
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSettings {
    /// Seed for sampling, noise and recovery at every point.
    pub seed: u64,
    /// Warm-start order within each sector for points without an explicit source.
    pub chaining: Chaining,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            chaining: Chaining::Ascending,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    /// Scan coordinate, e.g. bond length in Å.
    pub label: f64,
    /// FCIDUMP path; exclusive with `model`.
    #[serde(default)]
    pub integrals: Option<PathBuf>,
    /// Bond length of the built-in model; exclusive with `integrals`.
    #[serde(default)]
    pub model: Option<f64>,
    pub n_alpha: usize,
    pub n_beta: usize,
    /// Target total spin s.
    pub spin: f64,
    #[serde(default)]
    pub n_frozen: usize,
    /// "mp2" or a path to an amplitude file.
    #[serde(default = "default_amplitudes")]
    pub amplitudes: String,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_connectivity")]
    pub connectivity: String,
    #[serde(default = "default_shots")]
    pub shots: u64,
    /// The noise seed is replaced by the point seed.
    #[serde(default)]
    pub noise: NoiseModel,
    /// Measured samples to use instead of the simulator.
    #[serde(default)]
    pub samples: Option<PathBuf>,
    /// The recovery seed is replaced by the point seed.
    #[serde(default)]
    pub recovery: RecoveryConfig,
    #[serde(default)]
    pub orbopt: OrbOptConfig,
    #[serde(default = "default_true")]
    pub optimize_orbitals: bool,
    /// Label of the point (same sector) whose κ seeds orbital optimization.
    #[serde(default)]
    pub warm_start: Option<f64>,
    #[serde(default)]
    pub oracle: bool,
}

fn default_amplitudes() -> String {
    "mp2".into()
}
fn default_layers() -> usize {
    2
}
fn default_connectivity() -> String {
    "all-to-all".into()
}
fn default_shots() -> u64 {
    100_000
}
fn default_true() -> bool {
    true
}

/// Electron counts and target spin identify a sector.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Sector {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub spin: f64,
}

impl Sector {
    pub fn name(&self) -> String {
        let s = match self.spin {
            x if x.abs() < 1e-9 => "singlet".to_string(),
            x if (x - 0.5).abs() < 1e-9 => "doublet".to_string(),
            x if (x - 1.0).abs() < 1e-9 => "triplet".to_string(),
            x => format!("s{x}"),
        };
        format!("{s}_{}a{}b", self.n_alpha, self.n_beta)
    }
}

impl PointConfig {
    /// A point on the built-in model with pipeline defaults.
    pub fn model_point(length: f64, n_alpha: usize, n_beta: usize, spin: f64) -> Self {
        Self {
            label: length,
            integrals: None,
            model: Some(length),
            n_alpha,
            n_beta,
            spin,
            n_frozen: 0,
            amplitudes: default_amplitudes(),
            layers: default_layers(),
            connectivity: default_connectivity(),
            shots: default_shots(),
            noise: NoiseModel::default(),
            samples: None,
            recovery: RecoveryConfig::default(),
            orbopt: OrbOptConfig::default(),
            optimize_orbitals: true,
            warm_start: None,
            oracle: false,
        }
    }

    pub fn sector(&self) -> Sector {
        Sector {
            n_alpha: self.n_alpha,
            n_beta: self.n_beta,
            spin: self.spin,
        }
    }

    pub fn connectivity(&self) -> Result<Connectivity> {
        self.connectivity.parse()
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(SqdError::Config(format!("point {}: {m}", self.label)));
        if !self.label.is_finite() {
            return cfg("label must be finite".into());
        }
        match (&self.integrals, self.model) {
            (Some(_), Some(_)) => return cfg("set only one of `integrals` and `model`".into()),
            (None, None) => return cfg("one of `integrals` or `model` is required".into()),
            _ => {}
        }
        let sz = 0.5 * (self.n_alpha as f64 - self.n_beta as f64);
        if self.spin + 1e-12 < sz.abs() || (2.0 * self.spin).fract() != 0.0 {
            return cfg(format!("spin {} is invalid for S_z = {sz}", self.spin));
        }
        if ((2.0 * self.spin) as i64 - (self.n_alpha + self.n_beta) as i64) % 2 != 0 {
            return cfg(format!("spin {} is incompatible with {} electrons", self.spin, self.n_alpha + self.n_beta));
        }
        if self.layers == 0 {
            return cfg("layers must be at least 1".into());
        }
        if self.shots == 0 && self.samples.is_none() {
            return cfg("shots must be positive".into());
        }
        if self.warm_start == Some(self.label) {
            return cfg("warm_start refers to the point itself".into());
        }
        self.connectivity()?;
        self.noise.validate()?;
        self.recovery.validate()?;
        self.orbopt.validate()?;
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.integrals.as_mut() {
            join(p);
        }
        if let Some(p) = self.samples.as_mut() {
            join(p);
        }
        if self.amplitudes != "mp2" {
            let p = Path::new(&self.amplitudes);
            if p.is_relative() {
                self.amplitudes = base.join(p).to_string_lossy().into_owned();
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default)]
    pub scan: ScanSettings,
    #[serde(default)]
    pub point: Vec<PointConfig>,
}

impl ScanConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScanConfig = toml::from_str(text).map_err(|e| SqdError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SqdError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in &mut cfg.point {
            p.resolve_paths(base);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.point.is_empty() {
            return Err(SqdError::Config("no [[point]] entries".into()));
        }
        for (i, p) in self.point.iter().enumerate() {
            p.validate()?;
            if self.point[..i]
                .iter()
                .any(|q| q.label == p.label && q.sector() == p.sector())
            {
                return Err(SqdError::Config(format!(
                    "duplicate point {} in sector {}",
                    p.label,
                    p.sector().name()
                )));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
[scan]
seed = 3

[[point]]
label = 1.5
model = 1.5
n_alpha = 3
n_beta = 3
spin = 0.0
noise = { bit_flip_prob = 0.02 }
recovery = { n_batches = 4 }

[[point]]
label = 1.5
integrals = "a.fcidump"
n_alpha = 4
n_beta = 2
spin = 1.0
connectivity = "line+bridge(2)"
"#;

    #[test]
    fn parses_and_applies_defaults() {
        let cfg = ScanConfig::parse(TEXT).unwrap();
        assert_eq!(cfg.scan.seed, 3);
        assert_eq!(cfg.scan.chaining, Chaining::Ascending);
        assert_eq!(cfg.point.len(), 2);
        let p = &cfg.point[0];
        assert_eq!(p.recovery.n_batches, 4);
        assert_eq!(p.recovery.n_iterations, 10);
        assert_eq!(p.recovery.solver.lambda, 0.2);
        assert_eq!(p.noise.bit_flip_prob, 0.02);
        assert_eq!(p.amplitudes, "mp2");
        assert_eq!(cfg.point[1].connectivity().unwrap(), Connectivity::LineBridge(2));
        assert_eq!(cfg.point[1].sector().name(), "triplet_4a2b");
        let again = ScanConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(again.point[1].integrals, cfg.point[1].integrals);
    }

    #[test]
    fn rejects_bad_points() {
        let bad = |edit: &dyn Fn(&mut PointConfig)| {
            let mut p = PointConfig::model_point(1.0, 3, 3, 0.0);
            edit(&mut p);
            p.validate().unwrap_err()
        };
        assert!(matches!(bad(&|p| p.spin = 0.5), SqdError::Config(_)));
        assert!(matches!(bad(&|p| p.n_alpha = 4), SqdError::Config(_)));
        assert!(matches!(bad(&|p| p.warm_start = Some(1.0)), SqdError::Config(_)));
        assert!(matches!(bad(&|p| p.integrals = Some("x".into())), SqdError::Config(_)));
        assert!(matches!(bad(&|p| p.connectivity = "ring".into()), SqdError::Config(_)));
        assert!(ScanConfig::parse("[[point]]\nlabel = 1.0\nmodel = 1.0\nn_alpha = 3\nn_beta = 3\nspin = 0\nbogus = 1").is_err());
        assert!(ScanConfig::parse("[scan]\nseed = 1").is_err());
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.toml");
        std::fs::write(&path, TEXT).unwrap();
        let cfg = ScanConfig::load(&path).unwrap();
        assert_eq!(cfg.point[1].integrals.as_deref(), Some(dir.path().join("a.fcidump").as_path()));
    }
}
