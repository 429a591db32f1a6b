//! Experiment configuration read from a TOML file.

use std::path::{Path, PathBuf};

use gs_operators::bounds::CalibrationGrid;
use gs_operators::{BoundSettings, Mu4Form, QuadratureSpec, Theorem, TruncationPolicy};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Parameter lists; every combination is one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: Vec<u64>,
    pub m: Vec<i64>,
    pub c: Vec<i64>,
    pub alpha: Vec<f64>,
    pub x: Vec<f64>,
    pub functions: Vec<String>,
    /// Keep only this many cells, drawn with `seed`.
    pub sample: Option<usize>,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: vec![50, 100, 200],
            m: vec![0],
            c: vec![0],
            alpha: vec![1.0],
            x: vec![0.5, 1.0],
            functions: vec!["one".into()],
            sample: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsConfig {
    /// Raw moments of these orders; central moments of the even ones.
    pub orders: Vec<usize>,
    pub mu4_form: Mu4Form,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self {
            orders: vec![0, 1, 2, 3, 4],
            mu4_form: Mu4Form::AsPrinted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub theorems: Vec<Theorem>,
    pub bounds: BoundSettings,
    /// Grid the weighted constant was calibrated on.
    pub calibration: CalibrationGrid,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            theorems: Theorem::ALL.to_vec(),
            bounds: BoundSettings::default(),
            calibration: CalibrationGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrderConfig {
    pub n: Vec<u64>,
}

impl Default for OrderConfig {
    fn default() -> Self {
        Self {
            n: gs_operators::bounds::default_order_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub quadrature: QuadratureSpec,
    pub truncation: TruncationPolicy,
    pub moments: MomentsConfig,
    pub verify: VerifyConfig,
    pub order: OrderConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |e: gs_operators::Error| CliError::Config(e.to_string());
        self.quadrature.validate().map_err(bad)?;
        self.truncation.validate().map_err(bad)?;
        self.verify.bounds.window.validate().map_err(bad)?;
        if !(0.0..=1.0).contains(&self.verify.bounds.beta) {
            return Err(CliError::Config(format!("verify.bounds.beta = {} must lie in [0, 1]", self.verify.bounds.beta)));
        }
        if self.verify.bounds.weighted_constant.is_nan() || self.verify.bounds.weighted_constant <= 0.0 {
            return Err(CliError::Config("verify.bounds.weighted_constant must be positive".into()));
        }
        if self.grid.x.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(CliError::Config("grid.x entries must be finite and nonnegative".into()));
        }
        if self.order.n.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("order.n must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Scale the quadrature tolerance and the truncation threshold.
    pub fn scale_tolerances(&mut self, scale: f64) -> Result<(), CliError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(CliError::Config(format!("tolerance scale {scale} must be positive")));
        }
        self.quadrature.tolerance *= scale;
        self.truncation.epsilon_tail *= scale;
        self.validate()
    }

    /// SHA-256 of the configuration with the output section reset, so the
    /// destination and worker count do not change the hash.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = OutputConfig::default();
        let digest = Sha256::digest(canonical.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Apply the optional sample limit to an ordered list of cells.
pub fn sample_cells<T>(mut cells: Vec<T>, grid: &GridConfig) -> Vec<T> {
    if let Some(k) = grid.sample {
        if k < cells.len() {
            let mut rng = StdRng::seed_from_u64(grid.seed);
            let mut idx: Vec<usize> = (0..cells.len()).collect();
            idx.shuffle(&mut rng);
            idx.truncate(k);
            idx.sort_unstable();
            let mut keep = vec![false; cells.len()];
            for i in idx {
                keep[i] = true;
            }
            let mut i = 0;
            cells.retain(|_| {
                i += 1;
                keep[i - 1]
            });
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.grid.sample = Some(7);
        cfg.grid.alpha = vec![1.0, 2.5];
        cfg.verify.theorems = vec![Theorem::Weighted];
        let text = cfg.to_toml_string();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_field_reports_location() {
        let err = ExperimentConfig::from_toml_str("[grid]\nn = [10]\nbogus = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn hash_ignores_output_section() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output.dir = "elsewhere".into();
        b.output.workers = 3;
        assert_eq!(a.hash(), b.hash());
        b.grid.n.push(7);
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn sampling_is_seeded() {
        let grid = GridConfig {
            sample: Some(5),
            seed: 11,
            ..GridConfig::default()
        };
        let a = sample_cells((0..100).collect(), &grid);
        let b = sample_cells((0..100).collect(), &grid);
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }
}
