use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fit::FitWindow;
use crate::binary::TestBackend;
use crate::error::{Error, Result};
use crate::multi::{DistanceOptions, EvaluationMethod};
use crate::operator::DEFAULT_MAX_DIM;
use crate::states::{HypothesisSet, HypothesisSetFile};

/// Hypothesis set given inline or as a path to a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HypothesisSource {
    Path(PathBuf),
    Inline(HypothesisSetFile),
}

fn default_samples() -> usize {
    100_000
}

fn default_grid() -> usize {
    201
}

fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}

fn default_finite_n() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hypotheses: HypothesisSource,
    #[serde(default)]
    pub n_range: Vec<usize>,
    #[serde(default)]
    pub method: EvaluationMethod,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub s_grid: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub fit_window: FitWindow,
    /// Block weights overriding the equalizing choice.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub backend: TestBackend,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    /// Block size for finite-`n` distance estimates.
    #[serde(default = "default_finite_n")]
    pub distance_n: usize,
    /// Relative paths in `hypotheses` resolve against this directory.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(hypotheses: HypothesisSource) -> Self {
        Self {
            hypotheses,
            n_range: Vec::new(),
            method: EvaluationMethod::default(),
            samples: default_samples(),
            seed: 0,
            s_grid: default_grid(),
            output: None,
            fit_window: FitWindow::default(),
            weights: None,
            backend: TestBackend::default(),
            max_dim: default_max_dim(),
            distance_n: default_finite_n(),
            base_dir: None,
        }
    }

    /// Parses a config; a bare hypothesis-set document is accepted too.
    pub fn from_json_str(text: &str) -> Result<Self> {
        match serde_json::from_str::<Self>(text) {
            Ok(cfg) => Ok(cfg),
            Err(cfg_err) => match HypothesisSetFile::from_json_str(text) {
                Ok(file) => Ok(Self::new(HypothesisSource::Inline(file))),
                Err(_) => Err(Error::Parse(cfg_err.to_string())),
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn hypothesis_file(&self) -> Result<HypothesisSetFile> {
        match &self.hypotheses {
            HypothesisSource::Inline(file) => Ok(file.clone()),
            HypothesisSource::Path(p) => {
                let full = match &self.base_dir {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.clone(),
                };
                let text = fs::read_to_string(&full)
                    .map_err(|e| Error::Parse(format!("{}: {e}", full.display())))?;
                HypothesisSetFile::from_json_str(&text)
            }
        }
    }

    pub fn hypothesis_set(&self) -> Result<HypothesisSet> {
        self.hypothesis_file()?.to_hypothesis_set()
    }

    /// Nonempty, strictly ascending, all positive.
    pub fn validate_n_range(&self) -> Result<()> {
        if self.n_range.is_empty() {
            return Err(Error::Parse("n_range is empty".into()));
        }
        if self.n_range[0] == 0 || self.n_range.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse(format!(
                "n_range must be positive and strictly ascending: {:?}",
                self.n_range
            )));
        }
        Ok(())
    }

    pub fn distance_options(&self) -> DistanceOptions {
        DistanceOptions {
            grid_points: self.s_grid,
            finite_n: self.distance_n,
            cap: self.max_dim,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIR: &str = r#"{"priors": [0.5, 0.5], "states": [
        {"type": "pure_qubit", "bloch": [0.0, 0.0]},
        {"type": "pure_qubit", "bloch": [1.5707963267948966, 0.0]}]}"#;

    #[test]
    fn full_config_round_trips() {
        let text = format!(
            r#"{{"hypotheses": {PAIR}, "n_range": [2, 4, 6], "method": "monte_carlo",
                "samples": 500, "seed": 9, "fit_window": "all", "weights": [1.0]}}"#
        );
        let cfg = ExperimentConfig::from_json_str(&text).unwrap();
        assert_eq!(cfg.method, EvaluationMethod::MonteCarlo);
        assert_eq!(cfg.fit_window, FitWindow::All);
        assert_eq!(cfg.samples, 500);
        assert_eq!(cfg.s_grid, 201);
        assert_eq!(cfg.hypothesis_set().unwrap().len(), 2);
        cfg.validate_n_range().unwrap();
        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bare_hypothesis_file_is_a_config() {
        let cfg = ExperimentConfig::from_json_str(PAIR).unwrap();
        assert!(matches!(cfg.hypotheses, HypothesisSource::Inline(_)));
        assert!(cfg.validate_n_range().is_err());
    }

    #[test]
    fn path_source_resolves_relative_to_config() {
        let dir = std::env::temp_dir().join(format!("qmht-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("pair.json"), PAIR).unwrap();
        fs::write(
            dir.join("cfg.json"),
            r#"{"hypotheses": "pair.json", "n_range": [1]}"#,
        )
        .unwrap();
        let cfg = ExperimentConfig::load(&dir.join("cfg.json")).unwrap();
        assert_eq!(cfg.hypothesis_set().unwrap().len(), 2);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rejects_bad_ranges_and_fields() {
        let mut cfg = ExperimentConfig::from_json_str(PAIR).unwrap();
        cfg.n_range = vec![3, 3];
        assert!(cfg.validate_n_range().is_err());
        cfg.n_range = vec![0, 1];
        assert!(cfg.validate_n_range().is_err());
        let text = format!(r#"{{"hypotheses": {PAIR}, "bogus": 1}}"#);
        assert!(matches!(
            ExperimentConfig::from_json_str(&text),
            Err(Error::Parse(_))
        ));
    }
}
