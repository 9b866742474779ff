//! Run configuration, read from TOML. Every field has a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fx::{FxKind, SCENARIOS};
use crate::pipeline::PipelineConfig;
use crate::probe::ProbeConfig;
use crate::projection::ProjectionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sampling {
    /// Tracks per effect for regression manifests.
    pub regression: usize,
    /// Tracks per class label.
    pub classification: usize,
    /// Tracks per tag.
    pub multilabel: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            regression: 20,
            classification: 5,
            multilabel: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub manifest: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Run the built-in embedder as one of the models.
    pub builtin: bool,
    /// Exchange files, one model each.
    pub embeddings: Vec<PathBuf>,
    pub fx: Vec<FxKind>,
    pub levels: Vec<u8>,
    pub scenarios: Vec<String>,
    pub sampling: Sampling,
    /// Count exp2 predictions on the exp3 sample instead of the full test split.
    pub exp2_use_sample: bool,
    pub probe: ProbeConfig,
    pub pipeline: PipelineConfig,
    pub projection: ProjectionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            manifest: None,
            out_dir: PathBuf::from("fxprobe-out"),
            builtin: true,
            embeddings: Vec::new(),
            fx: FxKind::ALL.to_vec(),
            levels: (1..=10).collect(),
            scenarios: SCENARIOS.iter().map(|s| s.to_string()).collect(),
            sampling: Sampling::default(),
            exp2_use_sample: false,
            probe: ProbeConfig::default(),
            pipeline: PipelineConfig::default(),
            projection: ProjectionConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Relative paths inside the file are resolved against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(m) = cfg.manifest.as_mut() {
            fix(m);
        }
        fix(&mut cfg.out_dir);
        cfg.embeddings.iter_mut().for_each(fix);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Applies the master seed to every stage.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.probe.seed = seed;
        self.pipeline.seed = seed;
        self.projection.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.probe.validate()?;
        self.pipeline.validate()?;
        self.projection.validate()?;
        if self.fx.is_empty() {
            return Err(Error::InvalidConfig("fx list is empty".into()));
        }
        if self.levels.iter().any(|l| !(1..=10).contains(l)) {
            return Err(Error::InvalidConfig("levels must lie in 1..=10".into()));
        }
        if !self.builtin && self.embeddings.is_empty() {
            return Err(Error::InvalidConfig("no model: enable builtin or list embeddings".into()));
        }
        for s in &self.scenarios {
            crate::fx::scenario_preset(s)?;
        }
        let s = self.sampling;
        if s.regression == 0 || s.classification == 0 || s.multilabel == 0 {
            return Err(Error::InvalidConfig("sampling counts must be positive".into()));
        }
        Ok(())
    }

    pub fn require_manifest(&self) -> Result<&Path> {
        self.manifest
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("no manifest given".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_toml() {
        let c = RunConfig::from_toml("seed = 7\nfx = [\"distortion\"]\n[probe]\nn_trees = 5\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.fx, vec![FxKind::Distortion]);
        assert_eq!(c.probe.n_trees, 5);
        assert_eq!(c.probe.max_depth, 3);
        assert_eq!(c.sampling.regression, 20);
        c.validate().unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(RunConfig::from_toml("sed = 1\n").is_err());
        let bad = RunConfig { levels: vec![0], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = RunConfig { scenarios: vec!["abba".into()], ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
