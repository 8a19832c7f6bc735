//! Pipeline configuration file.
//!
//! A TOML document of `key = value` lines. Every key is optional and falls
//! back to the library default; command-line flags override the file.
//!
//! ```toml
//! seed = 42
//! test_fraction = 0.2
//! tier = "phoneme"
//! alias_table = "aliases.txt"   # relative to this file
//!
//! [acoustics]
//! voicing_threshold = 0.45
//! lpc_order = 12
//!
//! [forest]
//! n_estimators = 400
//! max_features = 12
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dialect_id::acoustics::AcousticConfig;
use dialect_id::eval::{DEFAULT_SPLIT_SEED, DEFAULT_TEST_FRACTION};
use dialect_id::forest::ForestParams;
use dialect_id::synth::TIER_NAME;
use dialect_id::textgrid::AliasTable;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestDefaults {
    pub n_estimators: usize,
    pub max_features: usize,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestDefaults {
    fn default() -> Self {
        let p = ForestParams::default();
        ForestDefaults {
            n_estimators: p.n_estimators,
            max_features: p.max_features,
            min_samples_split: p.min_samples_split,
            max_depth: p.max_depth,
            bootstrap: p.bootstrap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seed for corpus synthesis, splits, folds and forests.
    pub seed: u64,
    pub test_fraction: f64,
    pub tier: String,
    pub alias_table: Option<PathBuf>,
    pub acoustics: AcousticConfig,
    pub forest: ForestDefaults,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: DEFAULT_SPLIT_SEED,
            test_fraction: DEFAULT_TEST_FRACTION,
            tier: TIER_NAME.to_string(),
            alias_table: None,
            acoustics: AcousticConfig::default(),
            forest: ForestDefaults::default(),
        }
    }
}

impl PipelineConfig {
    /// Parses a config document; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<PipelineConfig> {
        let mut cfg: PipelineConfig = toml::from_str(text).context("invalid config file")?;
        if let Some(p) = &cfg.alias_table {
            cfg.alias_table = Some(base_dir.join(p));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<PipelineConfig> {
        let Some(path) = path else {
            return Ok(PipelineConfig::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        PipelineConfig::parse(&text, path.parent().unwrap_or(Path::new("."))).with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            bail!("test_fraction must lie strictly between 0 and 1");
        }
        if self.tier.trim().is_empty() {
            bail!("tier must not be empty");
        }
        self.acoustics.validate()?;
        self.forest_params(self.seed).validate()?;
        Ok(())
    }

    pub fn forest_params(&self, seed: u64) -> ForestParams {
        let f = &self.forest;
        ForestParams {
            n_estimators: f.n_estimators,
            max_features: f.max_features,
            min_samples_split: f.min_samples_split,
            max_depth: f.max_depth,
            bootstrap: f.bootstrap,
            seed,
        }
    }

    pub fn aliases(&self, flag: Option<&Path>) -> Result<AliasTable> {
        match flag.or(self.alias_table.as_deref()) {
            None => Ok(AliasTable::default()),
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("cannot read alias table {}", p.display()))?;
                Ok(AliasTable::parse(&text)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(PipelineConfig::parse("", Path::new(".")).unwrap(), PipelineConfig::default());
    }

    #[test]
    fn keys_override_defaults() {
        let text = "seed = 7\ntier = \"vowel\"\nalias_table = \"a.txt\"\n[acoustics]\nvoicing_threshold = 0.5\n[forest]\nn_estimators = 10\nmax_depth = 4\n";
        let cfg = PipelineConfig::parse(text, Path::new("/cfg")).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tier, "vowel");
        assert_eq!(cfg.alias_table, Some(PathBuf::from("/cfg/a.txt")));
        assert_eq!(cfg.acoustics.voicing_threshold, 0.5);
        assert_eq!(cfg.acoustics.lpc_order, 12);
        let p = cfg.forest_params(3);
        assert_eq!((p.n_estimators, p.max_features, p.max_depth, p.seed), (10, 12, Some(4), 3));
    }

    #[test]
    fn rejects_bad_values_and_unknown_keys() {
        for text in [
            "test_fraction = 1.5",
            "colour = 1",
            "[acoustics]\nlpc_order = 0",
            "[forest]\nn_estimators = 0",
        ] {
            assert!(PipelineConfig::parse(text, Path::new(".")).is_err(), "{text}");
        }
    }
}
