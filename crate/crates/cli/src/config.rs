//! Run configuration. One TOML file drives every subcommand; command-line
//! flags override the file, the file overrides the defaults.

use std::path::Path;

use anyhow::{Context, Result};
use popbench::features::FeatureConfig;
use popbench::metrics::RmseInput;
use popbench::predict::{CvConfig, LabelingPolicy, LogisticConfig};
use popbench::synth::SynthConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; copied into the LDA, learner, CV and synth sections
    /// unless a flag sets it.
    pub seed: Option<u64>,
    pub topics: TopicSelection,
    pub features: FeatureConfig,
    pub labeling: LabelingConfig,
    pub denoise: DenoiseConfig,
    pub learner: LogisticConfig,
    pub cv: CvConfig,
    pub synth: SynthConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicSelection {
    /// Hashtags need this many messages overall to become candidate topics.
    pub min_count: usize,
}

impl Default for TopicSelection {
    fn default() -> Self {
        Self { min_count: 1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelingConfig {
    pub policy: LabelingPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseConfig {
    pub enabled: bool,
    pub window: usize,
    pub min_active: usize,
    pub min_count: u64,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            window: 5,
            min_active: 1,
            min_count: 1,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Applies a seed to every seeded section.
    pub fn apply_seed(&mut self, seed: Option<u64>) {
        if let Some(s) = seed.or(self.seed) {
            self.seed = Some(s);
            self.features.lda.seed = s;
            self.learner.seed = s;
            self.cv.seed = s;
            self.synth.seed = s;
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn set_rmse(&mut self, scores: bool) {
        if scores {
            self.cv.rmse_on = RmseInput::Scores;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_seed_precedence() {
        let mut c: RunConfig = toml::from_str(
            r#"
            seed = 3
            [labeling.policy]
            mode = "threshold"
            theta = 20
            [learner]
            iterations = 50
            "#,
        )
        .unwrap();
        assert_eq!(c.labeling.policy, LabelingPolicy::Threshold { theta: 20 });
        assert_eq!(c.learner.iterations, 50);
        c.apply_seed(None);
        assert_eq!(c.cv.seed, 3);
        c.apply_seed(Some(9));
        assert_eq!((c.seed(), c.features.lda.seed, c.synth.seed), (9, 9, 9));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }
}
