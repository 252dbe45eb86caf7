//! Analysis parameters in one place, loadable from JSON or TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::StftConfig;
use crate::error::{HarmoError, Result};
use crate::harmony::AlignmentConfig;
use crate::saliency::SaliencyConfig;

/// Every tunable of the analysis pipeline. Missing fields in a config file
/// take the built-in defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Audio saliency threshold scale.
    pub lambda1: f64,
    /// Visual saliency threshold scale.
    pub lambda2: f64,
    /// Perceptual sync tolerance, seconds.
    pub t_delay: f64,
    pub beta: f64,
    pub stft: StftConfig,
    /// Beats borrowed from the preceding meter in each meter unit.
    pub transition_beats: usize,
    /// Optional moving-average width applied to the velocity profile.
    pub smooth_j: Option<usize>,
    /// Window (frames) of the SD baseline detector.
    pub sd_window: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.1,
            lambda2: 1.0,
            t_delay: 0.25,
            beta: 2.0,
            stft: StftConfig::default(),
            transition_beats: 1,
            smooth_j: None,
            sd_window: 5,
        }
    }
}

impl AnalysisConfig {
    pub fn saliency(&self) -> SaliencyConfig {
        SaliencyConfig {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
        }
    }

    pub fn alignment(&self) -> AlignmentConfig {
        AlignmentConfig {
            t_delay: self.t_delay,
            beta: self.beta,
        }
    }

    /// Sample-rate independent checks. STFT limits that depend on the audio
    /// are checked when the audio is analyzed.
    pub fn validate(&self) -> Result<()> {
        self.saliency().validate()?;
        self.alignment().validate()?;
        if self.stft.hop_size == 0 || self.stft.hop_size > self.stft.window_size {
            return Err(HarmoError::Config(format!(
                "hop size {} must be in 1..={}",
                self.stft.hop_size, self.stft.window_size
            )));
        }
        if self.stft.mel_bands == 0 {
            return Err(HarmoError::Config("mel_bands must be positive".into()));
        }
        if self.sd_window < 2 {
            return Err(HarmoError::Config("sd_window must be >= 2".into()));
        }
        Ok(())
    }

    /// Parses a config document; TOML when `toml` is set, JSON otherwise.
    pub fn parse(text: &str, toml: bool) -> Result<Self> {
        let cfg: Self = if toml {
            ::toml::from_str(text).map_err(|e| HarmoError::Config(e.to_string()))?
        } else {
            serde_json::from_str(text).map_err(|e| HarmoError::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a `.toml` or `.json` config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarmoError::io(path, e))?;
        let is_toml = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        Self::parse(&text, is_toml)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = AnalysisConfig::default();
        assert_eq!((c.lambda1, c.lambda2, c.t_delay, c.beta), (0.1, 1.0, 0.25, 2.0));
        assert_eq!((c.stft.window_size, c.stft.hop_size, c.stft.mel_bands), (2048, 512, 128));
        assert_eq!(c.transition_beats, 1);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn partial_files_keep_defaults() {
        let c = AnalysisConfig::parse(r#"{"lambda1": 0.5, "stft": {"hop_size": 256}}"#, false)
            .unwrap();
        assert_eq!(c.lambda1, 0.5);
        assert_eq!(c.lambda2, 1.0);
        assert_eq!(c.stft.hop_size, 256);
        assert_eq!(c.stft.window_size, 2048);

        let c = AnalysisConfig::parse("beta = 1.0\n[stft]\nmel_bands = 64\n", true).unwrap();
        assert_eq!((c.beta, c.stft.mel_bands), (1.0, 64));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        assert!(matches!(
            AnalysisConfig::parse(r#"{"t_delay": -1}"#, false),
            Err(HarmoError::Config(_))
        ));
        assert!(AnalysisConfig::parse(r#"{"lamda1": 0.2}"#, false).is_err());
        assert!(AnalysisConfig::parse(r#"{"lambda2": -0.1}"#, false).is_err());
    }
}
