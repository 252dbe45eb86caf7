//! Beat sequences shared by the audio and visual branches.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarmoError, Result};
use crate::Scalar;

/// Ordered beat times (seconds) with one non-negative saliency value per beat.
///
/// Serializes as `{"times": [...], "saliency": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BeatSequence<T = f64> {
    times: Vec<T>,
    saliency: Vec<T>,
}

impl<T: Scalar> Default for BeatSequence<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Scalar> BeatSequence<T> {
    pub fn empty() -> Self {
        Self {
            times: Vec::new(),
            saliency: Vec::new(),
        }
    }

    /// Builds a sequence, checking equal lengths, strictly increasing times
    /// and non-negative finite saliencies.
    pub fn new(times: Vec<T>, saliency: Vec<T>) -> Result<Self> {
        if times.len() != saliency.len() {
            return Err(HarmoError::LengthMismatch {
                what: "beat times vs saliency",
                left: times.len(),
                right: saliency.len(),
            });
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(HarmoError::Parse("beat time is not finite".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(HarmoError::Parse(format!(
                "beat times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if saliency.iter().any(|s| !s.is_finite() || *s < T::zero()) {
            return Err(HarmoError::Parse(
                "beat saliency must be finite and non-negative".into(),
            ));
        }
        Ok(Self { times, saliency })
    }

    pub(crate) fn from_parts_unchecked(times: Vec<T>, saliency: Vec<T>) -> Self {
        debug_assert_eq!(times.len(), saliency.len());
        Self { times, saliency }
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn saliency(&self) -> &[T] {
        &self.saliency
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.times.iter().copied().zip(self.saliency.iter().copied())
    }

    /// Same times, new saliency values.
    pub fn with_saliency(&self, saliency: Vec<T>) -> Result<Self> {
        Self::new(self.times.clone(), saliency)
    }

    /// Adds `offset` seconds to every beat time.
    pub fn shifted(&self, offset: T) -> Self {
        Self {
            times: self.times.iter().map(|&t| t + offset).collect(),
            saliency: self.saliency.clone(),
        }
    }

    /// Keeps only beats with `t_lo <= time < t_hi`.
    pub fn restricted(&self, t_lo: T, t_hi: T) -> Self {
        let (times, saliency) = self
            .iter()
            .filter(|(t, _)| *t >= t_lo && *t < t_hi)
            .unzip();
        Self { times, saliency }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("beat sequence serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Scalar")]
        struct Raw<T> {
            times: Vec<T>,
            saliency: Vec<T>,
        }
        let raw: Raw<T> =
            serde_json::from_str(text).map_err(|e| HarmoError::Parse(e.to_string()))?;
        Self::new(raw.times, raw.saliency)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarmoError::io(path, e))?;
        Self::from_json(&text)
    }
}
