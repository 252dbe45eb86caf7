//! Interval-driven beat alignment and the harmony score family.

use serde::{Deserialize, Serialize};

use crate::beats::BeatSequence;
use crate::error::{HarmoError, Result};
use crate::Scalar;

/// Perceptual tolerance and audio/visual balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentConfig {
    /// Seconds. A pair is in sync only when its interval is strictly below this.
    pub t_delay: f64,
    pub beta: f64,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            t_delay: 0.25,
            beta: 2.0,
        }
    }
}

impl AlignmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_delay > 0.0 && self.t_delay.is_finite()) {
            return Err(HarmoError::Config(format!("t_delay must be > 0, got {}", self.t_delay)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(HarmoError::Config(format!("beta must be > 0, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Per-audio-beat synchronization status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AlignmentResult<T = f64> {
    pub hp: Vec<bool>,
    /// Index of the nearest visual beat, if any visual beats exist.
    pub matched_index: Vec<Option<usize>>,
    /// Absolute interval to the nearest visual beat, seconds.
    pub matched_interval: Vec<Option<T>>,
}

impl<T: Scalar> AlignmentResult<T> {
    pub fn len(&self) -> usize {
        self.hp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hp.is_empty()
    }

    pub fn hits(&self) -> usize {
        self.hp.iter().filter(|&&h| h).count()
    }
}

/// Matches every audio beat to its nearest visual beat (earlier one on ties)
/// with a single merge-style sweep over the two sorted sequences, and marks it
/// synchronized when the interval is strictly below `t_delay`.
pub fn align_beats<T: Scalar>(
    audio: &BeatSequence<T>,
    visual: &BeatSequence<T>,
    cfg: &AlignmentConfig,
) -> AlignmentResult<T> {
    let tol = T::lit(cfg.t_delay);
    let v = visual.times();
    let mut out = AlignmentResult {
        hp: Vec::with_capacity(audio.len()),
        matched_index: Vec::with_capacity(audio.len()),
        matched_interval: Vec::with_capacity(audio.len()),
    };
    // first visual index with time >= current audio time
    let mut next = 0usize;
    for &a in audio.times() {
        while next < v.len() && v[next] < a {
            next += 1;
        }
        let mut best: Option<(usize, T)> = None;
        if next > 0 {
            best = Some((next - 1, (a - v[next - 1]).abs()));
        }
        if next < v.len() {
            let d = (a - v[next]).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((next, d));
            }
        }
        // rounding can make an earlier beat exactly as close; prefer the earliest
        if let Some((mut k, d)) = best {
            while k > 0 && (a - v[k - 1]).abs() == d {
                k -= 1;
            }
            best = Some((k, d));
        }
        out.hp.push(best.is_some_and(|(_, d)| d < tol));
        out.matched_index.push(best.map(|(k, _)| k));
        out.matched_interval.push(best.map(|(_, d)| d));
    }
    out
}

/// `h_s = sum_i hp_i * sa'_i`.
pub fn weighted_hit_sum<T: Scalar>(result: &AlignmentResult<T>, audio_saliency: &[T]) -> Result<T> {
    if result.len() != audio_saliency.len() {
        return Err(HarmoError::LengthMismatch {
            what: "alignment flags vs audio saliency",
            left: result.len(),
            right: audio_saliency.len(),
        });
    }
    Ok(result
        .hp
        .iter()
        .zip(audio_saliency)
        .filter(|(&hit, _)| hit)
        .map(|(_, &s)| s)
        .fold(T::zero(), |acc, s| acc + s))
}

/// Closed form `h = (1 + beta^2) h_s / (N' beta^2 + M')`; zero when either
/// count is zero.
pub fn harmony<T: Scalar>(h_s: T, n_audio: usize, n_visual: usize, beta: f64) -> T {
    if n_audio == 0 || n_visual == 0 {
        return T::zero();
    }
    let b2 = T::lit(beta * beta);
    (T::one() + b2) * h_s / (T::from_usize_lossy(n_audio) * b2 + T::from_usize_lossy(n_visual))
}

/// F-score style combination `(1 + beta^2) h_v h_a / (beta^2 h_v + h_a)` of
/// audio harmony `h_a` and visual harmony `h_v`. Zero when both are zero.
pub fn harmonic_harmony<T: Scalar>(h_a: T, h_v: T, beta: f64) -> T {
    let b2 = T::lit(beta * beta);
    let den = b2 * h_v + h_a;
    if den == T::zero() {
        return T::zero();
    }
    (T::one() + b2) * h_v * h_a / den
}

/// Unweighted fraction of audio beats in sync.
pub fn hit_rate<T: Scalar>(result: &AlignmentResult<T>) -> Result<T> {
    if result.is_empty() {
        return Err(HarmoError::EmptyAudioBeats);
    }
    Ok(T::from_usize_lossy(result.hits()) / T::from_usize_lossy(result.len()))
}

/// Training-loss surrogate `-h_s + |M' - N'|`.
pub fn harmony_loss<T: Scalar>(h_s: T, n_audio: usize, n_visual: usize) -> T {
    -h_s + T::from_usize_lossy(n_audio.abs_diff(n_visual))
}
