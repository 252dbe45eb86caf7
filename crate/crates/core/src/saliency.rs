//! Standard-deviation thresholded saliency masks over beat sequences.

use serde::{Deserialize, Serialize};

use crate::beats::BeatSequence;
use crate::error::{HarmoError, Result};
use crate::scalar::population_std;
use crate::Scalar;

/// One keep/drop flag per beat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaliencyMask {
    flags: Vec<bool>,
}

impl SaliencyMask {
    pub fn new(flags: Vec<bool>) -> Self {
        Self { flags }
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn count_kept(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

/// Threshold scales for the audio and visual masks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaliencyConfig {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for SaliencyConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.1,
            lambda2: 1.0,
        }
    }
}

impl SaliencyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return Err(HarmoError::Config(format!("lambda1 must be >= 0, got {}", self.lambda1)));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(HarmoError::Config(format!("lambda2 must be >= 0, got {}", self.lambda2)));
        }
        Ok(())
    }
}

fn sd_mask<T: Scalar>(values: &[T], lambda: f64) -> SaliencyMask {
    let threshold = T::lit(lambda) * population_std(values);
    SaliencyMask::new(values.iter().map(|&v| v - threshold > T::zero()).collect())
}

/// Keeps audio beats with `sa_i - lambda1 * sd(S_a) > 0`.
pub fn audio_saliency_mask<T: Scalar>(beats: &BeatSequence<T>, lambda1: f64) -> SaliencyMask {
    sd_mask(beats.saliency(), lambda1)
}

/// Max-min differencing of visual saliencies: the first beat is compared with
/// `j_initial` (the first velocity-profile value), every later beat with its
/// predecessor.
pub fn visual_saliency_transform<T: Scalar>(beats: &BeatSequence<T>, j_initial: T) -> BeatSequence<T> {
    let s = beats.saliency();
    let starred = s
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let prev = if i == 0 { j_initial } else { s[i - 1] };
            (v - prev).abs()
        })
        .collect();
    BeatSequence::from_parts_unchecked(beats.times().to_vec(), starred)
}

/// Keeps starred visual beats with `sv*_i - lambda2 * sd(S*_v) > 0`.
pub fn visual_saliency_mask<T: Scalar>(starred: &BeatSequence<T>, lambda2: f64) -> SaliencyMask {
    sd_mask(starred.saliency(), lambda2)
}

/// The subsequence of beats whose flag is set.
pub fn apply_mask<T: Scalar>(beats: &BeatSequence<T>, mask: &SaliencyMask) -> Result<BeatSequence<T>> {
    if beats.len() != mask.len() {
        return Err(HarmoError::LengthMismatch {
            what: "beats vs mask",
            left: beats.len(),
            right: mask.len(),
        });
    }
    let (times, saliency) = beats
        .iter()
        .zip(mask.flags())
        .filter(|(_, &keep)| keep)
        .map(|(b, _)| b)
        .unzip();
    Ok(BeatSequence::from_parts_unchecked(times, saliency))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beats(s: &[f64]) -> BeatSequence<f64> {
        let times = (0..s.len()).map(|i| i as f64 * 0.5).collect();
        BeatSequence::new(times, s.to_vec()).unwrap()
    }

    #[test]
    fn audio_mask_examples() {
        // sd([0.2, 1.0, 0.6]) = 0.3266
        assert_eq!(
            audio_saliency_mask(&beats(&[0.2, 1.0, 0.6]), 1.0).flags(),
            &[false, true, true]
        );
        assert!(audio_saliency_mask(&beats(&[0.2, 1.0, 0.6]), 0.0)
            .flags()
            .iter()
            .all(|&f| f));
        assert!(audio_saliency_mask(&beats(&[0.7, 0.7, 0.7]), 5.0)
            .flags()
            .iter()
            .all(|&f| f));
        assert_eq!(audio_saliency_mask(&beats(&[0.4]), 1.0).flags(), &[true]);
    }

    #[test]
    fn zero_saliency_never_passes() {
        assert_eq!(audio_saliency_mask(&beats(&[0.0, 0.0]), 0.0).flags(), &[false, false]);
    }

    #[test]
    fn starred_transform_examples() {
        let t = visual_saliency_transform(&beats(&[3.0, 1.0, 4.0]), 2.0);
        assert_eq!(t.saliency(), &[1.0, 2.0, 3.0]);
        assert_eq!(t.times(), beats(&[3.0, 1.0, 4.0]).times());
        let t = visual_saliency_transform(&beats(&[2.5, 2.5, 2.5]), 2.5);
        assert_eq!(t.saliency(), &[0.0, 0.0, 0.0]);
        let t = visual_saliency_transform(&beats(&[5.0]), 2.0);
        assert_eq!(t.saliency(), &[3.0]);
    }

    #[test]
    fn visual_mask_examples() {
        assert_eq!(
            visual_saliency_mask(&beats(&[1.0, 2.0, 3.0]), 1.0).flags(),
            &[true, true, true]
        );
        assert_eq!(
            visual_saliency_mask(&beats(&[0.0, 0.0, 10.0]), 1.0).flags(),
            &[false, false, true]
        );
        assert!(visual_saliency_mask(&beats(&[0.5, 9.0, 2.0]), 0.0)
            .flags()
            .iter()
            .all(|&f| f));
    }

    #[test]
    fn apply_mask_examples() {
        let b = beats(&[1.0, 2.0, 3.0]);
        let out = apply_mask(&b, &SaliencyMask::new(vec![false, true, true])).unwrap();
        assert_eq!(out.times(), &[0.5, 1.0]);
        assert_eq!(out.saliency(), &[2.0, 3.0]);
        assert_eq!(apply_mask(&b, &SaliencyMask::new(vec![true; 3])).unwrap(), b);
        assert!(apply_mask(&b, &SaliencyMask::new(vec![false; 3])).unwrap().is_empty());
        assert!(apply_mask(&b, &SaliencyMask::new(vec![true; 2])).is_err());
    }
}
