//! End-to-end harmony evaluation of an audio clip against a pose sequence.

use serde::{Deserialize, Serialize};

use crate::audio::{detect_audio_beats, onset_envelope, AudioClip};
use crate::beats::BeatSequence;
use crate::config::AnalysisConfig;
use crate::error::Result;
use crate::harmony::{
    align_beats, harmony, harmony_loss, hit_rate, weighted_hit_sum, AlignmentResult,
};
use crate::motion::{detect_visual_beats, joint_velocity_sum, PoseSequence};
use crate::saliency::{
    apply_mask, audio_saliency_mask, visual_saliency_mask, visual_saliency_transform,
};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportStatus {
    Ok,
    /// No salient beats on at least one side; every score is zero.
    Degenerate,
}

/// Salient beats of both streams, before alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct SalientBeats<T = f64> {
    pub audio_raw: BeatSequence<T>,
    pub visual_raw: BeatSequence<T>,
    /// Masked audio beats with their onset-strength saliency.
    pub audio: BeatSequence<T>,
    /// Masked visual beats with their differenced (starred) saliency.
    pub visual: BeatSequence<T>,
}

/// Masks raw beats of both streams. `j_initial` is the first value of the
/// velocity profile the visual beats came from.
pub fn select_salient<T: Scalar>(
    audio_raw: BeatSequence<T>,
    visual_raw: BeatSequence<T>,
    j_initial: T,
    cfg: &AnalysisConfig,
) -> Result<SalientBeats<T>> {
    let audio = apply_mask(&audio_raw, &audio_saliency_mask(&audio_raw, cfg.lambda1))?;
    let starred = visual_saliency_transform(&visual_raw, j_initial);
    let visual = apply_mask(&starred, &visual_saliency_mask(&starred, cfg.lambda2))?;
    Ok(SalientBeats {
        audio_raw,
        visual_raw,
        audio,
        visual,
    })
}

/// Every score and intermediate count of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HarmonyReport<T = f64> {
    pub status: ReportStatus,
    pub h: T,
    pub h_a: T,
    pub h_v: T,
    pub h_s: T,
    pub hit_rate: T,
    pub loss: T,
    /// N: audio beats before masking.
    pub n_audio_raw: usize,
    /// M: visual beats before masking.
    pub n_visual_raw: usize,
    /// N': salient audio beats.
    pub n_audio: usize,
    /// M': salient visual beats.
    pub n_visual: usize,
    /// Salient audio beats; saliency normalized to a maximum of 1.
    pub audio_beats: BeatSequence<T>,
    /// Salient visual beats with differenced saliency.
    pub visual_beats: BeatSequence<T>,
    pub alignment: AlignmentResult<T>,
    pub audio_duration: f64,
    pub pose_duration: f64,
    pub analyzed_duration: f64,
    pub warnings: Vec<String>,
    pub config: AnalysisConfig,
}

impl<T: Scalar> HarmonyReport<T> {
    pub fn is_degenerate(&self) -> bool {
        self.status == ReportStatus::Degenerate
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub const CSV_HEADER: &'static str =
        "status,h,h_a,h_v,h_s,hit_rate,loss,n_audio_raw,n_visual_raw,n_audio,n_visual,analyzed_duration";

    /// One CSV row matching [`Self::CSV_HEADER`].
    pub fn to_csv_row(&self) -> String {
        let status = match self.status {
            ReportStatus::Ok => "ok",
            ReportStatus::Degenerate => "degenerate",
        };
        format!(
            "{status},{},{},{},{},{},{},{},{},{},{},{}",
            self.h,
            self.h_a,
            self.h_v,
            self.h_s,
            self.hit_rate,
            self.loss,
            self.n_audio_raw,
            self.n_visual_raw,
            self.n_audio,
            self.n_visual,
            self.analyzed_duration
        )
    }
}

/// Aligns salient beats and computes the score family. Audio saliencies are
/// divided by their maximum before weighting.
pub fn score_beats<T: Scalar>(beats: &SalientBeats<T>, cfg: &AnalysisConfig) -> Result<HarmonyReport<T>> {
    let n_audio = beats.audio.len();
    let n_visual = beats.visual.len();
    let peak = beats
        .audio
        .saliency()
        .iter()
        .copied()
        .fold(T::zero(), T::max);
    let normalized: Vec<T> = if peak > T::zero() {
        beats.audio.saliency().iter().map(|&s| s / peak).collect()
    } else {
        beats.audio.saliency().to_vec()
    };
    let audio_beats = beats.audio.with_saliency(normalized)?;
    let alignment = align_beats(&audio_beats, &beats.visual, &cfg.alignment());
    let degenerate = n_audio == 0 || n_visual == 0;

    let (h_s, rate) = if degenerate {
        (T::zero(), T::zero())
    } else {
        (
            weighted_hit_sum(&alignment, audio_beats.saliency())?,
            hit_rate(&alignment)?,
        )
    };
    let ratio = |n: usize| {
        if n == 0 {
            T::zero()
        } else {
            h_s / T::from_usize_lossy(n)
        }
    };
    Ok(HarmonyReport {
        status: if degenerate {
            ReportStatus::Degenerate
        } else {
            ReportStatus::Ok
        },
        h: harmony(h_s, n_audio, n_visual, cfg.beta),
        h_a: ratio(n_audio),
        h_v: ratio(n_visual),
        h_s,
        hit_rate: rate,
        loss: harmony_loss(h_s, n_audio, n_visual),
        n_audio_raw: beats.audio_raw.len(),
        n_visual_raw: beats.visual_raw.len(),
        n_audio,
        n_visual,
        audio_beats,
        visual_beats: beats.visual.clone(),
        alignment,
        audio_duration: 0.0,
        pose_duration: 0.0,
        analyzed_duration: 0.0,
        warnings: Vec::new(),
        config: cfg.clone(),
    })
}

/// Raw audio beats of a clip.
pub fn audio_beats<T: Scalar>(clip: &AudioClip<T>, cfg: &AnalysisConfig) -> Result<BeatSequence<T>> {
    Ok(detect_audio_beats(&onset_envelope(clip, &cfg.stft)?))
}

/// Raw visual beats of a pose sequence together with the profile's first value.
pub fn visual_beats<T: Scalar>(
    poses: &PoseSequence<T>,
    cfg: &AnalysisConfig,
) -> Result<(BeatSequence<T>, T)> {
    let mut profile = joint_velocity_sum(poses)?;
    if let Some(w) = cfg.smooth_j {
        profile = profile.smoothed(w);
    }
    let j_initial = profile.initial().unwrap_or_else(T::zero);
    Ok((detect_visual_beats(&profile), j_initial))
}

/// Full pipeline: audio beats and visual beats, saliency masking, alignment
/// and scoring. When durations differ only the overlapping prefix is analyzed
/// and a warning is recorded.
pub fn evaluate_pair<T: Scalar>(
    audio: &AudioClip<T>,
    poses: &PoseSequence<T>,
    cfg: &AnalysisConfig,
) -> Result<HarmonyReport<T>> {
    cfg.validate()?;
    let audio_duration = audio.duration();
    let pose_duration = poses.duration();
    let overlap = audio_duration.min(pose_duration);
    let frame_period = 1.0 / poses.fps().to_f64_lossy();

    let mut warnings = Vec::new();
    let (audio, poses) = if (audio_duration - pose_duration).abs() > frame_period {
        warnings.push(format!(
            "duration mismatch: audio {audio_duration:.3} s, poses {pose_duration:.3} s; analyzing first {overlap:.3} s"
        ));
        let frames = (overlap / frame_period).round() as usize;
        (audio.truncated(overlap), poses.truncated(frames))
    } else {
        (audio.clone(), poses.clone())
    };

    let raw_audio = audio_beats(&audio, cfg)?;
    let (raw_visual, j_initial) = visual_beats(&poses, cfg)?;
    let salient = select_salient(raw_audio, raw_visual, j_initial, cfg)?;
    let mut report = score_beats(&salient, cfg)?;
    if report.n_audio == 0 {
        warnings.push("no salient audio beats".into());
    }
    if report.n_visual == 0 {
        warnings.push("no salient visual beats".into());
    }
    report.audio_duration = audio_duration;
    report.pose_duration = pose_duration;
    report.analyzed_duration = overlap;
    report.warnings = warnings;
    Ok(report)
}
