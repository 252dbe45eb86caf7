//! Rhythmic harmony between a music track and a human pose sequence.
//!
//! Audio beats are peaks of a mel spectral-flux onset envelope; visual beats
//! are extrema of the joint velocity sum. Both streams are thinned with
//! standard-deviation saliency masks, each audio beat is matched to its
//! nearest visual beat under a perceptual delay tolerance, and the matches are
//! folded into an F-score style harmony score, a hit rate and a loss value.
//! A meter module labels strong/weak beats and cuts the clip into meter units.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`, defaulting
//! to `f64`); the `*F32`/`*F64` aliases below name the concrete instances.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod beats;
pub mod config;
pub mod error;
pub mod harmony;
pub mod meter;
pub mod motion;
pub mod peaks;
pub mod pipeline;
pub mod saliency;
pub mod scalar;
pub mod testkit;
pub mod timeline;

pub use audio::{detect_audio_beats, load_audio, onset_envelope, AudioClip, OnsetEnvelope, StftConfig};
pub use beats::BeatSequence;
pub use config::AnalysisConfig;
pub use error::{HarmoError, Result};
pub use harmony::{
    align_beats, harmonic_harmony, harmony, harmony_loss, hit_rate, weighted_hit_sum,
    AlignmentConfig, AlignmentResult,
};
pub use meter::{
    classify_meter, initial_pose_features, label_beats, segment_meter_units, MeterType, MeterUnit,
};
pub use motion::{
    detect_visual_beats, detect_visual_beats_sd, joint_velocity_sum, PoseSequence, VelocityProfile,
};
pub use pipeline::{evaluate_pair, HarmonyReport, ReportStatus};
pub use saliency::{
    apply_mask, audio_saliency_mask, visual_saliency_mask, visual_saliency_transform,
    SaliencyConfig, SaliencyMask,
};
pub use scalar::Scalar;

pub type AudioClipF32 = AudioClip<f32>;
pub type AudioClipF64 = AudioClip<f64>;
pub type BeatSequenceF32 = BeatSequence<f32>;
pub type BeatSequenceF64 = BeatSequence<f64>;
pub type OnsetEnvelopeF32 = OnsetEnvelope<f32>;
pub type OnsetEnvelopeF64 = OnsetEnvelope<f64>;
pub type PoseSequenceF32 = PoseSequence<f32>;
pub type PoseSequenceF64 = PoseSequence<f64>;
pub type VelocityProfileF32 = VelocityProfile<f32>;
pub type VelocityProfileF64 = VelocityProfile<f64>;
pub type AlignmentResultF32 = AlignmentResult<f32>;
pub type AlignmentResultF64 = AlignmentResult<f64>;
pub type HarmonyReportF32 = HarmonyReport<f32>;
pub type HarmonyReportF64 = HarmonyReport<f64>;
pub type MeterUnitF32 = MeterUnit<f32>;
pub type MeterUnitF64 = MeterUnit<f64>;
