//! Seeded synthetic audio/motion pairs with known beat placement.
//!
//! The audio is a click track: one 10 ms exponentially decaying noise burst
//! per beat. The motion is a skeleton whose joints travel on circles with a
//! speed profile that is cosine-interpolated between alternating low and high
//! levels at knot times `k * beat_period + visual_offset (+ jitter)`, so the
//! joint-velocity sum has exactly one extremum per knot.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::error::{HarmoError, Result};
use crate::motion::PoseSequence;
use crate::Scalar;

const CLICK_SECONDS: f64 = 0.010;
const LOW_SPEED: f64 = 0.35;
const AUDIO_STREAM: u64 = 1;
const MOTION_STREAM: u64 = 2;
const BURST_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    /// Seconds between beats.
    pub beat_period: f64,
    /// Total length of both tracks, seconds.
    pub duration: f64,
    /// Shift of every motion knot relative to its click, seconds.
    pub visual_offset: f64,
    /// Standard deviation of per-knot timing jitter, seconds.
    pub jitter_sd: f64,
    /// Fraction of clicks dropped from the audio.
    pub omit_fraction: f64,
    /// Fraction of movement units that get a spurious extra extremum pair.
    pub extra_fraction: f64,
    pub fps: f64,
    pub joint_count: usize,
    pub rng_seed: u64,
    /// The default of 20480 Hz makes a 512-sample hop exactly 25 ms, so any
    /// beat period that is a multiple of 25 ms puts every click at the same
    /// phase against the analysis frames and all clicks get equal onset strength.
    pub sample_rate: u32,
    /// Peak joint speed (length units per second); zero gives a static pose.
    pub movement_amplitude: f64,
    /// Peak click amplitude.
    pub click_gain: f64,
    /// Per-click gain multipliers, applied cyclically.
    pub accents: Vec<f64>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            beat_period: 0.5,
            duration: 8.0,
            visual_offset: 0.0,
            jitter_sd: 0.0,
            omit_fraction: 0.0,
            extra_fraction: 0.0,
            fps: 30.0,
            joint_count: 17,
            rng_seed: 0,
            sample_rate: 20480,
            movement_amplitude: 1.0,
            click_gain: 0.5,
            accents: vec![1.0],
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarmoError::Config(msg));
        if !(self.beat_period > 0.0) {
            return bad(format!("beat_period must be > 0, got {}", self.beat_period));
        }
        if !(self.duration >= self.beat_period) {
            return bad(format!(
                "duration {} shorter than beat_period {}",
                self.duration, self.beat_period
            ));
        }
        for (name, f) in [("omit_fraction", self.omit_fraction), ("extra_fraction", self.extra_fraction)] {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("{name} must be in [0, 1], got {f}"));
            }
        }
        if !(self.jitter_sd >= 0.0) || !self.visual_offset.is_finite() {
            return bad("jitter_sd must be >= 0 and visual_offset finite".into());
        }
        if !(self.fps > 0.0) || self.joint_count == 0 || self.sample_rate == 0 {
            return bad("fps, joint_count and sample_rate must be positive".into());
        }
        if !(self.movement_amplitude >= 0.0) || !(self.click_gain >= 0.0) {
            return bad("movement_amplitude and click_gain must be >= 0".into());
        }
        if self.accents.is_empty() || self.accents.iter().any(|a| !(*a >= 0.0)) {
            return bad("accents must be a non-empty list of non-negative gains".into());
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(stream);
        rng
    }

    /// Nominal click times `k * beat_period < duration`, before omissions.
    pub fn nominal_click_times(&self) -> Vec<f64> {
        (0..)
            .map(|k| k as f64 * self.beat_period)
            .take_while(|&t| t < self.duration)
            .collect()
    }

    /// Click times that survive `omit_fraction`, and the accent index of each.
    pub fn click_times(&self) -> Vec<(f64, usize)> {
        let nominal = self.nominal_click_times();
        let n = nominal.len();
        let n_omit = (self.omit_fraction * n as f64).round() as usize;
        let mut rng = self.rng(AUDIO_STREAM);
        let mut omitted = vec![false; n];
        for i in index::sample(&mut rng, n, n_omit.min(n)) {
            omitted[i] = true;
        }
        nominal
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !omitted[*i])
            .map(|(i, t)| (t, i))
            .collect()
    }

    /// Speed-profile knots covering the whole track, in time order.
    pub fn motion_knots(&self) -> Vec<Knot> {
        let p = self.beat_period;
        let k_min = (-self.visual_offset / p).floor() as i64 - 1;
        let k_max = ((self.duration - self.visual_offset) / p).ceil() as i64 + 1;
        let mut rng = self.rng(MOTION_STREAM);
        let jitter = Normal::new(0.0, self.jitter_sd).expect("jitter_sd validated");
        let limit = 0.4 * p;
        let mut knots: Vec<Knot> = (k_min..=k_max)
            .map(|k| {
                let dt = if self.jitter_sd > 0.0 {
                    jitter.sample(&mut rng).clamp(-limit, limit)
                } else {
                    0.0
                };
                Knot {
                    time: k as f64 * p + self.visual_offset + dt,
                    level: if k.rem_euclid(2) == 0 { LOW_SPEED } else { 1.0 },
                    spurious: false,
                }
            })
            .collect();

        // movement units lying fully inside the track are eligible for extras
        let eligible: Vec<usize> = (0..knots.len() - 1)
            .filter(|&i| knots[i].time >= 0.0 && knots[i + 1].time <= self.duration)
            .collect();
        let n_extra = (self.extra_fraction * eligible.len() as f64).round() as usize;
        let mut chosen: Vec<usize> = index::sample(&mut rng, eligible.len(), n_extra)
            .into_iter()
            .map(|i| eligible[i])
            .collect();
        chosen.sort_unstable();
        for &i in chosen.iter().rev() {
            let (a, b) = (knots[i], knots[i + 1]);
            let span = b.time - a.time;
            let dl = b.level - a.level;
            let extra = [
                Knot {
                    time: a.time + span / 3.0,
                    level: a.level + 0.8 * dl,
                    spurious: true,
                },
                Knot {
                    time: a.time + 2.0 * span / 3.0,
                    level: a.level + 0.2 * dl,
                    spurious: true,
                },
            ];
            knots.splice(i + 1..i + 1, extra);
        }
        knots
    }
}

/// A point where the motion speed profile reaches a prescribed level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub time: f64,
    /// Relative speed level in `(0, 1]`.
    pub level: f64,
    /// Inserted by `extra_fraction`, not tied to a beat.
    pub spurious: bool,
}

/// Click track with one decaying noise burst per surviving click time. The
/// same burst waveform (drawn once from the seed) is reused for every click.
pub fn gen_click_track<T: Scalar>(spec: &SynthSpec) -> Result<AudioClip<T>> {
    spec.validate()?;
    let sr = spec.sample_rate as f64;
    let n_total = (spec.duration * sr).round() as usize;
    let burst_len = (CLICK_SECONDS * sr).round().max(1.0) as usize;
    let mut rng = spec.rng(BURST_STREAM);
    let noise = Uniform::new_inclusive(-1.0, 1.0);
    let burst: Vec<f64> = (0..burst_len)
        .map(|i| noise.sample(&mut rng) * (-5.0 * i as f64 / burst_len as f64).exp())
        .collect();

    let mut samples = vec![0.0f64; n_total];
    for (t, idx) in spec.click_times() {
        let gain = spec.click_gain * spec.accents[idx % spec.accents.len()];
        let start = (t * sr).round() as usize;
        for (s, b) in samples.iter_mut().skip(start).zip(&burst) {
            *s += gain * b;
        }
    }
    AudioClip::new(samples.into_iter().map(T::lit).collect(), spec.sample_rate)
}

/// Distance travelled from the first knot up to time `t` under the
/// cosine-interpolated speed profile.
fn travelled(knots: &[Knot], t: f64, amplitude: f64) -> f64 {
    let mut total = 0.0;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if t <= a.time {
            break;
        }
        let d = b.time - a.time;
        let x = (t.min(b.time)) - a.time;
        let (va, vb) = (a.level * amplitude, b.level * amplitude);
        // integral of va + (vb - va) * (1 - cos(pi x / d)) / 2
        total += va * x
            + 0.5 * (vb - va) * (x - d / std::f64::consts::PI * (std::f64::consts::PI * x / d).sin());
    }
    total
}

/// Skeleton whose joints move along circles at the knot-driven speed profile.
pub fn gen_motion_track<T: Scalar>(spec: &SynthSpec) -> Result<PoseSequence<T>> {
    spec.validate()?;
    let knots = spec.motion_knots();
    let n_frames = ((spec.duration * spec.fps).round() as usize).max(2);
    let joints = spec.joint_count;
    let mut coords = Vec::with_capacity(n_frames * joints * 3);
    for f in 0..n_frames {
        let t = f as f64 / spec.fps;
        let arc = travelled(&knots, t, spec.movement_amplitude);
        for p in 0..joints {
            let radius = 0.15 + 0.02 * p as f64;
            let phase = 0.7 * p as f64;
            let theta = phase + arc / radius;
            let center = [0.1 * p as f64, 1.0 + 0.05 * p as f64, 0.02 * p as f64];
            coords.push(T::lit(center[0] + radius * theta.cos()));
            coords.push(T::lit(center[1] + radius * theta.sin()));
            coords.push(T::lit(center[2]));
        }
    }
    PoseSequence::from_flat(T::lit(spec.fps), joints, 3, coords)
}

/// A generated pair plus its ground truth.
#[derive(Debug, Clone)]
pub struct SynthPair<T = f64> {
    pub audio: AudioClip<T>,
    pub poses: PoseSequence<T>,
    pub click_times: Vec<f64>,
    pub knots: Vec<Knot>,
}

pub fn gen_pair<T: Scalar>(spec: &SynthSpec) -> Result<SynthPair<T>> {
    Ok(SynthPair {
        audio: gen_click_track(spec)?,
        poses: gen_motion_track(spec)?,
        click_times: spec.click_times().into_iter().map(|(t, _)| t).collect(),
        knots: spec.motion_knots(),
    })
}
