//! Strong/weak beat labeling, meter classification, meter-unit segmentation
//! and initial-pose features.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::beats::BeatSequence;
use crate::error::{HarmoError, Result};
use crate::motion::PoseSequence;
use crate::Scalar;

/// Agreement below which a clip is treated as mixed-meter.
pub const MIXED_METER_AGREEMENT: f64 = 0.6;

/// `labels[i]` is true (strong) when beat `i` is more salient than beat `i - 1`.
/// The first beat is always strong.
pub fn label_beats<T: Scalar>(beats: &BeatSequence<T>) -> Vec<bool> {
    let s = beats.saliency();
    (0..s.len()).map(|i| i == 0 || s[i] > s[i - 1]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeterType {
    Duple,
    Triple,
    Quadruple,
    Compound,
}

impl MeterType {
    /// Candidates in tie-break order (shortest period first).
    pub const ALL: [MeterType; 4] = [
        MeterType::Duple,
        MeterType::Triple,
        MeterType::Quadruple,
        MeterType::Compound,
    ];

    /// Canonical strong(1)/weak(0) pattern of one meter.
    pub fn pattern(self) -> &'static [bool] {
        match self {
            MeterType::Duple => &[true, false],
            MeterType::Triple => &[true, false, false],
            // strong-weak-medium-weak, medium collapsed to strong
            MeterType::Quadruple => &[true, false, true, false],
            MeterType::Compound => &[true, false, false, true, false, false],
        }
    }

    pub fn beats_per_meter(self) -> usize {
        self.pattern().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            MeterType::Duple => "duple",
            MeterType::Triple => "triple",
            MeterType::Quadruple => "quadruple",
            MeterType::Compound => "compound",
        }
    }
}

/// Fraction of labels matching the meter's pattern tiled from the first label.
pub fn meter_agreement(labels: &[bool], meter: MeterType) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let pat = meter.pattern();
    let hits = labels
        .iter()
        .enumerate()
        .filter(|(i, &l)| l == pat[i % pat.len()])
        .count();
    hits as f64 / labels.len() as f64
}

/// Meter whose tiled pattern agrees best with the labels, and that agreement.
/// Ties go to the shorter period.
pub fn classify_meter_scored(labels: &[bool]) -> (MeterType, f64) {
    let mut best = (MeterType::Duple, meter_agreement(labels, MeterType::Duple));
    for m in &MeterType::ALL[1..] {
        let a = meter_agreement(labels, *m);
        if a > best.1 {
            best = (*m, a);
        }
    }
    best
}

pub fn classify_meter(labels: &[bool]) -> MeterType {
    classify_meter_scored(labels).0
}

/// A contiguous run of beats sharing one meter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeterSection {
    pub beats: Range<usize>,
    pub meter: MeterType,
    pub agreement: f64,
}

/// Whole-clip classification, falling back to a greedy left-to-right split
/// when the single best meter agrees with fewer than 60% of the labels. Each
/// step classifies a window two meters long (per candidate) and consumes it;
/// neighbouring windows with the same meter are merged.
pub fn classify_meter_sections(labels: &[bool]) -> Vec<MeterSection> {
    let (meter, agreement) = classify_meter_scored(labels);
    if agreement >= MIXED_METER_AGREEMENT || labels.is_empty() {
        return vec![MeterSection {
            beats: 0..labels.len(),
            meter,
            agreement,
        }];
    }
    let mut sections: Vec<MeterSection> = Vec::new();
    let mut start = 0;
    while start < labels.len() {
        let mut best: Option<(MeterType, f64, usize)> = None;
        for m in MeterType::ALL {
            let end = (start + 2 * m.beats_per_meter()).min(labels.len());
            let a = meter_agreement(&labels[start..end], m);
            if best.is_none_or(|(_, ba, _)| a > ba) {
                best = Some((m, a, end));
            }
        }
        let (m, _, end) = best.expect("at least one meter type");
        match sections.last_mut() {
            Some(last) if last.meter == m => last.beats.end = end,
            _ => sections.push(MeterSection {
                beats: start..end,
                meter: m,
                agreement: 0.0,
            }),
        }
        start = end;
    }
    for s in &mut sections {
        s.agreement = meter_agreement(&labels[s.beats.clone()], s.meter);
    }
    sections
}

/// One meter plus its borrowed transition beats, padded to a common length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MeterUnit<T = f64> {
    pub t_start: T,
    pub t_end: T,
    pub meter: MeterType,
    /// Beats of this unit's own meter.
    pub beat_indices: Range<usize>,
    pub transition_beat_count: usize,
    /// Duration before padding to the common length.
    pub natural_duration: T,
    /// Frame rate of `temporal_indices`.
    pub fps: T,
    /// One flag per frame from `t_start` to `t_end` inclusive; set on frames
    /// that belong to the preceding meter's transition.
    pub temporal_indices: Vec<bool>,
}

/// Tiles the beats into units of one meter each (the last may be partial).
pub fn segment_meter_units<T: Scalar>(
    beats: &BeatSequence<T>,
    meter: MeterType,
    fps: T,
    transition_beats: usize,
) -> Result<Vec<MeterUnit<T>>> {
    let section = MeterSection {
        beats: 0..beats.len(),
        meter,
        agreement: 1.0,
    };
    segment_meter_sections(beats, &[section], fps, transition_beats)
}

/// Tiles each section with its own meter. Every unit borrows up to
/// `transition_beats` trailing beats of the previous meter, and all units are
/// padded to the longest natural unit duration in the clip.
pub fn segment_meter_sections<T: Scalar>(
    beats: &BeatSequence<T>,
    sections: &[MeterSection],
    fps: T,
    transition_beats: usize,
) -> Result<Vec<MeterUnit<T>>> {
    if !(fps > T::zero()) {
        return Err(HarmoError::Config(format!("fps must be positive, got {fps}")));
    }
    let times = beats.times();
    let n = times.len();
    let first_meter = sections.first().map_or(MeterType::Duple, |s| s.meter);
    if n < first_meter.beats_per_meter() {
        return Err(HarmoError::TooFewBeats {
            meter: first_meter.name(),
            needed: first_meter.beats_per_meter(),
            got: n,
        });
    }
    let mean_gap = (times[n - 1] - times[0]) / T::from_usize_lossy(n - 1);

    let mut own: Vec<(Range<usize>, MeterType)> = Vec::new();
    for s in sections {
        let k = s.meter.beats_per_meter();
        let mut i = s.beats.start;
        while i < s.beats.end {
            let end = (i + k).min(s.beats.end);
            own.push((i..end, s.meter));
            i = end;
        }
    }

    let mut units: Vec<MeterUnit<T>> = own
        .iter()
        .map(|(range, meter)| {
            let trans = transition_beats.min(range.start);
            let t_start = times[range.start - trans];
            let natural_end = if range.end < n {
                times[range.end]
            } else {
                times[n - 1] + mean_gap
            };
            MeterUnit {
                t_start,
                t_end: natural_end,
                meter: *meter,
                beat_indices: range.clone(),
                transition_beat_count: trans,
                natural_duration: natural_end - t_start,
                fps,
                temporal_indices: Vec::new(),
            }
        })
        .collect();

    let unified = units
        .iter()
        .map(|u| u.natural_duration)
        .fold(T::zero(), T::max);
    let eps = T::lit(1e-9);
    let n_frames = (unified * fps + eps).floor().to_usize().unwrap_or(0) + 1;
    for u in &mut units {
        u.t_end = u.t_start + unified;
        let lead = times[u.beat_indices.start] - u.t_start;
        let trans_frames = (lead * fps - eps).ceil().max(T::zero()).to_usize().unwrap_or(0);
        u.temporal_indices = (0..n_frames).map(|i| i < trans_frames).collect();
    }
    Ok(units)
}

/// Replaces every non-transition frame with the mean transition pose; frames
/// flagged in `ti` are kept. With no transition frames the first frame is
/// used instead of the mean.
pub fn initial_pose_processing<T: Scalar>(
    poses: &PoseSequence<T>,
    ti: &[bool],
) -> Result<PoseSequence<T>> {
    let n = poses.frame_count();
    if ti.len() != n {
        return Err(HarmoError::LengthMismatch {
            what: "temporal indices vs pose frames",
            left: ti.len(),
            right: n,
        });
    }
    let stride = poses.joint_count() * poses.dims();
    let count = ti.iter().filter(|&&e| e).count();
    let fill: Vec<T> = if count == 0 {
        poses.frame(0).to_vec()
    } else {
        let mut acc = vec![T::zero(); stride];
        for (frame, _) in poses.frames().zip(ti).filter(|(_, &e)| e) {
            for (a, &c) in acc.iter_mut().zip(frame) {
                *a = *a + c;
            }
        }
        let c = T::from_usize_lossy(count);
        acc.into_iter().map(|a| a / c).collect()
    };
    let mut coords = Vec::with_capacity(n * stride);
    for (frame, &e) in poses.frames().zip(ti) {
        coords.extend_from_slice(if e { frame } else { &fill });
    }
    PoseSequence::from_flat(poses.fps(), poses.joint_count(), poses.dims(), coords)
}

/// Cuts the unit's frames out of `poses` (holding the last frame when the
/// padded unit runs past the end) and applies [`initial_pose_processing`].
pub fn initial_pose_features<T: Scalar>(
    poses: &PoseSequence<T>,
    unit: &MeterUnit<T>,
) -> Result<PoseSequence<T>> {
    if (poses.fps() - unit.fps).abs() > T::lit(1e-9) * unit.fps {
        return Err(HarmoError::Config(format!(
            "pose fps {} differs from meter unit fps {}",
            poses.fps(),
            unit.fps
        )));
    }
    let total = poses.frame_count();
    let first = (unit.t_start * unit.fps).round().to_usize().unwrap_or(usize::MAX);
    if first >= total {
        return Err(HarmoError::InvalidPose(format!(
            "meter unit starts at frame {first}, poses have {total}"
        )));
    }
    let stride = poses.joint_count() * poses.dims();
    let mut coords = Vec::with_capacity(unit.temporal_indices.len() * stride);
    for i in 0..unit.temporal_indices.len() {
        coords.extend_from_slice(poses.frame((first + i).min(total - 1)));
    }
    let clip = PoseSequence::from_flat(poses.fps(), poses.joint_count(), poses.dims(), coords)?;
    initial_pose_processing(&clip, &unit.temporal_indices)
}

/// Serializable summary of a meter analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeterReport {
    pub meter: String,
    pub beats_per_meter: usize,
    pub agreement: f64,
    pub labels: Vec<u8>,
    pub sections: Vec<MeterSection>,
    pub unit_length: f64,
    pub units: Vec<MeterUnitSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeterUnitSummary {
    pub t_start: f64,
    pub t_end: f64,
    pub meter: String,
    pub transition_beats: usize,
}

/// Labels, classifies and segments a salient audio beat sequence.
pub fn analyze_meter<T: Scalar>(
    beats: &BeatSequence<T>,
    fps: T,
    transition_beats: usize,
) -> Result<MeterReport> {
    let labels = label_beats(beats);
    let (meter, agreement) = classify_meter_scored(&labels);
    let sections = classify_meter_sections(&labels);
    let units = segment_meter_sections(beats, &sections, fps, transition_beats)?;
    Ok(MeterReport {
        meter: meter.name().to_string(),
        beats_per_meter: meter.beats_per_meter(),
        agreement,
        labels: labels.iter().map(|&l| l as u8).collect(),
        sections,
        unit_length: units
            .first()
            .map_or(0.0, |u| (u.t_end - u.t_start).to_f64_lossy()),
        units: units
            .iter()
            .map(|u| MeterUnitSummary {
                t_start: u.t_start.to_f64_lossy(),
                t_end: u.t_end.to_f64_lossy(),
                meter: u.meter.name().to_string(),
                transition_beats: u.transition_beat_count,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn even_beats(n: usize, gap: f64) -> BeatSequence<f64> {
        BeatSequence::new((0..n).map(|i| i as f64 * gap).collect(), vec![1.0; n]).unwrap()
    }

    #[test]
    fn labeling_examples() {
        let b = BeatSequence::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.5, 0.8, 0.3, 0.6]).unwrap();
        assert_eq!(label_beats(&b), bits("1101"));
        let b = BeatSequence::new(vec![0.0, 1.0, 2.0], vec![3.0, 2.0, 1.0]).unwrap();
        assert_eq!(label_beats(&b), bits("100"));
        let b = BeatSequence::new(vec![0.0], vec![0.2]).unwrap();
        assert_eq!(label_beats(&b), bits("1"));
    }

    #[test]
    fn pattern_shapes() {
        for m in MeterType::ALL {
            assert_eq!(m.pattern().len(), m.beats_per_meter());
            assert!(m.pattern()[0]);
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_meter(&bits("101010")), MeterType::Duple);
        assert_eq!(classify_meter(&bits("100100")), MeterType::Triple);
        assert_eq!(classify_meter(&bits("1111")), MeterType::Duple);
        assert_eq!(classify_meter_scored(&bits("101010")).1, 1.0);
    }

    #[test]
    fn mixed_meter_sections() {
        // best single meter agrees with only half the labels
        let labels = bits("11111111100100100100100100");
        assert!(classify_meter_scored(&labels).1 < MIXED_METER_AGREEMENT);
        let sections = classify_meter_sections(&labels);
        assert_eq!(sections.len(), 2, "{sections:?}");
        assert_eq!(sections[0].meter, MeterType::Duple);
        assert_eq!(sections[0].beats, 0..8);
        assert_eq!(sections[1].meter, MeterType::Triple);
        assert_eq!(sections[1].agreement, 1.0);
        assert_eq!(sections[0].beats.start, 0);
        assert_eq!(sections.last().unwrap().beats.end, labels.len());
        for w in sections.windows(2) {
            assert_eq!(w[0].beats.end, w[1].beats.start);
        }
        assert_eq!(classify_meter_sections(&bits("101010")).len(), 1);
    }

    #[test]
    fn quadruple_with_transition() {
        let units = segment_meter_units(&even_beats(8, 0.5), MeterType::Quadruple, 10.0, 1).unwrap();
        assert_eq!(units.len(), 2);
        assert_eq!(units[0].t_start, 0.0);
        assert_eq!(units[0].transition_beat_count, 0);
        assert_eq!(units[1].beat_indices, 4..8);
        assert_eq!(units[1].transition_beat_count, 1);
        assert_eq!(units[1].t_start, 1.5);
        // natural lengths 2.0 and 2.5; both padded to 2.5
        for u in &units {
            assert!((u.t_end - u.t_start - 2.5).abs() < 1e-12);
            assert_eq!(u.temporal_indices.len(), 26);
        }
        assert!(units[0].temporal_indices.iter().all(|&e| !e));
        let set: Vec<usize> = units[1]
            .temporal_indices
            .iter()
            .enumerate()
            .filter(|(_, &e)| e)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(set, (0..5).collect::<Vec<_>>());
    }

    #[test]
    fn duple_zero_transition_partitions() {
        let beats = even_beats(4, 0.5);
        let units = segment_meter_units(&beats, MeterType::Duple, 30.0, 0).unwrap();
        assert_eq!(units.len(), 2);
        assert_eq!(units[0].t_start, 0.0);
        assert_eq!(units[0].t_end, 1.0);
        assert_eq!(units[1].t_start, 1.0);
        assert_eq!(units[1].t_end, 2.0);
    }

    #[test]
    fn single_meter_and_too_few() {
        let units = segment_meter_units(&even_beats(3, 0.4), MeterType::Triple, 25.0, 1).unwrap();
        assert_eq!(units.len(), 1);
        assert!(units[0].temporal_indices.iter().all(|&e| !e));
        assert!(matches!(
            segment_meter_units(&even_beats(3, 0.4), MeterType::Quadruple, 25.0, 1),
            Err(HarmoError::TooFewBeats { .. })
        ));
    }

    fn poses(frames: &[[f64; 2]]) -> PoseSequence<f64> {
        let coords = frames.iter().flatten().copied().collect();
        PoseSequence::from_flat(10.0, 1, 2, coords).unwrap()
    }

    #[test]
    fn initial_pose_examples() {
        let p = poses(&[[0.0, 0.0], [2.0, 4.0], [9.0, 9.0], [7.0, 7.0]]);
        let out = initial_pose_processing(&p, &[true, true, false, false]).unwrap();
        assert_eq!(out.coords(), &[0.0, 0.0, 2.0, 4.0, 1.0, 2.0, 1.0, 2.0]);

        assert_eq!(initial_pose_processing(&p, &[true; 4]).unwrap(), p);

        let p3 = poses(&[[1.0, 2.0], [5.0, 5.0], [6.0, 6.0]]);
        let out = initial_pose_processing(&p3, &[true, false, false]).unwrap();
        assert_eq!(out.coords(), &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);

        let out = initial_pose_processing(&p3, &[false; 3]).unwrap();
        assert_eq!(out.coords(), &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(initial_pose_processing(&p3, &[false; 2]).is_err());
    }

    #[test]
    fn initial_pose_features_cuts_unit_frames() {
        let frames: Vec<[f64; 2]> = (0..30).map(|i| [i as f64, 0.0]).collect();
        let p = poses(&frames);
        let units = segment_meter_units(&even_beats(8, 0.5), MeterType::Quadruple, 10.0, 1).unwrap();
        let f = initial_pose_features(&p, &units[1]).unwrap();
        assert_eq!(f.frame_count(), 26);
        // transition frames 15..20 kept, the rest replaced by their mean (17)
        assert_eq!(f.frame(0), &[15.0, 0.0]);
        assert_eq!(f.frame(4), &[19.0, 0.0]);
        assert_eq!(f.frame(5), &[17.0, 0.0]);
        assert_eq!(f.frame(25), &[17.0, 0.0]);
        let wrong_fps = PoseSequence::from_flat(30.0, 1, 2, p.coords().to_vec()).unwrap();
        assert!(initial_pose_features(&wrong_fps, &units[1]).is_err());
    }
}
