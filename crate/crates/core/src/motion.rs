//! Pose sequences, joint-velocity-sum profiles and visual beat detection.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beats::BeatSequence;
use crate::error::{HarmoError, Result};
use crate::peaks::{slope_sign_changes, strict_local_maxima};
use crate::Scalar;

/// `T x P` joint positions, each a 2- or 3-vector, sampled at `fps`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence<T = f64> {
    fps: T,
    joints: usize,
    dims: usize,
    // frame-major, then joint, then coordinate
    coords: Vec<T>,
}

impl<T: Scalar> PoseSequence<T> {
    /// Builds a sequence from nested `frames[t][p][d]` data, checking that
    /// every frame has the same joint count and every joint the same dimensionality.
    pub fn from_frames(fps: T, frames: &[Vec<Vec<T>>]) -> Result<Self> {
        if !(fps > T::zero()) || !fps.is_finite() {
            return Err(HarmoError::InvalidPose(format!("fps must be positive, got {fps}")));
        }
        let first = frames
            .first()
            .ok_or_else(|| HarmoError::InvalidPose("no frames".into()))?;
        let joints = first.len();
        if joints == 0 {
            return Err(HarmoError::InvalidPose("frame 0 has no joints".into()));
        }
        let dims = first[0].len();
        if dims != 2 && dims != 3 {
            return Err(HarmoError::InvalidPose(format!(
                "joints must be 2- or 3-vectors, got {dims}"
            )));
        }
        let mut coords = Vec::with_capacity(frames.len() * joints * dims);
        for (t, frame) in frames.iter().enumerate() {
            if frame.len() != joints {
                return Err(HarmoError::InvalidPose(format!(
                    "frame {t} has {} joints, expected {joints}",
                    frame.len()
                )));
            }
            for (p, joint) in frame.iter().enumerate() {
                if joint.len() != dims {
                    return Err(HarmoError::InvalidPose(format!(
                        "frame {t} joint {p} has {} coordinates, expected {dims}",
                        joint.len()
                    )));
                }
                if joint.iter().any(|c| !c.is_finite()) {
                    return Err(HarmoError::InvalidPose(format!(
                        "frame {t} joint {p} is not finite"
                    )));
                }
                coords.extend_from_slice(joint);
            }
        }
        Ok(Self {
            fps,
            joints,
            dims,
            coords,
        })
    }

    /// Builds a sequence from flat frame-major coordinates.
    pub fn from_flat(fps: T, joints: usize, dims: usize, coords: Vec<T>) -> Result<Self> {
        if joints == 0 || !(dims == 2 || dims == 3) {
            return Err(HarmoError::InvalidPose(format!(
                "bad shape: {joints} joints x {dims} dims"
            )));
        }
        let stride = joints * dims;
        if coords.is_empty() || !coords.len().is_multiple_of(stride) {
            return Err(HarmoError::InvalidPose(format!(
                "{} coordinates do not form whole frames of {stride}",
                coords.len()
            )));
        }
        if !(fps > T::zero()) || !fps.is_finite() {
            return Err(HarmoError::InvalidPose(format!("fps must be positive, got {fps}")));
        }
        Ok(Self {
            fps,
            joints,
            dims,
            coords,
        })
    }

    pub fn fps(&self) -> T {
        self.fps
    }

    pub fn joint_count(&self) -> usize {
        self.joints
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn frame_count(&self) -> usize {
        self.coords.len() / (self.joints * self.dims)
    }

    pub fn duration(&self) -> f64 {
        self.frame_count() as f64 / self.fps.to_f64_lossy()
    }

    /// All coordinates of frame `t`, joint-major.
    pub fn frame(&self, t: usize) -> &[T] {
        let stride = self.joints * self.dims;
        &self.coords[t * stride..(t + 1) * stride]
    }

    pub fn joint(&self, t: usize, p: usize) -> &[T] {
        let start = (t * self.joints + p) * self.dims;
        &self.coords[start..start + self.dims]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.joints * self.dims)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// First `n` frames.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.clamp(1, self.frame_count());
        let stride = self.joints * self.dims;
        Self {
            coords: self.coords[..n * stride].to_vec(),
            ..self.clone()
        }
    }

    /// Applies `f` to every coordinate vector.
    pub fn map_joints(&self, mut f: impl FnMut(&[T]) -> Vec<T>) -> Self {
        let mut coords = Vec::with_capacity(self.coords.len());
        for joint in self.coords.chunks_exact(self.dims) {
            let mapped = f(joint);
            assert_eq!(mapped.len(), self.dims, "map_joints must keep dimensionality");
            coords.extend(mapped);
        }
        Self {
            coords,
            ..self.clone()
        }
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<T>>> {
        self.frames()
            .map(|f| f.chunks_exact(self.dims).map(|j| j.to_vec()).collect())
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = PoseDocument {
            fps: self.fps,
            joints: self.joints,
            dims: self.dims,
            frames: self.to_nested(),
        };
        serde_json::to_string(&doc).expect("pose document serializes")
    }

    /// Parses `{"fps", "joints", "dims", "frames": [[[x, y(, z)], ...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PoseDocument<T> =
            serde_json::from_str(text).map_err(|e| HarmoError::Parse(e.to_string()))?;
        let seq = Self::from_frames(doc.fps, &doc.frames)?;
        if seq.joints != doc.joints || seq.dims != doc.dims {
            return Err(HarmoError::InvalidPose(format!(
                "header says {} joints x {} dims, frames have {} x {}",
                doc.joints, doc.dims, seq.joints, seq.dims
            )));
        }
        Ok(seq)
    }

    /// Parses CSV with one frame per row and a `j0_x,j0_y[,j0_z],j1_x,...` header.
    pub fn from_csv(text: &str, fps: T) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = rdr
            .headers()
            .map_err(|e| HarmoError::Parse(e.to_string()))?
            .clone();
        let dims = if header.iter().any(|h| h.ends_with("_z")) { 3 } else { 2 };
        if header.is_empty() || header.len() % dims != 0 {
            return Err(HarmoError::InvalidPose(format!(
                "{} columns do not split into {dims}-d joints",
                header.len()
            )));
        }
        let axes = ["x", "y", "z"];
        for (i, h) in header.iter().enumerate() {
            let expected = format!("j{}_{}", i / dims, axes[i % dims]);
            if h != expected {
                return Err(HarmoError::InvalidPose(format!(
                    "column {i} is {h:?}, expected {expected:?}"
                )));
            }
        }
        let joints = header.len() / dims;
        let mut coords = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| HarmoError::Parse(e.to_string()))?;
            if rec.len() != header.len() {
                return Err(HarmoError::InvalidPose(format!(
                    "row {row} has {} fields, expected {}",
                    rec.len(),
                    header.len()
                )));
            }
            for field in rec.iter() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| HarmoError::Parse(format!("row {row}: bad number {field:?}")))?;
                coords.push(T::lit(v));
            }
        }
        Self::from_flat(fps, joints, dims, coords)
    }

    pub fn to_csv(&self) -> String {
        let axes = ["x", "y", "z"];
        let mut out = (0..self.joints * self.dims)
            .map(|i| format!("j{}_{}", i / self.dims, axes[i % self.dims]))
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        for frame in self.frames() {
            let row: Vec<String> = frame.iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Reads a `.json` or `.csv` pose file. CSV needs `csv_fps`.
    pub fn read(path: impl AsRef<Path>, csv_fps: Option<T>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarmoError::io(path, e))?;
        let is_csv = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv {
            let fps = csv_fps.ok_or_else(|| {
                HarmoError::InvalidPose("CSV pose input needs an explicit fps".into())
            })?;
            Self::from_csv(&text, fps)
        } else {
            Self::from_json(&text)
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct PoseDocument<T> {
    fps: T,
    joints: usize,
    dims: usize,
    frames: Vec<Vec<Vec<T>>>,
}

/// Joint velocity sum `j_t` for frames `1..T`, timestamped `t / fps`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile<T = f64> {
    values: Vec<T>,
    frame_times: Vec<T>,
}

impl<T: Scalar> VelocityProfile<T> {
    pub fn new(values: Vec<T>, frame_times: Vec<T>) -> Result<Self> {
        if values.len() != frame_times.len() {
            return Err(HarmoError::LengthMismatch {
                what: "profile values vs frame times",
                left: values.len(),
                right: frame_times.len(),
            });
        }
        if frame_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarmoError::Parse("profile frame times must increase".into()));
        }
        Ok(Self {
            values,
            frame_times,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn frame_times(&self) -> &[T] {
        &self.frame_times
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First value of the profile (`j` at the second pose frame).
    pub fn initial(&self) -> Option<T> {
        self.values.first().copied()
    }

    /// Centered moving average of odd-ish `width` with edge truncation.
    /// Widths 0 and 1 return the profile unchanged.
    pub fn smoothed(&self, width: usize) -> Self {
        if width <= 1 {
            return self.clone();
        }
        let n = self.values.len();
        let back = (width - 1) / 2;
        let fwd = width - 1 - back;
        let values = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(back);
                let hi = (i + fwd).min(n - 1);
                crate::scalar::mean(&self.values[lo..=hi])
            })
            .collect();
        Self {
            values,
            frame_times: self.frame_times.clone(),
        }
    }
}

/// `j_t = sum_p || v_t^p - v_{t-1}^p ||_2` for every frame after the first.
pub fn joint_velocity_sum<T: Scalar>(poses: &PoseSequence<T>) -> Result<VelocityProfile<T>> {
    let n = poses.frame_count();
    if n < 2 {
        return Err(HarmoError::PoseTooShort { frames: n, needed: 2 });
    }
    let dims = poses.dims();
    let values = (1..n)
        .map(|t| {
            poses
                .frame(t)
                .chunks_exact(dims)
                .zip(poses.frame(t - 1).chunks_exact(dims))
                .map(|(cur, prev)| {
                    cur.iter()
                        .zip(prev)
                        .map(|(&a, &b)| (a - b) * (a - b))
                        .sum::<T>()
                        .sqrt()
                })
                .sum()
        })
        .collect();
    let frame_times = (1..n).map(|t| T::from_usize_lossy(t) / poses.fps()).collect();
    Ok(VelocityProfile {
        values,
        frame_times,
    })
}

/// Visual beats at every local maximum and minimum of the velocity profile;
/// saliency is the profile value there.
pub fn detect_visual_beats<T: Scalar>(profile: &VelocityProfile<T>) -> BeatSequence<T> {
    let (times, saliency) = slope_sign_changes(profile.values())
        .into_iter()
        .map(|i| (profile.frame_times[i], profile.values[i]))
        .unzip();
    BeatSequence::from_parts_unchecked(times, saliency)
}

/// Sliding-window positional spread: for each window of `window` frames, the
/// per-joint standard deviation of positions (root of the covariance trace),
/// summed over joints. Timestamped at the window center.
pub fn sd_profile<T: Scalar>(poses: &PoseSequence<T>, window: usize) -> Result<VelocityProfile<T>> {
    let n = poses.frame_count();
    if window < 2 {
        return Err(HarmoError::Config(format!("SD window must be >= 2, got {window}")));
    }
    if window > n {
        return Err(HarmoError::PoseTooShort { frames: n, needed: window });
    }
    let dims = poses.dims();
    let w = T::from_usize_lossy(window);
    let half_span = T::lit((window - 1) as f64 / 2.0);
    let mut values = Vec::with_capacity(n - window + 1);
    let mut frame_times = Vec::with_capacity(n - window + 1);
    let mut mean = vec![T::zero(); dims];
    for start in 0..=n - window {
        let mut total = T::zero();
        for p in 0..poses.joint_count() {
            mean.iter_mut().for_each(|m| *m = T::zero());
            for t in start..start + window {
                for (m, &c) in mean.iter_mut().zip(poses.joint(t, p)) {
                    *m = *m + c;
                }
            }
            mean.iter_mut().for_each(|m| *m = *m / w);
            let var = (start..start + window)
                .map(|t| {
                    poses
                        .joint(t, p)
                        .iter()
                        .zip(&mean)
                        .map(|(&c, &m)| (c - m) * (c - m))
                        .sum::<T>()
                })
                .sum::<T>()
                / w;
            total = total + var.sqrt();
        }
        values.push(total);
        frame_times.push((T::from_usize_lossy(start) + half_span) / poses.fps());
    }
    Ok(VelocityProfile {
        values,
        frame_times,
    })
}

/// Baseline detector: beats at strict local maxima of [`sd_profile`].
pub fn detect_visual_beats_sd<T: Scalar>(
    poses: &PoseSequence<T>,
    window: usize,
) -> Result<BeatSequence<T>> {
    let curve = sd_profile(poses, window)?;
    let (times, saliency) = strict_local_maxima(curve.values())
        .into_iter()
        .map(|i| (curve.frame_times[i], curve.values[i]))
        .unzip();
    Ok(BeatSequence::from_parts_unchecked(times, saliency))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(fps: f64, frames: Vec<Vec<Vec<f64>>>) -> PoseSequence<f64> {
        PoseSequence::from_frames(fps, &frames).unwrap()
    }

    #[test]
    fn velocity_sum_single_joint_moves() {
        let poses = seq(
            10.0,
            vec![
                vec![vec![0.0, 0.0, 0.0], vec![5.0, 5.0, 5.0]],
                vec![vec![0.0, 1.0, 0.0], vec![5.0, 5.0, 5.0]],
            ],
        );
        let j = joint_velocity_sum(&poses).unwrap();
        assert_eq!(j.values(), &[1.0]);
        assert_eq!(j.frame_times(), &[0.1]);
    }

    #[test]
    fn velocity_sum_constant_motion() {
        let frames = (0..4).map(|t| vec![vec![t as f64, 0.0, 0.0]]).collect();
        let j = joint_velocity_sum(&seq(30.0, frames)).unwrap();
        assert_eq!(j.values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn velocity_sum_static_and_short() {
        let frames = vec![vec![vec![1.0, 2.0]]; 5];
        let j = joint_velocity_sum(&seq(30.0, frames)).unwrap();
        assert!(j.values().iter().all(|&v| v == 0.0));
        assert!(detect_visual_beats(&j).is_empty());
        let one = seq(30.0, vec![vec![vec![1.0, 2.0]]]);
        assert!(matches!(
            joint_velocity_sum(&one),
            Err(HarmoError::PoseTooShort { .. })
        ));
    }

    #[test]
    fn dimensionality_mismatch_is_rejected() {
        let frames = vec![vec![vec![0.0, 0.0, 0.0]], vec![vec![0.0, 1.0]]];
        assert!(PoseSequence::from_frames(30.0, &frames).is_err());
        let frames = vec![vec![vec![0.0, 0.0]], vec![vec![0.0, 1.0], vec![1.0, 1.0]]];
        assert!(PoseSequence::from_frames(30.0, &frames).is_err());
    }

    #[test]
    fn visual_beats_hand_examples() {
        let times: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let p = VelocityProfile::new(vec![1.0, 2.0, 3.0, 2.0, 1.0, 2.0], times).unwrap();
        let b = detect_visual_beats(&p);
        assert_eq!(b.times(), &[2.0, 4.0]);
        assert_eq!(b.saliency(), &[3.0, 1.0]);

        let p = VelocityProfile::new(vec![1.0, 3.0, 1.0, 3.0, 1.0], (0..5).map(f64::from).collect())
            .unwrap();
        assert_eq!(detect_visual_beats(&p).saliency(), &[3.0, 1.0, 3.0]);

        let p = VelocityProfile::new(vec![1.0, 2.0, 3.0, 4.0], (0..4).map(f64::from).collect())
            .unwrap();
        assert!(detect_visual_beats(&p).is_empty());
    }

    #[test]
    fn smoothing_width() {
        let p = VelocityProfile::new(vec![0.0, 3.0, 0.0, 3.0], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.smoothed(1), p);
        assert_eq!(p.smoothed(3).values(), &[1.5, 1.0, 2.0, 1.5]);
    }

    #[test]
    fn sd_baseline_static_and_window_errors() {
        let frames = vec![vec![vec![1.0, 2.0, 3.0]; 2]; 10];
        let poses = seq(15.0, frames);
        assert!(detect_visual_beats_sd(&poses, 5).unwrap().is_empty());
        assert!(detect_visual_beats_sd(&poses, 11).is_err());
        assert!(detect_visual_beats_sd(&poses, 1).is_err());
    }

    #[test]
    fn sd_baseline_single_jump() {
        let frames: Vec<_> = (0..30)
            .map(|t| vec![vec![if t < 15 { 0.0 } else { 1.0 }, 0.0]])
            .collect();
        let poses = seq(15.0, frames);
        let beats = detect_visual_beats_sd(&poses, 5).unwrap();
        assert_eq!(beats.len(), 1);
        let jump_time = 15.0 / 15.0;
        assert!((beats.times()[0] - jump_time).abs() <= 5.0 / 15.0);
    }

    #[test]
    fn json_and_csv_formats() {
        let json = r#"{"fps": 30, "joints": 2, "dims": 2,
            "frames": [[[0,0],[1,1]], [[0,1],[1,2]]]}"#;
        let p = PoseSequence::<f64>::from_json(json).unwrap();
        assert_eq!((p.frame_count(), p.joint_count(), p.dims()), (2, 2, 2));
        assert_eq!(p.joint(1, 1), &[1.0, 2.0]);
        assert_eq!(PoseSequence::<f64>::from_json(&p.to_json()).unwrap(), p);

        let bad = r#"{"fps": 30, "joints": 3, "dims": 2, "frames": [[[0,0],[1,1]]]}"#;
        assert!(PoseSequence::<f64>::from_json(bad).is_err());

        let csv = "j0_x,j0_y,j0_z\n0,0,0\n1,0,0\n";
        let p = PoseSequence::<f64>::from_csv(csv, 25.0).unwrap();
        assert_eq!((p.frame_count(), p.dims()), (2, 3));
        assert_eq!(PoseSequence::<f64>::from_csv(&p.to_csv(), 25.0).unwrap(), p);
        assert!(PoseSequence::<f64>::from_csv("a,b\n1,2\n", 25.0).is_err());
    }
}
