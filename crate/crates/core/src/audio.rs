//! Audio decoding, mel-spectrogram onset strength and audio beat picking.

use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::beats::BeatSequence;
use crate::error::{HarmoError, Result};
use crate::peaks::strict_local_maxima;
use crate::Scalar;

/// Mono audio at its native sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T = f64> {
    samples: Vec<T>,
    sample_rate: u32,
}

impl<T: Scalar> AudioClip<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(HarmoError::Config("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(HarmoError::EmptyAudio);
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// First `seconds` of the clip (the whole clip if it is shorter).
    pub fn truncated(&self, seconds: f64) -> Self {
        let n = ((seconds * self.sample_rate as f64).round() as usize)
            .clamp(1, self.samples.len());
        Self {
            samples: self.samples[..n].to_vec(),
            sample_rate: self.sample_rate,
        }
    }

    /// Writes a mono 32-bit float WAV file.
    pub fn write_wav(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let wav_err = |source| HarmoError::Wav {
            path: path.to_path_buf(),
            source,
        };
        let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
        for &s in &self.samples {
            writer
                .write_sample(s.to_f32().unwrap_or(0.0))
                .map_err(wav_err)?;
        }
        writer.finalize().map_err(wav_err)
    }
}

/// Reads a PCM WAV file (16-bit integer or 32-bit float, any channel count)
/// and averages channels down to mono.
pub fn load_audio<T: Scalar>(path: impl AsRef<Path>) -> Result<AudioClip<T>> {
    let path = path.as_ref();
    let wav_err = |source| HarmoError::Wav {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(|e| HarmoError::io(path, e))?;
    let mut reader = hound::WavReader::new(std::io::BufReader::new(file)).map_err(wav_err)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(HarmoError::UnsupportedEncoding("zero channels".into()));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (fmt, bits) => {
            return Err(HarmoError::UnsupportedEncoding(format!(
                "{bits}-bit {fmt:?} (expected 16-bit int or 32-bit float)"
            )))
        }
    };
    let mono: Vec<T> = interleaved
        .chunks_exact(channels)
        .map(|frame| T::lit(frame.iter().sum::<f64>() / channels as f64))
        .collect();
    AudioClip::new(mono, spec.sample_rate)
}

/// Short-time Fourier transform and mel filterbank parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StftConfig {
    pub window_size: usize,
    pub hop_size: usize,
    pub mel_bands: usize,
    pub fmin: f64,
    /// Upper mel edge in Hz; `None` means Nyquist.
    pub fmax: Option<f64>,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_size: 2048,
            hop_size: 512,
            mel_bands: 128,
            fmin: 30.0,
            fmax: None,
        }
    }
}

impl StftConfig {
    /// Checks the parameters against a sample rate and returns the effective `fmax`.
    pub fn validate(&self, sample_rate: u32) -> Result<f64> {
        let nyquist = sample_rate as f64 / 2.0;
        if self.hop_size == 0 || self.hop_size > self.window_size {
            return Err(HarmoError::Config(format!(
                "hop size {} must be in 1..={}",
                self.hop_size, self.window_size
            )));
        }
        if self.mel_bands == 0 {
            return Err(HarmoError::Config("mel_bands must be positive".into()));
        }
        let fmax = self.fmax.unwrap_or(nyquist);
        if !(self.fmin >= 0.0 && self.fmin < fmax && fmax <= nyquist) {
            return Err(HarmoError::Config(format!(
                "need 0 <= fmin < fmax <= {nyquist} Hz, got fmin {} fmax {fmax}",
                self.fmin
            )));
        }
        Ok(fmax)
    }
}

/// Onset strength per STFT frame.
#[derive(Debug, Clone, PartialEq)]
pub struct OnsetEnvelope<T = f64> {
    values: Vec<T>,
    frame_times: Vec<T>,
}

impl<T: Scalar> OnsetEnvelope<T> {
    /// Builds an envelope from raw parts; values must be non-negative and
    /// times strictly increasing.
    pub fn new(values: Vec<T>, frame_times: Vec<T>) -> Result<Self> {
        if values.len() != frame_times.len() {
            return Err(HarmoError::LengthMismatch {
                what: "onset values vs frame times",
                left: values.len(),
                right: frame_times.len(),
            });
        }
        if frame_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarmoError::Parse("frame times must increase".into()));
        }
        if values.iter().any(|v| !(*v >= T::zero())) {
            return Err(HarmoError::Parse("onset values must be >= 0".into()));
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
}

fn hz_to_mel(hz: f64) -> f64 {
    // Slaney scale: linear below 1 kHz, logarithmic above.
    const F_SP: f64 = 200.0 / 3.0;
    const MIN_LOG_HZ: f64 = 1000.0;
    let min_log_mel = MIN_LOG_HZ / F_SP;
    let logstep = 6.4f64.ln() / 27.0;
    if hz >= MIN_LOG_HZ {
        min_log_mel + (hz / MIN_LOG_HZ).ln() / logstep
    } else {
        hz / F_SP
    }
}

fn mel_to_hz(mel: f64) -> f64 {
    const F_SP: f64 = 200.0 / 3.0;
    const MIN_LOG_HZ: f64 = 1000.0;
    let min_log_mel = MIN_LOG_HZ / F_SP;
    let logstep = 6.4f64.ln() / 27.0;
    if mel >= min_log_mel {
        MIN_LOG_HZ * (logstep * (mel - min_log_mel)).exp()
    } else {
        mel * F_SP
    }
}

/// One triangular mel filter, stored as a dense run of FFT-bin weights.
#[derive(Debug, Clone)]
struct MelBand<T> {
    first_bin: usize,
    weights: Vec<T>,
}

/// Triangular, area-normalized mel filterbank over `n_fft / 2 + 1` bins.
#[derive(Debug, Clone)]
pub struct MelFilterbank<T = f64> {
    bands: Vec<MelBand<T>>,
    n_bins: usize,
}

impl<T: Scalar> MelFilterbank<T> {
    pub fn new(sample_rate: u32, n_fft: usize, n_mels: usize, fmin: f64, fmax: f64) -> Self {
        let n_bins = n_fft / 2 + 1;
        let bin_hz = |k: usize| k as f64 * sample_rate as f64 / n_fft as f64;
        let (mel_lo, mel_hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        let bands = edges
            .windows(3)
            .map(|e| {
                let (lo, center, hi) = (e[0], e[1], e[2]);
                let norm = 2.0 / (hi - lo);
                let mut first_bin = None;
                let mut weights = Vec::new();
                for k in 0..n_bins {
                    let f = bin_hz(k);
                    let w = ((f - lo) / (center - lo)).min((hi - f) / (hi - center));
                    if w > 0.0 {
                        first_bin.get_or_insert(k);
                        weights.push(T::lit(w * norm));
                    } else if first_bin.is_some() {
                        break;
                    }
                }
                MelBand {
                    first_bin: first_bin.unwrap_or(0),
                    weights,
                }
            })
            .collect();
        Self { bands, n_bins }
    }

    pub fn n_mels(&self) -> usize {
        self.bands.len()
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Applies the filterbank to one magnitude spectrum.
    pub fn apply(&self, spectrum: &[T], out: &mut [T]) {
        debug_assert_eq!(spectrum.len(), self.n_bins);
        for (band, o) in self.bands.iter().zip(out.iter_mut()) {
            *o = band
                .weights
                .iter()
                .zip(&spectrum[band.first_bin..])
                .map(|(&w, &m)| w * m)
                .sum();
        }
    }
}

/// Number of centered frames for a clip of `len` samples.
pub fn frame_count(len: usize, hop: usize) -> usize {
    1 + len / hop
}

/// Log-compressed mel magnitude spectrogram, one `Vec` of `mel_bands` values
/// per frame. Frames are centered on `frame_index * hop_size` with zero padding
/// of half a window at both ends.
pub fn log_mel_spectrogram<T: Scalar>(clip: &AudioClip<T>, cfg: &StftConfig) -> Result<Vec<Vec<T>>> {
    let fmax = cfg.validate(clip.sample_rate())?;
    let n = cfg.window_size;
    let samples = clip.samples();
    if samples.len() < n {
        return Err(HarmoError::AudioTooShort {
            samples: samples.len(),
            needed: n,
        });
    }
    let half = n / 2;
    let window: Vec<T> = (0..n)
        .map(|i| {
            let phase = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            T::lit(0.5 - 0.5 * phase.cos())
        })
        .collect();
    let bank = MelFilterbank::<T>::new(clip.sample_rate(), n, cfg.mel_bands, cfg.fmin, fmax);
    let fft = FftPlanner::<T>::new().plan_fft_forward(n);

    let n_frames = frame_count(samples.len(), cfg.hop_size);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    let mut mags = vec![T::zero(); bank.n_bins()];
    let mut out = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let center = f * cfg.hop_size;
        for (i, slot) in buf.iter_mut().enumerate() {
            let idx = (center + i).checked_sub(half);
            let s = idx.and_then(|k| samples.get(k)).copied().unwrap_or_else(T::zero);
            *slot = Complex::new(s * window[i], T::zero());
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (m, c) in mags.iter_mut().zip(&buf) {
            *m = c.norm();
        }
        let mut mel = vec![T::zero(); bank.n_mels()];
        bank.apply(&mags, &mut mel);
        for v in mel.iter_mut() {
            *v = v.ln_1p();
        }
        out.push(mel);
    }
    Ok(out)
}

/// Positive spectral flux of the log-mel spectrogram:
/// `O(t) = sum_f max(0, logmel(f, t) - logmel(f, t - 1))`, with `O(0) = 0`.
pub fn onset_envelope<T: Scalar>(clip: &AudioClip<T>, cfg: &StftConfig) -> Result<OnsetEnvelope<T>> {
    let spec = log_mel_spectrogram(clip, cfg)?;
    let mut values = Vec::with_capacity(spec.len());
    values.push(T::zero());
    for pair in spec.windows(2) {
        let flux = pair[1]
            .iter()
            .zip(&pair[0])
            .map(|(&cur, &prev)| (cur - prev).max(T::zero()))
            .sum();
        values.push(flux);
    }
    let sr = clip.sample_rate() as f64;
    let frame_times = (0..values.len())
        .map(|i| T::lit((i * cfg.hop_size) as f64 / sr))
        .collect();
    Ok(OnsetEnvelope {
        values,
        frame_times,
    })
}

/// Audio beats at strict local maxima of the onset envelope; saliency is the
/// envelope value at the peak.
pub fn detect_audio_beats<T: Scalar>(env: &OnsetEnvelope<T>) -> BeatSequence<T> {
    let (times, saliency) = strict_local_maxima(env.values())
        .into_iter()
        .map(|i| (env.frame_times[i], env.values[i]))
        .unzip();
    BeatSequence::from_parts_unchecked(times, saliency)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mel_scale_round_trip() {
        for hz in [0.0, 30.0, 440.0, 999.0, 1000.0, 4000.0, 11025.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-6);
        }
    }

    #[test]
    fn filterbank_bands_are_nonempty() {
        let bank = MelFilterbank::<f64>::new(22050, 2048, 128, 30.0, 11025.0);
        assert_eq!(bank.n_mels(), 128);
        assert!(bank.bands.iter().all(|b| !b.weights.is_empty()));
    }

    #[test]
    fn detect_beats_hand_example() {
        let env = OnsetEnvelope::new(
            vec![0.0, 1.0, 0.0, 2.0, 0.0],
            vec![0.0, 0.1, 0.2, 0.3, 0.4],
        )
        .unwrap();
        let beats = detect_audio_beats(&env);
        assert_eq!(beats.times(), &[0.1, 0.3]);
        assert_eq!(beats.saliency(), &[1.0, 2.0]);
    }

    #[test]
    fn monotone_envelope_has_no_beats() {
        let env = OnsetEnvelope::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.1, 0.2, 0.3]).unwrap();
        assert!(detect_audio_beats(&env).is_empty());
    }

    #[test]
    fn config_validation() {
        let cfg = StftConfig::default();
        assert_eq!(cfg.validate(22050).unwrap(), 11025.0);
        assert!(StftConfig { hop_size: 0, ..cfg.clone() }.validate(22050).is_err());
        assert!(StftConfig { hop_size: 4096, ..cfg.clone() }.validate(22050).is_err());
        assert!(StftConfig { fmax: Some(20000.0), ..cfg.clone() }.validate(22050).is_err());
        assert!(StftConfig { fmin: 12000.0, ..cfg }.validate(22050).is_err());
    }

    #[test]
    fn too_short_clip_is_rejected() {
        let clip = AudioClip::new(vec![0.0f64; 1000], 22050).unwrap();
        assert!(matches!(
            onset_envelope(&clip, &StftConfig::default()),
            Err(HarmoError::AudioTooShort { .. })
        ));
    }

    #[test]
    fn silence_gives_zero_envelope() {
        let clip = AudioClip::new(vec![0.0f64; 22050], 22050).unwrap();
        let env = onset_envelope(&clip, &StftConfig::default()).unwrap();
        assert_eq!(env.len(), 1 + 22050 / 512);
        assert!(env.values().iter().all(|&v| v == 0.0));
        assert!(detect_audio_beats(&env).is_empty());
    }
}
