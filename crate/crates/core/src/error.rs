use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarmoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot read wav file {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("unsupported audio encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("audio clip is empty")]
    EmptyAudio,

    #[error("audio clip too short: {samples} samples, need at least {needed}")]
    AudioTooShort { samples: usize, needed: usize },

    #[error("invalid pose data: {0}")]
    InvalidPose(String),

    #[error("pose sequence too short: {frames} frames, need at least {needed}")]
    PoseTooShort { frames: usize, needed: usize },

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("no audio beats to evaluate")]
    EmptyAudioBeats,

    #[error("need at least {needed} beats for one {meter} meter, got {got}")]
    TooFewBeats {
        meter: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl HarmoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarmoError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = HarmoError> = std::result::Result<T, E>;
