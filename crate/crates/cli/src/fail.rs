use std::fmt;

use harmo_core::HarmoError;

pub const INPUT: u8 = 2;
pub const DEGENERATE: u8 = 3;
pub const CONFIG: u8 = 4;

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<HarmoError> for CliError {
    fn from(e: HarmoError) -> Self {
        let code = match e {
            HarmoError::Config(_) => CONFIG,
            HarmoError::EmptyAudioBeats | HarmoError::TooFewBeats { .. } => DEGENERATE,
            _ => INPUT,
        };
        Self::new(code, e.to_string())
    }
}
