//! Time-frequency analysis: FFT, STFT, constant-Q transform and the
//! normalized patches fed to the network.

mod cqt;
mod fft;
mod patch;
mod stft;

pub use cqt::{cqt, cqt_center_frequencies, cqt_with, CqtParams, CQT_FMIN_C1};
pub use fft::{dft_naive, fft, fft_in_place};
pub use patch::{extract_patch, Patch, DEFAULT_CONTEXT};
pub use stft::{stft, stft_with, StftParams};

use crate::synth::AudioBuffer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("FFT length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid hop size {0}")]
    Hop(usize),
    #[error("CQT bin {bin} at {freq:.3} Hz is not below the Nyquist frequency {nyquist} Hz")]
    AboveNyquist { bin: usize, freq: f64, nyquist: f64 },
    #[error("invalid CQT parameters: {0}")]
    CqtParams(&'static str),
}

/// Log-magnitude compression applied to every spectrogram entry.
pub const LOG_GAMMA: f64 = 100.0;

pub(crate) fn log_compress(mag: f64) -> f64 {
    (1.0 + LOG_GAMMA * mag).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Stft,
    Cqt,
}

impl Transform {
    pub const ALL: [Transform; 2] = [Transform::Stft, Transform::Cqt];

    pub fn name(self) -> &'static str {
        match self {
            Transform::Stft => "stft",
            Transform::Cqt => "cqt",
        }
    }
}

impl std::fmt::Display for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stft" => Ok(Transform::Stft),
            "cqt" => Ok(Transform::Cqt),
            other => Err(format!("unknown transform '{other}' (expected stft or cqt)")),
        }
    }
}

/// Frames × bins matrix of log-magnitudes, row-major by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub data: Vec<f64>,
    pub frames: usize,
    pub bins: usize,
    pub hop: usize,
    pub sample_rate: u32,
    pub kind: Transform,
    pub bin_freqs: Vec<f64>,
}

impl Spectrogram {
    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.bins..(t + 1) * self.bins]
    }

    pub fn at(&self, t: usize, k: usize) -> f64 {
        self.data[t * self.bins + k]
    }

    /// Seconds per frame step.
    pub fn frame_period(&self) -> f64 {
        self.hop as f64 / f64::from(self.sample_rate)
    }

    pub fn argmax_bin(&self, t: usize) -> usize {
        let row = self.frame(t);
        let mut best = 0;
        for (k, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = k;
            }
        }
        best
    }

    /// Whether two spectrograms can be compared frame by frame.
    pub fn compatible(&self, other: &Spectrogram) -> bool {
        self.kind == other.kind
            && self.hop == other.hop
            && self.sample_rate == other.sample_rate
            && self.bins == other.bins
    }
}

/// Computes the spectrogram used by the alignment pipeline for `kind`,
/// with default parameters.
pub fn analyze(audio: &AudioBuffer, kind: Transform) -> Result<Spectrogram, SignalError> {
    match kind {
        Transform::Stft => stft(audio, StftParams::default().frame_len, StftParams::default().hop),
        Transform::Cqt => cqt_with(audio, &CqtParams::default(), crate::Exec::default()),
    }
}
