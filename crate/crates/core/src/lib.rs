//! Audio-to-score alignment built around a learned frame-similarity matrix.
//!
//! The pipeline renders the symbolic score to audio, turns both recordings
//! into spectrograms, embeds fixed-size spectrogram patches with a Siamese
//! convolutional network, fills a score × performance dissimilarity matrix
//! with embedding distances and finally extracts a warping path with exact
//! DTW or FastDTW.
//!
//! Modules map onto the stages:
//!
//! * [`score`] – Standard MIDI File parsing/writing and the note-event model.
//! * [`synth`] – deterministic additive synthesis and PCM16 WAV I/O.
//! * [`signal`] – FFT, STFT, constant-Q transform and patch extraction.
//! * [`net`] – the Siamese CNN, contrastive loss, backprop and training.
//! * [`simmatrix`] – distance and binary similarity matrices.
//! * [`dtw`] – exact DTW, FastDTW and path-to-time mapping.
//! * [`dataeval`] – synthetic aligned corpora and accuracy scoring.
//! * [`pipeline`] – glue used by the command-line tool.
//!
//! Data-parallel loops go through [`Exec`]; with the `parallel` feature
//! (default) they run on rayon, otherwise sequentially. Both paths produce
//! bit-identical results.

pub mod dataeval;
pub mod dtw;
mod error;
mod exec;
pub mod net;
pub mod pgm;
pub mod pipeline;
pub mod rng;
pub mod score;
pub mod signal;
pub mod simmatrix;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Exec;
