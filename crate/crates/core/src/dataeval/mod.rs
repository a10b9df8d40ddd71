//! Synthetic aligned corpora with exact ground truth, and alignment
//! accuracy scoring.

mod accuracy;
mod corpus;
mod generate;
mod tempo;

pub use accuracy::{accuracy, accuracy_timemap, DEFAULT_TOLERANCE};
pub use corpus::{gt_from_csv, gt_to_csv, list_pieces, read_piece, write_pair, Piece, GT_HEADER};
pub use generate::{
    add_white_noise, make_pair, make_pair_with, perturbed_timbre, random_score, Difficulty, PairMeta, PairOptions,
    SyntheticPair,
};
pub use tempo::{GroundTruth, TempoCurve};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("ground truth is empty or does not overlap the path")]
    EmptyGroundTruth,
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("invalid tempo curve: {0}")]
    TempoCurve(&'static str),
    #[error("invalid generator option: {0}")]
    Options(String),
    #[error("malformed {file}: {reason}")]
    Malformed { file: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Smf {
        path: String,
        #[source]
        source: crate::score::SmfError,
    },
    #[error("{path}: {source}")]
    Wav {
        path: String,
        #[source]
        source: crate::synth::WavError,
    },
}

impl DataError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
