use crate::dataeval::DataError;
use crate::dtw::DtwError;
use crate::net::NetError;
use crate::score::SmfError;
use crate::signal::{SignalError, Transform};
use crate::simmatrix::SimError;
use crate::synth::WavError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Smf(#[from] SmfError),
    #[error(transparent)]
    Wav(#[from] WavError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Dtw(#[from] DtwError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("no model for transform {0}")]
    MissingModel(Transform),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
