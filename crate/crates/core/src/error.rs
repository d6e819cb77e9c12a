use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::lattice::WaveVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("reference axis is parallel to wavevector {0}")]
    DegenerateAxis(WaveVector),
    #[error("helical basis requested for the zero wavevector")]
    ZeroWaveVector,
    #[error("reference axis must be a finite nonzero vector")]
    InvalidAxis,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no retained wavevector with {lo} <= |k| <= {hi}")]
    EmptyBand { lo: f64, hi: f64 },
    #[error("triadic oracle limited to {budget} modes, state has {modes}")]
    GridTooLarge { modes: usize, budget: usize },
    #[error("forcing is not supported on the state's mode set: {0}")]
    ForcingOutsideTruncation(String),
    #[error("invalid triad: {0}")]
    InvalidTriad(String),
    #[error("non-finite amplitude at step {step} (t = {time})")]
    NonFinite { step: u64, time: f64, last_finite: Box<crate::field::SpectralState> },
    #[error("a-priori bound requires positive viscosity")]
    ViscosityZero,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Checkpoint(#[from] crate::checkpoint::CheckpointError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateAxis(_) => "DegenerateAxis",
            Error::ZeroWaveVector => "ZeroWaveVector",
            Error::InvalidAxis => "InvalidAxis",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::EmptyBand { .. } => "EmptyBand",
            Error::GridTooLarge { .. } => "GridTooLarge",
            Error::ForcingOutsideTruncation(_) => "ForcingOutsideTruncation",
            Error::InvalidTriad(_) => "InvalidTriad",
            Error::NonFinite { .. } => "NonFinite",
            Error::ViscosityZero => "ViscosityZero",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Config(e) => e.kind(),
            Error::Checkpoint(e) => e.kind(),
            Error::Io { .. } => "Io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
