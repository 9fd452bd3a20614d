//! Simulation and analysis toolkit for a two-node mixed-species trapped-ion network.
//!
//! The crate is layered bottom-up:
//!
//! - [`qcore`]: density matrices, channels, superoperators, Haar sampling, seeded streams.
//! - [`device`]: calibrated noise model of one module (SPAM, gates, storage).
//! - [`netsim`]: heralded entanglement, error-detected transfer, experiment circuits, rates.
//! - [`tomo`]: full (maximum-likelihood) and partial (population/parity) state tomography.
//! - [`proc`]: process tomography and state-transfer metrics.
//! - [`fitstats`]: fringe and decay fits, bootstrap.
//! - [`config`]: calibration file loading and validation.

pub mod config;
pub mod device;
pub mod fitstats;
pub mod netsim;
pub mod proc;
pub mod qcore;
pub mod tomo;

pub use qcore::{DensityMatrix, Node, PureState, QuantumChannel, QubitLabel, QubitRole, RngStream, Superoperator};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unphysical: {0}")]
    NotPhysical(String),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("qubit {0} is not in the register")]
    MissingQubit(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("record format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
