//! Fidelity and acceptance estimators over sampled circuit-level noise.

mod decomp;
mod harness;
mod pauli_rank;
mod protocol;
mod stab_rank;
mod stabsim;
mod statevector;

pub use decomp::{builtin_decomposition, PauliRankDecomposition, ProjectorDecomposition};
pub use harness::{estimate, run_shots, Accum, Method, RunOptions, RunSummary, ShotEstimator, ShotValue, CHUNK, CSV_HEADER};
pub use pauli_rank::{acceptance_rate, estimate_fidelity_pauli_rank, PauliRankEstimator};
pub use protocol::{h_amplitudes, t_amplitudes, LogicalAmplitudes, MagicProtocol, BUILTIN_PROTOCOLS};
pub use stab_rank::{estimate_fidelity_stab_rank, StabRankEstimator};
pub use stabsim::StabilizerGroup;
pub use statevector::{estimate_fidelity_statevector, DenseShot, StatevectorEstimator};

use thiserror::Error;

use crate::chform::ChError;
use crate::noise::NoiseError;
use crate::oracle::OracleError;
use crate::propagation::PropagationError;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("unknown name {0}")]
    UnknownName(String),
    #[error("bad decomposition: {0}")]
    Decomposition(String),
    #[error("protocol mismatch: {0}")]
    Mismatch(String),
    #[error("shots must be at least 1")]
    NoShots,
    #[error("shot {shot}: {source}")]
    Propagation { shot: u64, source: PropagationError },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Ch(#[from] ChError),
    #[error("worker pool: {0}")]
    Pool(String),
}
