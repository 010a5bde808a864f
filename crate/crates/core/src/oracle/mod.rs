//! Dense state-vector and density-matrix reference simulators.

mod dense;
mod density;
pub mod matrix;
mod protocol;

pub use dense::{unitary_equiv_up_to_phase, unitary_residual, unitary_residual_probe, DenseState, MAX_QUBITS};
pub use density::{pauli_rank_bruteforce, DenseChannelState, MAX_DENSITY_QUBITS};
pub use protocol::{apply_circuit, apply_gate, input_state, outcome_distribution, run_protocol_dense, DenseRun};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} qubits exceed the dense limit")]
    TooLarge(usize),
    #[error("amplitude vector length is not a power of two")]
    Shape,
    #[error("error config has {0} entries, circuit has {1} locations")]
    ConfigLength(usize, usize),
    #[error("{0}")]
    Input(String),
}
