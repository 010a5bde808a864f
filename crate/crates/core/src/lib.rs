//! Simulation of logical magic-state preparation under circuit-level Pauli noise.
//!
//! Sampled errors are pushed through the protocol to one Clifford error at the end
//! of the circuit; fidelities then follow from stabilizer simulations.

pub mod chform;
pub mod circuit;
pub mod estimators;
pub mod clifford;
pub mod noise;
pub mod oracle;
pub mod pauli;
pub mod propagation;

pub use circuit::{CodeSpec, ProtocolCircuit};
pub use clifford::{CliffordTableau, ErrorGate, PscForm};
pub use noise::{ErrorConfig, NoiseModel};
pub use pauli::PauliString;
