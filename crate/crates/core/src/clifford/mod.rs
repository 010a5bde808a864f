//! Clifford tableaux, Pauli-square-root Cliffords and the closed error-gate set.

mod error_gate;
mod psc;
mod tableau;

pub use error_gate::{controlled_normalized, ErrorGate, ErrorKind};
pub use psc::{
    canonicalize_psc, controlled_in_third_level, is_psc, is_psc_tableau, psc_commutation_class, CommutationClass,
    LocalPsc, PscForm,
};
pub use tableau::CliffordTableau;

pub(crate) use psc::dense_tableau;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliffordError {
    #[error("dimension mismatch")]
    Dimension,
    #[error("input is not unitary")]
    NonUnitary,
    #[error("not a Pauli-square-root Clifford: {0}")]
    NotPsc(&'static str),
    #[error("support of {0} qubits exceeds the dense limit")]
    SupportTooLarge(usize),
    #[error("invalid form: {0}")]
    Invalid(String),
}

/// Product of the sequence as one tableau (first gate acts first).
pub fn flatten_to_tableau(n: usize, gates: &[ErrorGate]) -> CliffordTableau {
    let mut t = CliffordTableau::identity(n);
    for g in gates {
        t.then_map(|p| g.conjugate(p));
    }
    t
}
