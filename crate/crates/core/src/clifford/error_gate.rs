use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CliffordTableau, PscForm};
use crate::pauli::PauliString;

/// Gates of the closed error set. All payloads are full register width.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorGate {
    Pauli(PauliString),
    Psc(PscForm),
    /// `C_c(Q)` with `Q` Hermitian, +signed, and not acting on `control`.
    ControlledPauli { control: usize, target: PauliString },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    Pauli,
    Psc,
    ControlledPauli,
}

impl ErrorGate {
    pub fn n(&self) -> usize {
        match self {
            ErrorGate::Pauli(p) => p.n(),
            ErrorGate::Psc(f) => f.n(),
            ErrorGate::ControlledPauli { target, .. } => target.n(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            ErrorGate::Pauli(_) => ErrorKind::Pauli,
            ErrorGate::Psc(_) => ErrorKind::Psc,
            ErrorGate::ControlledPauli { .. } => ErrorKind::ControlledPauli,
        }
    }

    pub fn support(&self) -> Vec<usize> {
        match self {
            ErrorGate::Pauli(p) => p.support(),
            ErrorGate::Psc(f) => f.support(),
            ErrorGate::ControlledPauli { control, target } => {
                let mut s = target.support();
                s.push(*control);
                s.sort_unstable();
                s
            }
        }
    }

    /// Trivial up to global phase.
    pub fn is_trivial(&self) -> bool {
        match self {
            ErrorGate::Pauli(p) => p.is_identity(),
            ErrorGate::Psc(f) => f.q_set().is_empty() && f.pauli_p().is_identity(),
            ErrorGate::ControlledPauli { target, .. } => target.is_identity(),
        }
    }

    /// `G P G†` with exact phase.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        match self {
            ErrorGate::Pauli(g) => {
                if g.commutes_with(p) {
                    p.clone()
                } else {
                    p.negated()
                }
            }
            ErrorGate::Psc(f) => f.conjugate(p),
            ErrorGate::ControlledPauli { control, target } => conjugate_controlled(*control, target, p),
        }
    }

    pub fn to_tableau(&self) -> CliffordTableau {
        let n = self.n();
        let xs = (0..n).map(|i| self.conjugate(&PauliString::single(n, i, 'X'))).collect();
        let zs = (0..n).map(|i| self.conjugate(&PauliString::single(n, i, 'Z'))).collect();
        CliffordTableau::from_images(xs, zs).expect("error gates are Clifford")
    }

    /// Equivalent PSC form (controlled Paulis included); `None` for Paulis.
    pub fn as_psc_form(&self) -> Option<PscForm> {
        match self {
            ErrorGate::Pauli(_) => None,
            ErrorGate::Psc(f) => Some(f.clone()),
            ErrorGate::ControlledPauli { control, target } => Some(PscForm::controlled_pauli(*control, target)),
        }
    }

    /// Gate-cost unit used in the scaling experiment.
    pub fn cost(&self) -> usize {
        match self {
            ErrorGate::Pauli(p) => p.weight(),
            ErrorGate::ControlledPauli { target, .. } => target.weight(),
            ErrorGate::Psc(f) => {
                if f.support().len() <= 2 {
                    1
                } else {
                    f.q_set().len().max(1)
                }
            }
        }
    }
}

pub(crate) fn conjugate_controlled(control: usize, q: &PauliString, p: &PauliString) -> PauliString {
    let n = p.n();
    let mut rest = p.clone();
    rest.set_x(control, false);
    rest.set_z(control, false);
    rest.set_phase_exp(0);
    let mut out = PauliString::identity(n);
    out.set_phase_exp(p.phase_exp());
    if p.x_bit(control) {
        let mut xq = q.clone();
        xq.set_x(control, true);
        out.mul_assign_right(&xq);
    }
    if p.z_bit(control) {
        out.mul_assign_right(&PauliString::single(n, control, 'Z'));
    }
    if !rest.commutes_with(q) {
        out.mul_assign_right(&PauliString::single(n, control, 'Z'));
    }
    out.mul_assign_right(&rest);
    out
}

/// `C_c(q)` for any phased Pauli `q` without X/Y on the control, as closed-set gates.
///
/// `C_c(i^k L) = diag(1, i^k)_c · C_c(L)` and `C_c(Z_c L') = Z_c · C_c(L')`.
pub fn controlled_normalized(control: usize, q: &PauliString) -> Vec<ErrorGate> {
    assert!(!q.x_bit(control), "controlled Pauli with X on its own control");
    let n = q.n();
    let mut k = q.text_phase() as u32;
    let mut letters = q.unsigned();
    if letters.z_bit(control) {
        letters.set_z(control, false);
        letters = letters.unsigned();
        k += 2;
    }
    let mut out = Vec::with_capacity(2);
    match k % 4 {
        1 => out.push(ErrorGate::Psc(PscForm::phase_s().embed(n, &[control]))),
        2 => out.push(ErrorGate::Pauli(PauliString::single(n, control, 'Z'))),
        3 => out.push(ErrorGate::Psc(PscForm::phase_sdg().embed(n, &[control]))),
        _ => {}
    }
    if !letters.is_identity() {
        out.push(ErrorGate::ControlledPauli { control, target: letters });
    }
    out
}

impl fmt::Debug for ErrorGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorGate::Pauli(p) => write!(f, "P {p}"),
            ErrorGate::Psc(form) => write!(f, "PSC {form}"),
            ErrorGate::ControlledPauli { control, target } => write!(f, "CP {control} {target}"),
        }
    }
}
