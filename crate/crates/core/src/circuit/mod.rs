//! Gate-level protocol IR with enumerated error locations and deferred measurements.

mod builders;
mod code;
mod dsl;
mod steane;

pub use builders::{
    build_422_toy, build_msd_protocol, build_shor_style_protocol, build_standard_protocol, CircuitBuilder,
    Round, ShorOptions,
};
pub use code::{CodeError, CodeSpec};
pub use dsl::{parse_circuit, write_circuit, DslError};
pub use steane::{build_steane_h, steane_code, STEANE_CONTROL, STEANE_FLAG};

use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordTableau, ErrorGate, PscForm};
use crate::pauli::PauliString;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitState {
    Zero,
    Plus,
    MagicH,
    MagicT,
    /// Holds part of a noiseless logical input supplied by the caller.
    Logical,
}

impl InitState {
    pub fn tag(&self) -> &'static str {
        match self {
            InitState::Zero => "zero",
            InitState::Plus => "plus",
            InitState::MagicH => "magic_h",
            InitState::MagicT => "magic_t",
            InitState::Logical => "logical",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Some(match s {
            "zero" => InitState::Zero,
            "plus" => InitState::Plus,
            "magic_h" => InitState::MagicH,
            "magic_t" => InitState::MagicT,
            "logical" => InitState::Logical,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    CX(usize, usize),
    CZ(usize, usize),
    /// `C_c(Q)` with `Q` Hermitian and full width.
    ControlledPauli { control: usize, target: PauliString },
    /// `C_c(V)` with `V` a PSC given locally on `targets`.
    ControlledPsc { control: usize, targets: Vec<usize>, form: PscForm },
}

impl GateKind {
    pub fn ch(control: usize, target: usize) -> Self {
        GateKind::ControlledPsc { control, targets: vec![target], form: PscForm::hadamard() }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            GateKind::H(q) | GateKind::S(q) | GateKind::Sdg(q) | GateKind::X(q) | GateKind::Y(q) | GateKind::Z(q) => {
                vec![*q]
            }
            GateKind::CX(a, b) | GateKind::CZ(a, b) => vec![*a, *b],
            GateKind::ControlledPauli { control, target } => {
                let mut v = vec![*control];
                v.extend(target.support());
                v
            }
            GateKind::ControlledPsc { control, targets, .. } => {
                let mut v = vec![*control];
                v.extend(targets.iter().copied());
                v
            }
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, GateKind::ControlledPsc { .. })
    }

    /// `G P G†` for Clifford gates; `None` for controlled PSCs.
    pub fn conjugate_pauli(&self, p: &PauliString) -> Option<PauliString> {
        let mut out = p.clone();
        match self {
            GateKind::H(q) => {
                let (x, z) = (p.x_bit(*q), p.z_bit(*q));
                out.set_x(*q, z);
                out.set_z(*q, x);
                if x && z {
                    out.add_phase(2);
                }
            }
            GateKind::S(q) => {
                let (x, z) = (p.x_bit(*q), p.z_bit(*q));
                if x {
                    out.set_z(*q, !z);
                    out.add_phase(1);
                }
            }
            GateKind::Sdg(q) => {
                let (x, z) = (p.x_bit(*q), p.z_bit(*q));
                if x {
                    out.set_z(*q, !z);
                    out.add_phase(3);
                }
            }
            GateKind::X(q) => {
                if p.z_bit(*q) {
                    out.add_phase(2);
                }
            }
            GateKind::Z(q) => {
                if p.x_bit(*q) {
                    out.add_phase(2);
                }
            }
            GateKind::Y(q) => {
                if p.x_bit(*q) != p.z_bit(*q) {
                    out.add_phase(2);
                }
            }
            GateKind::CX(c, t) => {
                if p.x_bit(*c) {
                    out.set_x(*t, !p.x_bit(*t));
                }
                if p.z_bit(*t) {
                    out.set_z(*c, !p.z_bit(*c));
                }
            }
            GateKind::CZ(a, b) => {
                let (xa, xb) = (p.x_bit(*a), p.x_bit(*b));
                if xa {
                    out.set_z(*b, !p.z_bit(*b));
                }
                if xb {
                    out.set_z(*a, !out.z_bit(*a));
                }
                if xa && xb {
                    out.add_phase(2);
                }
            }
            GateKind::ControlledPauli { control, target } => {
                return Some(crate::clifford::ErrorGate::ControlledPauli { control: *control, target: target.clone() }.conjugate(p));
            }
            GateKind::ControlledPsc { .. } => return None,
        }
        Some(out)
    }

    pub fn to_tableau(&self, n: usize) -> Option<CliffordTableau> {
        if !self.is_clifford() {
            return None;
        }
        let mut t = CliffordTableau::identity(n);
        t.then_map(|p| self.conjugate_pauli(p).unwrap());
        Some(t)
    }

    /// The same unitary as a closed-set error gate (Clifford gates only).
    pub fn as_error_gate(&self, n: usize) -> Option<ErrorGate> {
        let one = |q: usize, f: PscForm| ErrorGate::Psc(f.embed(n, &[q]));
        Some(match self {
            GateKind::H(q) => one(*q, PscForm::hadamard()),
            GateKind::S(q) => one(*q, PscForm::phase_s()),
            GateKind::Sdg(q) => one(*q, PscForm::phase_sdg()),
            GateKind::X(q) => ErrorGate::Pauli(PauliString::single(n, *q, 'X')),
            GateKind::Y(q) => ErrorGate::Pauli(PauliString::single(n, *q, 'Y')),
            GateKind::Z(q) => ErrorGate::Pauli(PauliString::single(n, *q, 'Z')),
            GateKind::CX(c, t) => ErrorGate::ControlledPauli { control: *c, target: PauliString::single(n, *t, 'X') },
            GateKind::CZ(a, b) => ErrorGate::ControlledPauli { control: *a, target: PauliString::single(n, *b, 'Z') },
            GateKind::ControlledPauli { control, target } => {
                ErrorGate::ControlledPauli { control: *control, target: target.clone() }
            }
            GateKind::ControlledPsc { .. } => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolGate {
    pub kind: GateKind,
    pub time_step: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Init0,
    InitPlus,
    InitMagicH,
    InitMagicT,
    Depol1,
    Depol2,
    Idle(u32),
    MeasX,
    MeasZ,
    /// Placeholder carrying no noise of its own (frame positions fed by earlier noise).
    Frame,
}

impl Channel {
    pub fn tag(&self) -> String {
        match self {
            Channel::Init0 => "init0".into(),
            Channel::InitPlus => "init_plus".into(),
            Channel::InitMagicH => "init_magic_h".into(),
            Channel::InitMagicT => "init_magic_t".into(),
            Channel::Depol1 => "depol1".into(),
            Channel::Depol2 => "depol2".into(),
            Channel::Idle(n) => format!("idle:{n}"),
            Channel::MeasX => "meas_x".into(),
            Channel::MeasZ => "meas_z".into(),
            Channel::Frame => "frame".into(),
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        if let Some(n) = s.strip_prefix("idle:") {
            return n.parse().ok().filter(|&n| n >= 1).map(Channel::Idle);
        }
        Some(match s {
            "init0" => Channel::Init0,
            "init_plus" => Channel::InitPlus,
            "init_magic_h" => Channel::InitMagicH,
            "init_magic_t" => Channel::InitMagicT,
            "depol1" => Channel::Depol1,
            "depol2" => Channel::Depol2,
            "meas_x" => Channel::MeasX,
            "meas_z" => Channel::MeasZ,
            "frame" => Channel::Frame,
            _ => return None,
        })
    }

    /// Table key used by noise overrides (idle windows share one key).
    pub fn family(&self) -> &'static str {
        match self {
            Channel::Init0 => "init0",
            Channel::InitPlus => "init_plus",
            Channel::InitMagicH => "init_magic_h",
            Channel::InitMagicT => "init_magic_t",
            Channel::Depol1 => "depol1",
            Channel::Depol2 => "depol2",
            Channel::Idle(_) => "idle",
            Channel::MeasX => "meas_x",
            Channel::MeasZ => "meas_z",
            Channel::Frame => "frame",
        }
    }

    pub fn arity(&self) -> usize {
        if matches!(self, Channel::Depol2) {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorLocation {
    pub id: usize,
    pub time_step: usize,
    pub qubits: Vec<usize>,
    pub channel: Channel,
    /// Optional per-qubit labels (aligned with `qubits`), used by figure-indexed grids.
    pub labels: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    Gate(usize),
    Noise(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasRole {
    Psc,
    Stabilizer,
    Flag,
    Check,
}

impl MeasRole {
    pub fn tag(&self) -> &'static str {
        match self {
            MeasRole::Psc => "psc",
            MeasRole::Stabilizer => "stab",
            MeasRole::Flag => "flag",
            MeasRole::Check => "check",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Some(match s {
            "psc" => MeasRole::Psc,
            "stab" => MeasRole::Stabilizer,
            "flag" => MeasRole::Flag,
            "check" => MeasRole::Check,
            _ => return None,
        })
    }
}

/// A deferred parity measurement accepting the +1 outcome of `observable`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub observable: PauliString,
    pub role: MeasRole,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolCircuit {
    pub name: String,
    pub n_data: usize,
    pub n_anc: usize,
    pub init: Vec<InitState>,
    pub gates: Vec<ProtocolGate>,
    pub locations: Vec<ErrorLocation>,
    pub ops: Vec<Op>,
    pub measurements: Vec<Measurement>,
    pub logical_observables: Vec<PauliString>,
}

impl ProtocolCircuit {
    pub fn n(&self) -> usize {
        self.n_data + self.n_anc
    }

    /// Number of error locations.
    pub fn m(&self) -> usize {
        self.locations.len()
    }

    /// Validates the structural invariants of the IR.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.n();
        if self.init.len() != n {
            return Err("init list length".into());
        }
        for (i, l) in self.locations.iter().enumerate() {
            if l.id != i {
                return Err(format!("location ids not dense at {i}"));
            }
            if l.qubits.len() != l.channel.arity() || l.qubits.iter().any(|&q| q >= n) {
                return Err(format!("location {i} has bad qubits"));
            }
            if !l.labels.is_empty() && l.labels.len() != l.qubits.len() {
                return Err(format!("location {i} label count"));
            }
        }
        let mut seen_gate = vec![false; self.gates.len()];
        let mut seen_loc = vec![false; self.locations.len()];
        for op in &self.ops {
            match *op {
                Op::Gate(g) => seen_gate[g] = true,
                Op::Noise(l) => seen_loc[l] = true,
            }
        }
        if seen_gate.iter().any(|s| !s) || seen_loc.iter().any(|s| !s) {
            return Err("ops do not cover every gate and location".into());
        }
        for g in &self.gates {
            if g.kind.qubits().iter().any(|&q| q >= n) {
                return Err("gate qubit out of range".into());
            }
        }
        for m in &self.measurements {
            if m.observable.n() != n || !m.observable.is_hermitian() {
                return Err("measurement observable".into());
            }
        }
        Ok(())
    }
}
