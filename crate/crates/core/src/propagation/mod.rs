//! Pauli errors pushed through a protocol to one end-of-circuit Clifford error.

mod analytic;
mod rules;
mod stats;

pub use analytic::{steane_analytic_error, steane_analytic_from_bits, LabelBits, Transcription};
pub use rules::{rule_lookup, RuleTable, MAX_RULE_SUPPORT};
pub use stats::{
    alternating_schedule, collect_stats, is_coupling_ancilla_location, max_single_error_gate_count, ProtocolShape,
    PropagationStats,
};

use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{Op, ProtocolCircuit};
use crate::clifford::{flatten_to_tableau, CliffordTableau, ErrorGate, ErrorKind, PscForm};
use crate::noise::ErrorConfig;
use crate::pauli::PauliString;
use rules::{gate_mask, kind_mask};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PropagationError {
    #[error("no closed rule for {error} through {gate} (location {location:?})")]
    UnhandledPair { error: String, gate: String, location: Option<usize> },
    #[error("error config has {0} entries, circuit has {1} locations")]
    ConfigLength(usize, usize),
    #[error("propagation supports at most 64 qubits, got {0}")]
    TooWide(usize),
    #[error("{0}")]
    Label(String),
    #[error("bad sequence line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Ordered error gates applied after the noiseless circuit; first entry acts first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordErrorSeq {
    pub n: usize,
    pub gates: Vec<ErrorGate>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KindCounts {
    pub pauli: usize,
    pub psc: usize,
    pub controlled_pauli: usize,
}

impl CliffordErrorSeq {
    pub fn empty(n: usize) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    /// One- and two-qubit gate count.
    pub fn gate_count(&self) -> usize {
        self.gates.iter().map(|g| g.cost()).sum()
    }

    pub fn counts(&self) -> KindCounts {
        let mut c = KindCounts::default();
        for g in &self.gates {
            match g.kind() {
                ErrorKind::Pauli => c.pauli += 1,
                ErrorKind::Psc => c.psc += 1,
                ErrorKind::ControlledPauli => c.controlled_pauli += 1,
            }
        }
        c
    }

    pub fn to_tableau(&self) -> CliffordTableau {
        flatten_to_tableau(self.n, &self.gates)
    }

    /// Pauli-only sequences collapse to their product.
    pub fn as_pauli(&self) -> Option<PauliString> {
        let mut out = PauliString::identity(self.n);
        for g in &self.gates {
            match g {
                ErrorGate::Pauli(p) => out.mul_assign_left(p),
                _ => return None,
            }
        }
        Some(out)
    }

    /// Appends `g`, merging consecutive Paulis and dropping scalars.
    pub fn push(&mut self, g: ErrorGate) {
        if g.is_trivial() {
            return;
        }
        if let (ErrorGate::Pauli(p), Some(ErrorGate::Pauli(last))) = (&g, self.gates.last_mut()) {
            last.mul_assign_left(p);
            if last.is_identity() {
                self.gates.pop();
            }
            return;
        }
        self.gates.push(g);
    }

    /// One gate per line: `P <pauli>`, `PSC <json>`, `CP <control> <pauli>`.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "N {}", self.n);
        for g in &self.gates {
            let _ = writeln!(s, "{g:?}");
        }
        s
    }

    pub fn from_lines(text: &str) -> Result<Self, PropagationError> {
        let mut n = None;
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| PropagationError::Parse { line: i + 1, msg: msg.to_string() };
            let (head, rest) = line.split_once(' ').ok_or_else(|| err("missing argument"))?;
            let pauli = |s: &str| s.trim().parse::<PauliString>().map_err(|e| err(&e.to_string()));
            let g = match head {
                "N" => {
                    n = Some(rest.trim().parse().map_err(|_| err("bad width"))?);
                    continue;
                }
                "P" => ErrorGate::Pauli(pauli(rest)?),
                "PSC" => ErrorGate::Psc(serde_json::from_str::<PscForm>(rest).map_err(|e| err(&e.to_string()))?),
                "CP" => {
                    let (c, t) = rest.split_once(' ').ok_or_else(|| err("CP needs control and target"))?;
                    let control = c.parse().map_err(|_| err("bad control"))?;
                    ErrorGate::ControlledPauli { control, target: pauli(t)? }
                }
                _ => return Err(err("unknown gate")),
            };
            if Some(g.n()) != n {
                return Err(err("gate width does not match N"));
            }
            gates.push(g);
        }
        Ok(Self { n: n.unwrap_or(0), gates })
    }
}

fn check_config(c: &ProtocolCircuit, config: &ErrorConfig) -> Result<(), PropagationError> {
    if config.m != c.m() {
        return Err(PropagationError::ConfigLength(config.m, c.m()));
    }
    if c.n() > 64 {
        return Err(PropagationError::TooWide(c.n()));
    }
    Ok(())
}

struct Sweep<'a> {
    c: &'a ProtocolCircuit,
    table: &'a RuleTable,
    masks: Vec<u64>,
}

impl<'a> Sweep<'a> {
    fn new(c: &'a ProtocolCircuit, table: &'a RuleTable) -> Self {
        Self { c, table, masks: c.gates.iter().map(|g| kind_mask(&g.kind)).collect() }
    }

    /// Pushes `cur` through the op range, inserting sampled errors when `config` is given.
    fn run(
        &self,
        cur: &mut Vec<(ErrorGate, u64)>,
        ops: &[Op],
        config: Option<&ErrorConfig>,
        origin: Option<usize>,
    ) -> Result<(), PropagationError> {
        let mut scratch = Vec::new();
        for op in ops {
            match *op {
                Op::Noise(l) => {
                    if let Some(p) = config.and_then(|cfg| cfg.get(l)) {
                        push_merge(cur, ErrorGate::Pauli(p.clone()));
                    }
                }
                Op::Gate(gi) => {
                    let gm = self.masks[gi];
                    if !cur.iter().any(|(_, m)| m & gm != 0) {
                        continue;
                    }
                    let kind = &self.c.gates[gi].kind;
                    scratch.clear();
                    for (e, m) in cur.drain(..) {
                        if m & gm == 0 {
                            scratch.push((e, m));
                            continue;
                        }
                        let out = self.table.apply(&e, kind).map_err(|err| match err {
                            PropagationError::UnhandledPair { error, gate, .. } => {
                                PropagationError::UnhandledPair { error, gate, location: origin.or(Some(gi)) }
                            }
                            other => other,
                        })?;
                        for g in out {
                            push_merge(&mut scratch, g);
                        }
                    }
                    std::mem::swap(cur, &mut scratch);
                }
            }
        }
        Ok(())
    }
}

fn push_merge(v: &mut Vec<(ErrorGate, u64)>, g: ErrorGate) {
    if g.is_trivial() {
        return;
    }
    if let (ErrorGate::Pauli(p), Some((ErrorGate::Pauli(last), m))) = (&g, v.last_mut()) {
        last.mul_assign_left(p);
        *m = rules::pauli_mask(last);
        if last.is_identity() {
            v.pop();
        }
        return;
    }
    let m = gate_mask(&g);
    v.push((g, m));
}

/// Left-to-right sweep: the noisy circuit equals `C_prop ∘ noiseless` up to global phase.
pub fn propagate(c: &ProtocolCircuit, config: &ErrorConfig) -> Result<CliffordErrorSeq, PropagationError> {
    propagate_with(c, config, RuleTable::global())
}

pub fn propagate_with(
    c: &ProtocolCircuit,
    config: &ErrorConfig,
    table: &RuleTable,
) -> Result<CliffordErrorSeq, PropagationError> {
    check_config(c, config)?;
    let mut cur = Vec::new();
    if !config.is_trivial() {
        Sweep::new(c, table).run(&mut cur, &c.ops, Some(config), None)?;
    }
    Ok(CliffordErrorSeq { n: c.n(), gates: cur.into_iter().map(|x| x.0).collect() })
}

/// Each sampled error is propagated alone from its location; results are concatenated in circuit order.
pub fn propagate_per_location(c: &ProtocolCircuit, config: &ErrorConfig) -> Result<CliffordErrorSeq, PropagationError> {
    check_config(c, config)?;
    let sweep = Sweep::new(c, RuleTable::global());
    let mut seq = CliffordErrorSeq::empty(c.n());
    for (k, op) in c.ops.iter().enumerate() {
        let Op::Noise(l) = *op else { continue };
        let Some(p) = config.get(l) else { continue };
        let mut cur = vec![(ErrorGate::Pauli(p.clone()), rules::pauli_mask(p))];
        sweep.run(&mut cur, &c.ops[k + 1..], None, Some(l))?;
        for (g, _) in cur {
            seq.push(g);
        }
    }
    Ok(seq)
}

/// `T̄ P T̄† ∝ P · Π_{i∈A} S_i^{x_i} Π_{i∉A} S_i^{†x_i}` for `T̄ = ⊗_A T ⊗_{Aᶜ} T†`.
///
/// Returned in application order: the frame first, then the phase gates.
pub fn propagate_transversal_nonclifford(frame: &PauliString, in_a: &[bool]) -> CliffordErrorSeq {
    let n = frame.n();
    assert_eq!(in_a.len(), n, "partition must cover the frame");
    let mut seq = CliffordErrorSeq::empty(n);
    seq.push(ErrorGate::Pauli(frame.clone()));
    for (i, &a) in in_a.iter().enumerate() {
        if frame.x_bit(i) {
            let f = if a { PscForm::phase_s() } else { PscForm::phase_sdg() };
            seq.push(ErrorGate::Psc(f.embed(n, &[i])));
        }
    }
    seq
}
