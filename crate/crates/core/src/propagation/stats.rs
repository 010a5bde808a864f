use super::{propagate_per_location, CliffordErrorSeq, PropagationError};
use crate::circuit::{Channel, CodeSpec, ErrorLocation, ProtocolCircuit, Round};
use crate::noise::ErrorConfig;
use crate::pauli::PauliString;

/// Round structure and code sparsity of a protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProtocolShape {
    pub r_s: usize,
    pub r_l: usize,
    pub w_c: usize,
    pub w_q: usize,
    pub ell: usize,
}

impl ProtocolShape {
    pub fn new(code: &CodeSpec, schedule: &[Round]) -> Self {
        let r_l = schedule.iter().filter(|r| matches!(r, Round::Psc)).count();
        Self { r_s: schedule.len() - r_l, r_l, w_c: code.w_c(), w_q: code.w_q(), ell: code.ell() }
    }

    pub fn r(&self) -> usize {
        self.r_s + self.r_l
    }

    /// `r² w_q (w_c + ℓ)`, the single-error scale.
    pub fn single_error_scale(&self) -> f64 {
        let r = self.r() as f64;
        r * r * self.w_q as f64 * (self.w_c + self.ell) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationStats {
    pub r: usize,
    pub r_s: usize,
    pub r_l: usize,
    pub w_c: usize,
    pub w_q: usize,
    pub ell: usize,
    /// Number of error locations.
    pub m: usize,
    pub gate_count: usize,
}

impl PropagationStats {
    /// `κ · M · r² w_q (w_c + ℓ)`.
    pub fn bound(&self, kappa: f64) -> f64 {
        let r = self.r as f64;
        kappa * self.m as f64 * r * r * self.w_q as f64 * (self.w_c + self.ell) as f64
    }

    pub fn within_bound(&self, kappa: f64) -> bool {
        self.gate_count as f64 <= self.bound(kappa)
    }
}

pub fn collect_stats(seq: &CliffordErrorSeq, c: &ProtocolCircuit, shape: &ProtocolShape) -> PropagationStats {
    PropagationStats {
        r: shape.r(),
        r_s: shape.r_s,
        r_l: shape.r_l,
        w_c: shape.w_c,
        w_q: shape.w_q,
        ell: shape.ell,
        m: c.m(),
        gate_count: seq.gate_count(),
    }
}

/// Largest propagated gate count over every single non-identity Pauli on the selected locations.
pub fn max_single_error_gate_count(
    c: &ProtocolCircuit,
    include: impl Fn(&ErrorLocation) -> bool,
) -> Result<usize, PropagationError> {
    let n = c.n();
    let mut worst = 0;
    for (l, loc) in c.locations.iter().enumerate().filter(|(_, l)| include(l)) {
        let k = loc.qubits.len();
        for bits in 1..(1u32 << (2 * k)) {
            let mut p = PauliString::identity(n);
            for (j, &q) in loc.qubits.iter().enumerate() {
                p.set_x(q, bits >> (2 * j) & 1 == 1);
                p.set_z(q, bits >> (2 * j + 1) & 1 == 1);
            }
            let cfg = ErrorConfig { m: c.m(), entries: vec![(l, p)] };
            worst = worst.max(propagate_per_location(c, &cfg)?.gate_count());
        }
    }
    Ok(worst)
}

/// `r` rounds alternating a logical PSC round and a full stabilizer round, PSC first.
pub fn alternating_schedule(code: &CodeSpec, r: usize) -> Vec<Round> {
    (0..r).map(|i| if i % 2 == 0 { Round::Psc } else { Round::all_stabilizers(code) }).collect()
}

/// Ancilla locations outside CAT preparation: the coupling gates and the final ancilla readout.
pub fn is_coupling_ancilla_location(c: &ProtocolCircuit, l: &ErrorLocation) -> bool {
    let nd = c.n_data;
    let on_anc = l.qubits.iter().any(|&q| q >= nd);
    let on_data = l.qubits.iter().any(|&q| q < nd);
    on_anc && (on_data || matches!(l.channel, Channel::MeasX | Channel::MeasZ))
}
