//! Closed-form propagated error of the Steane `|H̄⟩` gadget, `C_prop = E_9 E_8 ⋯ E_1`.
//!
//! Grid qubits 1..7 are data qubits 0..6, grid qubit 8 is the control ancilla (7)
//! and grid qubit 9 the flag (8). Location labels 1..=42 carry bits `a_i` (X) and `b_i` (Z).

use rand::Rng;

use super::{CliffordErrorSeq, PropagationError};
use crate::circuit::{ProtocolCircuit, STEANE_CONTROL, STEANE_FLAG};
use crate::clifford::{ErrorGate, PscForm};
use crate::noise::ErrorConfig;
use crate::pauli::PauliString;

pub const N_LABELS: usize = 42;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transcription {
    /// Exponents exactly as printed.
    AsPrinted,
    /// Adds the missing `a_33` control term, reads `b_3` for `a_3` in the `Z_8` exponent and
    /// builds the `S_8` exponent from the per-qubit `C_8Y` parities.
    Corrected,
}

/// X/Z bits per location label (index 0 unused).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelBits {
    pub a: [bool; N_LABELS + 1],
    pub b: [bool; N_LABELS + 1],
}

impl Default for LabelBits {
    fn default() -> Self {
        Self { a: [false; N_LABELS + 1], b: [false; N_LABELS + 1] }
    }
}

impl LabelBits {
    /// Uniform bits with `a_1 = b_6 = 0` (the noise model never produces those).
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut s = Self::default();
        for i in 1..=N_LABELS {
            s.a[i] = rng.gen();
            s.b[i] = rng.gen();
        }
        s.a[1] = false;
        s.b[6] = false;
        s
    }

    pub fn from_config(c: &ProtocolCircuit, config: &ErrorConfig) -> Result<Self, PropagationError> {
        let mut s = Self::default();
        for (l, p) in &config.entries {
            let loc = &c.locations[*l];
            if loc.labels.is_empty() {
                return Err(PropagationError::Label(format!("error on unlabeled location {l}")));
            }
            for (k, &lab) in loc.labels.iter().enumerate() {
                let q = loc.qubits[k];
                let i = lab as usize;
                if i == 0 || i > N_LABELS {
                    return Err(PropagationError::Label(format!("label {lab} out of range")));
                }
                s.a[i] = p.x_bit(q);
                s.b[i] = p.z_bit(q);
            }
        }
        Ok(s)
    }

    pub fn to_config(&self, c: &ProtocolCircuit) -> ErrorConfig {
        let n = c.n();
        let errs = c
            .locations
            .iter()
            .map(|loc| {
                let mut p = PauliString::identity(n);
                for (k, &lab) in loc.labels.iter().enumerate() {
                    let q = loc.qubits[k];
                    p.set_x(q, self.a[lab as usize]);
                    p.set_z(q, self.b[lab as usize]);
                }
                p
            })
            .collect();
        ErrorConfig::from_dense(errs)
    }

    fn xa(&self, ls: &[usize]) -> bool {
        ls.iter().fold(false, |acc, &i| acc ^ self.a[i])
    }

    fn xb(&self, ls: &[usize]) -> bool {
        ls.iter().fold(false, |acc, &i| acc ^ self.b[i])
    }

    fn count(&self, ls: &[usize]) -> u32 {
        ls.iter().map(|&i| self.a[i] as u32).sum()
    }
}

/// `a_{5i-2}` for `i = lo..=hi`.
fn control_x(lo: usize, hi: usize) -> Vec<usize> {
    (lo..=hi).map(|i| 5 * i - 2).collect()
}

struct DataTerm {
    qubit: usize,
    after: Vec<usize>,
    hadamard: Vec<usize>,
    before: Vec<usize>,
}

fn data_terms(t: Transcription) -> Vec<DataTerm> {
    let with1 = |mut v: Vec<usize>| {
        v.insert(0, 1);
        v
    };
    let mut e1_h = with1(control_x(1, 6));
    e1_h.push(36);
    if t == Transcription::Corrected {
        e1_h.push(33);
    }
    vec![
        DataTerm { qubit: 0, after: vec![42], hadamard: e1_h, before: vec![39, 40] },
        DataTerm { qubit: 1, after: vec![34, 35], hadamard: with1(control_x(1, 6)), before: vec![31, 32] },
        DataTerm { qubit: 2, after: vec![29, 30], hadamard: with1(control_x(1, 5)), before: vec![26, 27] },
        DataTerm { qubit: 3, after: vec![24, 25], hadamard: with1(control_x(1, 4)), before: vec![21, 22] },
        DataTerm { qubit: 4, after: vec![19, 20], hadamard: with1(control_x(1, 3)), before: vec![16, 17] },
        DataTerm { qubit: 5, after: vec![14, 15], hadamard: vec![1, 3, 8], before: vec![11, 12] },
        DataTerm { qubit: 6, after: vec![4, 5], hadamard: vec![1], before: vec![2] },
    ]
}

const N: usize = 9;

fn pauli(q: usize, x: bool, z: bool) -> Option<ErrorGate> {
    let mut p = PauliString::identity(N);
    p.set_x(q, x);
    p.set_z(q, z);
    p.set_phase_exp((p.y_count() % 4) as u8);
    (x || z).then_some(ErrorGate::Pauli(p))
}

/// Transcribed `E_1 … E_9` in application order.
pub fn steane_analytic_from_bits(bits: &LabelBits, t: Transcription) -> CliffordErrorSeq {
    let c8 = STEANE_CONTROL;
    let mut g: Vec<ErrorGate> = Vec::new();
    let terms = data_terms(t);
    let mut cy_total = 0u32;
    for d in terms.iter().rev() {
        // E_k = (X^{after} Z^{after} H^{h} X^{before} Z^{before}) (C_8 Y_k)^{c}
        let cy = bits.xa(&d.before) ^ bits.xb(&d.before);
        cy_total += cy as u32;
        if cy {
            g.push(ErrorGate::ControlledPauli { control: c8, target: PauliString::single(N, d.qubit, 'Y') });
        }
        g.extend(pauli(d.qubit, false, bits.xb(&d.before)));
        g.extend(pauli(d.qubit, bits.xa(&d.before), false));
        if bits.xa(&d.hadamard) {
            g.push(ErrorGate::Psc(PscForm::hadamard().embed(N, &[d.qubit])));
        }
        g.extend(pauli(d.qubit, false, bits.xb(&d.after)));
        g.extend(pauli(d.qubit, bits.xa(&d.after), false));
    }

    // E_8 = X_8^{…} Z_8^{…} S_8^{…}
    let upper = if t == Transcription::Corrected { 7 } else { 6 };
    let mut x8 = vec![1];
    x8.extend(control_x(1, upper));
    x8.extend([36, 41]);
    let mut z8_a = vec![2, 39, 40];
    let mut z8_b = vec![1, 8, 9, 10, 36, 41];
    for i in 1..=5 {
        z8_a.extend([5 * i + 6, 5 * i + 7]);
        z8_b.push(5 * i + 8);
    }
    match t {
        Transcription::AsPrinted => z8_a.push(3),
        Transcription::Corrected => z8_b.push(3),
    }
    let s8 = match t {
        Transcription::Corrected => cy_total,
        Transcription::AsPrinted => {
            let mut ls = vec![2, 39, 40];
            for i in 1..=5 {
                ls.extend([5 * i + 6, 5 * i + 7]);
            }
            let bsum: u32 = ls.iter().map(|&i| bits.b[i] as u32).sum();
            bits.count(&ls) + bsum
        }
    };
    match s8 % 4 {
        1 => g.push(ErrorGate::Psc(PscForm::phase_s().embed(N, &[c8]))),
        2 => g.push(ErrorGate::Pauli(PauliString::single(N, c8, 'Z'))),
        3 => g.push(ErrorGate::Psc(PscForm::phase_sdg().embed(N, &[c8]))),
        _ => {}
    }
    g.extend(pauli(c8, false, bits.xa(&z8_a) ^ bits.xb(&z8_b)));
    g.extend(pauli(c8, bits.xa(&x8), false));

    // E_9
    let f9 = STEANE_FLAG;
    let mut x9 = vec![6, 7, 9, 10, 37, 38];
    x9.extend(control_x(2, upper));
    let z9 = [6, 7, 9, 10, 37, 38];
    g.extend(pauli(f9, false, bits.xb(&z9)));
    g.extend(pauli(f9, bits.xa(&x9), false));

    let mut seq = CliffordErrorSeq::empty(N);
    for x in g {
        seq.push(x);
    }
    seq
}

/// Reads the label bits of `config` on `build_steane_h()` and evaluates the closed form.
pub fn steane_analytic_error(
    c: &ProtocolCircuit,
    config: &ErrorConfig,
    t: Transcription,
) -> Result<CliffordErrorSeq, PropagationError> {
    if c.n() != N {
        return Err(PropagationError::Label("closed form is defined on the 9-qubit Steane gadget".into()));
    }
    Ok(steane_analytic_from_bits(&LabelBits::from_config(c, config)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_steane_h;

    #[test]
    fn zero_bits_give_empty_seq() {
        assert!(steane_analytic_from_bits(&LabelBits::default(), Transcription::Corrected).is_empty());
    }

    #[test]
    fn frame_x_on_last_data_qubit() {
        let mut b = LabelBits::default();
        b.a[2] = true;
        let seq = steane_analytic_from_bits(&b, Transcription::Corrected);
        let cy = ErrorGate::ControlledPauli { control: 7, target: PauliString::single(9, 6, 'Y') };
        assert!(seq.gates.contains(&cy));
        assert!(seq.gates.contains(&ErrorGate::Pauli(PauliString::single(9, 6, 'X'))));
    }

    #[test]
    fn bits_roundtrip_through_config() {
        let c = build_steane_h();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let b = LabelBits::random(&mut rng);
        assert_eq!(LabelBits::from_config(&c, &b.to_config(&c)).unwrap(), b);
    }
}
