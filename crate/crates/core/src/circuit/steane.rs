//! `[[7,1,3]]` Steane `|H̄⟩` preparation with a one-flag controlled-`H̄` check.
//!
//! Qubits are 0-based: data 0..6, control ancilla 7, flag 8. Labels on gadget
//! locations follow the 42-entry location grid (label k on grid row q+1).

use super::{Channel, CircuitBuilder, CodeSpec, GateKind, InitState, MeasRole, ProtocolCircuit};
use crate::clifford::{LocalPsc, PscForm};
use crate::pauli::PauliString;

pub const STEANE_CONTROL: usize = 7;
pub const STEANE_FLAG: usize = 8;

const STEANE_ROWS: [[usize; 4]; 3] = [[3, 4, 5, 6], [1, 2, 5, 6], [0, 2, 4, 6]];

pub fn steane_code() -> CodeSpec {
    let mut stabs = Vec::new();
    for r in STEANE_ROWS {
        stabs.push(PauliString::x_on(7, &r));
    }
    for r in STEANE_ROWS {
        stabs.push(PauliString::z_on(7, &r));
    }
    let all: Vec<usize> = (0..7).collect();
    CodeSpec::new(
        stabs,
        vec![PauliString::x_on(7, &all)],
        vec![PauliString::z_on(7, &all)],
        (0..7).map(|q| LocalPsc::new(vec![q], PscForm::hadamard())).collect(),
    )
    .unwrap()
}

/// Encoder CNOTs (control, target), 1-based as on the grid rows.
const ENCODER: [(usize, usize); 11] =
    [(3, 5), (3, 6), (4, 5), (4, 6), (4, 7), (2, 3), (2, 6), (2, 7), (1, 3), (1, 5), (1, 7)];

/// Non-FT encoder: physical `|H⟩` on data qubit 2 mapped to `|H̄⟩`, with circuit noise.
fn encode(b: &mut CircuitBuilder) -> usize {
    for q in 0..7 {
        let s = match q + 1 {
            3 => InitState::MagicH,
            1 | 2 | 4 => InitState::Plus,
            _ => InitState::Zero,
        };
        b.init(q, s, 0);
    }
    let mut sched = Vec::new();
    for &(c, t) in &ENCODER {
        let (c, t) = (c - 1, t - 1);
        let step = b.next_step(&[c, t]);
        b.gate_noisy(GateKind::CX(c, t), step);
        sched.push((c, t, step));
    }
    let depth = sched.iter().map(|s| s.2).max().unwrap();
    // idle windows from gaps in each data row
    for q in 0..7 {
        let mut busy = vec![false; depth + 1];
        for &(c, t, s) in &sched {
            if c == q || t == q {
                busy[s] = true;
            }
        }
        let mut t = 1;
        while t <= depth {
            if busy[t] {
                t += 1;
                continue;
            }
            let start = t;
            while t <= depth && !busy[t] {
                t += 1;
            }
            b.noise(Channel::Idle((t - start) as u32), &[q], start, &[]);
        }
    }
    depth
}

pub fn build_steane_h() -> ProtocolCircuit {
    let (c8, f9) = (STEANE_CONTROL, STEANE_FLAG);
    let mut b = CircuitBuilder::new("steane-h", 7, 2);
    let t0 = encode(&mut b);
    let at = |k: usize| t0 + k;

    // grid column t1: frames and ancilla preparation
    for (q, lab) in [(0, 39), (1, 31), (2, 26), (3, 21), (4, 16), (5, 11), (6, 2)] {
        b.noise(Channel::Frame, &[q], at(1), &[lab]);
    }
    b.init_silent(c8, InitState::Plus);
    b.noise(Channel::InitPlus, &[c8], at(1), &[1]);
    b.init_silent(f9, InitState::Zero);
    b.noise(Channel::Init0, &[f9], at(1), &[6]);

    let ch = |b: &mut CircuitBuilder, t: usize, data: usize, l8: u32, ld: u32| {
        b.gate(GateKind::ch(c8, data), at(t));
        b.noise(Channel::Depol2, &[c8, data], at(t), &[l8, ld]);
    };
    let flag = |b: &mut CircuitBuilder, t: usize, l8: u32, l9: u32| {
        b.gate(GateKind::CX(c8, f9), at(t));
        b.noise(Channel::Depol2, &[c8, f9], at(t), &[l8, l9]);
    };
    let idle = |b: &mut CircuitBuilder, q: usize, from: usize, len: u32, lab: u32| {
        b.noise(Channel::Idle(len), &[q], at(from), &[lab]);
    };

    idle(&mut b, 0, 2, 8, 40);
    idle(&mut b, 1, 2, 6, 32);
    idle(&mut b, 2, 2, 5, 27);
    idle(&mut b, 3, 2, 4, 22);
    idle(&mut b, 4, 2, 3, 17);
    idle(&mut b, 5, 2, 2, 12);
    idle(&mut b, f9, 2, 1, 7);

    ch(&mut b, 2, 6, 3, 4);
    idle(&mut b, 6, 3, 8, 5);
    flag(&mut b, 3, 8, 9);
    idle(&mut b, f9, 4, 5, 10);
    ch(&mut b, 4, 5, 13, 14);
    idle(&mut b, 5, 5, 6, 15);
    ch(&mut b, 5, 4, 18, 19);
    idle(&mut b, 4, 6, 5, 20);
    ch(&mut b, 6, 3, 23, 24);
    idle(&mut b, 3, 7, 4, 25);
    ch(&mut b, 7, 2, 28, 29);
    idle(&mut b, 2, 8, 3, 30);
    ch(&mut b, 8, 1, 33, 34);
    idle(&mut b, 1, 9, 2, 35);
    flag(&mut b, 9, 36, 37);
    idle(&mut b, f9, 10, 1, 38);
    ch(&mut b, 10, 0, 41, 42);

    b.measure_qubit(c8, true, MeasRole::Psc);
    b.measure_qubit(f9, false, MeasRole::Flag);
    // ideal fault-tolerant stabilizer round
    let code = steane_code();
    let data: Vec<usize> = (0..7).collect();
    for g in &code.stabilizers {
        b.measure(g.embed(9, &data), MeasRole::Stabilizer);
    }
    b.set_observables(vec![code.logical_x[0].embed(9, &data), code.logical_z[0].embed(9, &data)]);
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steane_code_parameters() {
        let c = steane_code();
        assert_eq!((c.n(), c.k(), c.w_c(), c.w_q(), c.ell()), (7, 1, 4, 6, 7));
    }

    #[test]
    fn grid_covers_42_labels() {
        let c = build_steane_h();
        let mut labels: Vec<u32> = c.locations.iter().flat_map(|l| l.labels.clone()).collect();
        labels.sort_unstable();
        assert_eq!(labels, (1..=42).collect::<Vec<_>>());
        assert_eq!(c.locations.iter().filter(|l| !l.labels.is_empty()).count(), 33);
        assert_eq!(c.n(), 9);
    }
}
