//! Rewriting `G · E = (E'_1 … E'_k) · G` for one error gate `E` and one protocol gate `G`.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;

use super::PropagationError;
use crate::circuit::GateKind;
use crate::clifford::{canonicalize_psc, controlled_normalized, ErrorGate, PscForm};
use crate::oracle::matrix::{self, CMat};
use crate::pauli::PauliString;

/// Joint supports above this size are not tabulated.
pub const MAX_RULE_SUPPORT: usize = 8;

pub(crate) fn pauli_mask(p: &PauliString) -> u64 {
    p.x_mask() | p.z_mask()
}

pub(crate) fn gate_mask(e: &ErrorGate) -> u64 {
    match e {
        ErrorGate::Pauli(p) => pauli_mask(p),
        ErrorGate::Psc(f) => f.q_set().iter().fold(pauli_mask(f.pauli_p()), |m, q| m | pauli_mask(q)),
        ErrorGate::ControlledPauli { control, target } => pauli_mask(target) | 1 << control,
    }
}

pub(crate) fn kind_mask(k: &GateKind) -> u64 {
    k.qubits().iter().fold(0, |m, &q| m | 1 << q)
}

/// Error gate on the local register `qubits` (which must cover its support).
fn localize(e: &ErrorGate, qubits: &[usize]) -> ErrorGate {
    let pos = |q: usize| qubits.iter().position(|&x| x == q).expect("support covered");
    match e {
        ErrorGate::Pauli(p) => ErrorGate::Pauli(p.restrict(qubits)),
        ErrorGate::Psc(f) => ErrorGate::Psc(f.restrict(qubits)),
        ErrorGate::ControlledPauli { control, target } => {
            ErrorGate::ControlledPauli { control: pos(*control), target: target.restrict(qubits) }
        }
    }
}

fn embed(e: &ErrorGate, n: usize, qubits: &[usize]) -> ErrorGate {
    match e {
        ErrorGate::Pauli(p) => ErrorGate::Pauli(p.embed(n, qubits)),
        ErrorGate::Psc(f) => ErrorGate::Psc(f.embed(n, qubits)),
        ErrorGate::ControlledPauli { control, target } => {
            ErrorGate::ControlledPauli { control: qubits[*control], target: target.embed(n, qubits) }
        }
    }
}

fn dense(e: &ErrorGate) -> CMat {
    match e {
        ErrorGate::Pauli(p) => matrix::pauli_matrix(p),
        ErrorGate::Psc(f) => f.to_dense(),
        ErrorGate::ControlledPauli { control, target } => PscForm::controlled_pauli(*control, target).to_dense(),
    }
}

/// `C_c(K)` for a phased Pauli `K`, controlled gate first.
fn controlled(c: usize, k: &PauliString) -> Vec<ErrorGate> {
    let mut v = controlled_normalized(c, k);
    v.reverse();
    v
}

/// Conjugation through a Clifford protocol gate.
fn through_clifford(e: &ErrorGate, g: &GateKind) -> Vec<ErrorGate> {
    let conj = |p: &PauliString| g.conjugate_pauli(p).expect("clifford gate");
    match e {
        ErrorGate::Pauli(p) => vec![ErrorGate::Pauli(conj(p))],
        ErrorGate::Psc(f) => {
            let f = f.map_paulis(conj);
            if f.q_set().is_empty() {
                vec![ErrorGate::Pauli(f.pauli_p().clone())]
            } else {
                vec![ErrorGate::Psc(f)]
            }
        }
        ErrorGate::ControlledPauli { control, target } => {
            let n = target.n();
            let a = conj(&PauliString::single(n, *control, 'Z'));
            let b = conj(target);
            let sup = a.support();
            if sup.len() == 1 && a.letter(sup[0]) == 'Z' && !b.acts_on(sup[0]) {
                let c2 = sup[0];
                // (I±Z)/2 + (I∓Z)/2 B
                let mut out = controlled(c2, &b);
                if a.text_phase() == 2 {
                    out.push(ErrorGate::Pauli(b));
                }
                out
            } else {
                vec![ErrorGate::Psc(PscForm::controlled_pauli(*control, target).map_paulis(conj))]
            }
        }
    }
}

/// Pauli through `C_c(U)`:
/// `V P V† ∝ X_c^a U^a C_c(U^{-2a} · U L U† · L) · P|_{x_c=0}`, with `L` the part of `P` on the targets.
fn pauli_through_controlled(p: &PauliString, c: usize, u: &PscForm, targets: &[usize]) -> Vec<ErrorGate> {
    let n = p.n();
    let a = p.x_bit(c);
    let mut l = PauliString::identity(n);
    for &t in targets {
        l.set_x(t, p.x_bit(t));
        l.set_z(t, p.z_bit(t));
    }
    l.set_phase_exp((l.y_count() % 4) as u8);
    let mut k = u.conjugate(&l);
    k.mul_assign_right(&l);
    if a {
        let mut inv = u.square().inverse();
        inv.mul_assign_right(&k);
        k = inv;
    }
    let mut rest = p.clone();
    rest.set_x(c, false);
    let mut out = Vec::with_capacity(4);
    if !rest.is_identity() {
        out.push(ErrorGate::Pauli(rest));
    }
    out.extend(controlled(c, &k));
    if a {
        out.push(ErrorGate::Psc(u.clone()));
        out.push(ErrorGate::Pauli(PauliString::single(n, c, 'X')));
    }
    out
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct RuleKey {
    err: ErrorGate,
    control: usize,
    form: PscForm,
}

/// Dense-derived rules for non-Pauli errors meeting a controlled PSC, memoized per local shape.
pub struct RuleTable {
    cache: RwLock<HashMap<RuleKey, Option<Vec<ErrorGate>>>>,
}

impl Default for RuleTable {
    fn default() -> Self {
        Self::new()
    }
}

impl RuleTable {
    pub fn new() -> Self {
        Self { cache: RwLock::new(HashMap::new()) }
    }

    /// Shared table used by `rule_lookup`.
    pub fn global() -> &'static RuleTable {
        static T: OnceLock<RuleTable> = OnceLock::new();
        T.get_or_init(RuleTable::new)
    }

    pub fn len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn lookup(&self, key: RuleKey) -> Option<Vec<ErrorGate>> {
        if let Some(v) = self.cache.read().unwrap().get(&key) {
            return v.clone();
        }
        let v = derive_rule(&key);
        self.cache.write().unwrap().insert(key, v.clone());
        v
    }

    /// Propagates `e` through `g`.
    pub fn apply(&self, e: &ErrorGate, g: &GateKind) -> Result<Vec<ErrorGate>, PropagationError> {
        if gate_mask(e) & kind_mask(g) == 0 {
            return Ok(vec![e.clone()]);
        }
        let GateKind::ControlledPsc { control, targets, form } = g else {
            return Ok(through_clifford(e, g));
        };
        let n = e.n();
        let u = form.embed(n, targets);
        if let ErrorGate::Pauli(p) = e {
            return Ok(pauli_through_controlled(p, *control, &u, targets));
        }
        if let ErrorGate::ControlledPauli { control: ec, target } = e {
            if let Some(out) = self.compressed(*ec, target, *control, targets, g)? {
                return Ok(out);
            }
        }
        let mut joint = e.support();
        joint.push(*control);
        joint.extend(targets.iter().copied());
        joint.sort_unstable();
        joint.dedup();
        let unhandled = || PropagationError::UnhandledPair {
            error: format!("{e:?}"),
            gate: format!("{g:?}"),
            location: None,
        };
        if joint.len() > MAX_RULE_SUPPORT {
            return Err(unhandled());
        }
        let key = RuleKey {
            err: localize(e, &joint),
            control: joint.iter().position(|&q| q == *control).unwrap(),
            form: u.restrict(&joint),
        };
        let local = self.lookup(key).ok_or_else(unhandled)?;
        Ok(local.iter().map(|x| embed(x, n, &joint)).collect())
    }
}

impl RuleTable {
    /// Spectator qubits of a controlled-Pauli target (outside the gate) only enter through
    /// their product, so they are folded onto one representative qubit before derivation.
    fn compressed(
        &self,
        ec: usize,
        target: &PauliString,
        control: usize,
        targets: &[usize],
        g: &GateKind,
    ) -> Result<Option<Vec<ErrorGate>>, PropagationError> {
        let spect: Vec<usize> =
            target.support().into_iter().filter(|&q| q != control && !targets.contains(&q)).collect();
        if spect.len() < 2 {
            return Ok(None);
        }
        let n = target.n();
        let r = spect[0];
        let mut sigma = PauliString::identity(n);
        let mut small = target.clone();
        for &q in &spect {
            sigma.set_x(q, target.x_bit(q));
            sigma.set_z(q, target.z_bit(q));
            small.set_x(q, false);
            small.set_z(q, false);
        }
        sigma.set_phase_exp((sigma.y_count() % 4) as u8);
        small.set_z(r, true);
        small.add_phase(4 - sigma.y_count() % 4);
        let out = self.apply(&ErrorGate::ControlledPauli { control: ec, target: small }, g)?;
        let unfold = |p: &PauliString| -> Option<PauliString> {
            if p.x_bit(r) {
                return None;
            }
            if !p.z_bit(r) {
                return Some(p.clone());
            }
            let mut q = p.clone();
            q.set_z(r, false);
            q.mul_assign_right(&sigma);
            Some(q)
        };
        let fail = || PropagationError::UnhandledPair {
            error: format!("CP {ec} {target:?}"),
            gate: format!("{g:?}"),
            location: None,
        };
        let mut res = Vec::with_capacity(out.len());
        for x in out {
            res.push(match x {
                ErrorGate::Pauli(p) => ErrorGate::Pauli(unfold(&p).ok_or_else(fail)?),
                ErrorGate::ControlledPauli { control, target } => {
                    ErrorGate::ControlledPauli { control, target: unfold(&target).ok_or_else(fail)? }
                }
                ErrorGate::Psc(f) => {
                    let ok = std::iter::once(f.pauli_p()).chain(f.q_set()).all(|p| !p.x_bit(r));
                    if !ok {
                        return Err(fail());
                    }
                    ErrorGate::Psc(f.map_paulis(|p| unfold(p).unwrap()))
                }
            });
        }
        Ok(Some(res))
    }
}

/// `rule_lookup` against the shared table.
pub fn rule_lookup(e: &ErrorGate, g: &GateKind) -> Result<Vec<ErrorGate>, PropagationError> {
    RuleTable::global().apply(e, g)
}

/// Splits a matrix `M = λ (|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ K)` and returns `K` as a phased Pauli.
fn as_controlled_pauli(m: &CMat, c: usize) -> Option<PauliString> {
    let dim = m.nrows();
    let cb = 1usize << c;
    let lam0 = m[(0, 0)];
    if (lam0.norm() - 1.0).abs() > 1e-8 {
        return None;
    }
    let mut k = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let v = m[(i, j)] / lam0;
            if (i ^ j) & cb != 0 {
                if v.norm() > 1e-9 {
                    return None;
                }
            } else if i & cb == 0 {
                let want = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                if (v - want).norm() > 1e-9 {
                    return None;
                }
            } else {
                k[(i, j)] = v;
                k[(i ^ cb, j ^ cb)] = v;
            }
        }
    }
    let (mut l, lam) = matrix::identify_pauli(&k)?;
    let e = (0..4).find(|&e| (lam - matrix::i_pow(e)).norm() < 1e-8)?;
    debug_assert!(!l.acts_on(c));
    l.add_phase(e);
    Some(l)
}

fn derive_rule(key: &RuleKey) -> Option<Vec<ErrorGate>> {
    let d = key.form.n();
    let u = key.form.to_dense();
    // V = |0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U
    let cb = 1usize << key.control;
    let mut v = matrix::identity(1 << d);
    for i in 0..1usize << d {
        if i & cb != 0 {
            for j in 0..1usize << d {
                v[(i, j)] = if j & cb != 0 { u[(i, j)] } else { Complex64::new(0.0, 0.0) };
            }
        }
    }
    let e = dense(&key.err);
    let ep = &v * &e * v.adjoint();
    let ed = e.adjoint();
    // E' = E · C_c(K)
    if let Some(k) = as_controlled_pauli(&(&ed * &ep), key.control) {
        let mut out = controlled(key.control, &k);
        out.push(key.err.clone());
        return Some(out);
    }
    // E' = C_c(K) · E
    if let Some(k) = as_controlled_pauli(&(&ep * &ed), key.control) {
        let mut out = vec![key.err.clone()];
        out.extend(controlled(key.control, &k));
        return Some(out);
    }
    let all: Vec<usize> = (0..d).collect();
    canonicalize_psc(&ep, &all).ok().map(|l| vec![ErrorGate::Psc(l.form)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{unitary_residual, DenseState};

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn check(e: &ErrorGate, g: &GateKind) -> Vec<ErrorGate> {
        let out = rule_lookup(e, g).unwrap();
        let n = e.n();
        let apply = |s: &mut DenseState, k: &GateKind| crate::oracle::apply_gate(s, k);
        let r = unitary_residual(
            n,
            |s| {
                s.apply_error_gate(e);
                apply(s, g);
            },
            |s| {
                apply(s, g);
                for x in &out {
                    s.apply_error_gate(x);
                }
            },
        )
        .unwrap();
        assert!(r < 1e-9, "{e:?} through {g:?} gave {out:?} (residual {r})");
        out
    }

    #[test]
    fn spectators_fold_onto_one_qubit() {
        for t in ["+_ZZY_", "+_XYY_", "-_YXYZ", "-_ZZYZ"] {
            let mut tp = p(t);
            if tp.acts_on(0) {
                tp.set_z(0, false);
            }
            let e = ErrorGate::ControlledPauli { control: 0, target: tp };
            check(&e, &GateKind::ch(4, 3));
        }
    }

    #[test]
    fn x_on_target_through_ch() {
        let out = check(&ErrorGate::Pauli(p("+_X")), &GateKind::ch(0, 1));
        assert_eq!(
            out,
            vec![
                ErrorGate::Pauli(p("+_X")),
                ErrorGate::ControlledPauli { control: 0, target: p("+_Y") },
                ErrorGate::Psc(PscForm::phase_s().embed(2, &[0])),
            ]
        );
    }

    #[test]
    fn x_on_control_through_ch() {
        let out = check(&ErrorGate::Pauli(p("+X_")), &GateKind::ch(0, 1));
        assert_eq!(out, vec![ErrorGate::Psc(PscForm::hadamard().embed(2, &[1])), ErrorGate::Pauli(p("+X_"))]);
    }

    #[test]
    fn z_on_control_is_transparent() {
        let out = check(&ErrorGate::Pauli(p("+Z_")), &GateKind::ch(0, 1));
        assert_eq!(out, vec![ErrorGate::Pauli(p("+Z_"))]);
    }

    #[test]
    fn every_pauli_through_ch_and_cpsc() {
        let cz_form = PscForm::controlled_pauli(0, &p("+_Z"));
        let gates =
            [GateKind::ch(1, 0), GateKind::ControlledPsc { control: 2, targets: vec![0, 1], form: cz_form }];
        for g in &gates {
            for code in 0..64u64 {
                let q = PauliString::from_masks(3, code & 7, code >> 3, 0);
                check(&ErrorGate::Pauli(q), g);
            }
        }
    }

    #[test]
    fn controlled_y_meets_ch_on_other_control() {
        // {Y, H} = 0 on the shared target: a CZ appears between the controls
        let e = ErrorGate::ControlledPauli { control: 0, target: p("+__Y") };
        let out = check(&e, &GateKind::ch(1, 2));
        assert!(out.iter().any(|g| matches!(g, ErrorGate::ControlledPauli { target, .. } if target.letter(0) == 'Z' || target.letter(1) == 'Z')));
    }

    #[test]
    fn hadamard_error_through_clifford_gates() {
        let e = ErrorGate::Psc(PscForm::hadamard().embed(2, &[1]));
        check(&e, &GateKind::CZ(0, 1));
        check(&e, &GateKind::CX(0, 1));
        check(&ErrorGate::ControlledPauli { control: 0, target: p("+_Y") }, &GateKind::CX(0, 1));
        check(&ErrorGate::ControlledPauli { control: 0, target: p("+_Y") }, &GateKind::H(0));
    }

    #[test]
    fn disjoint_support_unchanged() {
        let e = ErrorGate::Psc(PscForm::phase_s().embed(3, &[2]));
        assert_eq!(rule_lookup(&e, &GateKind::ch(0, 1)).unwrap(), vec![e]);
    }

    #[test]
    fn non_clifford_result_is_rejected() {
        // S on the target of CH conjugates to a non-Clifford unitary
        let e = ErrorGate::Psc(PscForm::phase_s().embed(2, &[1]));
        assert!(matches!(rule_lookup(&e, &GateKind::ch(0, 1)), Err(PropagationError::UnhandledPair { .. })));
    }
}
