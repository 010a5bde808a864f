//! Line-oriented protocol text format.
//!
//! ```text
//! NAME toy
//! QUBITS 4 1
//! INIT 4 plus
//! CH 4 0 @2
//! #LOC 3 depol2 4,0 @2
//! MX 4 role=psc
//! OBS +XX___
//! ```
//! Lines starting with `#` other than `#LOC` are comments.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Channel, ErrorLocation, GateKind, InitState, MeasRole, Measurement, Op, ProtocolCircuit, ProtocolGate};
use crate::clifford::PscForm;
use crate::pauli::PauliString;

#[derive(Debug, Error)]
pub enum DslError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid circuit: {0}")]
    Invalid(String),
}

fn qlist(qs: &[usize]) -> String {
    qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
}

pub fn write_circuit(c: &ProtocolCircuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "NAME {}", c.name);
    let _ = writeln!(s, "QUBITS {} {}", c.n_data, c.n_anc);
    for (q, st) in c.init.iter().enumerate() {
        if *st != InitState::Zero {
            let _ = writeln!(s, "INIT {q} {}", st.tag());
        }
    }
    for op in &c.ops {
        match *op {
            Op::Gate(g) => {
                let g = &c.gates[g];
                let t = g.time_step;
                let _ = match &g.kind {
                    GateKind::H(q) => writeln!(s, "H {q} @{t}"),
                    GateKind::S(q) => writeln!(s, "S {q} @{t}"),
                    GateKind::Sdg(q) => writeln!(s, "SDG {q} @{t}"),
                    GateKind::X(q) => writeln!(s, "X {q} @{t}"),
                    GateKind::Y(q) => writeln!(s, "Y {q} @{t}"),
                    GateKind::Z(q) => writeln!(s, "Z {q} @{t}"),
                    GateKind::CX(a, b) => writeln!(s, "CX {a} {b} @{t}"),
                    GateKind::CZ(a, b) => writeln!(s, "CZ {a} {b} @{t}"),
                    GateKind::ControlledPauli { control, target } => writeln!(s, "CP {control} {target} @{t}"),
                    GateKind::ControlledPsc { control, targets, form } => {
                        if form.is_hadamard_form() {
                            writeln!(s, "CH {control} {} @{t}", targets[0])
                        } else {
                            writeln!(s, "CPSC {control} {} @{t} {}", qlist(targets), form.to_json())
                        }
                    }
                };
            }
            Op::Noise(l) => {
                let l = &c.locations[l];
                let _ = write!(s, "#LOC {} {} {} @{}", l.id, l.channel.tag(), qlist(&l.qubits), l.time_step);
                if !l.labels.is_empty() {
                    let labs: Vec<String> = l.labels.iter().map(|x| x.to_string()).collect();
                    let _ = write!(s, " [{}]", labs.join(","));
                }
                s.push('\n');
            }
        }
    }
    for m in &c.measurements {
        let o = &m.observable;
        let single = o.weight() == 1 && o.text_phase() == 0;
        let sup = o.support();
        let role = m.role.tag();
        let _ = if single && o.letter(sup[0]) == 'X' {
            writeln!(s, "MX {} role={role}", sup[0])
        } else if single && o.letter(sup[0]) == 'Z' {
            writeln!(s, "MZ {} role={role}", sup[0])
        } else {
            writeln!(s, "MEAS {o} role={role}")
        };
    }
    for o in &c.logical_observables {
        let _ = writeln!(s, "OBS {o}");
    }
    s
}

struct Parser {
    c: ProtocolCircuit,
    line: usize,
}

impl Parser {
    fn err(&self, msg: impl Into<String>) -> DslError {
        DslError::Syntax { line: self.line, msg: msg.into() }
    }

    fn num(&self, s: &str) -> Result<usize, DslError> {
        s.parse().map_err(|_| self.err(format!("bad integer {s:?}")))
    }

    fn qubit(&self, s: &str) -> Result<usize, DslError> {
        let q = self.num(s)?;
        if q >= self.c.n() {
            return Err(self.err(format!("qubit {q} out of range")));
        }
        Ok(q)
    }

    fn list(&self, s: &str) -> Result<Vec<usize>, DslError> {
        s.split(',').map(|x| self.qubit(x)).collect()
    }

    fn time(&self, s: Option<&&str>) -> Result<usize, DslError> {
        let s = s.ok_or_else(|| self.err("missing @time"))?;
        let t = s.strip_prefix('@').ok_or_else(|| self.err("expected @time"))?;
        self.num(t)
    }

    fn pauli(&self, s: &str) -> Result<PauliString, DslError> {
        let p: PauliString = s.parse().map_err(|e| self.err(format!("{e}")))?;
        if p.n() != self.c.n() {
            return Err(self.err("pauli width does not match register"));
        }
        Ok(p)
    }

    fn role(&self, s: Option<&&str>) -> Result<MeasRole, DslError> {
        let s = s.and_then(|s| s.strip_prefix("role=")).ok_or_else(|| self.err("missing role="))?;
        MeasRole::from_tag(s).ok_or_else(|| self.err(format!("unknown role {s}")))
    }

    fn push_gate(&mut self, kind: GateKind, time_step: usize) {
        self.c.ops.push(Op::Gate(self.c.gates.len()));
        self.c.gates.push(ProtocolGate { kind, time_step });
    }

    fn line(&mut self, raw: &str) -> Result<(), DslError> {
        let text = raw.trim();
        if text.is_empty() || (text.starts_with('#') && !text.starts_with("#LOC")) {
            return Ok(());
        }
        let tok: Vec<&str> = text.split_whitespace().collect();
        let head = tok[0];
        if head != "NAME" && head != "QUBITS" && self.c.init.is_empty() && self.c.n() == 0 {
            return Err(self.err("QUBITS must come first"));
        }
        let line = self.line;
        let arg = |i: usize| {
            tok.get(i).copied().ok_or_else(|| DslError::Syntax { line, msg: format!("{head}: missing argument") })
        };
        match head {
            "NAME" => self.c.name = text[4..].trim().to_string(),
            "QUBITS" => {
                self.c.n_data = self.num(arg(1)?)?;
                self.c.n_anc = self.num(arg(2)?)?;
                self.c.init = vec![InitState::Zero; self.c.n()];
            }
            "INIT" => {
                let q = self.qubit(arg(1)?)?;
                let tag = arg(2)?;
                self.c.init[q] = InitState::from_tag(tag).ok_or_else(|| self.err(format!("unknown init {tag}")))?;
            }
            "H" | "S" | "SDG" | "X" | "Y" | "Z" => {
                let q = self.qubit(arg(1)?)?;
                let t = self.time(tok.get(2))?;
                let k = match head {
                    "H" => GateKind::H(q),
                    "S" => GateKind::S(q),
                    "SDG" => GateKind::Sdg(q),
                    "X" => GateKind::X(q),
                    "Y" => GateKind::Y(q),
                    _ => GateKind::Z(q),
                };
                self.push_gate(k, t);
            }
            "CX" | "CZ" | "CH" => {
                let a = self.qubit(arg(1)?)?;
                let b = self.qubit(arg(2)?)?;
                if a == b {
                    return Err(self.err("control equals target"));
                }
                let t = self.time(tok.get(3))?;
                let k = match head {
                    "CX" => GateKind::CX(a, b),
                    "CZ" => GateKind::CZ(a, b),
                    _ => GateKind::ch(a, b),
                };
                self.push_gate(k, t);
            }
            "CP" => {
                let c = self.qubit(arg(1)?)?;
                let target = self.pauli(arg(2)?)?;
                if target.acts_on(c) || !target.is_hermitian() {
                    return Err(self.err("CP target must be Hermitian and avoid the control"));
                }
                let t = self.time(tok.get(3))?;
                self.push_gate(GateKind::ControlledPauli { control: c, target }, t);
            }
            "CPSC" => {
                let c = self.qubit(arg(1)?)?;
                let targets = self.list(arg(2)?)?;
                let t = self.time(tok.get(3))?;
                let json = tok.get(4..).map(|r| r.join(" ")).unwrap_or_default();
                let form: PscForm = serde_json::from_str(&json).map_err(|e| self.err(format!("psc json: {e}")))?;
                if form.n() != targets.len() || targets.contains(&c) {
                    return Err(self.err("psc width does not match its targets"));
                }
                self.push_gate(GateKind::ControlledPsc { control: c, targets, form }, t);
            }
            "#LOC" => {
                let id = self.num(arg(1)?)?;
                if id != self.c.locations.len() {
                    return Err(self.err(format!("location id {id} out of sequence")));
                }
                let channel = Channel::from_tag(arg(2)?).ok_or_else(|| self.err("unknown channel"))?;
                let qubits = self.list(arg(3)?)?;
                let time_step = self.time(tok.get(4))?;
                let labels = match tok.get(5) {
                    None => Vec::new(),
                    Some(s) => {
                        let inner = s
                            .strip_prefix('[')
                            .and_then(|s| s.strip_suffix(']'))
                            .ok_or_else(|| self.err("labels must be [a,b]"))?;
                        inner.split(',').map(|x| self.num(x).map(|v| v as u32)).collect::<Result<_, _>>()?
                    }
                };
                self.c.ops.push(Op::Noise(id));
                self.c.locations.push(ErrorLocation { id, time_step, qubits, channel, labels });
            }
            "MX" | "MZ" => {
                let q = self.qubit(arg(1)?)?;
                let role = self.role(tok.get(2))?;
                let letter = if head == "MX" { 'X' } else { 'Z' };
                self.c.measurements.push(Measurement { observable: PauliString::single(self.c.n(), q, letter), role });
            }
            "MEAS" => {
                let observable = self.pauli(arg(1)?)?;
                let role = self.role(tok.get(2))?;
                self.c.measurements.push(Measurement { observable, role });
            }
            "OBS" => {
                let p = self.pauli(arg(1)?)?;
                self.c.logical_observables.push(p);
            }
            other => return Err(self.err(format!("unknown directive {other}"))),
        }
        Ok(())
    }
}

pub fn parse_circuit(text: &str) -> Result<ProtocolCircuit, DslError> {
    let mut p = Parser {
        c: ProtocolCircuit {
            name: String::new(),
            n_data: 0,
            n_anc: 0,
            init: Vec::new(),
            gates: Vec::new(),
            locations: Vec::new(),
            ops: Vec::new(),
            measurements: Vec::new(),
            logical_observables: Vec::new(),
        },
        line: 0,
    };
    for (i, l) in text.lines().enumerate() {
        p.line = i + 1;
        p.line(l)?;
    }
    p.c.validate().map_err(DslError::Invalid)?;
    Ok(p.c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_422_toy, build_steane_h};

    #[test]
    fn roundtrip_builtins() {
        for c in [build_422_toy(), build_steane_h()] {
            let s = write_circuit(&c);
            let back = parse_circuit(&s).unwrap();
            assert_eq!(back, c);
            assert_eq!(write_circuit(&back), s);
        }
    }

    #[test]
    fn cpsc_line() {
        let s = "QUBITS 2 1\nCPSC 2 0,1 @1 {\"alpha_exp8\":7,\"p\":\"+__\",\"q_set\":[\"+Z_\",\"+_Z\",\"-ZZ\"]}\n";
        let c = parse_circuit(s).unwrap();
        assert_eq!(c.gates.len(), 1);
        assert!(parse_circuit(&write_circuit(&c)).unwrap() == c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_circuit("QUBITS 1 0\nCX 0 3 @1\n").unwrap_err();
        assert!(matches!(e, DslError::Syntax { line: 2, .. }));
        assert!(parse_circuit("QUBITS 1 0\n#LOC 4 depol1 0 @1\n").is_err());
    }
}
