use super::{
    Channel, CodeSpec, ErrorLocation, GateKind, InitState, MeasRole, Measurement, Op, ProtocolCircuit, ProtocolGate,
};
use crate::clifford::LocalPsc;
use crate::pauli::PauliString;

/// Incremental construction of a `ProtocolCircuit`.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    c: ProtocolCircuit,
    busy: Vec<usize>,
    pending_meas_noise: Vec<(Channel, usize)>,
}

impl CircuitBuilder {
    pub fn new(name: &str, n_data: usize, n_anc: usize) -> Self {
        let n = n_data + n_anc;
        Self {
            c: ProtocolCircuit {
                name: name.to_string(),
                n_data,
                n_anc,
                init: vec![InitState::Zero; n],
                gates: Vec::new(),
                locations: Vec::new(),
                ops: Vec::new(),
                measurements: Vec::new(),
                logical_observables: Vec::new(),
            },
            busy: vec![0; n],
            pending_meas_noise: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.c.n()
    }

    /// Adds one ancilla qubit and returns its index.
    pub fn add_ancilla(&mut self) -> usize {
        let q = self.c.n();
        self.c.n_anc += 1;
        self.c.init.push(InitState::Zero);
        self.busy.push(0);
        for p in self.c.logical_observables.iter_mut() {
            *p = widen(p, q + 1);
        }
        for m in self.c.measurements.iter_mut() {
            m.observable = widen(&m.observable, q + 1);
        }
        q
    }

    /// Sets the initial state and, for noisy preparations, the matching init location.
    pub fn init(&mut self, q: usize, s: InitState, t: usize) -> Option<usize> {
        self.c.init[q] = s;
        self.busy[q] = self.busy[q].max(t);
        let ch = match s {
            InitState::Zero => Channel::Init0,
            InitState::Plus => Channel::InitPlus,
            InitState::MagicH => Channel::InitMagicH,
            InitState::MagicT => Channel::InitMagicT,
            InitState::Logical => return None,
        };
        Some(self.noise(ch, &[q], t, &[]))
    }

    /// Sets the initial state without an error location.
    pub fn init_silent(&mut self, q: usize, s: InitState) {
        self.c.init[q] = s;
    }

    pub fn noise(&mut self, channel: Channel, qubits: &[usize], t: usize, labels: &[u32]) -> usize {
        let id = self.c.locations.len();
        self.c.locations.push(ErrorLocation {
            id,
            time_step: t,
            qubits: qubits.to_vec(),
            channel,
            labels: labels.to_vec(),
        });
        self.c.ops.push(Op::Noise(id));
        id
    }

    pub fn gate(&mut self, kind: GateKind, t: usize) -> usize {
        let g = self.c.gates.len();
        for q in kind.qubits() {
            self.busy[q] = self.busy[q].max(t);
        }
        self.c.gates.push(ProtocolGate { kind, time_step: t });
        self.c.ops.push(Op::Gate(g));
        g
    }

    /// Gate followed by depolarizing noise on its qubits.
    pub fn gate_noisy(&mut self, kind: GateKind, t: usize) -> usize {
        let qs = kind.qubits();
        let g = self.gate(kind, t);
        match qs.len() {
            1 => {
                self.noise(Channel::Depol1, &qs, t, &[]);
            }
            2 => {
                self.noise(Channel::Depol2, &qs, t, &[]);
            }
            _ => {
                for q in qs {
                    self.noise(Channel::Depol1, &[q], t, &[]);
                }
            }
        }
        g
    }

    /// Earliest step after every gate already touching the qubits.
    pub fn next_step(&self, qubits: &[usize]) -> usize {
        qubits.iter().map(|&q| self.busy[q]).max().unwrap_or(0) + 1
    }

    pub fn busy_until(&self, q: usize) -> usize {
        self.busy[q]
    }

    pub fn measure(&mut self, observable: PauliString, role: MeasRole) {
        self.c.measurements.push(Measurement { observable, role });
    }

    /// Single-qubit X or Z measurement with its error placed before it.
    pub fn measure_qubit(&mut self, q: usize, x_basis: bool, role: MeasRole) {
        let n = self.n();
        let (obs, ch) = if x_basis {
            (PauliString::single(n, q, 'X'), Channel::MeasX)
        } else {
            (PauliString::single(n, q, 'Z'), Channel::MeasZ)
        };
        self.measure(obs, role);
        self.pending_meas_noise.push((ch, q));
    }

    /// Parity measurement of X on every listed qubit, with per-qubit measurement errors.
    pub fn measure_x_parity(&mut self, qubits: &[usize], role: MeasRole) {
        let n = self.n();
        self.measure(PauliString::x_on(n, qubits), role);
        for &q in qubits {
            self.pending_meas_noise.push((Channel::MeasX, q));
        }
    }

    pub fn set_observables(&mut self, obs: Vec<PauliString>) {
        self.c.logical_observables = obs;
    }

    pub fn finish(mut self) -> ProtocolCircuit {
        let t_end = self.busy.iter().copied().max().unwrap_or(0) + 1;
        let pending = std::mem::take(&mut self.pending_meas_noise);
        for (ch, q) in pending {
            self.noise(ch, &[q], t_end, &[]);
        }
        let n = self.c.n();
        for m in self.c.measurements.iter_mut() {
            m.observable = widen(&m.observable, n);
        }
        for p in self.c.logical_observables.iter_mut() {
            *p = widen(p, n);
        }
        self.c.validate().expect("builder produced an invalid circuit");
        self.c
    }
}

fn widen(p: &PauliString, n: usize) -> PauliString {
    if p.n() == n {
        return p.clone();
    }
    let qs: Vec<usize> = (0..p.n()).collect();
    p.embed(n, &qs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Round {
    /// Measure the listed stabilizers (indices into the code's list).
    Stabilizers(Vec<usize>),
    /// Measure the transversal logical PSC.
    Psc,
}

impl Round {
    pub fn all_stabilizers(code: &CodeSpec) -> Round {
        Round::Stabilizers((0..code.stabilizers.len()).collect())
    }
}

fn check_schedule(code: &CodeSpec, schedule: &[Round]) -> Result<(), String> {
    for r in schedule {
        match r {
            Round::Stabilizers(ix) => {
                if let Some(&i) = ix.iter().find(|&&i| i >= code.stabilizers.len()) {
                    return Err(format!("schedule references stabilizer {i} not in the code"));
                }
            }
            Round::Psc => {
                if code.psc_factors.is_empty() {
                    return Err("psc round on a code without psc factors".into());
                }
                if code.psc_factors.iter().any(|f| f.form.order() != 2) {
                    return Err("order-4 psc measurement rounds are not supported".into());
                }
            }
        }
    }
    Ok(())
}

fn leg_gates(a: usize, g: &PauliString) -> Vec<GateKind> {
    let n = g.n();
    let mut out = Vec::new();
    for q in g.support() {
        out.push(match g.letter(q) {
            'X' => GateKind::CX(a, q),
            'Z' => GateKind::CZ(a, q),
            _ => GateKind::ControlledPauli { control: a, target: PauliString::single(n, q, 'Y') },
        });
    }
    out
}

fn data_frame(b: &mut CircuitBuilder, n_data: usize) {
    for q in 0..n_data {
        b.init_silent(q, InitState::Logical);
        b.noise(Channel::Depol1, &[q], 0, &[]);
    }
}

fn logical_observables(code: &CodeSpec) -> Vec<PauliString> {
    code.logical_x.iter().zip(&code.logical_z).flat_map(|(x, z)| [x.clone(), z.clone()]).collect()
}

/// One bare `|+⟩` ancilla per measured operator.
pub fn build_standard_protocol(code: &CodeSpec, schedule: &[Round]) -> Result<ProtocolCircuit, String> {
    check_schedule(code, schedule)?;
    let nd = code.n();
    let mut b = CircuitBuilder::new("standard", nd, 0);
    data_frame(&mut b, nd);
    b.set_observables(logical_observables(code));
    let mut t = 0;
    for r in schedule {
        match r {
            Round::Psc => {
                let a = b.add_ancilla();
                t += 1;
                b.init(a, InitState::Plus, t);
                for f in &code.psc_factors {
                    t += 1;
                    b.gate_noisy(GateKind::ControlledPsc { control: a, targets: f.support.clone(), form: f.form.clone() }, t);
                }
                b.measure_qubit(a, true, MeasRole::Psc);
            }
            Round::Stabilizers(ix) => {
                for &i in ix {
                    let g = &code.stabilizers[i];
                    let a = b.add_ancilla();
                    t += 1;
                    b.init(a, InitState::Plus, t);
                    for k in leg_gates(a, &g.unsigned().embed(b.n(), &(0..nd).collect::<Vec<_>>())) {
                        t += 1;
                        b.gate_noisy(k, t);
                    }
                    if g.text_phase() == 2 {
                        t += 1;
                        b.gate(GateKind::Z(a), t);
                    }
                    b.measure_qubit(a, true, MeasRole::Stabilizer);
                }
            }
        }
    }
    Ok(b.finish())
}

/// The `[[4,2,2]]` toy protocol: two rounds of logical `H⊗H` and stabilizer measurements.
pub fn build_422_toy() -> ProtocolCircuit {
    let code = CodeSpec::c4();
    let sched = [Round::Psc, Round::all_stabilizers(&code), Round::Psc, Round::all_stabilizers(&code)];
    let mut c = build_standard_protocol(&code, &sched).expect("toy schedule is valid");
    c.name = "toy-422".into();
    c
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ShorOptions {
    /// Adds a flag qubit checking `Z_{a_1} Z_{a_w}` of every CAT block.
    pub verify_cat: bool,
}

enum Leg {
    Pauli(GateKind),
    Psc(LocalPsc),
}

/// Each weight-w operator is measured from a w-qubit CAT block.
pub fn build_shor_style_protocol(
    code: &CodeSpec,
    schedule: &[Round],
    opts: ShorOptions,
) -> Result<ProtocolCircuit, String> {
    check_schedule(code, schedule)?;
    let nd = code.n();
    let mut b = CircuitBuilder::new("shor", nd, 0);
    data_frame(&mut b, nd);
    b.set_observables(logical_observables(code));
    let mut t = 0;
    for r in schedule {
        let mut blocks: Vec<(Vec<Leg>, MeasRole, bool)> = Vec::new();
        match r {
            Round::Psc => {
                blocks.push((code.psc_factors.iter().cloned().map(Leg::Psc).collect(), MeasRole::Psc, false));
            }
            Round::Stabilizers(ix) => {
                for &i in ix {
                    let g = &code.stabilizers[i];
                    let legs = leg_gates(0, g).into_iter().map(Leg::Pauli).collect();
                    blocks.push((legs, MeasRole::Stabilizer, g.text_phase() == 2));
                }
            }
        }
        for (legs, role, negative) in blocks {
            let w = legs.len();
            let cat: Vec<usize> = (0..w).map(|_| b.add_ancilla()).collect();
            t += 1;
            b.init(cat[0], InitState::Plus, t);
            for &a in &cat[1..] {
                b.init(a, InitState::Zero, t);
            }
            for &a in &cat[1..] {
                t += 1;
                b.gate_noisy(GateKind::CX(cat[0], a), t);
            }
            if opts.verify_cat && w > 1 {
                let f = b.add_ancilla();
                b.init(f, InitState::Zero, t);
                t += 1;
                b.gate_noisy(GateKind::CX(cat[0], f), t);
                t += 1;
                b.gate_noisy(GateKind::CX(cat[w - 1], f), t);
                b.measure_qubit(f, false, MeasRole::Flag);
            }
            let n = b.n();
            for (leg, &a) in legs.into_iter().zip(&cat) {
                t += 1;
                let kind = match leg {
                    Leg::Psc(f) => GateKind::ControlledPsc { control: a, targets: f.support, form: f.form },
                    Leg::Pauli(k) => retarget(k, a, n),
                };
                b.gate_noisy(kind, t);
            }
            if negative {
                t += 1;
                b.gate(GateKind::Z(cat[0]), t);
            }
            b.measure_x_parity(&cat, role);
        }
    }
    Ok(b.finish())
}

fn retarget(k: GateKind, a: usize, n: usize) -> GateKind {
    match k {
        GateKind::CX(_, q) => GateKind::CX(a, q),
        GateKind::CZ(_, q) => GateKind::CZ(a, q),
        GateKind::ControlledPauli { target, .. } => {
            let qs: Vec<usize> = (0..target.n()).collect();
            GateKind::ControlledPauli { control: a, target: target.embed(n, &qs) }
        }
        other => other,
    }
}

/// Distillation as a Clifford circuit: n noisy magic inputs, decoder, Z checks on qubits k..n.
pub fn build_msd_protocol(
    decoder: &[ProtocolGate],
    n: usize,
    k: usize,
    input: InitState,
) -> Result<ProtocolCircuit, String> {
    if !matches!(input, InitState::MagicH | InitState::MagicT) {
        return Err("distillation inputs must be magic states".into());
    }
    if k > n {
        return Err("k exceeds n".into());
    }
    if let Some(g) = decoder.iter().find(|g| !g.kind.is_clifford()) {
        return Err(format!("non-Clifford gate in decoder: {:?}", g.kind));
    }
    let mut b = CircuitBuilder::new("msd", k, n - k);
    for q in 0..n {
        b.init(q, input, 0);
    }
    for g in decoder {
        if g.kind.qubits().iter().any(|&q| q >= n) {
            return Err("decoder gate out of range".into());
        }
        b.gate(g.kind.clone(), g.time_step.max(1));
    }
    for q in k..n {
        let obs = PauliString::single(n, q, 'Z');
        b.measure(obs, MeasRole::Check);
    }
    let mut obs = Vec::new();
    for q in 0..k {
        obs.push(PauliString::single(n, q, 'X'));
        obs.push(PauliString::single(n, q, if input == InitState::MagicT { 'Y' } else { 'Z' }));
    }
    b.set_observables(obs);
    Ok(b.finish())
}
