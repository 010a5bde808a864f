use num_complex::Complex64;

use super::{DenseState, OracleError};
use crate::circuit::{GateKind, InitState, Measurement, Op, ProtocolCircuit};
use crate::noise::ErrorConfig;

pub fn apply_gate(s: &mut DenseState, kind: &GateKind) {
    match kind {
        GateKind::H(q) => s.apply_h(*q),
        GateKind::S(q) => s.apply_s(*q),
        GateKind::Sdg(q) => s.apply_sdg(*q),
        GateKind::X(q) | GateKind::Y(q) | GateKind::Z(q) => {
            let l = match kind {
                GateKind::X(_) => 'X',
                GateKind::Y(_) => 'Y',
                _ => 'Z',
            };
            s.apply_pauli(&crate::pauli::PauliString::single(s.n(), *q, l));
        }
        GateKind::CX(c, t) => s.apply_cx(*c, *t),
        GateKind::CZ(a, b) => s.apply_cz(*a, *b),
        GateKind::ControlledPauli { control, target } => s.apply_controlled_pauli(*control, target),
        GateKind::ControlledPsc { control, targets, form } => {
            s.apply_controlled_psc(*control, &form.embed(s.n(), targets))
        }
    }
}

/// Runs every gate, inserting the configured errors at their locations.
pub fn apply_circuit(s: &mut DenseState, c: &ProtocolCircuit, config: Option<&ErrorConfig>) {
    for op in &c.ops {
        match *op {
            Op::Gate(g) => apply_gate(s, &c.gates[g].kind),
            Op::Noise(l) => {
                if let Some(p) = config.and_then(|cfg| cfg.get(l)) {
                    s.apply_pauli(p);
                }
            }
        }
    }
}

/// Product input from the init tags; `Logical` data qubits take `data` (on qubits `0..n_data`).
pub fn input_state(c: &ProtocolCircuit, data: Option<&DenseState>) -> Result<DenseState, OracleError> {
    let n = c.n();
    let logical = c.init.contains(&InitState::Logical);
    let (mut st, offset) = match (logical, data) {
        (true, Some(d)) => {
            if d.n() != c.n_data || c.init[c.n_data..].contains(&InitState::Logical) {
                return Err(OracleError::Input("logical input must cover exactly the data qubits".into()));
            }
            (d.tensor(&DenseState::zero(n - c.n_data)?)?, c.n_data)
        }
        (true, None) => return Err(OracleError::Input("circuit needs a logical data input".into())),
        (false, _) => (DenseState::zero(n)?, 0),
    };
    let (cs, sn) = ((std::f64::consts::PI / 8.0).cos(), (std::f64::consts::PI / 8.0).sin());
    for q in offset..n {
        match c.init[q] {
            InitState::Zero | InitState::Logical => {}
            InitState::Plus => st.apply_h(q),
            InitState::MagicH => {
                st.apply_1q(q, [[Complex64::new(cs, 0.0), Complex64::new(-sn, 0.0)], [Complex64::new(sn, 0.0), Complex64::new(cs, 0.0)]]);
            }
            InitState::MagicT => {
                st.apply_h(q);
                st.apply_t(q);
            }
        }
    }
    Ok(st)
}

/// Exact run: outcome probabilities and the state after projecting every measurement on +1.
#[derive(Clone, Debug)]
pub struct DenseRun {
    pub pre_measure: DenseState,
    pub accept_prob: f64,
    /// Normalized post-selected state; `None` when the accept probability vanishes.
    pub post: Option<DenseState>,
}

pub fn run_protocol_dense(
    c: &ProtocolCircuit,
    config: &ErrorConfig,
    input: &DenseState,
) -> Result<DenseRun, OracleError> {
    if config.m != c.m() {
        return Err(OracleError::ConfigLength(config.m, c.m()));
    }
    if input.n() != c.n() {
        return Err(OracleError::Input("input width".into()));
    }
    let mut s = input.clone();
    apply_circuit(&mut s, c, Some(config));
    let pre = s.clone();
    let mut acc = 1.0;
    for m in &c.measurements {
        acc = s.project(&m.observable, true);
        if acc < 1e-300 {
            break;
        }
    }
    let post = if acc > 1e-14 {
        s.normalize();
        Some(s)
    } else {
        None
    };
    Ok(DenseRun { pre_measure: pre, accept_prob: if post.is_some() { acc } else { 0.0 }, post })
}

/// Probabilities of all `2^m` outcome strings (bit j set = outcome −1 on measurement j).
pub fn outcome_distribution(s: &DenseState, ms: &[Measurement]) -> Vec<f64> {
    assert!(ms.len() <= 20);
    let mut out = vec![0.0; 1 << ms.len()];
    for (x, o) in out.iter_mut().enumerate() {
        let mut t = s.clone();
        let mut w = t.norm_sqr();
        for (j, m) in ms.iter().enumerate() {
            w = t.project(&m.observable, x >> j & 1 == 0);
            if w < 1e-300 {
                break;
            }
        }
        *o = w;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_422_toy, build_steane_h};

    #[test]
    fn noiseless_steane_accepts() {
        let c = build_steane_h();
        let input = input_state(&c, None).unwrap();
        let r = run_protocol_dense(&c, &ErrorConfig::trivial(c.m()), &input).unwrap();
        assert!((r.accept_prob - 1.0).abs() < 1e-10);
    }

    #[test]
    fn toy_distribution_normalized() {
        let c = build_422_toy();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let data = DenseState::random(4, &mut rng).unwrap();
        let input = input_state(&c, Some(&data)).unwrap();
        let mut errs = vec![crate::pauli::PauliString::identity(c.n()); c.m()];
        errs[0] = crate::pauli::PauliString::single(c.n(), 0, 'X');
        let r = run_protocol_dense(&c, &ErrorConfig::from_dense(errs), &input).unwrap();
        let total: f64 = outcome_distribution(&r.pre_measure, &c.measurements).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
