use msp_core::circuit::{
    build_422_toy, build_shor_style_protocol, build_standard_protocol, build_steane_h, steane_code, CodeSpec,
    ProtocolCircuit, Round, ShorOptions,
};
use msp_core::noise::ErrorConfig;
use msp_core::oracle::{apply_circuit, unitary_residual_probe, DenseState};
use msp_core::propagation::{
    propagate, propagate_per_location, propagate_transversal_nonclifford, steane_analytic_error,
    alternating_schedule, is_coupling_ancilla_location, max_single_error_gate_count, steane_analytic_from_bits,
    CliffordErrorSeq, LabelBits, ProtocolShape, Transcription,
};
use msp_core::PauliString;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_config(c: &ProtocolCircuit, rate: f64, rng: &mut ChaCha8Rng) -> ErrorConfig {
    let n = c.n();
    let errs = c
        .locations
        .iter()
        .map(|loc| {
            let mut p = PauliString::identity(n);
            if rng.gen::<f64>() < rate {
                for &q in &loc.qubits {
                    p.set_x(q, rng.gen());
                    p.set_z(q, rng.gen());
                }
            }
            p
        })
        .collect();
    ErrorConfig::from_dense(errs)
}

fn residual(c: &ProtocolCircuit, config: &ErrorConfig, seq: &CliffordErrorSeq, rng: &mut ChaCha8Rng) -> f64 {
    unitary_residual_probe(
        c.n(),
        |s: &mut DenseState| apply_circuit(s, c, Some(config)),
        |s: &mut DenseState| {
            apply_circuit(s, c, None);
            for g in &seq.gates {
                s.apply_error_gate(g);
            }
        },
        2,
        rng,
    )
    .unwrap()
}

fn soundness(c: &ProtocolCircuit, configs: usize, rate: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..configs {
        let cfg = random_config(c, rate, &mut rng);
        let seq = propagate(c, &cfg).unwrap_or_else(|e| panic!("{}: config {k}: {e}", c.name));
        let r = residual(c, &cfg, &seq, &mut rng);
        assert!(r <= 1e-9, "{}: config {k} residual {r}", c.name);
    }
}

#[test]
fn toy_protocol_soundness() {
    soundness(&build_422_toy(), 200, 0.15, 11);
}

#[test]
fn steane_protocol_soundness() {
    soundness(&build_steane_h(), 200, 0.1, 12);
}

#[test]
fn standard_and_shor_soundness() {
    let code = CodeSpec::c4();
    let sched = [Round::Psc, Round::all_stabilizers(&code)];
    soundness(&build_standard_protocol(&code, &sched).unwrap(), 40, 0.1, 13);
    let shor = build_shor_style_protocol(&code, &[Round::Psc], ShorOptions { verify_cat: false }).unwrap();
    assert!(shor.n() <= 12, "{}", shor.n());
    soundness(&shor, 10, 0.1, 14);
}

#[test]
fn single_x_on_toy_data_qubit() {
    let c = build_422_toy();
    let l = c.locations.iter().position(|l| l.qubits == [1]).unwrap();
    let mut errs = vec![PauliString::identity(c.n()); c.m()];
    errs[l] = PauliString::single(c.n(), 1, 'X');
    let cfg = ErrorConfig::from_dense(errs);
    let seq = propagate(&c, &cfg).unwrap();
    // the single X spreads into an entangling Clifford error
    assert!(seq.counts().controlled_pauli >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(residual(&c, &cfg, &seq, &mut rng) <= 1e-9);
}

#[test]
fn per_location_mode_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for c in [build_422_toy(), build_steane_h()] {
        for _ in 0..30 {
            let cfg = random_config(&c, 0.1, &mut rng);
            let a = propagate(&c, &cfg).unwrap();
            let b = propagate_per_location(&c, &cfg).unwrap();
            let r = unitary_residual_probe(
                c.n(),
                |s: &mut DenseState| a.gates.iter().for_each(|g| s.apply_error_gate(g)),
                |s: &mut DenseState| b.gates.iter().for_each(|g| s.apply_error_gate(g)),
                2,
                &mut rng,
            )
            .unwrap();
            assert!(r <= 1e-9);
        }
    }
}

#[test]
fn z_on_control_passes_unchanged() {
    let c = build_steane_h();
    // Z on the control right after the first controlled H survives as a bare Z
    let l = c.locations.iter().position(|l| l.labels == [3, 4]).unwrap();
    let mut errs = vec![PauliString::identity(c.n()); c.m()];
    errs[l] = PauliString::single(c.n(), 7, 'Z');
    let seq = propagate(&c, &ErrorConfig::from_dense(errs)).unwrap();
    assert_eq!(seq.as_pauli(), Some(PauliString::single(c.n(), 7, 'Z')));
}

#[test]
fn analytic_formula_matches_propagation() {
    let c = build_steane_h();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..120 {
        let bits = LabelBits::random(&mut rng);
        let cfg = bits.to_config(&c);
        let prop = propagate(&c, &cfg).unwrap();
        let ana = steane_analytic_error(&c, &cfg, Transcription::Corrected).unwrap();
        let r = unitary_residual_probe(
            c.n(),
            |s: &mut DenseState| prop.gates.iter().for_each(|g| s.apply_error_gate(g)),
            |s: &mut DenseState| ana.gates.iter().for_each(|g| s.apply_error_gate(g)),
            2,
            &mut rng,
        )
        .unwrap();
        assert!(r <= 1e-9, "assignment {k}: residual {r}");
    }
}

#[test]
fn printed_formula_differs_on_a33() {
    let c = build_steane_h();
    let mut bits = LabelBits::default();
    bits.a[33] = true;
    let prop = propagate(&c, &bits.to_config(&c)).unwrap();
    let printed = steane_analytic_from_bits(&bits, Transcription::AsPrinted);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r = unitary_residual_probe(
        c.n(),
        |s: &mut DenseState| prop.gates.iter().for_each(|g| s.apply_error_gate(g)),
        |s: &mut DenseState| printed.gates.iter().for_each(|g| s.apply_error_gate(g)),
        2,
        &mut rng,
    )
    .unwrap();
    assert!(r > 1e-3);
}

#[test]
fn transversal_t_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..40 {
        let n = 3;
        let mut frame = PauliString::identity(n);
        for q in 0..n {
            frame.set_x(q, rng.gen());
            frame.set_z(q, rng.gen());
        }
        let part: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let seq = propagate_transversal_nonclifford(&frame, &part);
        let tbar = |s: &mut DenseState| {
            for (q, &a) in part.iter().enumerate() {
                if a {
                    s.apply_t(q);
                } else {
                    s.apply_phase(q, num_complex::Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4));
                }
            }
        };
        let r = unitary_residual_probe(
            n,
            |s: &mut DenseState| {
                s.apply_pauli(&frame);
                tbar(s);
            },
            |s: &mut DenseState| {
                tbar(s);
                seq.gates.iter().for_each(|g| s.apply_error_gate(g));
            },
            3,
            &mut rng,
        )
        .unwrap();
        assert!(r <= 1e-9);
    }
}

#[test]
fn gate_count_scaling_on_standard_steane() {
    let code = steane_code();
    let mut kappa = None;
    for r in 1..=4 {
        let sched = alternating_schedule(&code, r);
        let c = build_standard_protocol(&code, &sched).unwrap();
        let scale = ProtocolShape::new(&code, &sched).single_error_scale();
        let g = max_single_error_gate_count(&c, |_| true).unwrap() as f64;
        let k = *kappa.get_or_insert(g / scale);
        assert!(g <= k * scale + 1e-9, "r={r}: {g} > {}", k * scale);
    }
}

#[test]
fn shor_style_coupling_errors_ignore_code_weight() {
    for r in 1..=2 {
        let counts: Vec<usize> = [4, 6, 8]
            .into_iter()
            .map(|n| {
                let code = CodeSpec::iceberg(n);
                let c = build_shor_style_protocol(&code, &alternating_schedule(&code, r), ShorOptions::default())
                    .unwrap();
                max_single_error_gate_count(&c, |l| is_coupling_ancilla_location(&c, l)).unwrap()
            })
            .collect();
        assert!(counts.windows(2).all(|w| w[0] == w[1]), "r={r}: {counts:?}");
    }
}

#[test]
fn wide_controlled_errors_stay_sound() {
    let code = CodeSpec::c4();
    let c = build_standard_protocol(&code, &alternating_schedule(&code, 4)).unwrap();
    soundness(&c, 60, 0.1, 15);
}
