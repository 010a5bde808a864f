use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use msp_core::circuit::{
    build_standard_protocol, CircuitBuilder, CodeSpec, InitState, MeasRole, Measurement, Round,
};
use msp_core::estimators::*;
use msp_core::noise::{shot_rng, ChannelOverride, ErrorConfig, NoiseModel};
use msp_core::PauliString;
use num_complex::Complex64;

fn opts() -> RunOptions {
    RunOptions { workers: 2, timing: false }
}

fn sigma3(a: (f64, f64), b: (f64, f64)) -> bool {
    (a.0 - b.0).abs() <= 3.0 * (a.1 * a.1 + b.1 * b.1).sqrt() + 1e-12
}

#[test]
fn pauli_rank_matches_dense_shot_for_shot() {
    for name in BUILTIN_PROTOCOLS {
        let m = MagicProtocol::builtin(name).unwrap();
        let nm = NoiseModel::uniform(0.02).unwrap();
        let pr = PauliRankEstimator::new(&m, &nm).unwrap();
        let sv = StatevectorEstimator::new(&m, &nm).unwrap();
        let mut seen = 0;
        for shot in 0..400 {
            let cfg = pr.sampler().sample(9, shot);
            let a = pr.evaluate_config(&cfg).unwrap();
            let b = sv.evaluate(&cfg);
            assert!((a.a - b.a).abs() < 1e-10, "{name} shot {shot}: accept {} vs {}", a.a, b.a);
            assert!((a.f - b.f_logical).abs() < 1e-10, "{name} shot {shot}: fidelity {} vs {}", a.f, b.f_logical);
            seen += !cfg.is_trivial() as usize;
        }
        assert!(seen > 100);
    }
}

#[test]
fn steane_notions_coincide() {
    // the final stabilizer round projects the whole frame, so logical fidelity equals the full overlap
    let m = MagicProtocol::builtin("steane-h").unwrap();
    let sv = StatevectorEstimator::new(&m, &NoiseModel::uniform(0.02).unwrap()).unwrap();
    for shot in 0..200 {
        let d = sv.sample_shot(4, shot);
        assert!((d.f_logical - d.f_overlap).abs() < 1e-10);
    }
}

#[test]
fn noiseless_runs_are_exact() {
    for name in BUILTIN_PROTOCOLS {
        let m = MagicProtocol::builtin(name).unwrap();
        let nm = NoiseModel::uniform(0.0).unwrap();
        for f in [estimate_fidelity_pauli_rank, estimate_fidelity_stab_rank, estimate_fidelity_statevector] {
            let r = f(&m, &nm, 300, 1, &opts()).unwrap();
            assert_eq!(r.accepted, 300, "{name} {}", r.method);
            assert!((r.p_acc - 1.0).abs() < 1e-12);
            assert!((r.fidelity.unwrap() - 1.0).abs() < 1e-10);
            assert!(r.fidelity_err.unwrap() < 1e-6);
            assert_eq!(r.nontrivial, 0);
        }
        let (p, e) = acceptance_rate(&m, &NoiseModel::uniform(0.0).unwrap(), 50, 1, &opts()).unwrap();
        assert!((p - 1.0).abs() < 1e-12 && e < 1e-12);
    }
}

fn t_channel(px: f64, py: f64, pz: f64) -> (MagicProtocol, NoiseModel) {
    let mut b = CircuitBuilder::new("t-channel", 1, 0);
    b.init(0, InitState::MagicT, 0);
    b.set_observables(vec![PauliString::single(1, 0, 'X'), PauliString::single(1, 0, 'Z')]);
    let c = b.finish();
    let m = MagicProtocol::new(c, builtin_decomposition("T").unwrap(), None, vec![]).unwrap();
    let table: BTreeMap<String, f64> = [("X", px), ("Y", py), ("Z", pz)].map(|(l, p)| (l.to_string(), p)).into();
    let mut nm = NoiseModel::uniform(0.0).unwrap();
    nm.overrides.insert("init_magic_t".into(), ChannelOverride::Table(table));
    (m, nm)
}

#[test]
fn t_state_pauli_channel_closed_form() {
    let (px, py, pz) = (0.03, 0.05, 0.11);
    let (m, nm) = t_channel(px, py, pz);
    // ⟨X⟩ and ⟨Y⟩ on the output shrink by 1 − 2(py + pz) and 1 − 2(px + pz)
    let ex = (1.0 - 2.0 * (py + pz)) * FRAC_1_SQRT_2;
    let ey = (1.0 - 2.0 * (px + pz)) * FRAC_1_SQRT_2;
    let want = 0.5 + (ex + ey) / (2.0 * 2f64.sqrt());
    // exact average over the four channel outcomes
    let pr = PauliRankEstimator::new(&m, &nm).unwrap();
    let mut exact = (1.0 - px - py - pz) * pr.trivial_value().f;
    for (l, p) in [('X', px), ('Y', py), ('Z', pz)] {
        let cfg = ErrorConfig { m: 1, entries: vec![(0, PauliString::single(1, 0, l))] };
        exact += p * pr.evaluate_config(&cfg).unwrap().f;
    }
    assert!((exact - want).abs() < 1e-12, "{exact} vs {want}");
    let r = estimate_fidelity_pauli_rank(&m, &nm, 40_000, 3, &opts()).unwrap();
    assert!(sigma3((r.fidelity.unwrap(), r.fidelity_err.unwrap()), (want, 0.0)), "{r:?}");
    assert_eq!(r.accepted, 40_000);
}

/// `|0̄0̄⟩` through one stabilizer round of the [[4,2,2]] code plus an ideal final round.
fn stabilizer_target() -> MagicProtocol {
    let code = CodeSpec::c4();
    let mut c = build_standard_protocol(&code, &[Round::all_stabilizers(&code)]).unwrap();
    let data: Vec<usize> = (0..4).collect();
    for g in &code.stabilizers {
        c.measurements.push(Measurement { observable: g.embed(c.n(), &data), role: MeasRole::Stabilizer });
    }
    let z = |s: &str| (1.0, s.parse::<PauliString>().unwrap());
    let decomp = PauliRankDecomposition::new(2, vec![z("+Z_"), z("+_Z"), z("+ZZ")]).unwrap();
    let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    MagicProtocol::new(c, decomp, Some(code), vec![zero, zero]).unwrap()
}

#[test]
fn stabilizer_target_agrees_shot_for_shot() {
    let m = stabilizer_target();
    let nm = NoiseModel::uniform(0.03).unwrap();
    let pr = PauliRankEstimator::new(&m, &nm).unwrap();
    let sr = StabRankEstimator::new(&m, &nm).unwrap();
    assert_eq!(sr.target().q(), 1);
    for shot in 0..500 {
        let a = pr.shot(17, shot).unwrap();
        let b = sr.shot(17, shot).unwrap();
        assert!((a.a - b.a).abs() < 1e-10 && (a.f - b.f).abs() < 1e-10, "shot {shot}: {a:?} vs {b:?}");
    }
    let ra = estimate_fidelity_pauli_rank(&m, &nm, 3000, 17, &opts()).unwrap();
    let rb = estimate_fidelity_stab_rank(&m, &nm, 3000, 17, &opts()).unwrap();
    assert_eq!((ra.accepted, ra.fidelity), (rb.accepted, rb.fidelity));
}

#[test]
fn stab_rank_forced_error_on_toy_matches_dense() {
    let m = MagicProtocol::builtin("toy-422").unwrap();
    let nm = NoiseModel::uniform(0.0).unwrap();
    let sr = StabRankEstimator::new(&m, &nm).unwrap();
    let sv = StatevectorEstimator::new(&m, &nm).unwrap();
    // X on the first round's control between its controlled H gates
    let l = m.circuit.locations.iter().position(|l| l.qubits == [4, 1]).unwrap();
    let cfg = ErrorConfig { m: m.circuit.m(), entries: vec![(l, PauliString::single(m.n(), 4, 'X'))] };
    let dense = sv.evaluate(&cfg);
    assert!(dense.a > 0.05 && dense.a < 0.95, "accept {}", dense.a);
    let mut acc = Accum::default();
    for shot in 0..10_000 {
        acc.push(sr.shot_with_config(&cfg, &mut shot_rng(5, shot)).unwrap());
    }
    let (pa, pe) = acc.p_acc();
    assert!(sigma3((pa, pe), (dense.a, 0.0)), "accept {pa}±{pe} vs {}", dense.a);
    let (f, e) = acc.fidelity().unwrap();
    assert!(sigma3((f, e), (dense.f_overlap / dense.a, 0.0)), "fidelity {f}±{e} vs {}", dense.f_overlap / dense.a);
}

#[test]
fn stab_rank_and_pauli_rank_agree_on_steane() {
    let m = MagicProtocol::builtin("steane-h").unwrap();
    for p in [1e-3, 1e-2] {
        let nm = NoiseModel::uniform(p).unwrap();
        let a = estimate_fidelity_pauli_rank(&m, &nm, 20_000, 1, &opts()).unwrap();
        let b = estimate_fidelity_stab_rank(&m, &nm, 20_000, 2, &opts()).unwrap();
        assert!(sigma3((a.fidelity.unwrap(), a.fidelity_err.unwrap()), (b.fidelity.unwrap(), b.fidelity_err.unwrap())));
        assert!(sigma3((a.p_acc, a.p_acc_err), (b.p_acc, b.p_acc_err)));
    }
}

#[test]
fn acceptance_matches_oracle_and_decreases_with_p() {
    let m = MagicProtocol::builtin("steane-h").unwrap();
    let mut last: Option<(f64, f64)> = None;
    for p in [1e-3, 3e-3, 1e-2] {
        let nm = NoiseModel::uniform(p).unwrap();
        let est = acceptance_rate(&m, &nm, 10_000, 7, &opts()).unwrap();
        let dense = estimate_fidelity_statevector(&m, &nm, 10_000, 8, &opts()).unwrap();
        assert!(sigma3(est, (dense.p_acc, dense.p_acc_err)));
        if let Some(prev) = last {
            assert!(est.0 <= prev.0 + 5.0 * (prev.1 * prev.1 + est.1 * est.1).sqrt());
        }
        last = Some(est);
    }
}

#[test]
fn mismatched_decomposition_is_rejected() {
    let c = msp_core::circuit::build_steane_h();
    assert!(MagicProtocol::new(c, builtin_decomposition("HH_422").unwrap(), None, vec![]).is_err());
    assert!(MagicProtocol::builtin("nope").is_err());
}
