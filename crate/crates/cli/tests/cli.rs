use std::process::Command as Proc;

use msp_cli::*;
use msp_core::circuit::{build_steane_h, write_circuit};
use msp_core::estimators::{Method, RunSummary, CSV_HEADER};

fn cfg(p: Vec<f64>, methods: Vec<Method>, shots: u64) -> RunConfig {
    RunConfig { p, methods, shots, workers: 1, timing: false, ..RunConfig::default() }
}

fn csv_of(rows: &[RunSummary]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn noiseless_steane_is_perfect() {
    let r = run(&cfg(vec![0.0], vec![Method::PauliRank], 100)).unwrap();
    assert_eq!(r.rows.len(), 1);
    let row = &r.rows[0];
    assert_eq!((row.accepted, row.p_acc, row.fidelity), (100, 1.0, Some(1.0)));
}

#[test]
fn one_row_per_cell_in_sweep_order() {
    let r = run(&cfg(vec![0.0, 0.02], vec![Method::PauliRank, Method::StabRank], 50)).unwrap();
    let cells: Vec<(f64, Method)> = r.rows.iter().map(|x| (x.p, x.method)).collect();
    assert_eq!(
        cells,
        [(0.0, Method::PauliRank), (0.0, Method::StabRank), (0.02, Method::PauliRank), (0.02, Method::StabRank)]
    );
    assert_eq!(r.rows[1].seed, cell_seed(0, Method::StabRank));
    assert_ne!(r.rows[0].seed, r.rows[1].seed);
}

#[test]
fn csv_header_and_empty_fidelity_cells() {
    let row = RunSummary {
        method: Method::StabRank,
        p: 0.5,
        shots: 10,
        accepted: 0,
        p_acc: 0.0,
        p_acc_err: 0.0,
        fidelity: None,
        fidelity_err: None,
        wall_s: 0.0,
        seed: 3,
        nontrivial: 10,
        clamped: false,
    };
    let text = csv_of(&[row]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.next(), Some("stab-rank,0.5,10,0,0,0,,,0,3"));
}

#[test]
fn small_values_use_exponent_form() {
    assert_eq!(fmt_f64(0.001), "0.001");
    assert_eq!(fmt_f64(1.5e-6), "1.5e-6");
    assert_eq!(fmt_f64(0.0), "0");
    assert_eq!(fmt_f64(1.5e-6).parse::<f64>().unwrap(), 1.5e-6);
}

#[test]
fn config_accepts_single_values_and_lists() {
    let a = RunConfig::from_json(r#"{"protocol":"toy-422","p":0.01,"method":"stab-rank","shots":5}"#).unwrap();
    assert_eq!((a.p.clone(), a.methods.clone(), a.shots), (vec![0.01], vec![Method::StabRank], 5));
    let b = RunConfig::from_json(r#"{"p":[0.001,0.002],"methods":["pauli-rank","statevector"]}"#).unwrap();
    assert_eq!(b.p, vec![0.001, 0.002]);
    assert_eq!(b.protocol, "steane-h");
    assert!(RunConfig::from_json(r#"{"shotz":3}"#).is_err());
}

#[test]
fn flags_override_config_file_over_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"shots": 77, "method": "stab-rank", "overrides": {"depol2": {"p": 0.02}}}"#).unwrap();
    let args = RunArgs { config: Some(path), preset: Some(Preset::Fig8), seed: Some(9), ..RunArgs::default() };
    let c = resolve_config(&args).unwrap();
    assert_eq!(c.p, vec![1e-3, 3e-3, 1e-2]);
    assert_eq!((c.shots, c.seed), (77, 9));
    assert_eq!(c.methods, vec![Method::StabRank]);
    assert!(c.overrides.contains_key("depol2"));
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(cfg(vec![1.0], vec![Method::PauliRank], 10).validate().is_err());
    assert!(cfg(vec![-0.1], vec![Method::PauliRank], 10).validate().is_err());
    assert!(cfg(vec![0.1], vec![Method::PauliRank], 0).validate().is_err());
    assert!(cfg(vec![0.1], vec![], 10).validate().is_err());
    assert!(load_protocol("no-such-protocol", None).is_err());
    assert!(load_protocol("steane-h", Some("T")).is_err());
}

#[test]
fn circuit_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("steane.circ");
    std::fs::write(&path, write_circuit(&build_steane_h())).unwrap();
    let file = path.to_str().unwrap().to_string();
    let a = run(&cfg(vec![0.01], vec![Method::PauliRank], 400)).unwrap();
    let b = run(&RunConfig { protocol: file, ..cfg(vec![0.01], vec![Method::PauliRank], 400) }).unwrap();
    assert_eq!(a.protocol_sha256, b.protocol_sha256);
    assert_eq!(csv_of(&a.rows), csv_of(&b.rows));
}

#[test]
fn bench_reports_trivial_fraction() {
    let rows = bench(&cfg(vec![0.0, 0.01], vec![Method::PauliRank, Method::Statevector], 200)).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[..2].iter().all(|r| r.nontrivial_frac == 0.0 && r.nontrivial_expected == 0.0));
    let r = &rows[2];
    assert!(r.nontrivial_expected > 0.1 && r.nontrivial_expected < 0.9);
    assert_eq!(speedups(&rows).len(), 2);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_msp");
    let ok = Proc::new(exe).args(["run", "--p", "0", "--shots", "20", "--no-timing", "--workers", "1"]).output().unwrap();
    assert!(ok.status.success());
    let out = String::from_utf8(ok.stdout).unwrap();
    assert_eq!(out.lines().next(), Some(CSV_HEADER));
    assert_eq!(out.lines().nth(1), Some("pauli-rank,0,20,20,1,0,1,0,0,0"));
    let bad = Proc::new(exe).args(["run", "--protocol", "nope"]).output().unwrap();
    assert!(!bad.status.success());
    let bad = Proc::new(exe).args(["run", "--shots", "0"]).output().unwrap();
    assert!(!bad.status.success());
}
