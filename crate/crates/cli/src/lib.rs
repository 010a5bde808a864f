//! Driver for the `msp` binary: config merging, protocol loading, sweeps and CSV/JSON output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use msp_core::circuit::{parse_circuit, write_circuit, InitState};
use msp_core::estimators::{
    builtin_decomposition, estimate_fidelity_pauli_rank, estimate_fidelity_stab_rank, estimate_fidelity_statevector,
    MagicProtocol, Method, RunOptions, RunSummary, BUILTIN_PROTOCOLS, CSV_HEADER,
};
use msp_core::noise::{ChannelOverride, ConfigSampler, NoiseModel};

#[derive(Parser, Debug)]
#[command(name = "msp", version, about = "Monte Carlo simulation of magic-state preparation protocols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate fidelity and acceptance rate over a sweep of error rates.
    Run(RunArgs),
    /// Report mean per-shot time per method.
    Bench(RunArgs),
    /// List built-in protocols, decompositions and methods.
    List,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// steane-h at p = 1e-3, 3e-3, 1e-2 with pauli-rank and statevector, 1e5 shots per cell.
    Fig8,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// JSON file with RunConfig fields; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Built-in protocol name or a circuit file.
    #[arg(long)]
    pub protocol: Option<String>,
    /// Target decomposition (H, T, HH_422) for circuit files.
    #[arg(long)]
    pub decomp: Option<String>,
    /// Physical error rate(s), comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub p: Option<Vec<f64>>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., value_parser = parse_method)]
    pub method: Option<Vec<Method>>,
    #[arg(long, env = "MSP_WORKERS")]
    pub workers: Option<usize>,
    /// JSON noise model; its overrides are merged and its p is used when --p is absent.
    #[arg(long)]
    pub noise: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Write 0 in the wall_s column.
    #[arg(long)]
    pub no_timing: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|_| format!("unknown method {s}; expected pauli-rank, stab-rank or statevector"))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: String,
    pub decomp: Option<String>,
    #[serde(deserialize_with = "one_or_many")]
    pub p: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
    #[serde(deserialize_with = "one_or_many")]
    pub methods: Vec<Method>,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub overrides: BTreeMap<String, ChannelOverride>,
    pub timing: bool,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            protocol: "steane-h".into(),
            decomp: None,
            p: vec![1e-3],
            shots: 10_000,
            seed: 0,
            methods: vec![Method::PauliRank],
            workers: default_workers(),
            output: None,
            format: Format::Csv,
            overrides: BTreeMap::new(),
            timing: true,
        }
    }
}

impl RunConfig {
    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Fig8 => Self {
                protocol: "steane-h".into(),
                p: vec![1e-3, 3e-3, 1e-2],
                shots: 100_000,
                methods: vec![Method::PauliRank, Method::Statevector],
                ..Self::default()
            },
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::default().merge_json(s)
    }

    /// Fields present in `s` replace those of `self`; `method` is accepted for `methods`.
    pub fn merge_json(&self, s: &str) -> Result<Self> {
        let file: serde_json::Value = serde_json::from_str(s)?;
        let Some(fields) = file.as_object() else { bail!("expected a JSON object") };
        let mut merged = serde_json::to_value(self)?;
        let obj = merged.as_object_mut().expect("config serializes to an object");
        for (k, v) in fields {
            obj.insert(if k == "method" { "methods".into() } else { k.clone() }, v.clone());
        }
        Ok(serde_json::from_value(merged)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            bail!("shots must be at least 1");
        }
        if self.p.is_empty() {
            bail!("no error rates given");
        }
        if let Some(p) = self.p.iter().find(|p| !(0.0..1.0).contains(*p)) {
            bail!("error rate {p} outside [0, 1)");
        }
        if self.methods.is_empty() {
            bail!("no methods given");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        Ok(())
    }

    /// One noise model per sweep point, sharing the overrides.
    pub fn noise_model(&self, p: f64) -> Result<NoiseModel> {
        let m = NoiseModel { p, overrides: self.overrides.clone() };
        m.validate()?;
        Ok(m)
    }
}

/// Defaults, then preset, then config file, then flags.
pub fn resolve_config(args: &RunArgs) -> Result<RunConfig> {
    let base = args.preset.map(RunConfig::preset).unwrap_or_default();
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            base.merge_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => base,
    };
    if let Some(v) = &args.protocol {
        cfg.protocol = v.clone();
    }
    if let Some(v) = &args.decomp {
        cfg.decomp = Some(v.clone());
    }
    if let Some(v) = &args.p {
        cfg.p = v.clone();
    }
    if let Some(v) = args.shots {
        cfg.shots = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.method {
        cfg.methods = v.clone();
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(path) = &args.noise {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m = NoiseModel::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.overrides.extend(m.overrides);
        if args.p.is_none() {
            cfg.p = vec![m.p];
        }
    }
    if let Some(v) = args.format {
        cfg.format = v;
    }
    if let Some(v) = &args.output {
        cfg.output = Some(v.clone());
    }
    if args.no_timing {
        cfg.timing = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A built-in name, or a circuit file whose target comes from `decomp` or its single magic input.
pub fn load_protocol(name: &str, decomp: Option<&str>) -> Result<MagicProtocol> {
    if BUILTIN_PROTOCOLS.contains(&name) {
        if decomp.is_some() {
            bail!("--decomp applies to circuit files only; {name} has a fixed target");
        }
        return Ok(MagicProtocol::builtin(name)?);
    }
    let path = Path::new(name);
    if !path.exists() {
        bail!("{name} is neither a built-in protocol ({}) nor a file", BUILTIN_PROTOCOLS.join(", "));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
    let c = parse_circuit(&text).with_context(|| format!("parsing {name}"))?;
    if c.init.contains(&InitState::Logical) {
        bail!("{name}: circuit files with a logical data block are not supported");
    }
    let d = match decomp {
        Some(d) => d.to_string(),
        None => {
            let magic: Vec<&InitState> =
                c.init.iter().filter(|s| matches!(s, InitState::MagicH | InitState::MagicT)).collect();
            match magic.as_slice() {
                [InitState::MagicH] => "H".into(),
                [InitState::MagicT] => "T".into(),
                _ => bail!("{name}: give --decomp; the target cannot be inferred from {} magic inputs", magic.len()),
            }
        }
    };
    Ok(MagicProtocol::new(c, builtin_decomposition(&d)?, None, vec![])?)
}

/// SHA-256 over the circuit text and the target decomposition.
pub fn protocol_hash(proto: &MagicProtocol) -> String {
    let mut h = Sha256::new();
    h.update(write_circuit(&proto.circuit));
    for (b, p) in &proto.decomp.terms {
        h.update(format!("{b:e} {p}\n"));
    }
    format!("{:x}", h.finalize())
}

/// Cells of one run use the base seed offset by the method's index, so paired methods see independent noise.
pub fn cell_seed(seed: u64, method: Method) -> u64 {
    let idx = Method::ALL.iter().position(|m| *m == method).unwrap_or(0) as u64;
    seed.wrapping_add(idx)
}

pub fn run_cell(
    proto: &MagicProtocol,
    noise: &NoiseModel,
    method: Method,
    shots: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunSummary> {
    let f = match method {
        Method::PauliRank => estimate_fidelity_pauli_rank,
        Method::StabRank => estimate_fidelity_stab_rank,
        Method::Statevector => estimate_fidelity_statevector,
    };
    f(proto, noise, shots, seed, opts).with_context(|| format!("{method} at p = {}", noise.p))
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub protocol: String,
    pub protocol_sha256: String,
    pub build: String,
    pub config: RunConfig,
    pub rows: Vec<RunSummary>,
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let proto = load_protocol(&cfg.protocol, cfg.decomp.as_deref())?;
    let opts = RunOptions { workers: cfg.workers, timing: cfg.timing };
    let mut rows = Vec::new();
    for &p in &cfg.p {
        let noise = cfg.noise_model(p)?;
        for &m in &cfg.methods {
            let r = run_cell(&proto, &noise, m, cfg.shots, cell_seed(cfg.seed, m), &opts)?;
            if r.fidelity.is_none() {
                eprintln!("warning: {m} at p = {p}: no shot accepted, fidelity left empty");
            }
            if r.clamped {
                eprintln!("warning: {m} at p = {p}: fidelity estimate clamped to [0, 1]");
            }
            rows.push(r);
        }
    }
    Ok(Report {
        protocol: cfg.protocol.clone(),
        protocol_sha256: protocol_hash(&proto),
        build: concat!("msp ", env!("CARGO_PKG_VERSION")).into(),
        config: cfg.clone(),
        rows,
    })
}

/// Plain decimal in the usual range, exponent form for very small or large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn write_csv<W: Write>(rows: &[RunSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        w.write_record([
            r.method.tag().to_string(),
            fmt_f64(r.p),
            r.shots.to_string(),
            r.accepted.to_string(),
            fmt_f64(r.p_acc),
            fmt_f64(r.p_acc_err),
            opt(r.fidelity),
            opt(r.fidelity_err),
            fmt_f64(r.wall_s),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report<W: Write>(report: &Report, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(&report.rows, out),
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

fn emit(cfg: &RunConfig, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &cfg.output {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(&mut std::io::stdout().lock()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: Method,
    pub p: f64,
    pub shots: u64,
    pub per_shot_s: f64,
    /// Observed fraction of shots with at least one error.
    pub nontrivial_frac: f64,
    /// Exact probability of a shot with at least one error.
    pub nontrivial_expected: f64,
}

pub const BENCH_HEADER: &str = "method,p,shots,per_shot_s,nontrivial_frac,nontrivial_expected";

/// Timed runs of every method; each row reflects `cfg.workers` threads.
pub fn bench(cfg: &RunConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let proto = load_protocol(&cfg.protocol, cfg.decomp.as_deref())?;
    let opts = RunOptions { workers: cfg.workers, timing: true };
    let mut rows = Vec::new();
    for &p in &cfg.p {
        let noise = cfg.noise_model(p)?;
        let expected = ConfigSampler::new(&noise, &proto.circuit)?.nontrivial_probability();
        for &m in &cfg.methods {
            let r = run_cell(&proto, &noise, m, cfg.shots, cell_seed(cfg.seed, m), &opts)?;
            rows.push(BenchRow {
                method: m,
                p,
                shots: r.shots,
                per_shot_s: r.per_shot_s(),
                nontrivial_frac: r.nontrivial as f64 / r.shots as f64,
                nontrivial_expected: expected,
            });
        }
    }
    Ok(rows)
}

pub fn write_bench<W: Write>(rows: &[BenchRow], format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(BENCH_HEADER.split(','))?;
            for r in rows {
                w.write_record([
                    r.method.tag().to_string(),
                    fmt_f64(r.p),
                    r.shots.to_string(),
                    fmt_f64(r.per_shot_s),
                    fmt_f64(r.nontrivial_frac),
                    fmt_f64(r.nontrivial_expected),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// `statevector / method` per-shot time ratios at each p.
pub fn speedups(rows: &[BenchRow]) -> Vec<(Method, f64, f64)> {
    rows.iter()
        .filter(|r| r.method != Method::Statevector)
        .filter_map(|r| {
            let sv = rows.iter().find(|s| s.method == Method::Statevector && s.p == r.p)?;
            Some((r.method, r.p, sv.per_shot_s / r.per_shot_s))
        })
        .collect()
}

pub fn main_with(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = resolve_config(&args)?;
            let report = run(&cfg)?;
            emit(&cfg, |w| write_report(&report, cfg.format, w))
        }
        Command::Bench(args) => {
            let mut cfg = resolve_config(&args)?;
            if args.method.is_none() && args.config.is_none() && args.preset.is_none() {
                cfg.methods = vec![Method::PauliRank, Method::Statevector];
            }
            if args.shots.is_none() && args.config.is_none() && args.preset.is_none() {
                cfg.shots = 2_000;
            }
            let rows = bench(&cfg)?;
            for (m, p, x) in speedups(&rows) {
                eprintln!("p = {p}: {m} is {x:.1}x faster per shot than statevector");
            }
            emit(&cfg, |w| write_bench(&rows, cfg.format, w))
        }
        Command::List => {
            println!("protocols: {}", BUILTIN_PROTOCOLS.join(", "));
            println!("decompositions: H, T, HH_422");
            println!("methods: {}", Method::ALL.map(|m| m.tag()).join(", "));
            println!("presets: fig8");
            Ok(())
        }
    }
}
