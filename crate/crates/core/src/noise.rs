//! Circuit-level Pauli noise: channel tables, seeded sampling, idle composition and twirling.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Channel, ProtocolCircuit};
use crate::clifford::{dense_tableau, PscForm};
use crate::oracle::matrix::{self, CMat};
use crate::oracle::DenseChannelState;
use crate::pauli::PauliString;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("error rate {0} outside [0, 1]")]
    Rate(f64),
    #[error("idle composition needs n >= 1")]
    ZeroIdle,
    #[error("bad channel table for {0}: {1}")]
    Table(String, String),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("twirl: {0}")]
    Twirl(&'static str),
}

/// A per-family replacement: a different rate, or an explicit `letters -> probability` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelOverride {
    Rate { p: f64 },
    Table(BTreeMap<String, f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    #[serde(default)]
    pub overrides: BTreeMap<String, ChannelOverride>,
}

pub fn idle_compose(p: f64, n: u32) -> Result<f64, NoiseError> {
    if n == 0 {
        return Err(NoiseError::ZeroIdle);
    }
    Ok(0.75 * (1.0 - (1.0 - 4.0 * p / 3.0).powi(n as i32)))
}

/// Expected fraction of shots with at least one error among `m` locations of rate `p`.
pub fn trivial_fraction(p: f64, m: usize) -> f64 {
    1.0 - (1.0 - p).powi(m as i32)
}

const LETTERS: [char; 4] = ['_', 'X', 'Y', 'Z'];

fn depolarizing(arity: usize, p: f64) -> Vec<(String, f64)> {
    let k = (1usize << (2 * arity)) - 1;
    (1..=k)
        .map(|code| {
            let s: String = (0..arity).map(|i| LETTERS[(code >> (2 * i)) & 3]).collect();
            (s, p / k as f64)
        })
        .collect()
}

impl NoiseModel {
    pub fn uniform(p: f64) -> Result<Self, NoiseError> {
        let m = Self { p, overrides: BTreeMap::new() };
        m.validate()?;
        Ok(m)
    }

    pub fn from_json(s: &str) -> Result<Self, NoiseError> {
        let m: NoiseModel = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(NoiseError::Rate(self.p));
        }
        for (fam, o) in &self.overrides {
            match o {
                ChannelOverride::Rate { p } if !(0.0..=1.0).contains(p) => return Err(NoiseError::Rate(*p)),
                ChannelOverride::Table(t) => {
                    let total: f64 = t.values().sum();
                    if t.values().any(|&v| v < 0.0) || total > 1.0 + 1e-12 {
                        return Err(NoiseError::Table(fam.clone(), "probabilities must be >= 0 and sum to <= 1".into()));
                    }
                    if let Some(k) = t.keys().find(|k| k.chars().any(|c| !"_IXYZ".contains(c))) {
                        return Err(NoiseError::Table(fam.clone(), format!("bad letters {k}")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn rate(&self, ch: &Channel) -> f64 {
        match self.overrides.get(ch.family()) {
            Some(ChannelOverride::Rate { p }) => *p,
            _ => self.p,
        }
    }

    /// Non-identity outcomes of one location as (local letters, probability).
    pub fn channel_table(&self, ch: &Channel) -> Vec<(String, f64)> {
        if let Some(ChannelOverride::Table(t)) = self.overrides.get(ch.family()) {
            return t.iter().map(|(k, v)| (k.replace('I', "_"), *v)).collect();
        }
        let p = self.rate(ch);
        let one = |l: &str| vec![(l.to_string(), p)];
        match ch {
            Channel::Init0 | Channel::MeasZ => one("X"),
            Channel::InitPlus | Channel::MeasX | Channel::InitMagicT => one("Z"),
            Channel::InitMagicH => one("Y"),
            Channel::Depol1 => depolarizing(1, p),
            Channel::Depol2 => depolarizing(2, p),
            Channel::Idle(n) => depolarizing(1, 0.75 * (1.0 - (1.0 - 4.0 * p / 3.0).powi(*n as i32))),
            Channel::Frame => Vec::new(),
        }
    }
}

/// Sampled per-location Paulis; only non-identity entries are stored, in location order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorConfig {
    pub m: usize,
    pub entries: Vec<(usize, PauliString)>,
}

impl ErrorConfig {
    pub fn trivial(m: usize) -> Self {
        Self { m, entries: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, loc: usize) -> Option<&PauliString> {
        self.entries.binary_search_by_key(&loc, |e| e.0).ok().map(|i| &self.entries[i].1)
    }

    /// Config from explicit per-location Paulis (identities dropped).
    pub fn from_dense(errors: Vec<PauliString>) -> Self {
        let m = errors.len();
        let entries = errors.into_iter().enumerate().filter(|(_, p)| !p.is_identity()).collect();
        Self { m, entries }
    }
}

struct LocationTable {
    cum: Vec<f64>,
    paulis: Vec<PauliString>,
}

/// Per-circuit sampling tables built once before the shot loop.
pub struct ConfigSampler {
    tables: Vec<LocationTable>,
    nontrivial_prob: f64,
}

/// Shot stream: ChaCha8 keyed by the master seed, stream id = shot index.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(shot);
    r
}

pub fn uniform01<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl ConfigSampler {
    pub fn new(model: &NoiseModel, circuit: &ProtocolCircuit) -> Result<Self, NoiseError> {
        model.validate()?;
        let n = circuit.n();
        let mut tables = Vec::with_capacity(circuit.m());
        let mut none = 1.0;
        for loc in &circuit.locations {
            let mut cum = Vec::new();
            let mut paulis = Vec::new();
            let mut acc = 0.0;
            for (letters, w) in model.channel_table(&loc.channel) {
                if letters.chars().count() != loc.qubits.len() {
                    return Err(NoiseError::Table(loc.channel.tag(), format!("{letters} has wrong arity")));
                }
                if w <= 0.0 {
                    continue;
                }
                let mut p = PauliString::identity(n);
                for (q, l) in loc.qubits.iter().zip(letters.chars()) {
                    p.set_letter(*q, l);
                }
                if p.is_identity() {
                    continue;
                }
                acc += w;
                cum.push(acc);
                paulis.push(p);
            }
            none *= 1.0 - acc;
            tables.push(LocationTable { cum, paulis });
        }
        Ok(Self { tables, nontrivial_prob: 1.0 - none })
    }

    pub fn m(&self) -> usize {
        self.tables.len()
    }

    /// Exact probability that a shot has at least one error.
    pub fn nontrivial_probability(&self) -> f64 {
        self.nontrivial_prob
    }

    /// One uniform draw per location in location order.
    pub fn sample_with<R: RngCore>(&self, rng: &mut R) -> ErrorConfig {
        let mut entries = Vec::new();
        for (i, t) in self.tables.iter().enumerate() {
            let u = uniform01(rng);
            if t.cum.is_empty() || u >= *t.cum.last().unwrap() {
                continue;
            }
            let k = t.cum.partition_point(|&c| c <= u);
            entries.push((i, t.paulis[k].clone()));
        }
        ErrorConfig { m: self.tables.len(), entries }
    }

    pub fn sample(&self, seed: u64, shot: u64) -> ErrorConfig {
        self.sample_with(&mut shot_rng(seed, shot))
    }
}

pub fn sample_config(
    model: &NoiseModel,
    circuit: &ProtocolCircuit,
    seed: u64,
    shot: u64,
) -> Result<ErrorConfig, NoiseError> {
    Ok(ConfigSampler::new(model, circuit)?.sample(seed, shot))
}

/// `T_C(ρ) = (ρ + CρC†)/2` for a one-qubit order-2 PSC.
pub fn twirl_psc(rho: &DenseChannelState, c: &PscForm) -> Result<DenseChannelState, NoiseError> {
    if c.n() != 1 || rho.n() != 1 {
        return Err(NoiseError::Twirl("single-qubit PSC twirl only"));
    }
    if c.order() != 2 {
        return Err(NoiseError::Twirl("PSC must have order 2"));
    }
    let u = c.to_dense();
    let mut t = rho.clone();
    t.apply_unitary(&u);
    let m = (rho.matrix() + t.matrix()) * Complex64::new(0.5, 0.0);
    Ok(DenseChannelState::from_matrix(m).expect("same shape"))
}

/// Averages over `S_V = ⟨V X_i V†⟩` for a diagonal third-level `V` on `l` qubits.
pub fn twirl_diagonal(rho: &DenseChannelState, v: &CMat) -> Result<DenseChannelState, NoiseError> {
    let d = v.nrows();
    if d != rho.matrix().nrows() {
        return Err(NoiseError::Twirl("dimension mismatch"));
    }
    for r in 0..d {
        for c2 in 0..d {
            if r != c2 && v[(r, c2)].norm() > 1e-12 {
                return Err(NoiseError::Twirl("V is not diagonal"));
            }
        }
    }
    let l = rho.n();
    let vd = v.adjoint();
    let gens: Vec<CMat> =
        (0..l).map(|i| v * matrix::pauli_matrix(&PauliString::single(l, i, 'X')) * &vd).collect();
    if gens.iter().any(|g| dense_tableau(g).is_none()) {
        return Err(NoiseError::Twirl("V is not in the third level"));
    }
    let mut acc = CMat::zeros(d, d);
    for mask in 0..1usize << l {
        let mut s = matrix::identity(d);
        for (i, g) in gens.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s *= g;
            }
        }
        acc += &s * rho.matrix() * s.adjoint();
    }
    acc *= Complex64::new(1.0 / (1usize << l) as f64, 0.0);
    Ok(DenseChannelState::from_matrix(acc).expect("same shape"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_steane_h;

    #[test]
    fn idle_closed_form() {
        assert!((idle_compose(0.1, 1).unwrap() - 0.1).abs() < 1e-15);
        assert!((idle_compose(0.1, 2).unwrap() - 0.186_666_666_666_666_7).abs() < 1e-12);
        assert!(idle_compose(0.1, 0).is_err());
        let mut last = 0.0;
        for n in 1..200 {
            let v = idle_compose(0.3, n).unwrap();
            assert!(v >= last && v <= 0.75);
            last = v;
        }
        assert!((last - 0.75).abs() < 1e-9);
    }

    #[test]
    fn trivial_fraction_example() {
        assert!((trivial_fraction(1e-3, 100) - 0.0952).abs() < 1e-4);
        assert_eq!(trivial_fraction(0.0, 50), 0.0);
    }

    #[test]
    fn zero_rate_gives_identity() {
        let c = build_steane_h();
        let s = ConfigSampler::new(&NoiseModel::uniform(0.0).unwrap(), &c).unwrap();
        for shot in 0..50 {
            assert!(s.sample(7, shot).is_trivial());
        }
    }

    #[test]
    fn reproducible_per_shot() {
        let c = build_steane_h();
        let s = ConfigSampler::new(&NoiseModel::uniform(0.05).unwrap(), &c).unwrap();
        let a: Vec<_> = (0..100).map(|i| s.sample(11, i)).collect();
        let b: Vec<_> = (0..100).rev().map(|i| s.sample(11, i)).collect();
        assert!(a.iter().zip(b.iter().rev()).all(|(x, y)| x == y));
        assert!(a.iter().any(|c| !c.is_trivial()));
    }

    #[test]
    fn override_table_parses() {
        let m = NoiseModel::from_json(r#"{"p":0.01,"overrides":{"depol2":{"p":0.02},"meas_x":{"Z":0.5}}}"#).unwrap();
        assert_eq!(m.channel_table(&Channel::Depol2).len(), 15);
        assert!((m.channel_table(&Channel::Depol2)[0].1 - 0.02 / 15.0).abs() < 1e-15);
        assert_eq!(m.channel_table(&Channel::MeasX), vec![("Z".to_string(), 0.5)]);
        assert!(NoiseModel::from_json(r#"{"p":1.5}"#).is_err());
    }

    #[test]
    fn channel_rows_normalized() {
        let m = NoiseModel::uniform(0.37).unwrap();
        for ch in [Channel::Depol1, Channel::Depol2, Channel::Idle(4), Channel::Init0, Channel::InitMagicH] {
            let s: f64 = m.channel_table(&ch).iter().map(|t| t.1).sum();
            assert!(s <= 1.0 + 1e-15);
        }
    }
}
