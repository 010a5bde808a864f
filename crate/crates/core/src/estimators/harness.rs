use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EstimatorError;

/// Shots per work unit. Partial sums are formed per chunk in shot order and reduced in chunk
/// order, so results do not depend on the worker count.
pub const CHUNK: u64 = 1024;

pub const CSV_HEADER: &str = "method,p,shots,accepted,p_acc,p_acc_err,fidelity,fidelity_err,wall_s,seed";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PauliRank,
    StabRank,
    Statevector,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::PauliRank, Method::StabRank, Method::Statevector];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::PauliRank => "pauli-rank",
            Method::StabRank => "stab-rank",
            Method::Statevector => "statevector",
        }
    }
}

impl FromStr for Method {
    type Err = EstimatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL.into_iter().find(|m| m.tag() == s).ok_or_else(|| EstimatorError::UnknownName(s.to_string()))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Per-shot accept weight `a` and unnormalized fidelity `f` (`f ≤ a`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ShotValue {
    pub a: f64,
    pub f: f64,
    pub nontrivial: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accum {
    pub n: u64,
    pub nontrivial: u64,
    pub sum_a: f64,
    pub sum_f: f64,
    pub sum_aa: f64,
    pub sum_ff: f64,
    pub sum_af: f64,
}

impl Accum {
    pub fn push(&mut self, v: ShotValue) {
        self.n += 1;
        self.nontrivial += v.nontrivial as u64;
        self.sum_a += v.a;
        self.sum_f += v.f;
        self.sum_aa += v.a * v.a;
        self.sum_ff += v.f * v.f;
        self.sum_af += v.a * v.f;
    }

    pub fn merge(&mut self, o: &Accum) {
        self.n += o.n;
        self.nontrivial += o.nontrivial;
        self.sum_a += o.sum_a;
        self.sum_f += o.sum_f;
        self.sum_aa += o.sum_aa;
        self.sum_ff += o.sum_ff;
        self.sum_af += o.sum_af;
    }

    /// `(mean a, standard error)`.
    pub fn p_acc(&self) -> (f64, f64) {
        let n = self.n as f64;
        let m = self.sum_a / n;
        if self.n < 2 {
            return (m, 0.0);
        }
        let var = ((self.sum_aa - n * m * m) / (n - 1.0)).max(0.0);
        (m, (var / n).sqrt())
    }

    /// Ratio estimate `Σf / Σa` with its delta-method standard error; `None` without acceptance.
    pub fn fidelity(&self) -> Option<(f64, f64)> {
        if self.sum_a <= 0.0 {
            return None;
        }
        let n = self.n as f64;
        let r = self.sum_f / self.sum_a;
        if self.n < 2 {
            return Some((r, 0.0));
        }
        let ss = (self.sum_ff - 2.0 * r * self.sum_af + r * r * self.sum_aa).max(0.0);
        let ma = self.sum_a / n;
        Some((r, (ss / (n - 1.0) / n).sqrt() / ma))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub workers: usize,
    /// Records wall time; off gives `wall_s = 0` for byte-stable output.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { workers: 1, timing: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: Method,
    pub p: f64,
    pub shots: u64,
    /// Accepted shots; for exact per-shot weights, the rounded expected count.
    pub accepted: u64,
    pub p_acc: f64,
    pub p_acc_err: f64,
    pub fidelity: Option<f64>,
    pub fidelity_err: Option<f64>,
    pub wall_s: f64,
    pub seed: u64,
    /// Shots with at least one error.
    pub nontrivial: u64,
    /// Set when the raw ratio fell outside `[0, 1]` by more than rounding and was clamped.
    pub clamped: bool,
}

impl RunSummary {
    pub fn from_accum(method: Method, p: f64, seed: u64, acc: &Accum, wall_s: f64) -> Self {
        let (p_acc, p_acc_err) = acc.p_acc();
        let f = acc.fidelity();
        let raw = f.map(|x| x.0);
        // rounding-level excursions are clamped silently
        let clamped = raw.is_some_and(|x| !(-1e-9..=1.0 + 1e-9).contains(&x));
        Self {
            method,
            p,
            shots: acc.n,
            accepted: acc.sum_a.round() as u64,
            p_acc,
            p_acc_err,
            fidelity: raw.map(|x| x.clamp(0.0, 1.0)),
            fidelity_err: f.map(|x| x.1),
            wall_s,
            seed,
            nontrivial: acc.nontrivial,
            clamped,
        }
    }

    pub fn infidelity(&self) -> Option<f64> {
        self.fidelity.map(|f| 1.0 - f)
    }

    pub fn per_shot_s(&self) -> f64 {
        self.wall_s / self.shots as f64
    }
}

/// Evaluates `shot(i)` for `i in 0..shots` on `workers` threads.
pub fn run_shots<F>(shots: u64, workers: usize, shot: F) -> Result<Accum, EstimatorError>
where
    F: Fn(u64) -> Result<ShotValue, EstimatorError> + Sync,
{
    if shots == 0 {
        return Err(EstimatorError::NoShots);
    }
    let chunks = shots.div_ceil(CHUNK);
    let one = |c: u64| -> Result<Accum, EstimatorError> {
        let mut a = Accum::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(shots) {
            a.push(shot(i)?);
        }
        Ok(a)
    };
    let parts: Vec<Accum> = if workers <= 1 {
        (0..chunks).map(one).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| EstimatorError::Pool(e.to_string()))?;
        pool.install(|| (0..chunks).into_par_iter().map(one).collect::<Result<_, _>>())?
    };
    let mut total = Accum::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// A per-shot estimator keyed by `(seed, shot)`.
pub trait ShotEstimator: Sync {
    fn method(&self) -> Method;
    fn shot(&self, seed: u64, shot: u64) -> Result<ShotValue, EstimatorError>;
}

pub fn estimate<E: ShotEstimator>(
    e: &E,
    p: f64,
    shots: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunSummary, EstimatorError> {
    let t0 = Instant::now();
    let acc = run_shots(shots, opts.workers, |i| e.shot(seed, i))?;
    let wall = if opts.timing { t0.elapsed().as_secs_f64() } else { 0.0 };
    Ok(RunSummary::from_accum(e.method(), p, seed, &acc, wall))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(i: u64) -> Result<ShotValue, EstimatorError> {
        let a = ((i * 2654435761) % 7) as f64 / 7.0;
        Ok(ShotValue { a, f: a * 0.9, nontrivial: i.is_multiple_of(3) })
    }

    #[test]
    fn worker_count_does_not_change_sums() {
        let base = run_shots(5000, 1, toy).unwrap();
        for w in [2, 4, 8] {
            assert_eq!(run_shots(5000, w, toy).unwrap(), base);
        }
        let (f, e) = base.fidelity().unwrap();
        assert!((f - 0.9).abs() < 1e-12 && e < 1e-12);
        assert!(run_shots(0, 1, toy).is_err());
    }

    #[test]
    fn binomial_error_for_sampled_accepts() {
        let mut a = Accum::default();
        for i in 0..100 {
            let x = (i < 30) as u8 as f64;
            a.push(ShotValue { a: x, f: x, nontrivial: false });
        }
        let (p, e) = a.p_acc();
        assert!((p - 0.3).abs() < 1e-12);
        assert!((e - (0.3f64 * 0.7 / 99.0).sqrt()).abs() < 1e-12);
        assert!(Accum::default().fidelity().is_none());
    }
}
