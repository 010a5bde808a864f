use super::harness::{estimate, Method, RunOptions, RunSummary, ShotEstimator, ShotValue};
use super::protocol::MagicProtocol;
use super::EstimatorError;
use crate::noise::{ConfigSampler, ErrorConfig, NoiseModel};
use crate::oracle::{apply_circuit, DenseState};
use crate::pauli::PauliString;

/// Dense per-shot quantities for one error configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenseShot {
    /// Exact accept probability on the magic input.
    pub a: f64,
    /// `⟨Πψ| ρ̄ |Πψ⟩` with `ρ̄` the logical target acting as identity elsewhere.
    pub f_logical: f64,
    /// `|⟨ψ_ideal|Πψ⟩|²` against the full ideal output.
    pub f_overlap: f64,
}

/// State-vector oracle estimator running the full noisy circuit on the magic input.
pub struct StatevectorEstimator<'a> {
    proto: &'a MagicProtocol,
    sampler: ConfigSampler,
    input: DenseState,
    ideal: DenseState,
    obs: Vec<(f64, PauliString)>,
}

impl<'a> StatevectorEstimator<'a> {
    pub fn new(proto: &'a MagicProtocol, noise: &NoiseModel) -> Result<Self, EstimatorError> {
        let input = proto.dense_input()?;
        let ideal = proto.dense_ideal_output()?;
        let obs = proto.decomp.terms.iter().map(|(b, p)| (*b, proto.logical_to_physical(p))).collect();
        Ok(Self { proto, sampler: ConfigSampler::new(noise, &proto.circuit)?, input, ideal, obs })
    }

    pub fn evaluate(&self, cfg: &ErrorConfig) -> DenseShot {
        let mut s = self.input.clone();
        apply_circuit(&mut s, &self.proto.circuit, Some(cfg));
        let mut a = s.norm_sqr();
        for m in &self.proto.circuit.measurements {
            a = s.project(&m.observable, true);
            if a < 1e-300 {
                return DenseShot { a: 0.0, f_logical: 0.0, f_overlap: 0.0 };
            }
        }
        // rounding can put a just above 1 on error-free shots
        let a = a.min(1.0);
        let e: f64 = self.obs.iter().map(|(b, p)| b * s.expectation(p).re).sum();
        let d = (1u64 << self.proto.k()) as f64;
        DenseShot { a, f_logical: (a + e) / d, f_overlap: self.ideal.inner(&s).norm_sqr() }
    }

    /// Every shot runs the full circuit; there is no error-free fast path.
    pub fn sample_shot(&self, seed: u64, shot: u64) -> DenseShot {
        self.evaluate(&self.sampler.sample(seed, shot))
    }
}

impl ShotEstimator for StatevectorEstimator<'_> {
    fn method(&self) -> Method {
        Method::Statevector
    }

    fn shot(&self, seed: u64, shot: u64) -> Result<ShotValue, EstimatorError> {
        let cfg = self.sampler.sample(seed, shot);
        let d = self.evaluate(&cfg);
        Ok(ShotValue { a: d.a, f: d.f_logical, nontrivial: !cfg.is_trivial() })
    }
}

pub fn estimate_fidelity_statevector(
    proto: &MagicProtocol,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunSummary, EstimatorError> {
    estimate(&StatevectorEstimator::new(proto, noise)?, noise.p, shots, seed, opts)
}
