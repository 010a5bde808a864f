use rand::Rng;

use super::harness::{estimate, Method, RunOptions, RunSummary, ShotEstimator, ShotValue};
use super::protocol::MagicProtocol;
use super::EstimatorError;
use crate::chform::{sample_syndrome_and_overlap, RankDecomposition};
use crate::noise::{shot_rng, ConfigSampler, ErrorConfig, NoiseModel};
use crate::pauli::PauliString;
use crate::propagation::propagate;

/// Phase-sensitive estimator: sampled syndromes on a CH-form rank decomposition of the ideal output.
pub struct StabRankEstimator<'a> {
    proto: &'a MagicProtocol,
    sampler: ConfigSampler,
    target: RankDecomposition,
    meas: Vec<PauliString>,
    /// Shots without errors accept with certainty and overlap 1 when the ideal output passes every check.
    fast_trivial: bool,
}

impl<'a> StabRankEstimator<'a> {
    pub fn new(proto: &'a MagicProtocol, noise: &NoiseModel) -> Result<Self, EstimatorError> {
        Self::with_target(proto, noise, proto.target_decomposition()?)
    }

    pub fn with_target(
        proto: &'a MagicProtocol,
        noise: &NoiseModel,
        target: RankDecomposition,
    ) -> Result<Self, EstimatorError> {
        if target.n() != proto.n() {
            return Err(EstimatorError::Mismatch("target width".into()));
        }
        let meas: Vec<PauliString> = proto.circuit.measurements.iter().map(|m| m.observable.clone()).collect();
        let mut rng = shot_rng(0, 0);
        let r = sample_syndrome_and_overlap(&target, &[], &meas, &target, &|_| None, true, &mut rng)?;
        let fast_trivial = r.accepted && (r.prob - 1.0).abs() < 1e-12;
        Ok(Self { proto, sampler: ConfigSampler::new(noise, &proto.circuit)?, target, meas, fast_trivial })
    }

    pub fn target(&self) -> &RankDecomposition {
        &self.target
    }

    /// One sampled syndrome history for a fixed error configuration.
    pub fn shot_with_config<R: Rng>(&self, cfg: &ErrorConfig, rng: &mut R) -> Result<ShotValue, EstimatorError> {
        let trivial = cfg.is_trivial();
        if trivial && self.fast_trivial {
            return Ok(ShotValue { a: 1.0, f: 1.0, nontrivial: false });
        }
        let gates = if trivial {
            Vec::new()
        } else {
            propagate(&self.proto.circuit, cfg).map_err(|source| EstimatorError::Propagation { shot: 0, source })?.gates
        };
        let r = sample_syndrome_and_overlap(&self.target, &gates, &self.meas, &self.target, &|_| None, true, rng)?;
        let a = if r.accepted { 1.0 } else { 0.0 };
        Ok(ShotValue { a, f: a * r.overlap2, nontrivial: !trivial })
    }
}

impl ShotEstimator for StabRankEstimator<'_> {
    fn method(&self) -> Method {
        Method::StabRank
    }

    fn shot(&self, seed: u64, shot: u64) -> Result<ShotValue, EstimatorError> {
        let mut rng = shot_rng(seed, shot);
        let cfg = self.sampler.sample_with(&mut rng);
        self.shot_with_config(&cfg, &mut rng).map_err(|e| match e {
            EstimatorError::Propagation { source, .. } => EstimatorError::Propagation { shot, source },
            e => e,
        })
    }
}

pub fn estimate_fidelity_stab_rank(
    proto: &MagicProtocol,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunSummary, EstimatorError> {
    estimate(&StabRankEstimator::new(proto, noise)?, noise.p, shots, seed, opts)
}
