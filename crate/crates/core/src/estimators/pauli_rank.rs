use super::decomp::ProjectorDecomposition;
use super::harness::{estimate, Method, RunOptions, RunSummary, ShotEstimator, ShotValue};
use super::protocol::MagicProtocol;
use super::stabsim::StabilizerGroup;
use super::EstimatorError;
use crate::clifford::ErrorGate;
use crate::noise::{ConfigSampler, ErrorConfig, NoiseModel};
use crate::pauli::PauliString;
use crate::propagation::propagate;

fn letter_index(l: char) -> usize {
    match l {
        'X' => 0,
        'Y' => 1,
        _ => 2,
    }
}

/// One signed stabilizer-projector input: letter basis, eigenvalue bits, combined weight.
#[derive(Clone, Debug, PartialEq)]
struct Input {
    basis: Vec<usize>,
    s: u64,
    w: f64,
}

/// Phase-insensitive estimator over stabilizer-projector inputs of the target decomposition.
pub struct PauliRankEstimator<'a> {
    proto: &'a MagicProtocol,
    sampler: ConfigSampler,
    letters: Vec<[PauliString; 3]>,
    inputs: Vec<Input>,
    obs: Vec<(f64, PauliString)>,
    trivial: ShotValue,
}

impl<'a> PauliRankEstimator<'a> {
    pub fn new(proto: &'a MagicProtocol, noise: &NoiseModel) -> Result<Self, EstimatorError> {
        let k = proto.k();
        let letters = (0..k)
            .map(|j| ['X', 'Y', 'Z'].map(|l| proto.logical_letter(j, l)))
            .collect();
        // identity and every P̄_i, merged per (basis, eigenvalue bits)
        let mut inputs: Vec<Input> = Vec::new();
        let mut add = |d: &ProjectorDecomposition, beta: f64| {
            let basis: Vec<usize> = d.basis.iter().map(|&l| letter_index(l)).collect();
            for &(neg, s) in &d.terms {
                let w = if neg { -beta } else { beta };
                match inputs.iter_mut().find(|i| i.basis == basis && i.s == s) {
                    Some(i) => i.w += w,
                    None => inputs.push(Input { basis: basis.clone(), s, w }),
                }
            }
        };
        add(&ProjectorDecomposition::identity(k), 1.0);
        for (b, p) in &proto.decomp.terms {
            add(&ProjectorDecomposition::of(p), *b);
        }
        inputs.retain(|i| i.w.abs() > 1e-14);
        let obs = proto.decomp.terms.iter().map(|(b, p)| (*b, proto.logical_to_physical(p))).collect();
        let mut est = Self {
            proto,
            sampler: ConfigSampler::new(noise, &proto.circuit)?,
            letters,
            inputs,
            obs,
            trivial: ShotValue::default(),
        };
        est.trivial = est.evaluate(&[]);
        Ok(est)
    }

    /// Number of stabilizer circuits run per non-trivial shot.
    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn trivial_value(&self) -> ShotValue {
        self.trivial
    }

    /// Exact accept weight and fidelity numerator for the error `gates` after the circuit.
    pub fn evaluate(&self, gates: &[ErrorGate]) -> ShotValue {
        let n = self.proto.n();
        let conj = |p: &PauliString| gates.iter().fold(p.clone(), |acc, g| g.conjugate(&acc));
        let frame: Vec<PauliString> = self.proto.frame.iter().map(conj).collect();
        let letters: Vec<Vec<PauliString>> = self.letters.iter().map(|l| l.iter().map(conj).collect()).collect();
        let mut acc = 0.0;
        let mut fid = 0.0;
        for inp in &self.inputs {
            let mut gens = frame.clone();
            for (j, &l) in inp.basis.iter().enumerate() {
                let g = &letters[j][l];
                gens.push(if inp.s >> j & 1 == 1 { g.negated() } else { g.clone() });
            }
            let mut st = StabilizerGroup::new(n, gens);
            let mut a = 1.0;
            for m in &self.proto.circuit.measurements {
                a *= st.postselect(&m.observable);
                if a == 0.0 {
                    break;
                }
            }
            if a == 0.0 {
                continue;
            }
            let e: f64 = self.obs.iter().map(|(b, p)| b * st.expectation(p)).sum();
            acc += inp.w * a;
            fid += inp.w * a * (1.0 + e);
        }
        let d = (1u64 << self.proto.k()) as f64;
        ShotValue { a: acc / d, f: fid / (d * d), nontrivial: !gates.is_empty() }
    }

    pub fn evaluate_config(&self, cfg: &ErrorConfig) -> Result<ShotValue, EstimatorError> {
        if cfg.is_trivial() {
            return Ok(self.trivial);
        }
        let seq = propagate(&self.proto.circuit, cfg).map_err(|source| EstimatorError::Propagation { shot: 0, source })?;
        let mut v = self.evaluate(&seq.gates);
        v.nontrivial = true;
        Ok(v)
    }

    pub fn sampler(&self) -> &ConfigSampler {
        &self.sampler
    }
}

impl ShotEstimator for PauliRankEstimator<'_> {
    fn method(&self) -> Method {
        Method::PauliRank
    }

    fn shot(&self, seed: u64, shot: u64) -> Result<ShotValue, EstimatorError> {
        self.evaluate_config(&self.sampler.sample(seed, shot)).map_err(|e| match e {
            EstimatorError::Propagation { source, .. } => EstimatorError::Propagation { shot, source },
            e => e,
        })
    }
}

pub fn estimate_fidelity_pauli_rank(
    proto: &MagicProtocol,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunSummary, EstimatorError> {
    estimate(&PauliRankEstimator::new(proto, noise)?, noise.p, shots, seed, opts)
}

/// `(p_acc, standard error)` from the signed projector combination.
pub fn acceptance_rate(
    proto: &MagicProtocol,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<(f64, f64), EstimatorError> {
    let s = estimate_fidelity_pauli_rank(proto, noise, shots, seed, opts)?;
    Ok((s.p_acc, s.p_acc_err))
}
