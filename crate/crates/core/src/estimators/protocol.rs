use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::decomp::{builtin_decomposition, PauliRankDecomposition};
use super::stabsim::StabilizerGroup;
use super::EstimatorError;
use crate::chform::{ChState, RankDecomposition};
use crate::circuit::{build_422_toy, build_steane_h, CodeSpec, InitState, Op, ProtocolCircuit};
use crate::oracle::{apply_circuit, input_state, DenseState};
use crate::pauli::PauliString;

pub const BUILTIN_PROTOCOLS: [&str; 2] = ["steane-h", "toy-422"];

/// `[a_0, a_1]` with `|ψ⟩ = a_0|0̄⟩ + a_1 X̄|0̄⟩`.
pub type LogicalAmplitudes = [Complex64; 2];

pub fn h_amplitudes() -> LogicalAmplitudes {
    [Complex64::new((PI / 8.0).cos(), 0.0), Complex64::new((PI / 8.0).sin(), 0.0)]
}

pub fn t_amplitudes() -> LogicalAmplitudes {
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::from_polar(FRAC_1_SQRT_2, FRAC_PI_4)]
}

/// A magic-state protocol with its target decomposition and the derived ideal output.
#[derive(Clone, Debug)]
pub struct MagicProtocol {
    pub circuit: ProtocolCircuit,
    pub decomp: PauliRankDecomposition,
    /// Code of the `Logical` data block, when the circuit has one.
    pub code: Option<CodeSpec>,
    /// Target amplitudes per output logical qubit.
    pub amplitudes: Vec<LogicalAmplitudes>,
    /// `n − k` generators of the ideal output outside the logical qubits.
    pub frame: Vec<PauliString>,
}

impl MagicProtocol {
    /// `logical_input` gives the amplitudes of a `Logical` data block; magic inits carry their own.
    pub fn new(
        circuit: ProtocolCircuit,
        decomp: PauliRankDecomposition,
        code: Option<CodeSpec>,
        logical_input: Vec<LogicalAmplitudes>,
    ) -> Result<Self, EstimatorError> {
        let n = circuit.n();
        let k = circuit.logical_observables.len() / 2;
        if circuit.logical_observables.len() != 2 * k || decomp.k != k {
            return Err(EstimatorError::Mismatch(format!(
                "decomposition has {} logical qubits, circuit has {k}",
                decomp.k
            )));
        }
        let has_block = circuit.init.contains(&InitState::Logical);
        let magic: Vec<usize> =
            (0..n).filter(|&q| matches!(circuit.init[q], InitState::MagicH | InitState::MagicT)).collect();
        let mut base = Vec::with_capacity(n);
        let mut carriers = Vec::new();
        let amplitudes: Vec<LogicalAmplitudes>;
        if has_block {
            let code = code.as_ref().ok_or_else(|| EstimatorError::Mismatch("logical block needs its code".into()))?;
            let block: Vec<usize> = (0..n).filter(|&q| circuit.init[q] == InitState::Logical).collect();
            if !magic.is_empty() || code.n() != block.len() || code.k() != k || logical_input.len() != k {
                return Err(EstimatorError::Mismatch("logical block does not match code and target".into()));
            }
            base.extend(code.stabilizers.iter().map(|g| g.embed(n, &block)));
            for j in 0..k {
                let (x, z) = (code.logical_x[j].embed(n, &block), code.logical_z[j].embed(n, &block));
                base.push(z.clone());
                carriers.push((x, z));
            }
            amplitudes = logical_input;
        } else {
            if magic.len() != k {
                return Err(EstimatorError::Mismatch(format!("{} magic inputs for {k} logical qubits", magic.len())));
            }
            amplitudes = magic
                .iter()
                .map(|&q| if circuit.init[q] == InitState::MagicH { h_amplitudes() } else { t_amplitudes() })
                .collect();
            for &q in &magic {
                carriers.push((PauliString::single(n, q, 'X'), PauliString::single(n, q, 'Z')));
            }
        }
        for q in 0..n {
            match circuit.init[q] {
                InitState::Zero | InitState::MagicH | InitState::MagicT => base.push(PauliString::single(n, q, 'Z')),
                InitState::Plus => base.push(PauliString::single(n, q, 'X')),
                InitState::Logical => {}
            }
        }
        // the ideal output is the Clifford part of the circuit applied to the input frame
        let clifford = |p: &PauliString| {
            circuit.ops.iter().fold(p.clone(), |acc, op| match op {
                Op::Gate(g) => circuit.gates[*g].kind.conjugate_pauli(&acc).unwrap_or(acc),
                Op::Noise(_) => acc,
            })
        };
        let mut group = StabilizerGroup::new(n, base.iter().map(clifford).collect());
        group.commutant(&circuit.logical_observables);
        if group.len() != n - k {
            return Err(EstimatorError::Mismatch(format!("frame has {} generators, expected {}", group.len(), n - k)));
        }
        for (j, (x, z)) in carriers.iter().enumerate() {
            for (img, lo) in [(clifford(x), &circuit.logical_observables[2 * j]), (clifford(z), &circuit.logical_observables[2 * j + 1])] {
                let mut rel = img;
                rel.mul_assign_right(lo);
                if group.sign_of(&rel) != Some(1) {
                    return Err(EstimatorError::Mismatch(format!("input carrier {j} does not map onto logical qubit {j}")));
                }
            }
        }
        let frame = group.gens().to_vec();
        if amplitudes.iter().any(|a| (a[0].norm_sqr() + a[1].norm_sqr() - 1.0).abs() > 1e-12) {
            return Err(EstimatorError::Mismatch("logical amplitudes are not normalized".into()));
        }
        Ok(Self { circuit, decomp, code, amplitudes, frame })
    }

    pub fn builtin(name: &str) -> Result<Self, EstimatorError> {
        match name {
            "steane-h" => Self::new(build_steane_h(), builtin_decomposition("H")?, None, vec![]),
            "toy-422" => Self::new(
                build_422_toy(),
                builtin_decomposition("HH_422")?,
                Some(CodeSpec::c4()),
                vec![h_amplitudes(), h_amplitudes()],
            ),
            _ => Err(EstimatorError::UnknownName(name.to_string())),
        }
    }

    pub fn n(&self) -> usize {
        self.circuit.n()
    }

    pub fn k(&self) -> usize {
        self.decomp.k
    }

    pub fn logical_x(&self, j: usize) -> &PauliString {
        &self.circuit.logical_observables[2 * j]
    }

    pub fn logical_z(&self, j: usize) -> &PauliString {
        &self.circuit.logical_observables[2 * j + 1]
    }

    /// Physical operator of logical letter `l` on logical qubit `j`, with `Ȳ = i X̄ Z̄`.
    pub fn logical_letter(&self, j: usize, l: char) -> PauliString {
        match l {
            'X' => self.logical_x(j).clone(),
            'Z' => self.logical_z(j).clone(),
            'Y' => {
                let mut y = self.logical_x(j).clone();
                y.mul_assign_right(self.logical_z(j));
                y.times_i(1)
            }
            _ => PauliString::identity(self.n()),
        }
    }

    /// Physical form of a logical Pauli on the `k` logical qubits.
    pub fn logical_to_physical(&self, p: &PauliString) -> PauliString {
        let mut out = PauliString::identity(self.n());
        for j in p.support() {
            out.mul_assign_right(&self.logical_letter(j, p.letter(j)));
        }
        if p.text_phase() == 2 {
            out = out.negated();
        }
        debug_assert!(out.is_hermitian());
        out
    }

    /// Ideal output as `Σ_b Π_j a_j[b_j] X̄^b |frame, Z̄ = +1⟩`.
    pub fn target_decomposition(&self) -> Result<RankDecomposition, EstimatorError> {
        let n = self.n();
        let k = self.k();
        let mut gens = self.frame.clone();
        gens.extend((0..k).map(|j| self.logical_z(j).clone()));
        let zero = ChState::from_stabilizers(&gens)?;
        let mut out = RankDecomposition::new(n);
        for b in 0..1usize << k {
            let mut c = Complex64::new(1.0, 0.0);
            let mut st = zero.clone();
            for j in 0..k {
                let bit = b >> j & 1;
                c *= self.amplitudes[j][bit];
                if bit == 1 {
                    st.apply_pauli(self.logical_x(j))?;
                }
            }
            if c.norm_sqr() > 0.0 {
                out.push(c, st)?;
            }
        }
        Ok(out)
    }

    /// Dense input state built from the init tags and, for a logical block, by projection.
    pub fn dense_input(&self) -> Result<DenseState, EstimatorError> {
        let c = &self.circuit;
        let Some(code) = &self.code else {
            return Ok(input_state(c, None)?);
        };
        let nd = code.n();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut zero = DenseState::random(nd, &mut rng)?;
        for g in code.stabilizers.iter().chain(&code.logical_z) {
            zero.project(g, true);
        }
        if zero.normalize() < 1e-12 {
            return Err(EstimatorError::Mismatch("empty code space".into()));
        }
        let mut data = DenseState::zero(nd)?;
        data.scale(Complex64::new(0.0, 0.0));
        for b in 0..1usize << code.k() {
            let mut term = zero.clone();
            let mut a = Complex64::new(1.0, 0.0);
            for j in 0..code.k() {
                let bit = b >> j & 1;
                a *= self.amplitudes[j][bit];
                if bit == 1 {
                    term.apply_pauli(&code.logical_x[j]);
                }
            }
            for (d, t) in data.amplitudes_mut().iter_mut().zip(term.amplitudes()) {
                *d += a * t;
            }
        }
        Ok(input_state(c, Some(&data))?)
    }

    /// Normalized output of the full noiseless circuit on the dense input.
    pub fn dense_ideal_output(&self) -> Result<DenseState, EstimatorError> {
        let mut s = self.dense_input()?;
        apply_circuit(&mut s, &self.circuit, None);
        s.normalize();
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_targets_match_dense_ideal_output() {
        for name in BUILTIN_PROTOCOLS {
            let m = MagicProtocol::builtin(name).unwrap();
            assert_eq!(m.frame.len(), m.n() - m.k());
            let ideal = m.dense_ideal_output().unwrap();
            let t = DenseState::from_amplitudes(m.target_decomposition().unwrap().to_dense()).unwrap();
            let ov = t.inner(&ideal).norm_sqr() / t.norm_sqr();
            assert!((ov - 1.0).abs() < 1e-10, "{name}: overlap {ov}");
            // the decomposition coefficients are the logical expectations of the target
            for (b, p) in &m.decomp.terms {
                let e = ideal.expectation(&m.logical_to_physical(p)).re;
                assert!((e - b).abs() < 1e-10, "{name}: {p}");
            }
            for g in &m.frame {
                assert!((ideal.expectation(g).re - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn steane_logical_y_sign() {
        let m = MagicProtocol::builtin("steane-h").unwrap();
        assert_eq!(m.logical_letter(0, 'Y'), "-YYYYYYY__".parse::<PauliString>().unwrap());
    }
}
