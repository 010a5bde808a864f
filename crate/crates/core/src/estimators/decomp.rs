use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::oracle::matrix::{self, CMat};
use crate::pauli::PauliString;

/// `ρ̄ = (1/2^k)(I + Σ β_i P̄_i)` over `k` logical qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliRankDecomposition {
    pub k: usize,
    pub terms: Vec<(f64, PauliString)>,
}

impl PauliRankDecomposition {
    pub fn new(k: usize, terms: Vec<(f64, PauliString)>) -> Result<Self, EstimatorError> {
        for (_, p) in &terms {
            if p.n() != k {
                return Err(EstimatorError::Decomposition(format!("{p} is not on {k} logical qubits")));
            }
            if !p.is_hermitian() || p.is_identity() {
                return Err(EstimatorError::Decomposition(format!("{p} must be a non-identity Hermitian Pauli")));
            }
        }
        Ok(Self { k, terms })
    }

    /// Pauli rank: number of non-identity terms.
    pub fn p(&self) -> usize {
        self.terms.len()
    }

    pub fn to_dense(&self) -> CMat {
        let d = 1usize << self.k;
        let mut m = matrix::identity(d);
        for (b, p) in &self.terms {
            m += matrix::pauli_matrix(p) * matrix::c(*b, 0.0);
        }
        m * matrix::c(1.0 / d as f64, 0.0)
    }

    /// `Σ β_i²`, which is `2^k − 1` for a pure target.
    pub fn purity_sum(&self) -> f64 {
        self.terms.iter().map(|(b, _)| b * b).sum()
    }
}

fn lp(s: &str) -> PauliString {
    s.parse().expect("literal Pauli")
}

/// Built-in magic-state decompositions: `H`, `T` and `HH_422`.
pub fn builtin_decomposition(name: &str) -> Result<PauliRankDecomposition, EstimatorError> {
    let r = FRAC_1_SQRT_2;
    let terms = match name {
        "T" => vec![(r, lp("+X")), (r, lp("+Y"))],
        "H" => vec![(r, lp("+X")), (r, lp("+Z"))],
        "HH_422" => vec![
            (r, lp("+X_")),
            (r, lp("+Z_")),
            (r, lp("+_X")),
            (r, lp("+_Z")),
            (0.5, lp("+XX")),
            (0.5, lp("+XZ")),
            (0.5, lp("+ZX")),
            (0.5, lp("+ZZ")),
        ],
        _ => return Err(EstimatorError::UnknownName(name.to_string())),
    };
    let k = terms[0].1.n();
    PauliRankDecomposition::new(k, terms)
}

/// `P̄ = Σ_l (−1)^{γ_l} Π_l` over the `2^k` product eigenprojectors of a letter basis.
///
/// Identity positions of `P̄` use the `Z` basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectorDecomposition {
    pub basis: Vec<char>,
    /// `(γ_l, s_l)`: sign bit and eigenvalue bits (bit `j` set means eigenvalue −1 on logical qubit `j`).
    pub terms: Vec<(bool, u64)>,
}

impl ProjectorDecomposition {
    pub fn of(p: &PauliString) -> Self {
        let k = p.n();
        let basis: Vec<char> = (0..k).map(|j| if p.acts_on(j) { p.letter(j) } else { 'Z' }).collect();
        let neg = p.text_phase() == 2;
        let supp: u64 = p.support().iter().map(|&j| 1u64 << j).sum();
        let terms = (0..1u64 << k).map(|s| (neg ^ ((s & supp).count_ones() % 2 == 1), s)).collect();
        Self { basis, terms }
    }

    /// The identity written over the all-`Z` basis.
    pub fn identity(k: usize) -> Self {
        Self { basis: vec!['Z'; k], terms: (0..1u64 << k).map(|s| (false, s)).collect() }
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    /// Logical generators `±L_j` of the projector with eigenvalue bits `s`.
    pub fn generators(&self, s: u64) -> Vec<PauliString> {
        let k = self.k();
        (0..k)
            .map(|j| {
                let g = PauliString::single(k, j, self.basis[j]);
                if s >> j & 1 == 1 {
                    g.negated()
                } else {
                    g
                }
            })
            .collect()
    }

    pub fn projector_dense(&self, s: u64) -> CMat {
        let d = 1usize << self.k();
        let mut m = matrix::identity(d);
        for g in self.generators(s) {
            let half = (matrix::identity(d) + matrix::pauli_matrix(&g)) * matrix::c(0.5, 0.0);
            m = half * m;
        }
        m
    }

    pub fn to_dense(&self) -> CMat {
        let d = 1usize << self.k();
        let mut m = CMat::zeros(d, d);
        for &(neg, s) in &self.terms {
            let sign = if neg { -1.0 } else { 1.0 };
            m += self.projector_dense(s) * matrix::c(sign, 0.0);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{DenseChannelState, DenseState};
    use num_complex::Complex64;

    fn magic_h() -> DenseState {
        let t = std::f64::consts::PI / 8.0;
        DenseState::from_amplitudes(vec![Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0)]).unwrap()
    }

    fn magic_t() -> DenseState {
        let mut s = DenseState::zero(1).unwrap();
        s.apply_h(0);
        s.apply_t(0);
        s
    }

    fn check_pure(d: &PauliRankDecomposition, psi: &DenseState) {
        let a = psi.amplitudes();
        let dim = a.len();
        let rho = CMat::from_fn(dim, dim, |i, j| a[i] * a[j].conj());
        assert!(matrix::max_abs(&(d.to_dense() - rho)) < 1e-12);
        assert!(DenseChannelState::from_matrix(d.to_dense()).unwrap().is_valid(1e-10));
    }

    #[test]
    fn builtins_reconstruct_their_states() {
        check_pure(&builtin_decomposition("H").unwrap(), &magic_h());
        check_pure(&builtin_decomposition("T").unwrap(), &magic_t());
        let hh = builtin_decomposition("HH_422").unwrap();
        assert_eq!((hh.k, hh.p()), (2, 8));
        check_pure(&hh, &magic_h().tensor(&magic_h()).unwrap());
        for name in ["H", "T", "HH_422"] {
            let d = builtin_decomposition(name).unwrap();
            assert!((d.purity_sum() - ((1 << d.k) - 1) as f64).abs() < 1e-12);
        }
        assert!(builtin_decomposition("Q").is_err());
    }

    #[test]
    fn projector_sums_reconstruct_paulis() {
        for s in ["+X", "-Y", "+XZ", "+_Y", "-ZX", "+Y_X", "-_Z_"] {
            let p: PauliString = s.parse().unwrap();
            let d = ProjectorDecomposition::of(&p);
            assert!(matrix::max_abs(&(d.to_dense() - matrix::pauli_matrix(&p))) < 1e-12, "{s}");
        }
        let id = ProjectorDecomposition::identity(3);
        assert!(matrix::max_abs(&(id.to_dense() - matrix::identity(8))) < 1e-12);
    }
}
