use num_complex::Complex64;

use super::matrix::{self, max_abs, CMat};
use super::{DenseState, OracleError};
use crate::pauli::PauliString;

pub const MAX_DENSITY_QUBITS: usize = 4;

/// Density matrix on at most four qubits.
#[derive(Clone, Debug)]
pub struct DenseChannelState {
    n: usize,
    rho: CMat,
}

impl DenseChannelState {
    pub fn from_matrix(rho: CMat) -> Result<Self, OracleError> {
        let d = rho.nrows();
        if d != rho.ncols() || !d.is_power_of_two() {
            return Err(OracleError::Shape);
        }
        let n = d.trailing_zeros() as usize;
        if n > MAX_DENSITY_QUBITS {
            return Err(OracleError::TooLarge(n));
        }
        Ok(Self { n, rho })
    }

    pub fn from_pure(psi: &DenseState) -> Result<Self, OracleError> {
        let v = CMat::from_column_slice(psi.amplitudes().len(), 1, psi.amplitudes());
        Self::from_matrix(&v * v.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Result<Self, OracleError> {
        let d = 1usize << n;
        Self::from_matrix(matrix::identity(d) * Complex64::new(1.0 / d as f64, 0.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn apply_unitary(&mut self, u: &CMat) {
        self.rho = u * &self.rho * u.adjoint();
    }

    pub fn apply_kraus(&mut self, ops: &[CMat]) {
        let mut out = CMat::zeros(self.rho.nrows(), self.rho.ncols());
        for k in ops {
            out += k * &self.rho * k.adjoint();
        }
        self.rho = out;
    }

    /// `ρ → Σ_j p_j P_j ρ P_j` with the identity taking the remaining weight.
    pub fn apply_pauli_channel(&mut self, terms: &[(PauliString, f64)]) {
        let rest: f64 = 1.0 - terms.iter().map(|t| t.1).sum::<f64>();
        let mut out = &self.rho * Complex64::new(rest, 0.0);
        for (p, w) in terms {
            let m = matrix::pauli_matrix(p);
            out += &m * &self.rho * m.adjoint() * Complex64::new(*w, 0.0);
        }
        self.rho = out;
    }

    pub fn expectation(&self, p: &PauliString) -> Complex64 {
        (&self.rho * matrix::pauli_matrix(p)).trace()
    }

    pub fn fidelity_with(&self, psi: &DenseState) -> f64 {
        let v = CMat::from_column_slice(psi.amplitudes().len(), 1, psi.amplitudes());
        (v.adjoint() * &self.rho * &v)[(0, 0)].re
    }

    /// Hermitian, unit trace and positive semidefinite within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        if max_abs(&(&self.rho - self.rho.adjoint())) > tol || (self.trace() - Complex64::new(1.0, 0.0)).norm() > tol {
            return false;
        }
        let eig = nalgebra::linalg::SymmetricEigen::try_new(hermitian_as_real(&self.rho), 1e-14, 10_000);
        match eig {
            Some(e) => e.eigenvalues.iter().all(|&l| l >= -tol),
            None => false,
        }
    }

    /// Largest off-diagonal magnitude after rotating into the orthonormal basis given by the columns of `basis`.
    pub fn max_offdiag_in(&self, basis: &CMat) -> f64 {
        let r = basis.adjoint() * &self.rho * basis;
        let mut m = 0.0f64;
        for i in 0..r.nrows() {
            for j in 0..r.ncols() {
                if i != j {
                    m = m.max(r[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn distance(&self, other: &DenseChannelState) -> f64 {
        max_abs(&(&self.rho - &other.rho))
    }
}

/// Real symmetric embedding `[[A, -B], [B, A]]` of `A + iB`; same spectrum, doubled.
fn hermitian_as_real(h: &CMat) -> nalgebra::DMatrix<f64> {
    let d = h.nrows();
    nalgebra::DMatrix::from_fn(2 * d, 2 * d, |r, c| {
        let z = h[(r % d, c % d)];
        match (r < d, c < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

fn all_paulis(n: usize) -> impl Iterator<Item = PauliString> {
    (0..1u64 << (2 * n)).map(move |code| {
        let x = code & ((1 << n) - 1);
        let z = code >> n;
        let mut p = PauliString::from_masks(n, x, z, 0);
        // make Hermitian
        p.set_phase_exp((p.y_count() % 4) as u8);
        p
    })
}

/// Number of non-identity Paulis with `|Tr(ρP)| > 1e-10`.
pub fn pauli_rank_bruteforce(rho: &DenseChannelState) -> Result<usize, OracleError> {
    if rho.n() > 3 {
        return Err(OracleError::TooLarge(rho.n()));
    }
    Ok(all_paulis(rho.n()).filter(|p| !p.is_identity()).filter(|p| rho.expectation(p).norm() > 1e-10).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_state_rank() {
        let z = DenseState::zero(2).unwrap();
        let r = DenseChannelState::from_pure(&z).unwrap();
        assert!(r.is_valid(1e-10));
        assert_eq!(pauli_rank_bruteforce(&r).unwrap(), 3);
        assert_eq!(pauli_rank_bruteforce(&DenseChannelState::maximally_mixed(3).unwrap()).unwrap(), 0);
    }

    #[test]
    fn invalid_state_detected() {
        let mut m = matrix::identity(2) * Complex64::new(0.5, 0.0);
        m[(0, 0)] = Complex64::new(1.2, 0.0);
        m[(1, 1)] = Complex64::new(-0.2, 0.0);
        assert!(!DenseChannelState::from_matrix(m).unwrap().is_valid(1e-10));
    }
}
