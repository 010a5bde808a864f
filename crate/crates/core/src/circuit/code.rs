use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{LocalPsc, PscForm};
use crate::pauli::PauliString;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("stabilizers {0} and {1} do not commute")]
    StabilizersAnticommute(usize, usize),
    #[error("logical {0} does not commute with stabilizer {1}")]
    LogicalAnticommutes(usize, usize),
    #[error("psc factors overlap")]
    OverlappingFactors,
    #[error("qubit count mismatch")]
    Width,
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub stabilizers: Vec<PauliString>,
    pub logical_x: Vec<PauliString>,
    pub logical_z: Vec<PauliString>,
    #[serde(default)]
    pub psc_factors: Vec<LocalPsc>,
}

impl CodeSpec {
    pub fn new(
        stabilizers: Vec<PauliString>,
        logical_x: Vec<PauliString>,
        logical_z: Vec<PauliString>,
        psc_factors: Vec<LocalPsc>,
    ) -> Result<Self, CodeError> {
        let c = Self { stabilizers, logical_x, logical_z, psc_factors };
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(s: &str) -> Result<Self, CodeError> {
        let c: CodeSpec = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CodeError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn n(&self) -> usize {
        self.stabilizers
            .first()
            .or(self.logical_x.first())
            .map(|p| p.n())
            .unwrap_or(0)
    }

    pub fn k(&self) -> usize {
        self.logical_x.len()
    }

    pub fn validate(&self) -> Result<(), CodeError> {
        let n = self.n();
        let all = self.stabilizers.iter().chain(&self.logical_x).chain(&self.logical_z);
        if all.clone().any(|p| p.n() != n) || self.logical_x.len() != self.logical_z.len() {
            return Err(CodeError::Width);
        }
        for (i, a) in self.stabilizers.iter().enumerate() {
            for (j, b) in self.stabilizers.iter().enumerate().skip(i + 1) {
                if !a.commutes_with(b) {
                    return Err(CodeError::StabilizersAnticommute(i, j));
                }
            }
        }
        for (i, l) in self.logical_x.iter().chain(&self.logical_z).enumerate() {
            for (j, g) in self.stabilizers.iter().enumerate() {
                if !l.commutes_with(g) {
                    return Err(CodeError::LogicalAnticommutes(i, j));
                }
            }
        }
        let mut used = vec![false; n];
        for f in &self.psc_factors {
            for &q in &f.support {
                if q >= n || used[q] {
                    return Err(CodeError::OverlappingFactors);
                }
                used[q] = true;
            }
        }
        Ok(())
    }

    /// Maximum stabilizer weight.
    pub fn w_c(&self) -> usize {
        self.stabilizers.iter().map(|g| g.weight()).max().unwrap_or(0)
    }

    /// Maximum number of stabilizers touching one qubit.
    pub fn w_q(&self) -> usize {
        (0..self.n())
            .map(|q| self.stabilizers.iter().filter(|g| g.acts_on(q)).count())
            .max()
            .unwrap_or(0)
    }

    /// Number of PSC factors of the transversal logical PSC.
    pub fn ell(&self) -> usize {
        self.psc_factors.len()
    }

    /// The `[[4,2,2]]` code with transversal `H` (swapping the two logical qubits' X and Z).
    pub fn c4() -> Self {
        let p = |s: &str| s.parse::<PauliString>().unwrap();
        CodeSpec::new(
            vec![p("+ZZZZ"), p("+XXXX")],
            vec![p("+XX__"), p("+X_X_")],
            vec![p("+Z_Z_"), p("+ZZ__")],
            (0..4).map(|q| LocalPsc::new(vec![q], PscForm::hadamard())).collect(),
        )
        .unwrap()
    }

    /// `[[n, n-2, 2]]` even-weight code; transversal `H` preserves it.
    pub fn iceberg(n: usize) -> Self {
        assert!(n >= 4 && n.is_multiple_of(2));
        let z = PauliString::z_on(n, &(0..n).collect::<Vec<_>>());
        let x = PauliString::x_on(n, &(0..n).collect::<Vec<_>>());
        let lx = (1..n - 1).map(|j| PauliString::x_on(n, &[0, j])).collect();
        let lz = (1..n - 1).map(|j| PauliString::z_on(n, &[j, n - 1])).collect();
        CodeSpec::new(
            vec![z, x],
            lx,
            lz,
            (0..n).map(|q| LocalPsc::new(vec![q], PscForm::hadamard())).collect(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c4_parameters() {
        let c = CodeSpec::c4();
        assert_eq!((c.n(), c.k(), c.w_c(), c.w_q(), c.ell()), (4, 2, 4, 2, 4));
        for (x, z) in c.logical_x.iter().zip(&c.logical_z) {
            assert!(!x.commutes_with(z));
        }
        assert!(c.logical_x[0].commutes_with(&c.logical_z[1]));
    }

    #[test]
    fn json_roundtrip() {
        let c = CodeSpec::c4();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(CodeSpec::from_json(&s).unwrap(), c);
    }

    #[test]
    fn iceberg_is_valid() {
        for n in [4, 6, 8] {
            let c = CodeSpec::iceberg(n);
            assert_eq!(c.k(), n - 2);
            assert_eq!(c.w_c(), n);
        }
    }
}
