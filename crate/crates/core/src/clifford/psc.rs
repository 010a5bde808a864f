use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CliffordError, CliffordTableau};
use crate::oracle::matrix::{self, CMat};
use crate::pauli::PauliString;

/// `α · P · Π_j exp(iπ/4 Q_j)` with `α = e^{iπ k/4}` and commuting Hermitian `Q_j`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PscFormRepr", into = "PscFormRepr")]
pub struct PscForm {
    alpha_exp8: u8,
    p: PauliString,
    q_set: Vec<PauliString>,
    order: u8,
}

#[derive(Serialize, Deserialize)]
struct PscFormRepr {
    alpha_exp8: u8,
    p: PauliString,
    q_set: Vec<PauliString>,
}

impl TryFrom<PscFormRepr> for PscForm {
    type Error = CliffordError;
    fn try_from(r: PscFormRepr) -> Result<Self, Self::Error> {
        PscForm::new(r.alpha_exp8, r.p, r.q_set)
    }
}

impl From<PscForm> for PscFormRepr {
    fn from(f: PscForm) -> Self {
        PscFormRepr { alpha_exp8: f.alpha_exp8, p: f.p, q_set: f.q_set }
    }
}

impl PscForm {
    pub fn new(alpha_exp8: u8, p: PauliString, q_set: Vec<PauliString>) -> Result<Self, CliffordError> {
        let n = p.n();
        for q in &q_set {
            if q.n() != n {
                return Err(CliffordError::Dimension);
            }
            if !q.is_hermitian() {
                return Err(CliffordError::Invalid(format!("non-Hermitian Q {q}")));
            }
        }
        for (i, a) in q_set.iter().enumerate() {
            for b in &q_set[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(CliffordError::Invalid(format!("{a} and {b} anticommute")));
                }
            }
        }
        let mut f = Self { alpha_exp8: alpha_exp8 % 8, p, q_set, order: 2 };
        f.order = if f.square().is_identity() { 2 } else { 4 };
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn alpha_exp8(&self) -> u8 {
        self.alpha_exp8
    }

    pub fn alpha(&self) -> Complex64 {
        matrix::omega8(self.alpha_exp8 as u32)
    }

    pub fn pauli_p(&self) -> &PauliString {
        &self.p
    }

    pub fn q_set(&self) -> &[PauliString] {
        &self.q_set
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn support(&self) -> Vec<usize> {
        let mut on = vec![false; self.n()];
        for p in std::iter::once(&self.p).chain(&self.q_set) {
            for q in p.support() {
                on[q] = true;
            }
        }
        (0..self.n()).filter(|&i| on[i]).collect()
    }

    /// Exact `C²`, a Pauli since the `Q_j` commute.
    pub fn square(&self) -> PauliString {
        // C² = α² P² Π_{[Q_j,P]=0} (i Q_j)
        let mut out = self.p.mul_unchecked(&self.p);
        for q in &self.q_set {
            if q.commutes_with(&self.p) {
                out.mul_assign_right(&q.times_i(1));
            }
        }
        // α² = i^{alpha_exp8}
        out.add_phase(self.alpha_exp8 as u32);
        out
    }

    /// `C R C†` with exact phase.
    pub fn conjugate(&self, r: &PauliString) -> PauliString {
        let mut out = r.clone();
        for q in &self.q_set {
            if !q.commutes_with(&out) {
                // e^{iπ/4 Q} R e^{-iπ/4 Q} = i Q R
                out.mul_assign_left(q);
                out.add_phase(1);
            }
        }
        if !self.p.commutes_with(&out) {
            out.add_phase(2);
        }
        out
    }

    /// Form of `G C G†` for a Clifford `G` given by its Pauli action.
    pub fn map_paulis(&self, f: impl Fn(&PauliString) -> PauliString) -> PscForm {
        let p = f(&self.p);
        let q_set = self.q_set.iter().map(&f).collect();
        PscForm { alpha_exp8: self.alpha_exp8, p, q_set, order: self.order }
    }

    pub fn with_alpha(&self, alpha_exp8: u8) -> PscForm {
        let mut f = self.clone();
        f.alpha_exp8 = alpha_exp8 % 8;
        f
    }

    pub fn embed(&self, n: usize, qubits: &[usize]) -> PscForm {
        PscForm {
            alpha_exp8: self.alpha_exp8,
            p: self.p.embed(n, qubits),
            q_set: self.q_set.iter().map(|q| q.embed(n, qubits)).collect(),
            order: self.order,
        }
    }

    /// Inverse of `embed`; all Paulis must be supported inside `qubits`.
    pub fn restrict(&self, qubits: &[usize]) -> PscForm {
        PscForm {
            alpha_exp8: self.alpha_exp8,
            p: self.p.restrict(qubits),
            q_set: self.q_set.iter().map(|q| q.restrict(qubits)).collect(),
            order: self.order,
        }
    }

    pub fn to_tableau(&self) -> CliffordTableau {
        let n = self.n();
        let xs = (0..n).map(|i| self.conjugate(&PauliString::single(n, i, 'X'))).collect();
        let zs = (0..n).map(|i| self.conjugate(&PauliString::single(n, i, 'Z'))).collect();
        CliffordTableau::from_images(xs, zs).expect("psc conjugation is symplectic")
    }

    /// Dense reconstruction of the unitary.
    pub fn to_dense(&self) -> CMat {
        let dim = 1usize << self.n();
        let mut m = matrix::pauli_matrix(&self.p) * self.alpha();
        for q in &self.q_set {
            m *= matrix::exp_quarter(q);
        }
        debug_assert_eq!(m.nrows(), dim);
        m
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    // standard one-qubit forms

    /// `H = Z · exp(iπ/4 Y)`.
    pub fn hadamard() -> PscForm {
        PscForm::new(0, "+Z".parse().unwrap(), vec!["+Y".parse().unwrap()]).unwrap()
    }

    /// `S = e^{iπ/4} · exp(-iπ/4 Z)`.
    pub fn phase_s() -> PscForm {
        PscForm::new(1, "+_".parse().unwrap(), vec!["-Z".parse().unwrap()]).unwrap()
    }

    /// `S† = e^{-iπ/4} · exp(iπ/4 Z)`.
    pub fn phase_sdg() -> PscForm {
        PscForm::new(7, "+_".parse().unwrap(), vec!["+Z".parse().unwrap()]).unwrap()
    }

    /// `C_c(Q) = e^{iπ/4} exp(iπ/4 (-Z_c - Q + Z_c Q))` for Hermitian `Q` commuting with `Z_c`.
    pub fn controlled_pauli(control: usize, target: &PauliString) -> PscForm {
        let n = target.n();
        let zc = PauliString::single(n, control, 'Z');
        let q_set = vec![zc.negated(), target.negated(), zc.mul_unchecked(target)];
        PscForm::new(1, PauliString::identity(n), q_set).unwrap()
    }

    pub fn is_hadamard_form(&self) -> bool {
        self.n() == 1 && *self == PscForm::hadamard()
    }
}

impl fmt::Debug for PscForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Psc({})", self.to_json())
    }
}

impl fmt::Display for PscForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

/// A PSC factor on an explicit qubit subset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalPsc {
    pub support: Vec<usize>,
    pub form: PscForm,
}

impl LocalPsc {
    pub fn new(support: Vec<usize>, form: PscForm) -> Self {
        assert_eq!(support.len(), form.n());
        Self { support, form }
    }

    pub fn embed(&self, n: usize) -> PscForm {
        self.form.embed(n, &self.support)
    }
}

/// Symmetric F2 decomposition `S = Σ v vᵀ`, diagonal pivots first, lowest index on ties.
pub(crate) fn symmetric_rank_one_terms(mut s: Vec<Vec<u8>>) -> Vec<Vec<u8>> {
    let d = s.len();
    let mut terms = Vec::new();
    let add = |s: &mut Vec<Vec<u8>>, v: &[u8]| {
        for i in 0..d {
            if v[i] == 1 {
                for j in 0..d {
                    s[i][j] ^= v[j];
                }
            }
        }
    };
    loop {
        if let Some(i) = (0..d).find(|&i| s[i][i] == 1) {
            let v: Vec<u8> = (0..d).map(|r| s[r][i]).collect();
            add(&mut s, &v);
            terms.push(v);
            continue;
        }
        let mut pair = None;
        'outer: for i in 0..d {
            for j in i + 1..d {
                if s[i][j] == 1 {
                    pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = pair else { break };
        let a: Vec<u8> = (0..d).map(|r| s[r][i]).collect();
        let b: Vec<u8> = (0..d).map(|r| s[r][j]).collect();
        let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        for v in [a, b, ab] {
            add(&mut s, &v);
            terms.push(v);
        }
    }
    terms
}

/// Symplectic images of the generators of a dense Clifford, or `None` if not Clifford.
pub(crate) fn dense_tableau(u: &CMat) -> Option<CliffordTableau> {
    let dim = u.nrows();
    let n = dim.trailing_zeros() as usize;
    let ud = u.adjoint();
    let mut images = Vec::with_capacity(2 * n);
    for letter in ['X', 'Z'] {
        for i in 0..n {
            let g = PauliString::single(n, i, letter);
            let m = u * matrix::pauli_matrix(&g) * &ud;
            let (p, lam) = matrix::identify_pauli(&m)?;
            let sign = if (lam - Complex64::new(1.0, 0.0)).norm() < 1e-6 {
                p
            } else if (lam + Complex64::new(1.0, 0.0)).norm() < 1e-6 {
                p.negated()
            } else {
                return None;
            };
            images.push(sign);
        }
    }
    let zimg = images.split_off(n);
    CliffordTableau::from_images(images, zimg)
}

pub fn canonicalize_psc(u: &CMat, support: &[usize]) -> Result<LocalPsc, CliffordError> {
    let dim = u.nrows();
    if !dim.is_power_of_two() || u.ncols() != dim || dim.trailing_zeros() as usize != support.len() {
        return Err(CliffordError::Dimension);
    }
    if support.len() > 8 {
        return Err(CliffordError::SupportTooLarge(support.len()));
    }
    if !matrix::is_unitary(u) {
        return Err(CliffordError::NonUnitary);
    }
    let n = support.len();
    let tab = dense_tableau(u).ok_or(CliffordError::NotPsc("not Clifford"))?;
    // C as columns: column g = symplectic vector of the image of generator g (X_0.., Z_0..)
    let cols: Vec<Vec<bool>> = (0..n)
        .map(|i| tab.x_image(i).to_symplectic())
        .chain((0..n).map(|i| tab.z_image(i).to_symplectic()))
        .collect();
    let d = 2 * n;
    // N = C + I, S = ωN
    let mut nmat = vec![vec![0u8; d]; d];
    for (g, col) in cols.iter().enumerate() {
        for r in 0..d {
            nmat[r][g] = col[r] as u8 ^ (r == g) as u8;
        }
    }
    let omega = |r: usize| if r < n { r + n } else { r - n };
    let s: Vec<Vec<u8>> = (0..d).map(|r| nmat[omega(r)].clone()).collect();
    for r in 0..d {
        for c2 in 0..d {
            if s[r][c2] != s[c2][r] {
                return Err(CliffordError::NotPsc("ωN not symmetric"));
            }
        }
    }
    let terms = symmetric_rank_one_terms(s);
    let q_set: Vec<PauliString> = terms
        .iter()
        .map(|v| {
            let u: Vec<bool> = (0..d).map(|r| v[omega(r)] == 1).collect();
            PauliString::from_symplectic(&u)
        })
        .collect();
    let mut e = matrix::identity(dim);
    for q in &q_set {
        e *= matrix::exp_quarter(q);
    }
    let residual = u * e.adjoint();
    let (p, lam) = matrix::identify_pauli(&residual).ok_or(CliffordError::NotPsc("residual not Pauli"))?;
    let k = (0..8u32)
        .find(|&k| (lam - matrix::omega8(k)).norm() < 1e-7)
        .ok_or(CliffordError::NotPsc("phase is not an eighth root of unity"))?;
    let form = PscForm::new(k as u8, p, q_set)?;
    Ok(LocalPsc::new(support.to_vec(), form))
}

/// Clifford whose square is a Pauli with phase in {±1, ±i}. Paulis are included.
pub fn is_psc(u: &CMat) -> Result<bool, CliffordError> {
    if !matrix::is_unitary(u) {
        return Err(CliffordError::NonUnitary);
    }
    if dense_tableau(u).is_none() {
        return Ok(false);
    }
    let sq = u * u;
    Ok(match matrix::identify_pauli(&sq) {
        Some((_, lam)) => (0..4).any(|e| (lam - matrix::i_pow(e)).norm() < 1e-7),
        None => false,
    })
}

pub fn is_psc_tableau(t: &CliffordTableau) -> bool {
    t.is_psc()
}

fn is_clifford(w: &CMat) -> bool {
    let dim = w.nrows();
    let n = dim.trailing_zeros() as usize;
    let wd = w.adjoint();
    for letter in ['X', 'Z'] {
        for i in 0..n {
            let m = w * matrix::pauli_matrix(&PauliString::single(n, i, letter)) * &wd;
            if matrix::identify_pauli(&m).is_none() {
                return false;
            }
        }
    }
    true
}

/// Controlled-`u` lies in the third level of the Clifford hierarchy.
pub fn controlled_in_third_level(u: &CMat) -> Result<bool, CliffordError> {
    if !matrix::is_unitary(u) {
        return Err(CliffordError::NonUnitary);
    }
    let k = u.nrows().trailing_zeros() as usize;
    if k > 4 {
        return Err(CliffordError::SupportTooLarge(k));
    }
    let cu = matrix::controlled(u);
    let cud = cu.adjoint();
    let n = k + 1;
    for letter in ['X', 'Z'] {
        for i in 0..n {
            let w = &cu * matrix::pauli_matrix(&PauliString::single(n, i, letter)) * &cud;
            if !is_clifford(&w) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommutationClass {
    Commute,
    Anticommute,
    Neither,
}

pub fn psc_commutation_class(q: &PauliString, c: &PscForm) -> CommutationClass {
    let img = c.conjugate(q);
    if img == *q {
        CommutationClass::Commute
    } else if img == q.negated() {
        CommutationClass::Anticommute
    } else {
        CommutationClass::Neither
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn hadamard_form_reconstructs() {
        assert!(matrix::max_abs(&(PscForm::hadamard().to_dense() - matrix::h())) < 1e-12);
        assert!(matrix::max_abs(&(PscForm::phase_s().to_dense() - matrix::s())) < 1e-12);
        assert!(matrix::max_abs(&(PscForm::phase_sdg().to_dense() - matrix::s().adjoint())) < 1e-12);
    }

    #[test]
    fn canonical_h() {
        let f = canonicalize_psc(&matrix::h(), &[0]).unwrap().form;
        assert_eq!(f.alpha_exp8(), 0);
        assert_eq!(f.pauli_p(), &p("+Z"));
        assert_eq!(f.q_set(), &[p("+Y")]);
    }

    #[test]
    fn canonical_cz_reconstructs() {
        let f = canonicalize_psc(&matrix::cz(), &[0, 1]).unwrap().form;
        assert!(matrix::max_abs(&(f.to_dense() - matrix::cz())) < 1e-12);
        assert_eq!(f.q_set().len(), 3);
    }

    #[test]
    fn controlled_pauli_form() {
        let f = PscForm::controlled_pauli(0, &p("+_X"));
        assert!(matrix::max_abs(&(f.to_dense() - matrix::cx())) < 1e-12);
    }

    #[test]
    fn y_anticommutes_with_h() {
        assert_eq!(psc_commutation_class(&p("+Y"), &PscForm::hadamard()), CommutationClass::Anticommute);
        assert_eq!(psc_commutation_class(&p("+_"), &PscForm::hadamard()), CommutationClass::Commute);
        assert_eq!(psc_commutation_class(&p("+X"), &PscForm::hadamard()), CommutationClass::Neither);
    }

    #[test]
    fn square_matches_dense() {
        for f in [PscForm::hadamard(), PscForm::phase_s(), PscForm::phase_sdg()] {
            let d = f.to_dense();
            let sq = matrix::pauli_matrix(&f.square());
            assert!(matrix::max_abs(&(&d * &d - sq)) < 1e-12, "{f}");
        }
        assert_eq!(PscForm::phase_s().order(), 4);
        assert_eq!(PscForm::hadamard().order(), 2);
    }
}
