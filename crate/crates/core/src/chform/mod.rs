//! Stabilizer states in CH form `ω U_C U_H |s⟩` with exact global phase.
//!
//! `U_C` is tracked through its inverse action on Paulis:
//! `U_C† Z_p U_C = Z(G_p)` and `U_C† X_p U_C = i^{γ_p} X(F_p) Z(M_p)`.
//! Rows are bit masks, so states hold at most 64 qubits.

mod rank;

pub use rank::{sample_syndrome_and_overlap, RankDecomposition, SyndromeSample};

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::GateKind;
use crate::clifford::{CliffordTableau, ErrorGate, PscForm};
use crate::pauli::PauliString;

pub const MAX_CH_QUBITS: usize = 64;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChError {
    #[error("CH form supports at most 64 qubits, got {0}")]
    TooWide(usize),
    #[error("width mismatch: {0} vs {1}")]
    Width(usize, usize),
    #[error("gate {0} is not in the CH generator set")]
    Unsupported(String),
    #[error("every measurement branch has zero norm")]
    ZeroNorm,
    #[error("generators do not define a stabilizer state: {0}")]
    BadGenerators(String),
}

fn i_pow(e: u8) -> Complex64 {
    match e & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[inline]
fn parity(x: u64) -> u8 {
    (x.count_ones() & 1) as u8
}

#[inline]
fn bit(x: u64, i: usize) -> bool {
    x >> i & 1 == 1
}

/// `i^e X(x) Z(z)` on at most 64 qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pm {
    e: u8,
    x: u64,
    z: u64,
}

impl Pm {
    fn mul(self, o: Pm) -> Pm {
        Pm { e: (self.e + o.e + 2 * parity(self.z & o.x)) & 3, x: self.x ^ o.x, z: self.z ^ o.z }
    }

    fn from_pauli(p: &PauliString) -> Pm {
        Pm { e: p.phase_exp(), x: p.x_mask(), z: p.z_mask() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChState {
    n: usize,
    mask: u64,
    g: Vec<u64>,
    f: Vec<u64>,
    m: Vec<u64>,
    gamma: Vec<u8>,
    v: u64,
    s: u64,
    omega: Complex64,
}

impl ChState {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self, ChError> {
        if n > MAX_CH_QUBITS {
            return Err(ChError::TooWide(n));
        }
        let rows: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        Ok(Self {
            n,
            mask: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
            g: rows.clone(),
            f: rows,
            m: vec![0; n],
            gamma: vec![0; n],
            v: 0,
            s: 0,
            omega: Complex64::new(1.0, 0.0),
        })
    }

    /// Computational basis state `|x⟩` (bit `q` of `x` is qubit `q`).
    pub fn basis(n: usize, x: u64) -> Result<Self, ChError> {
        let mut st = Self::zero(n)?;
        st.s = x & st.mask;
        Ok(st)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    pub fn scale(&mut self, c: Complex64) {
        self.omega *= c;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.omega.norm_sqr()
    }

    pub fn is_zero(&self) -> bool {
        self.omega.norm_sqr() < 1e-300
    }

    pub fn hadamard_mask(&self) -> u64 {
        self.v
    }

    pub fn basis_vector(&self) -> u64 {
        self.s
    }

    // ---- U_C updates; `right` multiplies U_C on the right.

    fn s_left(&mut self, q: usize) {
        self.m[q] ^= self.g[q];
        self.gamma[q] = (self.gamma[q] + 3) & 3;
    }

    fn s_right(&mut self, q: usize) {
        for p in 0..self.n {
            if bit(self.f[p], q) {
                self.m[p] ^= 1 << q;
                self.gamma[p] = (self.gamma[p] + 3) & 3;
            }
        }
    }

    fn cz_left(&mut self, q: usize, r: usize) {
        self.m[q] ^= self.g[r];
        self.m[r] ^= self.g[q];
    }

    fn cz_right(&mut self, q: usize, r: usize) {
        for p in 0..self.n {
            let (fq, fr) = (bit(self.f[p], q), bit(self.f[p], r));
            if fr {
                self.m[p] ^= 1 << q;
            }
            if fq {
                self.m[p] ^= 1 << r;
            }
            if fq && fr {
                self.gamma[p] = (self.gamma[p] + 2) & 3;
            }
        }
    }

    fn cx_left(&mut self, q: usize, r: usize) {
        self.gamma[q] = (self.gamma[q] + self.gamma[r] + 2 * parity(self.m[q] & self.f[r])) & 3;
        self.g[r] ^= self.g[q];
        self.f[q] ^= self.f[r];
        self.m[q] ^= self.m[r];
    }

    fn cx_right(&mut self, q: usize, r: usize) {
        for p in 0..self.n {
            if bit(self.g[p], r) {
                self.g[p] ^= 1 << q;
            }
            if bit(self.f[p], q) {
                self.f[p] ^= 1 << r;
            }
            if bit(self.m[p], r) {
                self.m[p] ^= 1 << q;
            }
        }
    }

    /// Rewrites `ω U_C U_H (-1)^α (|t⟩ + i^δ |u⟩)/√2` into CH form.
    fn update_sum(&mut self, t: u64, u: u64, delta: u8, alpha: u8) {
        let sign = if alpha & 1 == 1 { -1.0 } else { 1.0 };
        if t == u {
            self.s = t;
            self.omega *= (Complex64::new(1.0, 0.0) + i_pow(delta)) * (sign * FRAC_1_SQRT_2);
            return;
        }
        let diff = t ^ u;
        let set0 = !self.v & diff & self.mask;
        let set1 = self.v & diff;
        let q;
        if set0 != 0 {
            q = set0.trailing_zeros() as usize;
            for i in 0..self.n {
                if i != q && bit(set0, i) {
                    self.cx_right(q, i);
                }
            }
            for i in 0..self.n {
                if bit(set1, i) {
                    self.cz_right(q, i);
                }
            }
        } else {
            q = set1.trailing_zeros() as usize;
            for i in 0..self.n {
                if i != q && bit(set1, i) {
                    self.cx_right(i, q);
                }
            }
        }
        let e = 1u64 << q;
        let (y, z) = if bit(t, q) { (u ^ e, u) } else { (t, t ^ e) };
        let (om, a, b, c) = h_decompose(bit(self.v, q), bit(y, q), bit(z, q), delta);
        self.s = if c { y | e } else { y & !e };
        self.omega *= om * sign;
        if a {
            self.s_right(q);
        }
        if b {
            self.v |= e;
        } else {
            self.v &= !e;
        }
    }

    fn h(&mut self, q: usize) {
        let nv = !self.v & self.mask;
        let t = self.s ^ (self.g[q] & self.v);
        let u = self.s ^ (self.f[q] & nv) ^ (self.m[q] & self.v);
        let alpha = parity(self.g[q] & nv & self.s);
        let beta = (parity(self.m[q] & nv & self.s)
            + parity(self.f[q] & self.v & self.m[q])
            + parity(self.f[q] & self.v & self.s))
            & 1;
        let delta = (self.gamma[q] + 2 * (alpha + beta)) & 3;
        self.update_sum(t, u, delta, alpha);
    }

    /// `U_H† U_C† P U_C U_H` for `P = i^e X(x) Z(z)`.
    fn pull_back(&self, p: Pm) -> Pm {
        let mut out = Pm { e: p.e, x: 0, z: 0 };
        for q in 0..self.n {
            if bit(p.x, q) {
                out = out.mul(Pm { e: self.gamma[q], x: self.f[q], z: self.m[q] });
            }
        }
        for q in 0..self.n {
            if bit(p.z, q) {
                out = out.mul(Pm { e: 0, x: 0, z: self.g[q] });
            }
        }
        // H X^a Z^b H = (-1)^{ab} X^b Z^a
        let v = self.v;
        Pm {
            e: (out.e + 2 * parity(out.x & out.z & v)) & 3,
            x: (out.x & !v) | (out.z & v),
            z: (out.z & !v) | (out.x & v),
        }
    }

    /// `P''|s⟩ = i^k |t⟩`; returns `(k, t)`.
    fn act_on_basis(&self, p: Pm) -> (u8, u64) {
        let pp = self.pull_back(p);
        ((pp.e + 2 * parity(pp.z & self.s)) & 3, self.s ^ pp.x)
    }

    fn check(&self, p: &PauliString) -> Result<(), ChError> {
        if p.n() != self.n {
            return Err(ChError::Width(p.n(), self.n));
        }
        Ok(())
    }

    /// Left-multiplies by a phased Pauli operator.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<(), ChError> {
        self.check(p)?;
        let (k, t) = self.act_on_basis(Pm::from_pauli(p));
        self.s = t;
        self.omega *= i_pow(k);
        Ok(())
    }

    /// Applies `exp(iπ/4 Q) = (I + iQ)/√2` for Hermitian `Q`.
    pub fn apply_exp_quarter(&mut self, q: &PauliString) -> Result<(), ChError> {
        self.check(q)?;
        let (k, t) = self.act_on_basis(Pm::from_pauli(q));
        self.update_sum(self.s, t, (k + 1) & 3, 0);
        Ok(())
    }

    /// Applies `α P Π exp(iπ/4 Q_j)`.
    pub fn apply_psc(&mut self, f: &PscForm) -> Result<(), ChError> {
        for q in f.q_set() {
            self.apply_exp_quarter(q)?;
        }
        self.apply_pauli(f.pauli_p())?;
        self.omega *= f.alpha();
        Ok(())
    }

    pub fn apply_error_gate(&mut self, g: &ErrorGate) -> Result<(), ChError> {
        match g {
            ErrorGate::Pauli(p) => self.apply_pauli(p),
            ErrorGate::Psc(f) => self.apply_psc(f),
            ErrorGate::ControlledPauli { control, target } => {
                self.apply_psc(&PscForm::controlled_pauli(*control, target))
            }
        }
    }

    /// Clifford protocol gates; controlled PSCs are rejected.
    pub fn apply_gate(&mut self, k: &GateKind) -> Result<(), ChError> {
        let n = self.n;
        match k {
            GateKind::H(q) => self.h(*q),
            GateKind::S(q) => self.s_left(*q),
            GateKind::Sdg(q) => {
                self.s_left(*q);
                self.s_left(*q);
                self.s_left(*q);
            }
            GateKind::X(q) => self.apply_pauli(&PauliString::single(n, *q, 'X'))?,
            GateKind::Y(q) => self.apply_pauli(&PauliString::single(n, *q, 'Y'))?,
            GateKind::Z(q) => self.apply_pauli(&PauliString::single(n, *q, 'Z'))?,
            GateKind::CX(c, t) => self.cx_left(*c, *t),
            GateKind::CZ(a, b) => self.cz_left(*a, *b),
            GateKind::ControlledPauli { control, target } => {
                self.apply_psc(&PscForm::controlled_pauli(*control, target))?
            }
            GateKind::ControlledPsc { .. } => return Err(ChError::Unsupported(format!("{k:?}"))),
        }
        Ok(())
    }

    /// Replaces the state by `(I ± P)/2 |ψ⟩` and returns its squared norm.
    pub fn project(&mut self, p: &PauliString, plus: bool) -> Result<f64, ChError> {
        self.check(p)?;
        if self.is_zero() {
            return Ok(0.0);
        }
        let (k, t) = self.act_on_basis(Pm::from_pauli(p));
        let k = if plus { k } else { (k + 2) & 3 };
        if t == self.s {
            // eigenstate: (1 + i^k)/2 is 1 or 0 for Hermitian P
            match k {
                0 => {}
                2 => self.omega = Complex64::new(0.0, 0.0),
                _ => return Err(ChError::BadGenerators(format!("{p} is not Hermitian"))),
            }
        } else {
            self.update_sum(self.s, t, k, 0);
            self.omega *= FRAC_1_SQRT_2;
        }
        Ok(self.norm_sqr())
    }

    /// `⟨x|ψ⟩`.
    pub fn amplitude(&self, x: u64) -> Complex64 {
        let mut mu = 0u32;
        let mut u = 0u64;
        for p in 0..self.n {
            if bit(x, p) {
                mu += self.gamma[p] as u32;
                u ^= self.f[p];
                mu += 2 * parity(self.m[p] & u) as u32;
            }
        }
        if (u ^ self.s) & !self.v & self.mask != 0 {
            return Complex64::new(0.0, 0.0);
        }
        let sign = if parity(self.v & u & self.s) == 1 { -1.0 } else { 1.0 };
        let scale = 0.5f64.powf(self.v.count_ones() as f64 / 2.0);
        self.omega * i_pow((mu & 3) as u8) * (sign * scale)
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        assert!(self.n <= 20, "dense dump of a {}-qubit state", self.n);
        (0..1u64 << self.n).map(|x| self.amplitude(x)).collect()
    }

    /// Forward Clifford `U_C` as a tableau.
    fn uc_tableau(&self) -> CliffordTableau {
        let n = self.n;
        let xs = (0..n).map(|p| PauliString::from_masks(n, self.f[p], self.m[p], self.gamma[p])).collect();
        let zs = (0..n).map(|p| PauliString::from_masks(n, 0, self.g[p], 0)).collect();
        CliffordTableau::from_images(xs, zs).expect("CH tableau is symplectic").inverse()
    }

    /// Generators of the stabilizer group of the (non-zero) state.
    pub fn stabilizers(&self) -> Vec<PauliString> {
        let n = self.n;
        let t = self.uc_tableau();
        (0..n)
            .map(|j| {
                let l = if bit(self.v, j) { 'X' } else { 'Z' };
                let mut p = PauliString::single(n, j, l);
                if bit(self.s, j) {
                    p = p.negated();
                }
                t.conjugate(&p)
            })
            .collect()
    }

    /// A basis string with non-zero amplitude.
    fn support_point(&self) -> u64 {
        // x = s F^{-1} = s G^T
        (0..self.n).fold(0u64, |x, p| x | (parity(self.g[p] & self.s) as u64) << p)
    }

    /// `⟨self|other⟩`, exact including phase.
    pub fn inner(&self, other: &ChState) -> Result<Complex64, ChError> {
        if self.n != other.n {
            return Err(ChError::Width(self.n, other.n));
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut b = other.clone();
        for g in self.stabilizers() {
            if b.project(&g, true)? < 1e-300 {
                return Ok(Complex64::new(0.0, 0.0));
            }
        }
        let x = self.support_point();
        let lam = b.amplitude(x) / self.amplitude(x);
        Ok(lam * self.norm_sqr())
    }

    /// Normalized state stabilized by `gens` (n independent commuting Hermitian Paulis).
    pub fn from_stabilizers(gens: &[PauliString]) -> Result<Self, ChError> {
        let n = gens.first().map(|g| g.n()).ok_or_else(|| ChError::BadGenerators("empty".into()))?;
        if gens.len() != n {
            return Err(ChError::BadGenerators(format!("{} generators on {n} qubits", gens.len())));
        }
        let x = basis_point(gens)?;
        let mut st = Self::basis(n, x)?;
        for g in gens {
            if !g.is_hermitian() {
                return Err(ChError::BadGenerators(format!("{g} is not Hermitian")));
            }
            if st.project(g, true)? < 1e-300 {
                return Err(ChError::BadGenerators("inconsistent signs".into()));
            }
        }
        let nrm = st.norm_sqr().sqrt();
        st.omega /= nrm;
        Ok(st)
    }
}

fn h_decompose(v: bool, y: bool, z: bool, delta: u8) -> (Complex64, bool, bool, bool) {
    debug_assert_ne!(y, z);
    if !v {
        let omega = i_pow(if y { delta } else { 0 });
        let d2 = if y { (4 - delta) & 3 } else { delta };
        (omega, d2 & 1 == 1, true, d2 >> 1 == 1)
    } else if delta & 1 == 0 {
        let c = delta >> 1 == 1;
        let omega = if c && y { -1.0 } else { 1.0 };
        (Complex64::new(omega, 0.0), false, false, c)
    } else {
        let omega = (Complex64::new(1.0, 0.0) + i_pow(delta)) * FRAC_1_SQRT_2;
        (omega, true, true, !((delta >> 1 == 1) ^ y))
    }
}

/// Solves the Z-type sign constraints of `gens` for a basis state with non-zero overlap.
fn basis_point(gens: &[PauliString]) -> Result<u64, ChError> {
    let n = gens[0].n();
    if n > MAX_CH_QUBITS {
        return Err(ChError::TooWide(n));
    }
    let mut rows: Vec<Pm> = gens.iter().map(Pm::from_pauli).collect();
    // eliminate X parts; what remains are Z-type group elements
    let mut r = 0;
    for col in 0..n {
        let Some(piv) = (r..rows.len()).find(|&i| bit(rows[i].x, col)) else { continue };
        rows.swap(r, piv);
        for i in 0..rows.len() {
            if i != r && bit(rows[i].x, col) {
                rows[i] = rows[r].mul(rows[i]);
            }
        }
        r += 1;
    }
    // each Z-type row i^e Z(z) demands (-1)^{z·x} = i^{-e}
    let mut eqs: Vec<(u64, bool)> = Vec::new();
    for p in &rows[r..] {
        match p.e {
            0 => eqs.push((p.z, false)),
            2 => eqs.push((p.z, true)),
            _ => return Err(ChError::BadGenerators("non-Hermitian product".into())),
        }
    }
    let mut x = 0u64;
    let mut k = 0;
    for col in 0..n {
        let Some(piv) = (k..eqs.len()).find(|&i| bit(eqs[i].0, col)) else { continue };
        eqs.swap(k, piv);
        for i in 0..eqs.len() {
            if i != k && bit(eqs[i].0, col) {
                let (z, b) = eqs[k];
                eqs[i].0 ^= z;
                eqs[i].1 ^= b;
            }
        }
        k += 1;
    }
    for &(z, b) in &eqs {
        if z == 0 {
            if b {
                return Err(ChError::BadGenerators("contradictory signs".into()));
            }
            continue;
        }
        if b {
            x |= 1 << z.trailing_zeros();
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::DenseState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_of(s: &ChState) -> Vec<Complex64> {
        s.to_dense()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    fn random_gate<R: Rng>(n: usize, rng: &mut R) -> GateKind {
        let q = rng.gen_range(0..n);
        let mut r = rng.gen_range(0..n.max(2) - 1);
        if r >= q {
            r += 1;
        }
        let pick = if n == 1 { [0, 2, 3, 6, 7][rng.gen_range(0..5)] } else { rng.gen_range(0..8) };
        match pick {
            0 | 1 => GateKind::H(q),
            2 => GateKind::S(q),
            3 => GateKind::Sdg(q),
            4 => GateKind::CX(q, r),
            5 => GateKind::CZ(q, r),
            6 => GateKind::X(q),
            _ => GateKind::Y(q),
        }
    }

    fn word<R: Rng>(n: usize, len: usize, rng: &mut R) -> (ChState, DenseState) {
        let mut ch = ChState::zero(n).unwrap();
        let mut d = DenseState::zero(n).unwrap();
        for _ in 0..len {
            let g = random_gate(n, rng);
            ch.apply_gate(&g).unwrap();
            crate::oracle::apply_gate(&mut d, &g);
        }
        (ch, d)
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = ChState::zero(1).unwrap();
        s.apply_gate(&GateKind::H(0)).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!(close(&dense_of(&s), &[Complex64::new(r, 0.0), Complex64::new(r, 0.0)], 1e-14));
    }

    #[test]
    fn s_on_plus() {
        let mut s = ChState::zero(1).unwrap();
        s.apply_gate(&GateKind::H(0)).unwrap();
        s.apply_gate(&GateKind::S(0)).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!(close(&dense_of(&s), &[Complex64::new(r, 0.0), Complex64::new(0.0, r)], 1e-14));
    }

    #[test]
    fn random_words_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (ch, d) = word(6, 200, &mut rng);
            assert!(close(&ch.to_dense(), d.amplitudes(), 1e-10));
        }
    }

    #[test]
    fn projections_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let (mut ch, mut d) = word(5, 60, &mut rng);
            let mut p = PauliString::identity(5);
            for q in 0..5 {
                p.set_x(q, rng.gen());
                p.set_z(q, rng.gen());
            }
            if p.is_identity() {
                continue;
            }
            let p = p.unsigned();
            let plus = rng.gen();
            let mut other = ch.clone();
            let a = ch.project(&p, plus).unwrap();
            let b = other.project(&p, !plus).unwrap();
            assert!((a + b - 1.0).abs() < 1e-10);
            let w = d.project(&p, plus);
            assert!((a - w).abs() < 1e-10);
            assert!(close(&ch.to_dense(), d.amplitudes(), 1e-10));
        }
    }

    #[test]
    fn exp_quarter_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let (mut ch, mut d) = word(4, 40, &mut rng);
            let mut q = PauliString::identity(4);
            for i in 0..4 {
                q.set_x(i, rng.gen());
                q.set_z(i, rng.gen());
            }
            let q = if rng.gen() { q.unsigned() } else { q.unsigned().negated() };
            ch.apply_exp_quarter(&q).unwrap();
            d.apply_exp_quarter(&q);
            assert!(close(&ch.to_dense(), d.amplitudes(), 1e-10));
        }
    }

    #[test]
    fn inner_products_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in [1, 3, 6, 8] {
            for _ in 0..20 {
                let (a, da) = word(n, 80, &mut rng);
                let (b, db) = word(n, 80, &mut rng);
                let got = a.inner(&b).unwrap();
                let want = da.inner(&db);
                assert!((got - want).norm() < 1e-10, "n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn plus_zero_overlap() {
        let n = 4;
        let z = ChState::zero(n).unwrap();
        let mut p = ChState::zero(n).unwrap();
        for q in 0..n {
            p.apply_gate(&GateKind::H(q)).unwrap();
        }
        assert!((p.inner(&z).unwrap() - Complex64::new(0.25, 0.0)).norm() < 1e-14);
        assert!((z.inner(&z).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn stabilizers_fix_the_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (ch, d) = word(5, 60, &mut rng);
            for g in ch.stabilizers() {
                assert!((d.expectation(&g) - Complex64::new(1.0, 0.0)).norm() < 1e-10);
            }
            let re = ChState::from_stabilizers(&ch.stabilizers()).unwrap();
            assert!((re.inner(&ch).unwrap().norm() - 1.0).abs() < 1e-10);
        }
    }
}
