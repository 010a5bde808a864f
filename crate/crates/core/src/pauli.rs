//! Phased Pauli strings in the binary symplectic representation.
//!
//! A `PauliString` stands for `i^phase · X(x) · Z(z)` where `X(x)` is the
//! product of `X_j` over set bits of `x` (likewise `Z(z)`). With this
//! convention `Y = i·X·Z` is stored as `x=1, z=1, phase=1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::clifford::CliffordTableau;

const WORD: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("dimension mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),
    #[error("cannot parse pauli text {0:?}: {1}")]
    Parse(String, &'static str),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

#[inline]
fn words(n: usize) -> usize {
    n.div_ceil(WORD)
}

#[inline]
fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(u, v)| (u & v).count_ones()).sum()
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { n, x: vec![0; words(n)], z: vec![0; words(n)], phase: 0 }
    }

    /// Single-qubit Pauli on `q`; letter is one of `I, X, Y, Z`.
    pub fn single(n: usize, q: usize, letter: char) -> Self {
        let mut p = Self::identity(n);
        p.set_letter(q, letter);
        p
    }

    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for &q in qubits {
            p.set_x(q, true);
        }
        p
    }

    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for &q in qubits {
            p.set_z(q, true);
        }
        p
    }

    /// Builds a Hermitian Pauli from bit vectors given as bools.
    pub fn from_bits(x: &[bool], z: &[bool]) -> Self {
        assert_eq!(x.len(), z.len());
        let mut p = Self::identity(x.len());
        for i in 0..x.len() {
            p.set_x(i, x[i]);
            p.set_z(i, z[i]);
        }
        p.phase = (p.y_count() % 4) as u8;
        p
    }

    /// Raw constructor from the X(x)Z(z) representation. Low bits only for n <= 64.
    pub fn from_masks(n: usize, x: u64, z: u64, phase: u8) -> Self {
        assert!(n <= WORD);
        let mask = if n == WORD { u64::MAX } else { (1u64 << n) - 1 };
        let mut p = Self::identity(n);
        if n > 0 {
            p.x[0] = x & mask;
            p.z[0] = z & mask;
        }
        p.phase = phase & 3;
        p
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Low word of the X mask (convenience for n <= 64).
    pub fn x_mask(&self) -> u64 {
        self.x.first().copied().unwrap_or(0)
    }

    pub fn z_mask(&self) -> u64 {
        self.z.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn x_bit(&self, i: usize) -> bool {
        (self.x[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, i: usize) -> bool {
        (self.z[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set_x(&mut self, i: usize, v: bool) {
        let m = 1u64 << (i % WORD);
        if v {
            self.x[i / WORD] |= m;
        } else {
            self.x[i / WORD] &= !m;
        }
    }

    #[inline]
    pub fn set_z(&mut self, i: usize, v: bool) {
        let m = 1u64 << (i % WORD);
        if v {
            self.z[i / WORD] |= m;
        } else {
            self.z[i / WORD] &= !m;
        }
    }

    pub fn set_phase_exp(&mut self, e: u8) {
        self.phase = e & 3;
    }

    pub fn add_phase(&mut self, e: u32) {
        self.phase = ((self.phase as u32 + e) % 4) as u8;
    }

    /// Replaces qubit `q` by a Hermitian letter, keeping the remaining text sign.
    pub fn set_letter(&mut self, q: usize, letter: char) {
        let sign = self.text_phase();
        let (x, z) = match letter {
            'I' | '_' => (false, false),
            'X' => (true, false),
            'Y' => (true, true),
            'Z' => (false, true),
            _ => panic!("bad pauli letter {letter}"),
        };
        self.set_x(q, x);
        self.set_z(q, z);
        self.phase = ((sign as u32 + self.y_count()) % 4) as u8;
    }

    pub fn letter(&self, q: usize) -> char {
        match (self.x_bit(q), self.z_bit(q)) {
            (false, false) => '_',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    #[inline]
    pub fn y_count(&self) -> u32 {
        popcount_and(&self.x, &self.z)
    }

    /// Phase relative to the Hermitian letter product (so "+Y" has text phase 0).
    pub fn text_phase(&self) -> u8 {
        ((self.phase as u32 + 4 - self.y_count() % 4) % 4) as u8
    }

    pub fn is_hermitian(&self) -> bool {
        self.text_phase().is_multiple_of(2)
    }

    /// True when the operator is ±I or ±iI.
    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// True for the exact identity (phase included).
    pub fn is_exact_identity(&self) -> bool {
        self.is_identity() && self.phase == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.x_bit(i) || self.z_bit(i)).collect()
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.x_bit(q) || self.z_bit(q)
    }

    /// Same letters, phase reset so the result is Hermitian with sign +.
    pub fn unsigned(&self) -> Self {
        let mut p = self.clone();
        p.phase = (self.y_count() % 4) as u8;
        p
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.add_phase(2);
        p
    }

    pub fn times_i(&self, k: u32) -> Self {
        let mut p = self.clone();
        p.add_phase(k);
        p
    }

    fn check(&self, other: &Self) -> Result<(), PauliError> {
        if self.n != other.n {
            Err(PauliError::DimensionMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    /// Exact product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.mul_assign_right(other);
        out
    }

    /// `self <- self · other`.
    pub fn mul_assign_right(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        let cross = popcount_and(&self.z, &other.x);
        self.phase = ((self.phase as u32 + other.phase as u32 + 2 * cross) % 4) as u8;
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
    }

    /// `self <- other · self`.
    pub fn mul_assign_left(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        let cross = popcount_and(&other.z, &self.x);
        self.phase = ((self.phase as u32 + other.phase as u32 + 2 * cross) % 4) as u8;
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
    }

    pub fn inverse(&self) -> Self {
        // (i^e X Z)^{-1} = i^{-e} Z X = i^{-e} (-1)^{x.z} X Z
        let mut p = self.clone();
        let e = (4 - self.phase as u32) % 4 + 2 * (self.y_count() % 2);
        p.phase = (e % 4) as u8;
        p
    }

    #[inline]
    pub fn symplectic_product(&self, other: &Self) -> u32 {
        (popcount_and(&self.x, &other.z) + popcount_and(&self.z, &other.x)) & 1
    }

    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check(other)?;
        Ok(self.symplectic_product(other) == 0)
    }

    #[inline]
    pub fn commutes_with(&self, other: &Self) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.symplectic_product(other) == 0
    }

    /// Restricts to the listed qubits (in order), keeping the text sign.
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let mut p = Self::identity(qubits.len());
        for (k, &q) in qubits.iter().enumerate() {
            p.set_x(k, self.x_bit(q));
            p.set_z(k, self.z_bit(q));
        }
        p.phase = ((self.text_phase() as u32 + p.y_count()) % 4) as u8;
        p
    }

    /// Places a local Pauli on `qubits` of an n-qubit register; phase carried verbatim.
    pub fn embed(&self, n: usize, qubits: &[usize]) -> Self {
        assert_eq!(self.n, qubits.len());
        let mut p = Self::identity(n);
        for (k, &q) in qubits.iter().enumerate() {
            p.set_x(q, self.x_bit(k));
            p.set_z(q, self.z_bit(k));
        }
        p.phase = self.phase;
        p
    }

    /// Bits of the symplectic vector (x then z) as bools, length 2n.
    pub fn to_symplectic(&self) -> Vec<bool> {
        let mut v = Vec::with_capacity(2 * self.n);
        v.extend((0..self.n).map(|i| self.x_bit(i)));
        v.extend((0..self.n).map(|i| self.z_bit(i)));
        v
    }

    pub fn from_symplectic(v: &[bool]) -> Self {
        let n = v.len() / 2;
        Self::from_bits(&v[..n], &v[n..])
    }
}

/// Convenience wrapper matching the module interface.
pub fn multiply(a: &PauliString, b: &PauliString) -> Result<PauliString, PauliError> {
    a.multiply(b)
}

pub fn commutes(a: &PauliString, b: &PauliString) -> Result<bool, PauliError> {
    a.commutes(b)
}

pub fn conjugate_by_clifford(p: &PauliString, c: &CliffordTableau) -> Result<PauliString, PauliError> {
    if p.n() != c.n() {
        return Err(PauliError::DimensionMismatch(p.n(), c.n()));
    }
    Ok(c.conjugate(p))
}

impl std::ops::Mul for &PauliString {
    type Output = PauliString;
    fn mul(self, rhs: &PauliString) -> PauliString {
        assert_eq!(self.n, rhs.n, "pauli dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.text_phase() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(sign)?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliString {
    type Err = PauliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (sign, rest) = if let Some(r) = t.strip_prefix("+i") {
            (1u32, r)
        } else if let Some(r) = t.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = t.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = t.strip_prefix('-') {
            (2, r)
        } else {
            (0, t)
        };
        let mut p = Self::identity(rest.chars().count());
        for (q, c) in rest.chars().enumerate() {
            match c {
                'I' | '_' => {}
                'X' => p.set_x(q, true),
                'Z' => p.set_z(q, true),
                'Y' => {
                    p.set_x(q, true);
                    p.set_z(q, true);
                }
                _ => return Err(PauliError::Parse(s.to_string(), "unknown letter")),
            }
        }
        p.phase = ((sign + p.y_count()) % 4) as u8;
        Ok(p)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let r = p("+X").multiply(&p("+Z")).unwrap();
        assert_eq!(r, p("-iY"));
        assert_eq!(r.to_string(), "-iY");
    }

    #[test]
    fn identity_is_neutral() {
        let a = p("+XYZ_");
        assert_eq!(a.multiply(&PauliString::identity(4)).unwrap(), a);
    }

    #[test]
    fn text_roundtrip() {
        for s in ["+X_IZ", "-YYZ", "+i_X", "-iZZZZZ", "+"] {
            let a = p(s);
            assert_eq!(p(&a.to_string()), a);
        }
        assert_eq!(p("+X_IZ").to_string(), "+X__Z");
        let long = "-".to_string() + &"XYZ_".repeat(40);
        assert_eq!(p(&long).to_string(), long);
    }

    #[test]
    fn inverse_and_hermitian() {
        for s in ["+Y", "-iXZ", "+iYY", "-XYZ"] {
            let a = p(s);
            assert!(a.multiply(&a.inverse()).unwrap().is_exact_identity());
        }
        assert!(p("+Y").is_hermitian());
        assert!(!p("+iY").is_hermitian());
    }

    #[test]
    fn stabilizers_commute_with_logicals() {
        assert!(p("+XXXX").commutes(&p("+ZZ__")).unwrap());
        assert!(!p("+X").commutes(&p("+Z")).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(p("+X").multiply(&p("+XX")), Err(PauliError::DimensionMismatch(1, 2))));
    }
}
