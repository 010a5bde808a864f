use num_complex::Complex64;
use rand::Rng;

use super::matrix::{self, CMat};
use super::OracleError;
use crate::clifford::{ErrorGate, PscForm};
use crate::pauli::PauliString;

pub const MAX_QUBITS: usize = 14;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amp: Vec<Complex64>,
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self, OracleError> {
        if n > MAX_QUBITS {
            return Err(OracleError::TooLarge(n));
        }
        let mut amp = vec![ZERO; 1 << n];
        amp[0] = ONE;
        Ok(Self { n, amp })
    }

    pub fn basis(n: usize, idx: usize) -> Result<Self, OracleError> {
        let mut s = Self::zero(n)?;
        s.amp[0] = ZERO;
        s.amp[idx] = ONE;
        Ok(s)
    }

    pub fn from_amplitudes(amp: Vec<Complex64>) -> Result<Self, OracleError> {
        if !amp.len().is_power_of_two() {
            return Err(OracleError::Shape);
        }
        let n = amp.len().trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(OracleError::TooLarge(n));
        }
        Ok(Self { n, amp })
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Result<Self, OracleError> {
        let amp: Vec<Complex64> =
            (0..1usize << n).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let mut s = Self::from_amplitudes(amp)?;
        s.normalize();
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sqr();
        if n2 > 0.0 {
            let s = 1.0 / n2.sqrt();
            for a in &mut self.amp {
                *a *= s;
            }
        }
        n2
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in &mut self.amp {
            *a *= c;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn tensor(&self, high: &DenseState) -> Result<DenseState, OracleError> {
        let n = self.n + high.n;
        if n > MAX_QUBITS {
            return Err(OracleError::TooLarge(n));
        }
        let mut amp = Vec::with_capacity(1 << n);
        for b in &high.amp {
            for a in &self.amp {
                amp.push(a * b);
            }
        }
        Ok(DenseState { n, amp })
    }

    pub fn apply_pauli(&mut self, p: &PauliString) {
        debug_assert_eq!(p.n(), self.n);
        let x = p.x_mask() as usize;
        let z = p.z_mask() as usize;
        let ph = matrix::i_pow(p.phase_exp() as u32);
        if x == 0 {
            for (j, a) in self.amp.iter_mut().enumerate() {
                if (z & j).count_ones() & 1 == 1 {
                    *a = -*a * ph;
                } else {
                    *a *= ph;
                }
            }
            return;
        }
        let hi = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for j in 0..self.amp.len() {
            if j & hi != 0 {
                continue;
            }
            let k = j ^ x;
            let sj = if (z & j).count_ones() & 1 == 1 { -ph } else { ph };
            let sk = if (z & k).count_ones() & 1 == 1 { -ph } else { ph };
            let (aj, ak) = (self.amp[j], self.amp[k]);
            self.amp[k] = sj * aj;
            self.amp[j] = sk * ak;
        }
    }

    pub fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for j in 0..self.amp.len() {
            if j & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amp[j], self.amp[j | bit]);
            self.amp[j] = m[0][0] * a0 + m[0][1] * a1;
            self.amp[j | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    pub fn apply_h(&mut self, q: usize) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bit = 1usize << q;
        for j in 0..self.amp.len() {
            if j & bit == 0 {
                let (a0, a1) = (self.amp[j], self.amp[j | bit]);
                self.amp[j] = (a0 + a1) * s;
                self.amp[j | bit] = (a0 - a1) * s;
            }
        }
    }

    pub fn apply_phase(&mut self, q: usize, ph: Complex64) {
        let bit = 1usize << q;
        for (j, a) in self.amp.iter_mut().enumerate() {
            if j & bit != 0 {
                *a *= ph;
            }
        }
    }

    pub fn apply_s(&mut self, q: usize) {
        self.apply_phase(q, Complex64::new(0.0, 1.0));
    }

    pub fn apply_sdg(&mut self, q: usize) {
        self.apply_phase(q, Complex64::new(0.0, -1.0));
    }

    pub fn apply_t(&mut self, q: usize) {
        self.apply_phase(q, matrix::omega8(1));
    }

    pub fn apply_cx(&mut self, c: usize, t: usize) {
        let (cb, tb) = (1usize << c, 1usize << t);
        for j in 0..self.amp.len() {
            if j & cb != 0 && j & tb == 0 {
                self.amp.swap(j, j | tb);
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let m = (1usize << a) | (1usize << b);
        for (j, v) in self.amp.iter_mut().enumerate() {
            if j & m == m {
                *v = -*v;
            }
        }
    }

    /// Dense `U` on `support` (local qubit k = support[k]).
    pub fn apply_matrix(&mut self, support: &[usize], u: &CMat) {
        let k = support.len();
        let ld = 1usize << k;
        assert_eq!(u.nrows(), ld);
        let mask: usize = support.iter().map(|&q| 1usize << q).sum();
        let offsets: Vec<usize> = (0..ld).map(|l| matrix::scatter(l, support)).collect();
        let mut buf = vec![ZERO; ld];
        for base in 0..self.amp.len() {
            if base & mask != 0 {
                continue;
            }
            for l in 0..ld {
                buf[l] = self.amp[base | offsets[l]];
            }
            for r in 0..ld {
                let mut acc = ZERO;
                for l in 0..ld {
                    acc += u[(r, l)] * buf[l];
                }
                self.amp[base | offsets[r]] = acc;
            }
        }
    }

    /// `ψ ← (ψ + i Q ψ)/√2`, i.e. `exp(iπ/4 Q)`.
    pub fn apply_exp_quarter(&mut self, q: &PauliString) {
        let mut qpsi = self.clone();
        qpsi.apply_pauli(q);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in self.amp.iter_mut().zip(&qpsi.amp) {
            *a = (*a + Complex64::new(0.0, 1.0) * b) * s;
        }
    }

    pub fn apply_psc(&mut self, f: &PscForm) {
        for q in f.q_set().iter().rev() {
            self.apply_exp_quarter(q);
        }
        self.apply_pauli(f.pauli_p());
        self.scale(f.alpha());
    }

    pub fn apply_controlled_pauli(&mut self, control: usize, q: &PauliString) {
        let mut t = self.clone();
        t.apply_pauli(q);
        let cb = 1usize << control;
        for (j, a) in self.amp.iter_mut().enumerate() {
            if j & cb != 0 {
                *a = t.amp[j];
            }
        }
    }

    /// Controlled version of a full-width PSC not acting on `control`.
    pub fn apply_controlled_psc(&mut self, control: usize, f: &PscForm) {
        let mut t = self.clone();
        t.apply_psc(f);
        let cb = 1usize << control;
        for (j, a) in self.amp.iter_mut().enumerate() {
            if j & cb != 0 {
                *a = t.amp[j];
            }
        }
    }

    pub fn apply_error_gate(&mut self, g: &ErrorGate) {
        match g {
            ErrorGate::Pauli(p) => self.apply_pauli(p),
            ErrorGate::Psc(f) => self.apply_psc(f),
            ErrorGate::ControlledPauli { control, target } => self.apply_controlled_pauli(*control, target),
        }
    }

    pub fn expectation(&self, p: &PauliString) -> Complex64 {
        let mut t = self.clone();
        t.apply_pauli(p);
        self.inner(&t)
    }

    /// Unnormalized `(I + s P)/2 |ψ⟩`; returns the squared norm of the result.
    pub fn project(&mut self, p: &PauliString, plus: bool) -> f64 {
        let mut t = self.clone();
        t.apply_pauli(p);
        let s = if plus { 0.5 } else { -0.5 };
        for (a, b) in self.amp.iter_mut().zip(&t.amp) {
            *a = *a * 0.5 + b * s;
        }
        self.norm_sqr()
    }

    /// Reduced density matrix on `keep` (local order as listed).
    pub fn reduced_density(&self, keep: &[usize]) -> CMat {
        let k = keep.len();
        let d = 1usize << k;
        let mask: usize = keep.iter().map(|&q| 1usize << q).sum();
        let mut rho = CMat::zeros(d, d);
        let mut rest_of = std::collections::BTreeMap::<usize, Vec<(usize, Complex64)>>::new();
        for (j, a) in self.amp.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            rest_of.entry(j & !mask).or_default().push((matrix::gather(j, keep), *a));
        }
        for list in rest_of.values() {
            for &(r, ar) in list {
                for &(c, ac) in list {
                    rho[(r, c)] += ar * ac.conj();
                }
            }
        }
        rho
    }
}

/// Full-matrix check `A = e^{iθ} B` where `a`, `b` apply the circuits in place.
pub fn unitary_equiv_up_to_phase(
    n: usize,
    a: impl Fn(&mut DenseState) + Sync,
    b: impl Fn(&mut DenseState) + Sync,
) -> Result<bool, OracleError> {
    Ok(unitary_residual(n, a, b)? <= 1e-9)
}

/// Componentwise residual `min_θ max |A − e^{iθ}B|` using the phase fixed by the first column.
pub fn unitary_residual(
    n: usize,
    a: impl Fn(&mut DenseState) + Sync,
    b: impl Fn(&mut DenseState) + Sync,
) -> Result<f64, OracleError> {
    use rayon::prelude::*;
    if n > 12 {
        return Err(OracleError::TooLarge(n));
    }
    let col = |j: usize| -> (DenseState, DenseState) {
        let mut sa = DenseState::basis(n, j).unwrap();
        let mut sb = sa.clone();
        a(&mut sa);
        b(&mut sb);
        (sa, sb)
    };
    let (a0, b0) = col(0);
    let lam = b0.inner(&a0);
    if (lam.norm() - 1.0).abs() > 1e-6 {
        return Ok(1.0);
    }
    let res = (0..1usize << n)
        .into_par_iter()
        .map(|j| {
            let (sa, sb) = if j == 0 { (a0.clone(), b0.clone()) } else { col(j) };
            sa.amp.iter().zip(&sb.amp).map(|(x, y)| (x - lam * y).norm()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(res)
}

/// Randomized check on `probes` Haar-like vectors; a non-scalar `B†A` almost surely fails.
pub fn unitary_residual_probe<R: Rng>(
    n: usize,
    a: impl Fn(&mut DenseState),
    b: impl Fn(&mut DenseState),
    probes: usize,
    rng: &mut R,
) -> Result<f64, OracleError> {
    let mut lam: Option<Complex64> = None;
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let v = DenseState::random(n, rng)?;
        let mut sa = v.clone();
        let mut sb = v;
        a(&mut sa);
        b(&mut sb);
        let l = *lam.get_or_insert_with(|| sb.inner(&sa));
        if (l.norm() - 1.0).abs() > 1e-6 {
            return Ok(1.0);
        }
        let r = sa.amp.iter().zip(&sb.amp).map(|(x, y)| (x - l * y).norm()).fold(0.0, f64::max);
        worst = worst.max(r);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordTableau;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn pauli_application_matches_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in ["+XY_", "-iZZYX", "+Y___", "+_Z_X"] {
            let q = p(s);
            let v = DenseState::random(q.n(), &mut rng).unwrap();
            let mut a = v.clone();
            a.apply_pauli(&q);
            let mut b = v.clone();
            b.apply_matrix(&(0..q.n()).collect::<Vec<_>>(), &matrix::pauli_matrix(&q));
            let d: f64 = a.amp.iter().zip(&b.amp).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(d < 1e-12, "{s}");
        }
    }

    #[test]
    fn generators_agree_with_tableaux() {
        // conjugating each generator Pauli densely must match the tableau image
        let n = 3;
        let cases: Vec<(CliffordTableau, Box<dyn Fn(&mut DenseState)>)> = vec![
            (CliffordTableau::h(n, 1), Box::new(|s: &mut DenseState| s.apply_h(1))),
            (CliffordTableau::s(n, 2), Box::new(|s: &mut DenseState| s.apply_s(2))),
            (CliffordTableau::sdg(n, 0), Box::new(|s: &mut DenseState| s.apply_sdg(0))),
            (CliffordTableau::cx(n, 0, 2), Box::new(|s: &mut DenseState| s.apply_cx(0, 2))),
            (CliffordTableau::cz(n, 1, 2), Box::new(|s: &mut DenseState| s.apply_cz(1, 2))),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (tab, f) in &cases {
            for letter in ['X', 'Y', 'Z'] {
                for q in 0..n {
                    let g = PauliString::single(n, q, letter);
                    let img = tab.conjugate(&g);
                    // U g |v> == img U |v>
                    let v = DenseState::random(n, &mut rng).unwrap();
                    let mut lhs = v.clone();
                    lhs.apply_pauli(&g);
                    f(&mut lhs);
                    let mut rhs = v.clone();
                    f(&mut rhs);
                    rhs.apply_pauli(&img);
                    let d: f64 = lhs.amp.iter().zip(&rhs.amp).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                    assert!(d < 1e-12);
                }
            }
        }
    }

    #[test]
    fn equivalence_detects_phase_only() {
        let r = unitary_residual(
            2,
            |s| {
                s.apply_h(0);
                s.apply_h(0);
            },
            |s| s.scale(Complex64::new(0.0, 1.0)),
        )
        .unwrap();
        assert!(r < 1e-12);
        assert!(!unitary_equiv_up_to_phase(2, |s| s.apply_s(0), |_| {}).unwrap());
    }
}
