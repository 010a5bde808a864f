use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::pauli::PauliString;

/// Clifford unitary (up to global phase) stored as the images of `X_i` and `Z_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordTableau {
    n: usize,
    ximg: Vec<PauliString>,
    zimg: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            ximg: (0..n).map(|i| PauliString::single(n, i, 'X')).collect(),
            zimg: (0..n).map(|i| PauliString::single(n, i, 'Z')).collect(),
        }
    }

    /// Builds a tableau from explicit generator images. Checks the commutation
    /// relations and Hermiticity.
    pub fn from_images(ximg: Vec<PauliString>, zimg: Vec<PauliString>) -> Option<Self> {
        let n = ximg.len();
        if zimg.len() != n || ximg.iter().chain(&zimg).any(|p| p.n() != n || !p.is_hermitian()) {
            return None;
        }
        let t = Self { n, ximg, zimg };
        if t.is_symplectic() {
            Some(t)
        } else {
            None
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, i: usize) -> &PauliString {
        &self.ximg[i]
    }

    pub fn z_image(&self, i: usize) -> &PauliString {
        &self.zimg[i]
    }

    pub fn is_symplectic(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                let want = i == j;
                if self.ximg[i].commutes_with(&self.zimg[j]) == want {
                    return false;
                }
                if !self.ximg[i].commutes_with(&self.ximg[j]) || !self.zimg[i].commutes_with(&self.zimg[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// C·P·C† with exact phase.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        let mut out = PauliString::identity(self.n);
        out.set_phase_exp(p.phase_exp());
        for i in 0..self.n {
            if p.x_bit(i) {
                out.mul_assign_right(&self.ximg[i]);
            }
        }
        for i in 0..self.n {
            if p.z_bit(i) {
                out.mul_assign_right(&self.zimg[i]);
            }
        }
        out
    }

    /// Tableau of `self · inner` (inner acts first).
    pub fn compose(&self, inner: &CliffordTableau) -> CliffordTableau {
        assert_eq!(self.n, inner.n);
        CliffordTableau {
            n: self.n,
            ximg: inner.ximg.iter().map(|p| self.conjugate(p)).collect(),
            zimg: inner.zimg.iter().map(|p| self.conjugate(p)).collect(),
        }
    }

    /// Replaces `self` by `g ∘ self` where `g` acts on Paulis through `f`.
    pub fn then_map(&mut self, f: impl Fn(&PauliString) -> PauliString) {
        for p in self.ximg.iter_mut().chain(self.zimg.iter_mut()) {
            *p = f(p);
        }
    }

    pub fn inverse(&self) -> CliffordTableau {
        let n = self.n;
        let mut ximg = Vec::with_capacity(n);
        let mut zimg = Vec::with_capacity(n);
        for j in 0..n {
            for want_x in [true, false] {
                let mut p = PauliString::identity(n);
                for i in 0..n {
                    let (xb, zb) = if want_x {
                        (self.zimg[i].z_bit(j), self.ximg[i].z_bit(j))
                    } else {
                        (self.zimg[i].x_bit(j), self.ximg[i].x_bit(j))
                    };
                    p.set_x(i, xb);
                    p.set_z(i, zb);
                }
                let mut p = p.unsigned();
                let img = self.conjugate(&p);
                if img.text_phase() == 2 {
                    p = p.negated();
                }
                if want_x {
                    ximg.push(p);
                } else {
                    zimg.push(p);
                }
            }
        }
        CliffordTableau { n, ximg, zimg }
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        (0..self.n).all(|i| {
            self.ximg[i].unsigned() == PauliString::single(self.n, i, 'X')
                && self.zimg[i].unsigned() == PauliString::single(self.n, i, 'Z')
        })
    }

    /// True when the tableau is a Pauli (all generators map to ± themselves).
    pub fn is_pauli(&self) -> bool {
        self.is_identity_up_to_phase()
    }

    /// Pauli-square-root test: C² acts as a Pauli.
    pub fn is_psc(&self) -> bool {
        self.compose(self).is_pauli()
    }

    // named gates

    pub fn h(n: usize, q: usize) -> Self {
        let mut t = Self::identity(n);
        t.ximg[q] = PauliString::single(n, q, 'Z');
        t.zimg[q] = PauliString::single(n, q, 'X');
        t
    }

    pub fn s(n: usize, q: usize) -> Self {
        let mut t = Self::identity(n);
        t.ximg[q] = PauliString::single(n, q, 'Y');
        t
    }

    pub fn sdg(n: usize, q: usize) -> Self {
        let mut t = Self::identity(n);
        t.ximg[q] = PauliString::single(n, q, 'Y').negated();
        t
    }

    pub fn pauli(p: &PauliString) -> Self {
        let n = p.n();
        let mut t = Self::identity(n);
        for i in 0..n {
            if p.z_bit(i) {
                t.ximg[i] = t.ximg[i].negated();
            }
            if p.x_bit(i) {
                t.zimg[i] = t.zimg[i].negated();
            }
        }
        t
    }

    pub fn cx(n: usize, c: usize, tq: usize) -> Self {
        let mut t = Self::identity(n);
        t.ximg[c].set_x(tq, true);
        t.zimg[tq].set_z(c, true);
        t
    }

    pub fn cz(n: usize, a: usize, b: usize) -> Self {
        let mut t = Self::identity(n);
        t.ximg[a].set_z(b, true);
        t.ximg[b].set_z(a, true);
        t
    }

    pub fn swap(n: usize, a: usize, b: usize) -> Self {
        let mut t = Self::identity(n);
        t.ximg.swap(a, b);
        t.zimg.swap(a, b);
        t
    }

    /// Random Clifford built from a word of `len` random H/S/CX gates.
    pub fn random<R: Rng>(n: usize, len: usize, rng: &mut R) -> Self {
        let mut t = Self::identity(n);
        for _ in 0..len {
            let g = match rng.gen_range(0..3) {
                0 => Self::h(n, rng.gen_range(0..n)),
                1 => Self::s(n, rng.gen_range(0..n)),
                _ if n > 1 => {
                    let a = rng.gen_range(0..n);
                    let mut b = rng.gen_range(0..n - 1);
                    if b >= a {
                        b += 1;
                    }
                    Self::cx(n, a, b)
                }
                _ => Self::h(n, 0),
            };
            t = g.compose(&t);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        let h = CliffordTableau::h(1, 0);
        assert_eq!(h.conjugate(&p("+X")), p("+Z"));
        assert_eq!(h.conjugate(&p("+Y")), p("-Y"));
    }

    #[test]
    fn identity_leaves_paulis() {
        let t = CliffordTableau::identity(3);
        assert_eq!(t.conjugate(&p("-iXYZ")), p("-iXYZ"));
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = CliffordTableau::random(5, 40, &mut rng);
            assert!(t.is_symplectic());
            let id = t.compose(&t.inverse());
            assert_eq!(id, CliffordTableau::identity(5));
            assert_eq!(t.inverse().compose(&t), CliffordTableau::identity(5));
        }
    }

    #[test]
    fn psc_check_on_tableaux() {
        assert!(CliffordTableau::h(1, 0).is_psc());
        assert!(CliffordTableau::cz(2, 0, 1).is_psc());
        let hs = CliffordTableau::h(1, 0).compose(&CliffordTableau::s(1, 0));
        assert!(!hs.is_psc());
    }
}
