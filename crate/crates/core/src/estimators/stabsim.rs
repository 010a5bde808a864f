use crate::clifford::ErrorGate;
use crate::pauli::PauliString;

/// Stabilizer group of a pure or mixed stabilizer state, kept as Hermitian commuting generators.
///
/// No destabilizers: deterministic outcomes are resolved by elimination, which is cheap at
/// the widths the estimators use.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    n: usize,
    gens: Vec<PauliString>,
}

fn sym_bit(p: &PauliString, col: usize, n: usize) -> bool {
    if col < n {
        p.x_bit(col)
    } else {
        p.z_bit(col - n)
    }
}

impl StabilizerGroup {
    pub fn new(n: usize, gens: Vec<PauliString>) -> Self {
        debug_assert!(gens.iter().all(|g| g.n() == n && g.is_hermitian()));
        Self { n, gens }
    }

    pub fn gens(&self) -> &[PauliString] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// `ρ -> G ρ G†`.
    pub fn apply(&mut self, g: &ErrorGate) {
        for s in self.gens.iter_mut() {
            *s = g.conjugate(s);
        }
    }

    pub fn apply_all(&mut self, gates: &[ErrorGate]) {
        for g in gates {
            self.apply(g);
        }
    }

    /// `Some(±1)` when `p` is (up to sign) a group element, `None` when it is not.
    pub fn sign_of(&self, p: &PauliString) -> Option<i8> {
        let n = self.n;
        let mut rows = self.gens.clone();
        let mut res = p.clone();
        let mut r = 0;
        for col in 0..2 * n {
            let Some(piv) = (r..rows.len()).find(|&i| sym_bit(&rows[i], col, n)) else { continue };
            rows.swap(r, piv);
            let (head, tail) = rows.split_at_mut(r + 1);
            let pr = &head[r];
            for row in tail.iter_mut() {
                if sym_bit(row, col, n) {
                    row.mul_assign_right(pr);
                }
            }
            if sym_bit(&res, col, n) {
                res.mul_assign_right(pr);
            }
            r += 1;
        }
        if !res.is_identity() {
            return None;
        }
        // res = p · Π rows = i^e I, and every row has expectation +1
        match res.phase_exp() {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// `Tr(ρ p)` for a Hermitian Pauli: ±1 on group elements, 0 otherwise.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        if self.gens.iter().any(|g| !g.commutes_with(p)) {
            return 0.0;
        }
        self.sign_of(p).map_or(0.0, f64::from)
    }

    /// Post-selects `p = +1`; returns the outcome probability and leaves the conditional state.
    pub fn postselect(&mut self, p: &PauliString) -> f64 {
        match self.gens.iter().position(|g| !g.commutes_with(p)) {
            Some(a) => {
                let ga = self.gens[a].clone();
                for (i, g) in self.gens.iter_mut().enumerate() {
                    if i != a && !g.commutes_with(p) {
                        g.mul_assign_right(&ga);
                    }
                }
                self.gens[a] = p.clone();
                0.5
            }
            None => match self.sign_of(p) {
                Some(1) => 1.0,
                Some(_) => 0.0,
                None => {
                    // p is outside a mixed group: the outcome is uniform and p joins the group
                    self.gens.push(p.clone());
                    0.5
                }
            },
        }
    }

    /// Drops generators until every remaining one commutes with each of `ops`.
    pub fn commutant(&mut self, ops: &[PauliString]) {
        for o in ops {
            if let Some(a) = self.gens.iter().position(|g| !g.commutes_with(o)) {
                let ga = self.gens.remove(a);
                for g in self.gens.iter_mut() {
                    if !g.commutes_with(o) {
                        g.mul_assign_right(&ga);
                    }
                }
            }
        }
    }
}
