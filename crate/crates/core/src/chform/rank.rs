use num_complex::Complex64;
use rand::Rng;

use super::{ChError, ChState};
use crate::circuit::GateKind;
use crate::clifford::ErrorGate;
use crate::pauli::PauliString;

/// `Σ_i α_i |φ_i⟩` over CH-form stabilizer states.
#[derive(Clone, Debug, PartialEq)]
pub struct RankDecomposition {
    n: usize,
    pub terms: Vec<(Complex64, ChState)>,
}

impl RankDecomposition {
    pub fn new(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    pub fn single(s: ChState) -> Self {
        Self { n: s.n(), terms: vec![(Complex64::new(1.0, 0.0), s)] }
    }

    pub fn push(&mut self, alpha: Complex64, s: ChState) -> Result<(), ChError> {
        if s.n() != self.n {
            return Err(ChError::Width(s.n(), self.n));
        }
        self.terms.push((alpha, s));
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stabilizer terms.
    pub fn q(&self) -> usize {
        self.terms.len()
    }

    pub fn apply_gate(&mut self, g: &GateKind) -> Result<(), ChError> {
        self.terms.iter_mut().try_for_each(|(_, s)| s.apply_gate(g))
    }

    pub fn apply_error_gate(&mut self, g: &ErrorGate) -> Result<(), ChError> {
        self.terms.iter_mut().try_for_each(|(_, s)| s.apply_error_gate(g))
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<(), ChError> {
        self.terms.iter_mut().try_for_each(|(_, s)| s.apply_pauli(p))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &RankDecomposition) -> Result<Complex64, ChError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, s) in &self.terms {
            for (b, t) in &other.terms {
                acc += a.conj() * b * s.inner(t)?;
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> Result<f64, ChError> {
        // Hermitian Gram form: diagonal plus twice the upper triangle
        let mut acc = 0.0;
        for (i, (a, s)) in self.terms.iter().enumerate() {
            acc += a.norm_sqr() * s.norm_sqr();
            for (b, t) in &self.terms[i + 1..] {
                acc += 2.0 * (a.conj() * b * s.inner(t)?).re;
            }
        }
        Ok(acc.max(0.0))
    }

    pub fn scale(&mut self, c: Complex64) {
        for (a, _) in self.terms.iter_mut() {
            *a *= c;
        }
    }

    /// Termwise `(I ± P)/2`; zero terms are dropped. Returns the squared norm.
    pub fn project(&mut self, p: &PauliString, plus: bool) -> Result<f64, ChError> {
        for (_, s) in self.terms.iter_mut() {
            s.project(p, plus)?;
        }
        self.terms.retain(|(a, s)| !s.is_zero() && a.norm_sqr() > 0.0);
        self.norm_sqr()
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); 1 << self.n];
        for (a, s) in &self.terms {
            for (o, x) in out.iter_mut().zip(s.to_dense()) {
                *o += a * x;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyndromeSample {
    /// Sampled outcomes, `true` for `-1`; shorter than the schedule when sampling stopped at a rejection.
    pub x: Vec<bool>,
    pub accepted: bool,
    /// Probability of the sampled (prefix of) `x`.
    pub prob: f64,
    /// `|⟨target|ψ_x⟩|²` for normalized states; zero on rejected shots.
    pub overlap2: f64,
}

/// Applies `error`, samples the measurement outcomes bit by bit and returns the target overlap.
///
/// `correction` maps a full accepted outcome string to an optional Pauli applied before the
/// overlap. With `stop_on_reject`, sampling ends at the first `-1` outcome.
pub fn sample_syndrome_and_overlap<R: Rng>(
    decomp: &RankDecomposition,
    error: &[ErrorGate],
    measurements: &[PauliString],
    target: &RankDecomposition,
    correction: &dyn Fn(&[bool]) -> Option<PauliString>,
    stop_on_reject: bool,
    rng: &mut R,
) -> Result<SyndromeSample, ChError> {
    let mut st = decomp.clone();
    for g in error {
        st.apply_error_gate(g)?;
    }
    let mut norm = st.norm_sqr()?;
    if norm < 1e-300 {
        return Err(ChError::ZeroNorm);
    }
    st.scale(Complex64::new(1.0 / norm.sqrt(), 0.0));
    norm = 1.0;
    let mut x = Vec::with_capacity(measurements.len());
    let mut prob = 1.0;
    for m in measurements {
        let mut plus = st.clone();
        let np = plus.project(m, true)?;
        let mut minus = st.clone();
        let nm = minus.project(m, false)?;
        let tot = np + nm;
        if tot < 1e-300 {
            return Err(ChError::ZeroNorm);
        }
        debug_assert!((tot - norm).abs() < 1e-8);
        let take_plus = if nm < 1e-14 * tot {
            true
        } else if np < 1e-14 * tot {
            false
        } else {
            rng.gen::<f64>() * tot < np
        };
        let (mut next, w) = if take_plus { (plus, np) } else { (minus, nm) };
        prob *= w / tot;
        next.scale(Complex64::new(1.0 / w.sqrt(), 0.0));
        st = next;
        x.push(!take_plus);
        if !take_plus && stop_on_reject {
            return Ok(SyndromeSample { x, accepted: false, prob, overlap2: 0.0 });
        }
    }
    let accepted = x.iter().all(|b| !b);
    if let Some(u) = correction(&x) {
        st.apply_pauli(&u)?;
    }
    let overlap2 = if accepted {
        let tn = target.norm_sqr()?;
        target.inner(&st)?.norm_sqr() / (tn * st.norm_sqr()?)
    } else {
        0.0
    };
    Ok(SyndromeSample { x, accepted, prob, overlap2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn magic_h() -> RankDecomposition {
        let (c, s) = ((std::f64::consts::PI / 8.0).cos(), (std::f64::consts::PI / 8.0).sin());
        let mut d = RankDecomposition::new(1);
        d.push(Complex64::new(c, 0.0), ChState::basis(1, 0).unwrap()).unwrap();
        d.push(Complex64::new(s, 0.0), ChState::basis(1, 1).unwrap()).unwrap();
        d
    }

    #[test]
    fn magic_state_norm_and_projection() {
        let mut d = magic_h();
        assert!((d.norm_sqr().unwrap() - 1.0).abs() < 1e-14);
        let h = |v: f64| (v - (1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0).abs();
        let w = d.project(&"+X".parse().unwrap(), true).unwrap();
        let want = 0.5 * (1.0 + (std::f64::consts::PI / 4.0).sin());
        assert!((w - want).abs() < 1e-12 && h(w) < 1e-12);
        assert_eq!(d.q(), 2);
    }

    #[test]
    fn stabilizer_target_without_error() {
        let mut s = ChState::zero(2).unwrap();
        s.apply_gate(&GateKind::H(0)).unwrap();
        s.apply_gate(&GateKind::CX(0, 1)).unwrap();
        let d = RankDecomposition::single(s);
        let ms = vec!["+ZZ".parse().unwrap(), "+XX".parse().unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = sample_syndrome_and_overlap(&d, &[], &ms, &d, &|_| None, false, &mut rng).unwrap();
        assert!(r.accepted);
        assert!((r.overlap2 - 1.0).abs() < 1e-12);
        assert!((r.prob - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outcome_tree_sums_to_one() {
        let d = magic_h();
        let ms: Vec<PauliString> = vec!["+X".parse().unwrap()];
        let mut p = 0.0;
        for seed in 0..400 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = sample_syndrome_and_overlap(&d, &[], &ms, &d, &|_| None, false, &mut rng).unwrap();
            if r.accepted {
                p += 1.0;
            }
        }
        let want = 0.5 * (1.0 + (std::f64::consts::PI / 4.0).sin());
        assert!((p / 400.0 - want).abs() < 0.08);
    }
}
