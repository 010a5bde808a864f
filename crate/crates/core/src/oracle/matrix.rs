//! Small dense complex matrices. Qubit `k` is bit `k` of the basis index.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::pauli::PauliString;

pub type CMat = DMatrix<Complex64>;

pub const TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn i_pow(e: u32) -> Complex64 {
    match e % 4 {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}

pub fn omega8(k: u32) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * (k % 8) as f64)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn pauli_matrix(p: &PauliString) -> CMat {
    let n = p.n();
    assert!(n <= 12);
    let dim = 1usize << n;
    let (x, z) = (p.x_mask() as usize, p.z_mask() as usize);
    let ph = i_pow(p.phase_exp() as u32);
    let mut m = CMat::zeros(dim, dim);
    for j in 0..dim {
        let sign = if (z & j).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        m[(j ^ x, j)] = ph * sign;
    }
    m
}

/// Writes `m = λ·P` with `P` a +signed letter product; returns `(P, λ)`.
pub fn identify_pauli(m: &CMat) -> Option<(PauliString, Complex64)> {
    let dim = m.nrows();
    if dim == 0 || m.ncols() != dim || !dim.is_power_of_two() {
        return None;
    }
    let n = dim.trailing_zeros() as usize;
    let mut x = None;
    for r in 0..dim {
        if m[(r, 0)].norm() > 0.5 {
            x = Some(r);
            break;
        }
    }
    let x = x?;
    let lam0 = m[(x, 0)];
    let mut z = 0usize;
    for k in 0..n {
        let col = 1usize << k;
        let v = m[(x ^ col, col)];
        if (v - lam0).norm() < 1e-6 {
        } else if (v + lam0).norm() < 1e-6 {
            z |= col;
        } else {
            return None;
        }
    }
    let mut p = PauliString::from_masks(n, x as u64, z as u64, 0);
    // i^0 X(x)Z(z) differs from the letter product by i^{-#Y}
    let ycount = p.y_count();
    p.set_phase_exp((ycount % 4) as u8);
    let lam = lam0 * i_pow(4 - ycount % 4);
    let rec = pauli_matrix(&p) * lam;
    if max_abs(&(&rec - m)) > 1e-7 {
        return None;
    }
    Some((p, lam))
}

pub fn is_unitary(m: &CMat) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let prod = m.adjoint() * m;
    max_abs(&(prod - identity(m.nrows()))) < 1e-8
}

/// `U` acting on qubit `0..k` locally, placed at `support` of an `n`-qubit register.
pub fn embed(local: &CMat, support: &[usize], n: usize) -> CMat {
    let k = support.len();
    assert_eq!(local.nrows(), 1 << k);
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    let mask: usize = support.iter().map(|&q| 1usize << q).sum();
    for col in 0..dim {
        let rest = col & !mask;
        let lc = gather(col, support);
        for lr in 0..(1usize << k) {
            let v = local[(lr, lc)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            out[(rest | scatter(lr, support), col)] = v;
        }
    }
    out
}

#[inline]
pub fn gather(idx: usize, support: &[usize]) -> usize {
    support.iter().enumerate().fold(0, |acc, (k, &q)| acc | (((idx >> q) & 1) << k))
}

#[inline]
pub fn scatter(local: usize, support: &[usize]) -> usize {
    support.iter().enumerate().fold(0, |acc, (k, &q)| acc | (((local >> k) & 1) << q))
}

/// Controlled-U with the control as the new most significant qubit.
pub fn controlled(u: &CMat) -> CMat {
    let d = u.nrows();
    let mut m = identity(2 * d);
    for r in 0..d {
        for cc in 0..d {
            m[(d + r, d + cc)] = u[(r, cc)];
        }
    }
    m
}

pub fn h() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

pub fn s() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
}

pub fn t() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), omega8(1)])
}

pub fn x() -> CMat {
    pauli_matrix(&"+X".parse().unwrap())
}

pub fn cx() -> CMat {
    // control qubit 0, target qubit 1
    let mut m = CMat::zeros(4, 4);
    for j in 0..4usize {
        let r = if j & 1 == 1 { j ^ 2 } else { j };
        m[(r, j)] = c(1.0, 0.0);
    }
    m
}

pub fn cz() -> CMat {
    let mut m = identity(4);
    m[(3, 3)] = c(-1.0, 0.0);
    m
}

pub fn swap() -> CMat {
    let mut m = CMat::zeros(4, 4);
    for j in 0..4usize {
        let r = ((j & 1) << 1) | (j >> 1);
        m[(r, j)] = c(1.0, 0.0);
    }
    m
}

/// Kronecker product with `a` on the low qubits and `b` on the high ones.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    b.kronecker(a)
}

/// `exp(iπ/4 Q)` for a Hermitian Pauli `Q`.
pub fn exp_quarter(q: &PauliString) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dim = 1usize << q.n();
    (identity(dim) + pauli_matrix(q) * c(0.0, 1.0)) * c(s, 0.0)
}

/// Smallest `θ`-independent residual of `a = e^{iθ} b`.
pub fn equal_up_to_phase(a: &CMat, b: &CMat, tol: f64) -> bool {
    let mut lam = None;
    for (x, y) in a.iter().zip(b.iter()) {
        if y.norm() > 1e-6 {
            lam = Some(x / y);
            break;
        }
    }
    let Some(lam) = lam else { return max_abs(a) < tol };
    if (lam.norm() - 1.0).abs() > 1e-6 {
        return false;
    }
    max_abs(&(a - b * lam)) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_matrix_roundtrip() {
        for s in ["+XY", "-iZX", "+Y_Z", "+i___"] {
            let p: PauliString = s.parse().unwrap();
            let (q, lam) = identify_pauli(&pauli_matrix(&p)).unwrap();
            assert!(max_abs(&(pauli_matrix(&q) * lam - pauli_matrix(&p))) < 1e-12);
        }
    }

    #[test]
    fn y_matrix() {
        let y = pauli_matrix(&"+Y".parse().unwrap());
        assert!((y[(1, 0)] - c(0.0, 1.0)).norm() < 1e-12);
        assert!((y[(0, 1)] - c(0.0, -1.0)).norm() < 1e-12);
    }
}
