//! Dense reference constructions shared by the integration tests.
//!
//! Everything here is built from Kronecker products and a Taylor-series
//! matrix exponential, independently of the library's bit-mask kernels
//! and eigendecomposition propagator.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qmatsim_core::{Pauli, PauliTerm, SpinHamiltonian, StateVector};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn id2() -> CMat {
    CMat::identity(2, 2)
}

pub fn sigma(p: Pauli) -> CMat {
    match p {
        Pauli::X => CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        Pauli::Y => CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        Pauli::Z => CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    }
}

pub fn hadamard() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)])
}

/// `⊗_q factors[q]` with qubit 0 least significant, i.e. the rightmost factor.
pub fn kron_chain(factors: &[CMat]) -> CMat {
    let mut m = CMat::identity(1, 1);
    for f in factors.iter().rev() {
        m = m.kronecker(f);
    }
    m
}

/// Single-qubit operator `op` on qubit `q` of `n`.
pub fn on_qubit(op: &CMat, q: usize, n: usize) -> CMat {
    let factors: Vec<CMat> = (0..n).map(|i| if i == q { op.clone() } else { id2() }).collect();
    kron_chain(&factors)
}

pub fn pauli_dense(term: &PauliTerm, n: usize) -> CMat {
    let factors: Vec<CMat> = (0..n).map(|q| term.ops().get(&q).map(|p| sigma(*p)).unwrap_or_else(id2)).collect();
    kron_chain(&factors) * c(term.coefficient(), 0.0)
}

/// Dense `H(0)`, with any scheduled field at its initial value.
pub fn hamiltonian_dense(h: &SpinHamiltonian) -> CMat {
    hamiltonian_dense_at(h, 0.0)
}

pub fn hamiltonian_dense_at(h: &SpinHamiltonian, t: f64) -> CMat {
    let dim = 1 << h.num_qubits();
    h.terms_at(t).iter().fold(CMat::zeros(dim, dim), |acc, term| acc + pauli_dense(term, h.num_qubits()))
}

/// `exp(m)` by scaling and squaring of a degree-24 Taylor series.
pub fn expm(m: &CMat) -> CMat {
    let norm = m.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm.log2().ceil().max(0.0) as u32) + 2;
    let scaled = m / c(2f64.powi(squarings as i32), 0.0);
    let n = m.nrows();
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(−i·h·t)`.
pub fn propagator(h: &CMat, t: f64) -> CMat {
    expm(&(h * c(0.0, -t)))
}

pub fn vec_of(s: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn state_of(v: &DVector<Complex64>) -> StateVector {
    StateVector::from_amplitudes(v.iter().copied().collect()).unwrap()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Product state `⊗_q (cos a_q |0⟩ + e^{i b_q} sin a_q |1⟩)`.
pub fn product_state(angles: &[(f64, f64)]) -> StateVector {
    let factors: Vec<DVector<Complex64>> = angles
        .iter()
        .map(|&(a, b)| DVector::from_vec(vec![c(a.cos(), 0.0), Complex64::from_polar(a.sin(), b)]))
        .collect();
    let mut v = DVector::from_element(1, c(1.0, 0.0));
    for f in factors.iter().rev() {
        v = v.kronecker(f);
    }
    state_of(&v)
}

/// Néel basis state with site 0 up.
pub fn neel_state(n: usize) -> StateVector {
    StateVector::basis(n, (1..n).step_by(2).map(|q| 1usize << q).sum()).unwrap()
}

/// `⟨ψ| U† A U B |ψ⟩` with `U = exp(−iHt)` by direct contraction.
pub fn direct_correlation(psi: &StateVector, h: &CMat, a: &CMat, b: &CMat, t: f64) -> Complex64 {
    let u = propagator(h, t);
    let v = vec_of(psi);
    let right = &u * (b * &v);
    let left = &u * &v;
    (left.adjoint() * (a * right))[(0, 0)]
}

/// Mean-field gap with closed-form pseudospin projections
/// `⟨Sˣ⟩ = Δ / (2√(4ξ² + Δ²))` and the same damped update.
pub fn classical_gap(xi: &[f64], u: f64, seed: f64, mixing: f64, tol: f64, max_iter: usize) -> (f64, usize) {
    let nk = xi.len() as f64;
    let mut d = seed;
    for it in 1..=max_iter {
        let sum: f64 = xi
            .iter()
            .map(|&e| {
                let r = (4.0 * e * e + d * d).sqrt();
                if r == 0.0 {
                    0.0
                } else {
                    d / (2.0 * r)
                }
            })
            .sum();
        let target = u / nk * sum;
        let next = (1.0 - mixing) * d + mixing * target;
        let done = (target - d).abs() < tol;
        d = next;
        if done {
            return (d, it);
        }
    }
    (d, max_iter)
}

/// Brute-force argmin of `2ξ·cos(2θ)/2 − Δ·sin(2θ)/2` over `points` grid angles in `[0, π)`.
pub fn grid_argmin(xi: f64, delta: f64, points: usize) -> f64 {
    (0..points)
        .map(|j| std::f64::consts::PI * j as f64 / points as f64)
        .map(|t| (t, xi * (2.0 * t).cos() - 0.5 * delta * (2.0 * t).sin()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0
}

/// Distance between angles modulo π.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::PI);
    d.min(std::f64::consts::PI - d)
}
