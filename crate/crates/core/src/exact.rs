//! Exact propagation `e^{−iHt}|ψ⟩` by dense Hermitian eigendecomposition.
//!
//! The decomposition is computed once and reused for every time point,
//! which is what makes it usable as the reference for Trotter runs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::hamiltonian::SpinHamiltonian;
use crate::statevector::StateVector;

pub const DEFAULT_ORACLE_MAX_QUBITS: usize = 10;

#[derive(Debug, Clone)]
pub struct ExactEvolver {
    num_qubits: usize,
    energies: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

impl ExactEvolver {
    /// Diagonalises `h` frozen at `t = 0`.
    pub fn new(h: &SpinHamiltonian) -> Result<Self> {
        Self::at_time(h, 0.0, DEFAULT_ORACLE_MAX_QUBITS)
    }

    pub fn at_time(h: &SpinHamiltonian, t: f64, cap: usize) -> Result<Self> {
        let n = h.num_qubits();
        if n > cap {
            return Err(SimError::capability(format!("dense propagator limited to {cap} qubits, Hamiltonian has {n}")));
        }
        let eig = SymmetricEigen::new(h.dense_matrix_at(t));
        Ok(ExactEvolver { num_qubits: n, energies: eig.eigenvalues, vectors: eig.eigenvectors })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Eigenvalues, unsorted.
    pub fn energies(&self) -> &[f64] {
        self.energies.as_slice()
    }

    /// Lowest eigenpair.
    pub fn ground_state(&self) -> Result<(f64, StateVector)> {
        let (idx, &e) = self
            .energies
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .ok_or_else(|| SimError::Numerical("empty spectrum".into()))?;
        let amps: Vec<Complex64> = self.vectors.column(idx).iter().copied().collect();
        Ok((e, StateVector::from_amplitudes(amps)?))
    }

    /// Dense `e^{−iHt}`.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
        );
        let mut scaled = self.vectors.clone();
        for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *p;
        }
        scaled * self.vectors.adjoint()
    }

    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if state.num_qubits() != self.num_qubits {
            return Err(SimError::arg(format!(
                "state has {} qubits, propagator {}",
                state.num_qubits(),
                self.num_qubits
            )));
        }
        let psi = DVector::from_column_slice(state.amplitudes());
        let mut coeffs = self.vectors.adjoint() * psi;
        for (c, &e) in coeffs.iter_mut().zip(self.energies.iter()) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        let out = &self.vectors * coeffs;
        StateVector::from_amplitudes(out.iter().copied().collect())
    }
}

/// `e^{−iHt}|ψ⟩` from time 0. A scheduled field is integrated exactly
/// segment by segment.
pub fn exact_evolve(state: &StateVector, h: &SpinHamiltonian, time: f64) -> Result<StateVector> {
    if !time.is_finite() || time < 0.0 {
        return Err(SimError::arg(format!("evolution time must be finite and ≥ 0, got {time}")));
    }
    let cuts = segment_cuts(h, time)?;
    let mut psi = state.clone();
    for w in cuts.windows(2) {
        let ev = ExactEvolver::at_time(h, w[0], DEFAULT_ORACLE_MAX_QUBITS)?;
        psi = ev.evolve(&psi, w[1] - w[0])?;
    }
    Ok(psi)
}

/// Dense `U(0, time)`, a product of exact segment propagators when the
/// field is scheduled.
pub fn exact_propagator(h: &SpinHamiltonian, time: f64) -> Result<DMatrix<Complex64>> {
    if !time.is_finite() || time < 0.0 {
        return Err(SimError::arg(format!("evolution time must be finite and ≥ 0, got {time}")));
    }
    let cuts = segment_cuts(h, time)?;
    let dim = 1usize << h.num_qubits();
    let mut u = DMatrix::identity(dim, dim);
    for w in cuts.windows(2) {
        let ev = ExactEvolver::at_time(h, w[0], DEFAULT_ORACLE_MAX_QUBITS)?;
        u = ev.propagator(w[1] - w[0]) * u;
    }
    Ok(u)
}

fn segment_cuts(h: &SpinHamiltonian, time: f64) -> Result<Vec<f64>> {
    if let Some(s) = h.schedule() {
        if !s.covers(time) {
            return Err(SimError::arg(format!("field schedule ends before t = {time}")));
        }
    }
    let mut cuts = vec![0.0];
    if h.is_time_dependent() {
        cuts.extend(h.schedule().into_iter().flat_map(|s| s.breakpoints_before(time)));
    }
    cuts.push(time);
    Ok(cuts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{heisenberg_chain, quench_hamiltonian, FieldSchedule};
    use crate::observables::energy;

    #[test]
    fn zero_time_is_identity() {
        let h = quench_hamiltonian(3, 1.0, 0.7).unwrap();
        let s = StateVector::basis(3, 0b010).unwrap();
        let out = exact_evolve(&s, &h, 0.0).unwrap();
        assert!(out.phase_aligned_distance(&s) < 1e-12);
    }

    #[test]
    fn eigenstate_is_stationary() {
        let h = quench_hamiltonian(4, 1.0, 1.3).unwrap();
        let ev = ExactEvolver::new(&h).unwrap();
        let (e0, gs) = ev.ground_state().unwrap();
        let later = ev.evolve(&gs, 2.7).unwrap();
        assert!(later.phase_aligned_distance(&gs) < 1e-10);
        assert!((energy(&later, &h).unwrap() - e0).abs() < 1e-10);
    }

    #[test]
    fn oracle_cap_is_a_capability_error() {
        let h = quench_hamiltonian(11, 1.0, 1.0).unwrap();
        assert!(matches!(ExactEvolver::new(&h), Err(SimError::Capability(_))));
    }

    #[test]
    fn propagator_is_unitary() {
        let h = heisenberg_chain(3, 0.4, 0.9, 1.1, FieldSchedule::constant(0.3), true).unwrap();
        let u = ExactEvolver::new(&h).unwrap().propagator(0.8);
        assert!((u.adjoint() * &u - DMatrix::identity(8, 8)).camax() < 1e-12);
    }

    #[test]
    fn schedule_segments_compose() {
        // field switches off at t = 0.5; evolving in two explicit legs must agree
        let sched = FieldSchedule::new(vec![(0.0, 1.0), (0.5, 0.0)], None).unwrap();
        let h = heisenberg_chain(3, 1.0, 0.0, 0.0, sched, false).unwrap();
        let s = StateVector::basis(3, 0b101).unwrap();
        let whole = exact_evolve(&s, &h, 1.2).unwrap();
        let leg1 = ExactEvolver::at_time(&h, 0.0, 10).unwrap().evolve(&s, 0.5).unwrap();
        let leg2 = ExactEvolver::at_time(&h, 0.7, 10).unwrap().evolve(&leg1, 0.7).unwrap();
        assert!(whole.phase_aligned_distance(&leg2) < 1e-12);
        let short = FieldSchedule::new(vec![(0.0, 1.0)], Some(1.0)).unwrap();
        let h = heisenberg_chain(3, 1.0, 0.0, 0.0, short, false).unwrap();
        assert!(exact_evolve(&s, &h, 1.5).is_err());
    }
}
