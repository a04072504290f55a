//! Fixtures shared by the benchmarks.

use qmatsim_core::dynamics::neel_circuit;
use qmatsim_core::{Gate, StateVector};

/// Néel state on `n` qubits.
pub fn neel_state(n: usize) -> StateVector {
    let mut s = StateVector::zero(n).expect("qubit count within limits");
    s.apply_circuit(&neel_circuit(n).expect("n ≥ 1")).expect("valid circuit");
    s
}

/// Uniform superposition, so every amplitude is touched by every kernel.
pub fn plus_state(n: usize) -> StateVector {
    let mut s = StateVector::zero(n).expect("qubit count within limits");
    for q in 0..n {
        s.apply_gate(&Gate::Hadamard(q)).expect("qubit in range");
    }
    s
}
