//! Measured quantities: magnetizations, energy, shot estimators and the
//! ancilla (Hadamard-test) circuit for two-time correlators.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::gate::{Circuit, Gate};
use crate::hamiltonian::{SpinHamiltonian, TermGroup};
use crate::pauli::{Pauli, PauliTerm};
use crate::statevector::StateVector;
use crate::trotter::{evolution_block, Evolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl From<Axis> for Pauli {
    fn from(a: Axis) -> Pauli {
        match a {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

/// Whether observables are read exactly from amplitudes or estimated from
/// sampled measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measurement {
    Exact,
    Shots { shots: usize, seed: u64 },
}

/// `⟨σ_i^axis⟩` for every site.
pub fn site_magnetization(state: &StateVector, axis: Axis) -> Result<Vec<f64>> {
    let n = state.num_qubits();
    if axis == Axis::Z {
        let mut out = vec![0.0; n];
        for (i, a) in state.amplitudes().iter().enumerate() {
            let p = a.norm_sqr();
            for (q, m) in out.iter_mut().enumerate() {
                *m += if i >> q & 1 == 0 { p } else { -p };
            }
        }
        return Ok(out);
    }
    (0..n).map(|q| state.expectation(&PauliTerm::single(1.0, q, axis.into()))).collect()
}

/// `(1/N) Σ_i (−1)^i m_i` with site 0 counted positive.
pub fn staggered_from_sites(site_z: &[f64]) -> f64 {
    let sum: f64 = site_z.iter().enumerate().map(|(i, m)| if i % 2 == 0 { *m } else { -*m }).sum();
    sum / site_z.len() as f64
}

/// Staggered magnetization; the Néel state `|↑↓↑…⟩` gives +1.
pub fn staggered_magnetization(state: &StateVector) -> Result<f64> {
    Ok(staggered_from_sites(&site_magnetization(state, Axis::Z)?))
}

/// `⟨H⟩` with any scheduled field evaluated at `t = 0`.
pub fn energy(state: &StateVector, h: &SpinHamiltonian) -> Result<f64> {
    energy_at(state, h, 0.0)
}

pub fn energy_at(state: &StateVector, h: &SpinHamiltonian, t: f64) -> Result<f64> {
    if h.num_qubits() > state.num_qubits() {
        return Err(SimError::arg("Hamiltonian acts beyond the state's register"));
    }
    h.terms_at(t).iter().map(|term| state.expectation(term)).sum()
}

fn measure_in_basis(state: &StateVector, bases: &[(usize, Pauli)]) -> Result<StateVector> {
    let mut s = state.clone();
    for &(q, p) in bases {
        match p {
            Pauli::X => s.apply_gate(&Gate::Hadamard(q))?,
            // RotX(π/2) maps the σʸ eigenbasis onto σᶻ
            Pauli::Y => s.apply_gate(&Gate::RotX(q, FRAC_PI_2))?,
            Pauli::Z => {}
        }
    }
    Ok(s)
}

fn parity_mean(counts: &std::collections::BTreeMap<usize, usize>, mask: usize, shots: usize) -> f64 {
    let signed: i64 =
        counts.iter().map(|(&i, &c)| if (i & mask).count_ones() % 2 == 0 { c as i64 } else { -(c as i64) }).sum();
    signed as f64 / shots as f64
}

/// Shot estimate of `⟨term⟩`: rotate each factor's eigenbasis onto Z,
/// sample, average the parity.
pub fn estimate_expectation<R: Rng>(state: &StateVector, term: &PauliTerm, shots: usize, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(SimError::arg("shots must be at least 1"));
    }
    term.check_range(state.num_qubits())?;
    let bases: Vec<(usize, Pauli)> = term.ops().iter().map(|(&q, &p)| (q, p)).collect();
    let rotated = measure_in_basis(state, &bases)?;
    let counts = rotated.sample_indices(shots, rng);
    let mask: usize = bases.iter().map(|(q, _)| 1usize << q).sum();
    Ok(term.coefficient() * parity_mean(&counts, mask, shots))
}

/// Per-site `⟨σᶻ⟩` from one batch of computational-basis shots.
pub fn estimate_site_z<R: Rng>(state: &StateVector, shots: usize, rng: &mut R) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(SimError::arg("shots must be at least 1"));
    }
    let counts = state.sample_indices(shots, rng);
    Ok((0..state.num_qubits()).map(|q| parity_mean(&counts, 1 << q, shots)).collect())
}

/// Shot estimate of `⟨H⟩`, one measurement batch per term group (each
/// group is diagonal in a single product basis).
pub fn estimate_energy<R: Rng>(state: &StateVector, h: &SpinHamiltonian, shots: usize, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(SimError::arg("shots must be at least 1"));
    }
    let mut total = 0.0;
    for group in h.present_groups() {
        let terms = h.group_terms(group);
        let basis = group.basis();
        let bases: Vec<(usize, Pauli)> = (0..h.num_qubits()).map(|q| (q, basis)).collect();
        let counts = measure_in_basis(state, &bases)?.sample_indices(shots, rng);
        for term in terms {
            let mask: usize = term.sites().iter().map(|q| 1usize << q).sum();
            total += term.coefficient() * parity_mean(&counts, mask, shots);
        }
    }
    Ok(total)
}

/// How the system register is prepared before the correlator circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum StatePrep {
    /// Gates applied to `|0…0⟩`.
    Circuit(Circuit),
    /// Amplitudes injected directly (e.g. an exactly diagonalised ground state).
    State(StateVector),
}

/// `⟨A(t) B(0)⟩ = ⟨ψ| e^{iHt} A e^{−iHt} B |ψ⟩` with `A`, `B` Pauli strings.
#[derive(Debug, Clone)]
pub struct CorrelationSpec {
    pub op_a: PauliTerm,
    pub op_b: PauliTerm,
    pub time: f64,
    pub hamiltonian: SpinHamiltonian,
    pub state_prep: StatePrep,
}

impl CorrelationSpec {
    fn validate(&self) -> Result<()> {
        let n = self.hamiltonian.num_qubits();
        for (name, op) in [("A", &self.op_a), ("B", &self.op_b)] {
            if op.weight() == 0 || (op.coefficient().abs() - 1.0).abs() > 1e-12 {
                return Err(SimError::arg(format!(
                    "operator {name} = `{op}` must be a Pauli string with coefficient ±1 to be unitary"
                )));
            }
            op.check_range(n)?;
        }
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(SimError::arg(format!("correlation time must be ≥ 0, got {}", self.time)));
        }
        match &self.state_prep {
            StatePrep::Circuit(c) if c.num_qubits() > n => {
                Err(SimError::arg("state preparation circuit is wider than the system"))
            }
            StatePrep::State(s) if s.num_qubits() != n => {
                Err(SimError::arg(format!("injected state has {} qubits, system has {n}", s.num_qubits())))
            }
            _ => Ok(()),
        }
    }

    pub fn ancilla(&self) -> usize {
        self.hamiltonian.num_qubits()
    }
}

fn controlled_pauli(control: usize, op: &PauliTerm) -> Result<Gate> {
    Gate::controlled(control, op.sites(), op.support_matrix())
}

/// System qubits `0..n`, ancilla `n`: `[U_S]`, H(anc), controlled-B,
/// evolution to `time` on the system, controlled-A. Afterwards
/// `⟨σˣ_anc⟩ = Re⟨A(t)B(0)⟩` and `⟨σʸ_anc⟩ = Im⟨A(t)B(0)⟩`.
///
/// With [`StatePrep::State`] the preparation is not part of the circuit;
/// the caller starts from `ψ ⊗ |0⟩_anc`.
pub fn correlation_circuit(spec: &CorrelationSpec, evolution: &Evolution) -> Result<Circuit> {
    spec.validate()?;
    let anc = spec.ancilla();
    let mut c = Circuit::new(anc + 1);
    if let StatePrep::Circuit(prep) = &spec.state_prep {
        c.extend(prep)?;
    }
    c.push(Gate::Hadamard(anc))?;
    c.push(controlled_pauli(anc, &spec.op_b)?)?;
    c.extend(&evolution_block(&spec.hamiltonian, spec.time, evolution)?)?;
    c.push(controlled_pauli(anc, &spec.op_a)?)?;
    Ok(c)
}

/// Runs [`correlation_circuit`] and reads the ancilla coherences.
pub fn measure_correlation(spec: &CorrelationSpec, evolution: &Evolution) -> Result<Complex64> {
    let circuit = correlation_circuit(spec, evolution)?;
    let anc = spec.ancilla();
    let mut state = match &spec.state_prep {
        StatePrep::State(s) => s.extend_with_zeros(1)?,
        StatePrep::Circuit(_) => StateVector::zero(anc + 1)?,
    };
    state.apply_circuit(&circuit)?;
    let re = state.expectation(&PauliTerm::single(1.0, anc, Pauli::X))?;
    let im = state.expectation(&PauliTerm::single(1.0, anc, Pauli::Y))?;
    Ok(Complex64::new(re, im))
}

/// Shot estimate of the correlator from sampled ancilla measurements.
pub fn estimate_correlation<R: Rng>(
    spec: &CorrelationSpec,
    evolution: &Evolution,
    shots: usize,
    rng: &mut R,
) -> Result<Complex64> {
    let circuit = correlation_circuit(spec, evolution)?;
    let anc = spec.ancilla();
    let mut state = match &spec.state_prep {
        StatePrep::State(s) => s.extend_with_zeros(1)?,
        StatePrep::Circuit(_) => StateVector::zero(anc + 1)?,
    };
    state.apply_circuit(&circuit)?;
    let re = estimate_expectation(&state, &PauliTerm::single(1.0, anc, Pauli::X), shots, rng)?;
    let im = estimate_expectation(&state, &PauliTerm::single(1.0, anc, Pauli::Y), shots, rng)?;
    Ok(Complex64::new(re, im))
}

/// Convenience for the group used most often in checks.
pub fn group_energy(state: &StateVector, h: &SpinHamiltonian, group: TermGroup) -> Result<f64> {
    h.group_terms(group).iter().map(|t| state.expectation(t)).sum()
}
