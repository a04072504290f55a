//! Dense statevector simulation of spin-lattice dynamics and the pseudospin
//! BCS gap equation.
//!
//! The crate is organised bottom-up:
//!
//! * [`statevector`], [`gate`], [`pauli`]: amplitudes, gate kernels, Pauli strings
//! * [`hamiltonian`]: Heisenberg-family chains with X/Y/Z/field term groups
//! * [`exact`]: dense eigendecomposition propagator used as ground truth
//! * [`trotter`]: first-order product-formula circuit synthesis
//! * [`observables`]: magnetizations, energy, ancilla correlation circuits
//! * [`bcs`]: self-consistent gap solve with one qubit per momentum
//! * [`dynamics`]: Néel-state quench driver producing a [`TimeSeries`]
//!
//! Qubit ordering is little-endian throughout: qubit 0 is the least
//! significant bit of a basis-state index.

pub mod bcs;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod gate;
pub mod hamiltonian;
pub mod observables;
pub mod pauli;
pub mod statevector;
pub mod trotter;

pub use num_complex::Complex64;

pub use bcs::{BcsProblem, GapSolveResult, PseudospinState, SolverOptions};
pub use dynamics::{QuenchConfig, TimeSeries};
pub use error::{Result, SimError};
pub use exact::ExactEvolver;
pub use gate::{Circuit, Gate};
pub use hamiltonian::{FieldSchedule, SpinHamiltonian, TermGroup};
pub use observables::{Axis, CorrelationSpec, StatePrep};
pub use pauli::{Pauli, PauliTerm};
pub use statevector::StateVector;
pub use trotter::{Evolution, TrotterPlan};
