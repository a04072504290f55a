mod common;

use common::*;
use qmatsim_core::hamiltonian::{heisenberg_chain, quench_hamiltonian};
use qmatsim_core::trotter::{evolution_circuit, trotter_step_circuit, DEFAULT_GROUP_ORDER};
use qmatsim_core::{
    exact::{exact_evolve, exact_propagator},
    FieldSchedule, Gate, Pauli, PauliTerm, SpinHamiltonian, StateVector, TermGroup, TrotterPlan,
};

fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    (a * b - b * a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn sample_hamiltonians() -> Vec<SpinHamiltonian> {
    vec![
        quench_hamiltonian(4, 1.0, 1.0).unwrap(),
        quench_hamiltonian(5, 0.7, 2.5).unwrap(),
        heisenberg_chain(5, 1.0, 0.6, -0.4, FieldSchedule::constant(0.3), true).unwrap(),
        heisenberg_chain(3, 0.0, 0.0, 1.0, FieldSchedule::constant(-1.2), false).unwrap(),
    ]
}

fn evolve_circuit(psi: &StateVector, c: &qmatsim_core::Circuit) -> StateVector {
    let mut out = psi.clone();
    out.apply_circuit(c).unwrap();
    out
}

fn trotter_state(h: &SpinHamiltonian, psi: &StateVector, dt: f64, steps: usize, order: &[TermGroup]) -> StateVector {
    let plan = TrotterPlan::new(dt, steps).unwrap().with_group_order(order.to_vec()).unwrap();
    evolve_circuit(psi, &evolution_circuit(h, &plan).unwrap())
}

fn oracle_state(h: &SpinHamiltonian, psi: &StateVector, t: f64) -> Vec<num_complex::Complex64> {
    (propagator(&hamiltonian_dense(h), t) * vec_of(psi)).as_slice().to_vec()
}

#[test]
fn dense_matrix_matches_kron_oracle() {
    for h in sample_hamiltonians() {
        let err = (h.dense_matrix() - hamiltonian_dense(&h)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-13);
    }
}

#[test]
fn hamiltonians_are_hermitian() {
    for h in sample_hamiltonians() {
        let m = hamiltonian_dense(&h);
        let err = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-14);
    }
}

#[test]
fn terms_within_a_group_commute() {
    let chains = [
        quench_hamiltonian(8, 1.0, 1.5).unwrap(),
        heisenberg_chain(6, 1.0, 1.0, 1.0, FieldSchedule::constant(0.5), true).unwrap(),
    ];
    for h in &chains {
        let n = h.num_qubits();
        for g in TermGroup::ALL {
            let mats: Vec<CMat> = h.group_terms(g).iter().map(|t| pauli_dense(t, n)).collect();
            for i in 0..mats.len() {
                for j in i + 1..mats.len() {
                    assert!(commutator_norm(&mats[i], &mats[j]) < 1e-12, "group {g}: terms {i}, {j}");
                }
            }
        }
    }
}

#[test]
fn xxz_conserves_total_sz() {
    for h in [
        quench_hamiltonian(6, 1.0, 0.5).unwrap(),
        heisenberg_chain(5, 0.8, 0.8, 2.0, FieldSchedule::constant(0.4), true).unwrap(),
    ] {
        let n = h.num_qubits();
        let sz = (0..n).fold(CMat::zeros(1 << n, 1 << n), |acc, q| acc + on_qubit(&sigma(Pauli::Z), q, n));
        assert!(commutator_norm(&hamiltonian_dense(&h), &sz) < 1e-12);
    }
}

#[test]
fn exact_evolution_matches_taylor_oracle() {
    for h in sample_hamiltonians() {
        let psi = neel_state(h.num_qubits());
        for t in [0.0, 0.3, 1.0, 2.7] {
            let got = exact_evolve(&psi, &h, t).unwrap();
            assert!(max_diff(got.amplitudes(), &oracle_state(&h, &psi, t)) < 1e-10);
        }
    }
}

#[test]
fn piecewise_field_uses_segment_propagators() {
    let sched = FieldSchedule::new(vec![(0.0, 0.5), (0.4, -1.0), (1.1, 2.0)], Some(2.0)).unwrap();
    let h = heisenberg_chain(4, 1.0, 1.0, 0.5, sched, false).unwrap();
    let at = |t: f64| hamiltonian_dense_at(&h, t);
    let expected = propagator(&at(1.5), 0.4) * propagator(&at(0.5), 0.7) * propagator(&at(0.0), 0.4);
    let got = exact_propagator(&h, 1.5).unwrap();
    assert!((got - expected).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
}

#[test]
fn energy_is_conserved_under_exact_evolution() {
    let h = quench_hamiltonian(4, 1.0, 1.0).unwrap();
    let psi = neel_state(4);
    let e0 = (vec_of(&psi).adjoint() * hamiltonian_dense(&h) * vec_of(&psi))[(0, 0)].re;
    for k in 0..=50 {
        let s = exact_evolve(&psi, &h, 0.1 * k as f64).unwrap();
        let e = h.terms().iter().map(|t| s.expectation(t).unwrap()).sum::<f64>();
        assert!((e - e0).abs() < 1e-10, "t = {}: {e} vs {e0}", 0.1 * k as f64);
    }
}

#[test]
fn pair_rotation_is_exponential_of_term() {
    let (coef, dt) = (0.83, 0.17);
    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
        let term = PauliTerm::pair(coef, 1, 2, p).unwrap();
        let u = propagator(&pauli_dense(&term, 3), dt);
        let gate = Gate::pauli_rotation(p, 1, 2, 2.0 * coef * dt);
        let mut rng_state = product_state(&[(0.3, 0.1), (1.1, -0.5), (0.7, 2.0)]);
        let expected = &u * vec_of(&rng_state);
        rng_state.apply_gate(&gate).unwrap();
        assert!(max_diff(rng_state.amplitudes(), expected.as_slice()) < 1e-12);
    }
}

#[test]
fn step_is_product_of_group_exponentials() {
    let h = heisenberg_chain(5, 1.0, 0.7, 1.3, FieldSchedule::constant(0.9), false).unwrap();
    let n = h.num_qubits();
    let dt = 0.21;
    let order = [TermGroup::Z, TermGroup::Field, TermGroup::X, TermGroup::Y];
    let mut expected = CMat::identity(1 << n, 1 << n);
    for g in order {
        expected = propagator(&hamiltonian_dense(&h.group(g)), dt) * expected;
    }
    let psi = neel_state(n);
    let got = evolve_circuit(&psi, &trotter_step_circuit(&h, dt, &order).unwrap());
    assert!(max_diff(got.amplitudes(), (expected * vec_of(&psi)).as_slice()) < 1e-12);
}

#[test]
fn single_group_trotterization_is_exact() {
    let h = heisenberg_chain(5, 0.0, 0.0, 1.4, FieldSchedule::constant(0.6), true).unwrap();
    let zz_only = h.group(TermGroup::Z);
    let psi = product_state(&[(0.3, 0.0), (1.0, 0.5), (0.2, 1.0), (1.4, 0.0), (0.8, 2.0)]);
    for (dt, steps) in [(1.0, 3), (0.37, 7)] {
        let got = trotter_state(&zz_only, &psi, dt, steps, &DEFAULT_GROUP_ORDER);
        assert!(max_diff(got.amplitudes(), &oracle_state(&zz_only, &psi, dt * steps as f64)) < 1e-11);
        // Z and field groups commute, so together they are exact as well
        let got = trotter_state(&h, &psi, dt, steps, &DEFAULT_GROUP_ORDER);
        assert!(max_diff(got.amplitudes(), &oracle_state(&h, &psi, dt * steps as f64)) < 1e-11);
    }
}

#[test]
fn four_site_quench_fidelity() {
    let h = quench_hamiltonian(4, 1.0, 1.0).unwrap();
    let psi = neel_state(4);
    let trot = trotter_state(&h, &psi, 0.05, 20, &DEFAULT_GROUP_ORDER);
    let exact = exact_evolve(&psi, &h, 1.0).unwrap();
    let infidelity = 1.0 - exact.inner(&trot).norm_sqr();
    assert!(infidelity < 1e-2, "infidelity {infidelity}");
}

#[test]
fn first_order_convergence() {
    let h = heisenberg_chain(4, 1.0, 1.0, 1.0, FieldSchedule::constant(1.0), false).unwrap();
    let psi = neel_state(4);
    let exact = oracle_state(&h, &psi, 1.0);
    let err = |steps: usize| {
        let s = trotter_state(&h, &psi, 1.0 / steps as f64, steps, &DEFAULT_GROUP_ORDER);
        s.amplitudes().iter().zip(&exact).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    };
    let errors: Vec<f64> = [10, 20, 40].iter().map(|&s| err(s)).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.8..2.2).contains(&ratio), "ratio {ratio} from {errors:?}");
    }
}

#[test]
fn group_order_differences_vanish_with_dt() {
    let h = quench_hamiltonian(5, 1.0, 1.7).unwrap();
    let psi = neel_state(5);
    let alt = [TermGroup::Z, TermGroup::Y, TermGroup::X, TermGroup::Field];
    let diff = |steps: usize| {
        let dt = 1.0 / steps as f64;
        let a = trotter_state(&h, &psi, dt, steps, &DEFAULT_GROUP_ORDER);
        let b = trotter_state(&h, &psi, dt, steps, &alt);
        max_diff(a.amplitudes(), b.amplitudes())
    };
    let d: Vec<f64> = [8, 32, 128].iter().map(|&s| diff(s)).collect();
    assert!(d[0] > 1e-3, "orders should differ at coarse dt: {d:?}");
    assert!(d[1] < d[0] / 3.0 && d[2] < d[1] / 3.0, "{d:?}");
    assert!(d[2] < 3e-2, "{d:?}");
}

#[test]
fn scheduled_field_trotter_converges_to_segment_product() {
    let sched = FieldSchedule::new(vec![(0.0, 1.0), (0.5, -0.5)], None).unwrap();
    let h = heisenberg_chain(4, 1.0, 1.0, 0.3, sched, false).unwrap();
    let psi = neel_state(4);
    let exact = exact_evolve(&psi, &h, 1.0).unwrap();
    let err = |steps: usize| {
        let s = trotter_state(&h, &psi, 1.0 / steps as f64, steps, &DEFAULT_GROUP_ORDER);
        max_diff(s.amplitudes(), exact.amplitudes())
    };
    let (e1, e2) = (err(20), err(80));
    assert!(e2 < e1 / 3.5 && e2 < 2e-2, "{e1} {e2}");
}
