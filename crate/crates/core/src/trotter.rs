//! First-order Lie–Trotter circuit synthesis.
//!
//! One step of size `dt` applies `e^{−iG·dt}` for each term group `G` in
//! the plan's group order; within a group every term is its own exact
//! rotation because group members commute. A term `c·σ^α_a σ^α_b` becomes
//! `RotAA(a, b, 2·c·dt)` and a single-site `c·σ^α` becomes `RotA(2·c·dt)`.
//!
//! Steps are applied earliest first. With a scheduled field, step `k` uses
//! the field value at its left endpoint `k·dt`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::exact::exact_propagator;
use crate::gate::{Circuit, Gate};
use crate::hamiltonian::{SpinHamiltonian, TermGroup};
use crate::pauli::PauliTerm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TrotterOrder {
    #[default]
    First,
}

pub const DEFAULT_GROUP_ORDER: [TermGroup; 4] = [TermGroup::X, TermGroup::Y, TermGroup::Z, TermGroup::Field];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub dt: f64,
    pub steps: usize,
    pub order: TrotterOrder,
    pub group_order: Vec<TermGroup>,
}

impl TrotterPlan {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        let plan = TrotterPlan { dt, steps, order: TrotterOrder::First, group_order: DEFAULT_GROUP_ORDER.to_vec() };
        plan.validate()?;
        Ok(plan)
    }

    /// Smallest number of equal steps no longer than `max_dt` that reach `total`.
    pub fn covering(total: f64, max_dt: f64) -> Result<Self> {
        if !(max_dt > 0.0) || !total.is_finite() || total < 0.0 {
            return Err(SimError::arg(format!("cannot cover t = {total} with steps of {max_dt}")));
        }
        if total == 0.0 {
            return Self::new(max_dt, 0);
        }
        let steps = ((total / max_dt) - 1e-9).ceil().max(1.0) as usize;
        Self::new(total / steps as f64, steps)
    }

    pub fn with_group_order(mut self, order: Vec<TermGroup>) -> Result<Self> {
        self.group_order = order;
        self.validate()?;
        Ok(self)
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::arg(format!("Trotter time step must be > 0, got {}", self.dt)));
        }
        check_group_order(&self.group_order)
    }
}

fn check_group_order(order: &[TermGroup]) -> Result<()> {
    for (i, g) in order.iter().enumerate() {
        if order[..i].contains(g) {
            return Err(SimError::arg(format!("group `{g}` listed twice in group order")));
        }
    }
    Ok(())
}

fn compile_term(term: &PauliTerm, dt: f64) -> Result<Option<Gate>> {
    let angle = 2.0 * term.coefficient() * dt;
    let sites = term.sites();
    let Some(axis) = term.uniform_axis() else {
        return if sites.is_empty() {
            Ok(None)
        } else {
            Err(SimError::capability(format!("mixed-axis term `{term}` has no native rotation")))
        };
    };
    match sites[..] {
        [q] => Ok(Some(Gate::single_rotation(axis, q, angle))),
        [a, b] => Ok(Some(Gate::pauli_rotation(axis, a, b, angle))),
        _ => Err(SimError::capability(format!(
            "term `{term}` acts on {} sites; only 1- and 2-site terms compile",
            sites.len()
        ))),
    }
}

fn step_at(h: &SpinHamiltonian, t: f64, dt: f64, group_order: &[TermGroup], out: &mut Circuit) -> Result<()> {
    for &group in group_order {
        for term in h.group_terms_at(group, t) {
            if let Some(g) = compile_term(&term, dt)? {
                out.push(g)?;
            }
        }
    }
    Ok(())
}

fn check_order_covers(h: &SpinHamiltonian, group_order: &[TermGroup]) -> Result<()> {
    check_group_order(group_order)?;
    if let Some(g) = h.present_groups().into_iter().find(|g| !group_order.contains(g)) {
        return Err(SimError::arg(format!("group order omits group `{g}` present in the Hamiltonian")));
    }
    Ok(())
}

/// One first-order step `∏_G e^{−iG·dt}` with the field frozen at `t = 0`.
pub fn trotter_step_circuit(h: &SpinHamiltonian, dt: f64, group_order: &[TermGroup]) -> Result<Circuit> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(SimError::arg(format!("time step must be finite and ≥ 0, got {dt}")));
    }
    check_order_covers(h, group_order)?;
    let mut c = Circuit::new(h.num_qubits());
    step_at(h, 0.0, dt, group_order, &mut c)?;
    Ok(c)
}

/// `plan.steps` consecutive Trotter steps from `t = 0`.
pub fn evolution_circuit(h: &SpinHamiltonian, plan: &TrotterPlan) -> Result<Circuit> {
    plan.validate()?;
    check_order_covers(h, &plan.group_order)?;
    if let Some(s) = h.schedule() {
        if !s.covers(plan.total_time()) {
            return Err(SimError::arg(format!(
                "field schedule ends at {:?}, shorter than the simulated time {}",
                s.end(),
                plan.total_time()
            )));
        }
    }
    let mut c = Circuit::new(h.num_qubits());
    for k in 0..plan.steps {
        step_at(h, k as f64 * plan.dt, plan.dt, &plan.group_order, &mut c)?;
    }
    Ok(c)
}

/// How a time-evolution block is realised inside a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Evolution {
    /// Trotter steps no longer than `dt`.
    Trotter { dt: f64, group_order: Vec<TermGroup> },
    /// A single dense `e^{−iHt}` gate from the eigendecomposition.
    Exact,
}

impl Evolution {
    pub fn trotter(dt: f64) -> Self {
        Evolution::Trotter { dt, group_order: DEFAULT_GROUP_ORDER.to_vec() }
    }
}

/// Circuit evolving the system register from `0` to `time`.
pub fn evolution_block(h: &SpinHamiltonian, time: f64, evolution: &Evolution) -> Result<Circuit> {
    match evolution {
        Evolution::Trotter { dt, group_order } => {
            let plan = TrotterPlan::covering(time, *dt)?.with_group_order(group_order.clone())?;
            evolution_circuit(h, &plan)
        }
        Evolution::Exact => {
            let n = h.num_qubits();
            let mut c = Circuit::new(n);
            c.push(Gate::unitary((0..n).collect(), exact_propagator(h, time)?)?)?;
            Ok(c)
        }
    }
}
