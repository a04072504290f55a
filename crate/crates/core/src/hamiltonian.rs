//! Heisenberg-family spin chains.
//!
//! A [`SpinHamiltonian`] keeps each Pauli term tagged with the group it is
//! exponentiated in: all-X, all-Y, multi-site all-Z couplings, and
//! single-site Z fields. Terms inside a group commute, so each group's
//! exponential is exact.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::pauli::{Pauli, PauliTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermGroup {
    X,
    Y,
    Z,
    Field,
}

impl TermGroup {
    pub const ALL: [TermGroup; 4] = [TermGroup::X, TermGroup::Y, TermGroup::Z, TermGroup::Field];

    /// Group a term belongs to, or `None` for mixed-axis strings.
    pub fn classify(term: &PauliTerm) -> Option<TermGroup> {
        match (term.uniform_axis()?, term.weight()) {
            (Pauli::X, _) => Some(TermGroup::X),
            (Pauli::Y, _) => Some(TermGroup::Y),
            (Pauli::Z, 1) => Some(TermGroup::Field),
            (Pauli::Z, _) => Some(TermGroup::Z),
        }
    }

    /// Single-qubit Pauli whose eigenbasis diagonalises the whole group.
    pub fn basis(self) -> Pauli {
        match self {
            TermGroup::X => Pauli::X,
            TermGroup::Y => Pauli::Y,
            TermGroup::Z | TermGroup::Field => Pauli::Z,
        }
    }
}

impl fmt::Display for TermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TermGroup::X => "x",
            TermGroup::Y => "y",
            TermGroup::Z => "z",
            TermGroup::Field => "field",
        })
    }
}

/// Piecewise-constant field `h(t)`: segment `k` holds `value` from its
/// `start` until the next segment's start. The last segment runs until
/// `end`, or forever when `end` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSchedule {
    segments: Vec<(f64, f64)>,
    end: Option<f64>,
}

impl FieldSchedule {
    pub fn constant(value: f64) -> Self {
        FieldSchedule { segments: vec![(0.0, value)], end: None }
    }

    pub fn new(segments: Vec<(f64, f64)>, end: Option<f64>) -> Result<Self> {
        let Some(&(first, _)) = segments.first() else {
            return Err(SimError::arg("field schedule needs at least one segment"));
        };
        if first != 0.0 {
            return Err(SimError::arg("field schedule must start at t = 0"));
        }
        if segments.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(SimError::arg("field schedule entries must be finite"));
        }
        if segments.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(SimError::arg("field schedule segments must be strictly time-ordered"));
        }
        if let Some(e) = end {
            if e <= segments.last().map_or(0.0, |s| s.0) {
                return Err(SimError::arg("field schedule end must follow the last segment start"));
            }
        }
        Ok(FieldSchedule { segments, end })
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn end(&self) -> Option<f64> {
        self.end
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.segments.partition_point(|&(s, _)| s <= t);
        self.segments[idx.saturating_sub(1)].1
    }

    pub fn is_constant(&self) -> bool {
        self.segments.iter().all(|s| s.1 == self.segments[0].1)
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|s| s.1 == 0.0)
    }

    /// Segment start times strictly inside `(0, t)`.
    pub fn breakpoints_before(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().map(|s| s.0).filter(move |&s| s > 0.0 && s < t)
    }

    pub fn covers(&self, t: f64) -> bool {
        self.end.is_none_or(|e| t <= e + 1e-12)
    }
}

/// Real-coefficient Pauli-sum Hamiltonian on a qubit chain.
///
/// When a field schedule is attached, field-group coefficients are
/// multiplied by `h(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinHamiltonian {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
    groups: Vec<TermGroup>,
    schedule: Option<FieldSchedule>,
}

impl SpinHamiltonian {
    /// Groups terms by axis; rejects mixed-axis strings and out-of-range sites.
    pub fn new(num_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        Self::with_schedule(num_qubits, terms, None)
    }

    pub fn with_schedule(num_qubits: usize, terms: Vec<PauliTerm>, schedule: Option<FieldSchedule>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(SimError::arg("Hamiltonian needs at least one qubit"));
        }
        let mut groups = Vec::with_capacity(terms.len());
        for t in &terms {
            t.check_range(num_qubits)?;
            let g = TermGroup::classify(t)
                .ok_or_else(|| SimError::arg(format!("term `{t}` mixes Pauli axes and fits no diagonal group")))?;
            groups.push(g);
        }
        let h = SpinHamiltonian { num_qubits, terms, groups, schedule };
        h.check_group_commutation()?;
        Ok(h)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn schedule(&self) -> Option<&FieldSchedule> {
        self.schedule.as_ref()
    }

    pub fn is_time_dependent(&self) -> bool {
        self.schedule.as_ref().is_some_and(|s| !s.is_constant())
    }

    pub fn group_of(&self, index: usize) -> TermGroup {
        self.groups[index]
    }

    /// Terms of `group` with coefficients evaluated at time `t`.
    pub fn group_terms_at(&self, group: TermGroup, t: f64) -> Vec<PauliTerm> {
        self.terms_at(t).into_iter().zip(&self.groups).filter(|(_, g)| **g == group).map(|(term, _)| term).collect()
    }

    pub fn group_terms(&self, group: TermGroup) -> Vec<PauliTerm> {
        self.group_terms_at(group, 0.0)
    }

    /// All terms with field coefficients scaled by `h(t)`.
    pub fn terms_at(&self, t: f64) -> Vec<PauliTerm> {
        let scale = self.schedule.as_ref().map_or(1.0, |s| s.value_at(t));
        self.terms
            .iter()
            .zip(&self.groups)
            .map(|(term, g)| {
                if *g == TermGroup::Field && self.schedule.is_some() {
                    term.with_coefficient(term.coefficient() * scale)
                } else {
                    term.clone()
                }
            })
            .collect()
    }

    /// Time-independent copy frozen at `t`.
    pub fn snapshot(&self, t: f64) -> SpinHamiltonian {
        SpinHamiltonian {
            num_qubits: self.num_qubits,
            terms: self.terms_at(t),
            groups: self.groups.clone(),
            schedule: None,
        }
    }

    /// Sub-Hamiltonian made of one group's terms.
    pub fn group(&self, group: TermGroup) -> SpinHamiltonian {
        let (terms, groups) =
            self.terms.iter().zip(&self.groups).filter(|(_, g)| **g == group).map(|(t, g)| (t.clone(), *g)).unzip();
        let schedule = if group == TermGroup::Field { self.schedule.clone() } else { None };
        SpinHamiltonian { num_qubits: self.num_qubits, terms, groups, schedule }
    }

    pub fn present_groups(&self) -> Vec<TermGroup> {
        TermGroup::ALL.into_iter().filter(|g| self.groups.contains(g)).collect()
    }

    fn check_group_commutation(&self) -> Result<()> {
        for g in self.present_groups() {
            let members: Vec<&PauliTerm> =
                self.terms.iter().zip(&self.groups).filter(|(_, x)| **x == g).map(|(t, _)| t).collect();
            for (i, a) in members.iter().enumerate() {
                if let Some(b) = members[i + 1..].iter().find(|b| !a.commutes_with(b)) {
                    return Err(SimError::Consistency(format!("terms `{a}` and `{b}` in group {g} do not commute")));
                }
            }
        }
        Ok(())
    }

    /// Dense `2^n × 2^n` matrix at time `t`.
    pub fn dense_matrix_at(&self, t: f64) -> DMatrix<Complex64> {
        let dim = 1usize << self.num_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for term in self.terms_at(t) {
            let (flip, phase, num_y) = term.masks();
            let yphase = Complex64::new(0.0, 1.0).powu(num_y) * term.coefficient();
            for col in 0..dim {
                let sign = if (col & phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(col ^ flip, col)] += yphase * sign;
            }
        }
        m
    }

    pub fn dense_matrix(&self) -> DMatrix<Complex64> {
        self.dense_matrix_at(0.0)
    }
}

fn bonds(n: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut b: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if periodic && n > 2 {
        b.push((n - 1, 0));
    }
    b
}

/// `H = −Jx Σ σˣσˣ − Jy Σ σʸσʸ − Jz Σ σᶻσᶻ − h_z(t) Σ σᶻ` over nearest
/// neighbours. Zero couplings and an all-zero field contribute no terms.
pub fn heisenberg_chain(
    n: usize,
    jx: f64,
    jy: f64,
    jz: f64,
    hz: FieldSchedule,
    periodic: bool,
) -> Result<SpinHamiltonian> {
    if n < 2 {
        return Err(SimError::arg(format!("a chain needs at least 2 sites, got {n}")));
    }
    let mut terms = Vec::new();
    for (coupling, axis) in [(jx, Pauli::X), (jy, Pauli::Y), (jz, Pauli::Z)] {
        if coupling != 0.0 {
            for &(a, b) in &bonds(n, periodic) {
                terms.push(PauliTerm::pair(-coupling, a, b, axis)?);
            }
        }
    }
    let schedule = if hz.is_zero() {
        None
    } else {
        terms.extend((0..n).map(|i| PauliTerm::single(-1.0, i, Pauli::Z)));
        Some(hz)
    };
    SpinHamiltonian::with_schedule(n, terms, schedule)
}

/// Antiferromagnetic open chain `H = J Σ (σˣσˣ + σʸσʸ + g σᶻσᶻ)`; requires
/// `J > 0` and `g > 0`.
pub fn quench_hamiltonian(n: usize, j: f64, g: f64) -> Result<SpinHamiltonian> {
    if !(j > 0.0 && g > 0.0) {
        return Err(SimError::arg(format!("antiferromagnetic regime requires J > 0 and g > 0 (got J = {j}, g = {g})")));
    }
    quench_hamiltonian_unchecked(n, j, g)
}

/// [`quench_hamiltonian`] without the sign check.
pub fn quench_hamiltonian_unchecked(n: usize, j: f64, g: f64) -> Result<SpinHamiltonian> {
    if n < 2 {
        return Err(SimError::arg(format!("a chain needs at least 2 sites, got {n}")));
    }
    let mut terms = Vec::new();
    for (c, axis) in [(j, Pauli::X), (j, Pauli::Y), (j * g, Pauli::Z)] {
        for &(a, b) in &bonds(n, false) {
            terms.push(PauliTerm::pair(c, a, b, axis)?);
        }
    }
    SpinHamiltonian::new(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_xx_only() {
        let h = heisenberg_chain(2, 1.0, 0.0, 0.0, FieldSchedule::constant(0.0), false).unwrap();
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0], PauliTerm::pair(-1.0, 0, 1, Pauli::X).unwrap());
        assert_eq!(h.present_groups(), vec![TermGroup::X]);
    }

    #[test]
    fn tfim_term_set() {
        let h = heisenberg_chain(4, 1.0, 0.0, 0.0, FieldSchedule::constant(0.5), false).unwrap();
        assert_eq!(h.group_terms(TermGroup::X).len(), 3);
        let field = h.group_terms(TermGroup::Field);
        assert_eq!(field.len(), 4);
        assert!(field.iter().all(|t| t.coefficient() == -0.5));
        assert!(h.group_terms(TermGroup::Y).is_empty() && h.group_terms(TermGroup::Z).is_empty());
    }

    #[test]
    fn chain_rejects_single_site() {
        assert!(heisenberg_chain(1, 1.0, 1.0, 1.0, FieldSchedule::constant(0.0), false).is_err());
        assert!(quench_hamiltonian(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn periodic_adds_wrap_bond() {
        let h = heisenberg_chain(4, 0.0, 0.0, 1.0, FieldSchedule::constant(0.0), true).unwrap();
        assert_eq!(h.terms().len(), 4);
        assert!(h.terms().contains(&PauliTerm::pair(-1.0, 3, 0, Pauli::Z).unwrap()));
    }

    #[test]
    fn quench_structure() {
        let h = quench_hamiltonian(3, 1.0, 2.0).unwrap();
        assert_eq!(h.terms().len(), 6);
        let coeffs = |g| h.group_terms(g).iter().map(|t| t.coefficient()).collect::<Vec<_>>();
        assert_eq!(coeffs(TermGroup::X), vec![1.0, 1.0]);
        assert_eq!(coeffs(TermGroup::Y), vec![1.0, 1.0]);
        assert_eq!(coeffs(TermGroup::Z), vec![2.0, 2.0]);
    }

    #[test]
    fn quench_enforces_af_regime() {
        assert!(matches!(quench_hamiltonian(4, 1.0, -1.0), Err(SimError::Argument(_))));
        assert!(matches!(quench_hamiltonian(4, 0.0, 1.0), Err(SimError::Argument(_))));
        assert!(quench_hamiltonian_unchecked(4, 1.0, -1.0).is_ok());
    }

    #[test]
    fn mixed_axis_terms_rejected() {
        let xy = PauliTerm::new(1.0, [(0, Pauli::X), (1, Pauli::Y)]).unwrap();
        assert!(SpinHamiltonian::new(2, vec![xy]).is_err());
        let far = PauliTerm::single(1.0, 5, Pauli::Z);
        assert!(SpinHamiltonian::new(2, vec![far]).is_err());
    }

    #[test]
    fn schedule_lookup() {
        let s = FieldSchedule::new(vec![(0.0, 1.0), (0.5, 2.0), (1.0, 0.0)], Some(2.0)).unwrap();
        assert_eq!(s.value_at(0.0), 1.0);
        assert_eq!(s.value_at(0.49), 1.0);
        assert_eq!(s.value_at(0.5), 2.0);
        assert_eq!(s.value_at(1.7), 0.0);
        assert!(s.covers(2.0) && !s.covers(2.1));
        assert!(FieldSchedule::new(vec![(0.1, 1.0)], None).is_err());
        assert!(FieldSchedule::new(vec![(0.0, 1.0), (0.0, 2.0)], None).is_err());
        assert!(FieldSchedule::new(vec![], None).is_err());
    }

    #[test]
    fn scheduled_field_scales_terms() {
        let s = FieldSchedule::new(vec![(0.0, 1.0), (1.0, 3.0)], None).unwrap();
        let h = heisenberg_chain(2, 0.0, 0.0, 1.0, s, false).unwrap();
        let f = h.group_terms_at(TermGroup::Field, 1.5);
        assert!(f.iter().all(|t| t.coefficient() == -3.0));
        assert!(h.is_time_dependent());
        assert!(!h.snapshot(1.5).is_time_dependent());
    }
}
