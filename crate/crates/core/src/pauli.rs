//! Pauli strings with real coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `coefficient · ⊗_q σ_q^{α_q}`, identity on every qubit not in `ops`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TermRepr", into = "TermRepr")]
pub struct PauliTerm {
    coefficient: f64,
    ops: BTreeMap<usize, Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(SimError::arg("Pauli term coefficient must be finite"));
        }
        let mut map = BTreeMap::new();
        for (q, p) in ops {
            if map.insert(q, p).is_some() {
                return Err(SimError::arg(format!("qubit {q} appears twice in a Pauli term")));
            }
        }
        if map.is_empty() && coefficient != 0.0 {
            return Err(SimError::arg("a Pauli term with nonzero coefficient needs at least one factor"));
        }
        Ok(PauliTerm { coefficient, ops: map })
    }

    pub fn single(coefficient: f64, qubit: usize, pauli: Pauli) -> Self {
        PauliTerm { coefficient, ops: BTreeMap::from([(qubit, pauli)]) }
    }

    /// `coefficient · σ_a^α σ_b^α`.
    pub fn pair(coefficient: f64, a: usize, b: usize, pauli: Pauli) -> Result<Self> {
        if a == b {
            return Err(SimError::arg(format!("two-site term needs distinct sites, got {a} twice")));
        }
        Self::new(coefficient, [(a, pauli), (b, pauli)])
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn with_coefficient(&self, coefficient: f64) -> Self {
        PauliTerm { coefficient, ops: self.ops.clone() }
    }

    pub fn ops(&self) -> &BTreeMap<usize, Pauli> {
        &self.ops
    }

    pub fn sites(&self) -> Vec<usize> {
        self.ops.keys().copied().collect()
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.ops.keys().next_back().copied()
    }

    /// If every factor is the same Pauli, that Pauli.
    pub fn uniform_axis(&self) -> Option<Pauli> {
        let mut it = self.ops.values();
        let first = *it.next()?;
        it.all(|&p| p == first).then_some(first)
    }

    /// Bit masks `(flip, phase, num_y)`: `P|b⟩ = i^{num_y} (−1)^{popcount(b & phase)} |b ^ flip⟩`.
    pub fn masks(&self) -> (usize, usize, u32) {
        let mut flip = 0usize;
        let mut phase = 0usize;
        let mut num_y = 0u32;
        for (&q, &p) in &self.ops {
            let bit = 1usize << q;
            match p {
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    num_y += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase, num_y)
    }

    /// Pauli strings either commute or anticommute; they commute iff the
    /// number of shared sites carrying different Paulis is even.
    pub fn commutes_with(&self, other: &PauliTerm) -> bool {
        let clashes = self.ops.iter().filter(|(q, p)| other.ops.get(q).is_some_and(|o| o != *p)).count();
        clashes % 2 == 0
    }

    /// Dense `2^w × 2^w` matrix of the string restricted to its support
    /// (coefficient included). Local bit `j` is the `j`-th smallest site.
    pub fn support_matrix(&self) -> DMatrix<Complex64> {
        let w = self.ops.len();
        let dim = 1usize << w;
        let mut m = DMatrix::zeros(dim, dim);
        let paulis: Vec<Pauli> = self.ops.values().copied().collect();
        for col in 0..dim {
            let mut row = 0usize;
            let mut amp = Complex64::new(self.coefficient, 0.0);
            for (j, p) in paulis.iter().enumerate() {
                let bit = (col >> j) & 1;
                let mat = p.matrix();
                let out = if mat[0][bit] != Complex64::new(0.0, 0.0) { 0 } else { 1 };
                amp *= mat[out][bit];
                row |= out << j;
            }
            m[(row, col)] = amp;
        }
        m
    }

    pub(crate) fn check_range(&self, num_qubits: usize) -> Result<()> {
        match self.max_qubit() {
            Some(q) if q >= num_qubits => {
                Err(SimError::arg(format!("Pauli term acts on qubit {q} but the register has {num_qubits} qubits")))
            }
            _ => Ok(()),
        }
    }
}

/// Factors only, e.g. `X0 X1`; identity prints as `I`.
pub struct OpsDisplay<'a>(&'a PauliTerm);

impl fmt::Display for OpsDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.ops.is_empty() {
            return f.write_str("I");
        }
        for (i, (q, p)) in self.0.ops.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", p.letter(), q)?;
        }
        Ok(())
    }
}

impl PauliTerm {
    pub fn ops_display(&self) -> OpsDisplay<'_> {
        OpsDisplay(self)
    }

    /// Parse factor notation such as `"X0 X1"` or `"Z3"`.
    pub fn parse_ops(coefficient: f64, s: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let pauli = match chars.next().map(|c| c.to_ascii_uppercase()) {
                Some('X') => Pauli::X,
                Some('Y') => Pauli::Y,
                Some('Z') => Pauli::Z,
                _ => return Err(SimError::arg(format!("bad Pauli factor `{tok}`"))),
            };
            let site: usize =
                chars.as_str().parse().map_err(|_| SimError::arg(format!("bad site index in Pauli factor `{tok}`")))?;
            ops.push((site, pauli));
        }
        Self::new(coefficient, ops)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.coefficient, self.ops_display())
    }
}

impl FromStr for PauliTerm {
    type Err = SimError;

    /// `"<coefficient> <factors>"`, e.g. `"-1 Z0 Z1"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (coef, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let coefficient: f64 =
            coef.parse().map_err(|_| SimError::arg(format!("bad coefficient `{coef}` in Pauli term")))?;
        Self::parse_ops(coefficient, rest)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRepr {
    coefficient: f64,
    paulis: String,
}

impl TryFrom<TermRepr> for PauliTerm {
    type Error = SimError;

    fn try_from(r: TermRepr) -> Result<Self> {
        PauliTerm::parse_ops(r.coefficient, &r.paulis)
    }
}

impl From<PauliTerm> for TermRepr {
    fn from(t: PauliTerm) -> Self {
        TermRepr { coefficient: t.coefficient, paulis: t.ops_display().to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let t: PauliTerm = "-1.5 X0 Y3".parse().unwrap();
        assert_eq!(t.coefficient(), -1.5);
        assert_eq!(t.ops()[&3], Pauli::Y);
        assert_eq!(t.to_string(), "-1.5 X0 Y3");
        assert_eq!(t.to_string().parse::<PauliTerm>().unwrap(), t);
    }

    #[test]
    fn rejects_malformed() {
        assert!("1 Q0".parse::<PauliTerm>().is_err());
        assert!("1 X".parse::<PauliTerm>().is_err());
        assert!("1 X0 Z0".parse::<PauliTerm>().is_err());
        assert!("1".parse::<PauliTerm>().is_err());
        assert!(PauliTerm::new(0.0, []).is_ok());
    }

    #[test]
    fn commutation_rule() {
        let xx = PauliTerm::pair(1.0, 0, 1, Pauli::X).unwrap();
        let yy = PauliTerm::pair(1.0, 0, 1, Pauli::Y).unwrap();
        let yy12 = PauliTerm::pair(1.0, 1, 2, Pauli::Y).unwrap();
        assert!(xx.commutes_with(&yy));
        assert!(!xx.commutes_with(&yy12));
    }

    #[test]
    fn support_matrix_of_y() {
        let m = PauliTerm::single(2.0, 5, Pauli::Y).support_matrix();
        assert_eq!(m[(1, 0)], Complex64::new(0.0, 2.0));
        assert_eq!(m[(0, 1)], Complex64::new(0.0, -2.0));
    }
}
