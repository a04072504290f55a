//! Gates, circuits and the line-oriented circuit text format.

use std::f64::consts::FRAC_1_SQRT_2;
use std::f64::consts::FRAC_PI_2;
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::pauli::Pauli;

const UNITARY_TOL: f64 = 1e-10;

/// A gate together with the qubits it acts on.
///
/// Rotation conventions: `RotX(θ) = exp(−iθX/2)` and likewise for Y, Z;
/// the two-qubit rotations are `RotXX(θ) = exp(−iθ/2 · X⊗X)` etc. A term
/// `c·σσ` evolved for time `dt` is therefore `RotAA(2·c·dt)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    PauliX(usize),
    PauliY(usize),
    PauliZ(usize),
    Hadamard(usize),
    RotX(usize, f64),
    RotY(usize, f64),
    RotZ(usize, f64),
    RotXX(usize, usize, f64),
    RotYY(usize, usize, f64),
    RotZZ(usize, usize, f64),
    Cnot {
        control: usize,
        target: usize,
    },
    /// Dense unitary on `targets`; local bit `j` of the matrix index is `targets[j]`.
    Unitary {
        targets: Vec<usize>,
        matrix: DMatrix<Complex64>,
    },
    /// `matrix` applied to `targets` when `control` is |1⟩.
    ControlledUnitary {
        control: usize,
        targets: Vec<usize>,
        matrix: DMatrix<Complex64>,
    },
}

impl Gate {
    pub fn unitary(targets: Vec<usize>, matrix: DMatrix<Complex64>) -> Result<Gate> {
        check_matrix(&targets, &matrix)?;
        Ok(Gate::Unitary { targets, matrix })
    }

    pub fn controlled(control: usize, targets: Vec<usize>, matrix: DMatrix<Complex64>) -> Result<Gate> {
        check_matrix(&targets, &matrix)?;
        Ok(Gate::ControlledUnitary { control, targets, matrix })
    }

    pub fn pauli_rotation(axis: Pauli, a: usize, b: usize, angle: f64) -> Gate {
        match axis {
            Pauli::X => Gate::RotXX(a, b, angle),
            Pauli::Y => Gate::RotYY(a, b, angle),
            Pauli::Z => Gate::RotZZ(a, b, angle),
        }
    }

    pub fn single_rotation(axis: Pauli, q: usize, angle: f64) -> Gate {
        match axis {
            Pauli::X => Gate::RotX(q, angle),
            Pauli::Y => Gate::RotY(q, angle),
            Pauli::Z => Gate::RotZ(q, angle),
        }
    }

    /// Qubits in the order used by [`Gate::local_matrix`].
    pub fn qubits(&self) -> Vec<usize> {
        use Gate::*;
        match self {
            PauliX(q) | PauliY(q) | PauliZ(q) | Hadamard(q) | RotX(q, _) | RotY(q, _) | RotZ(q, _) => vec![*q],
            RotXX(a, b, _) | RotYY(a, b, _) | RotZZ(a, b, _) => vec![*a, *b],
            Cnot { control, target } => vec![*control, *target],
            Unitary { targets, .. } => targets.clone(),
            ControlledUnitary { control, targets, .. } => {
                let mut v = vec![*control];
                v.extend_from_slice(targets);
                v
            }
        }
    }

    pub fn angle(&self) -> Option<f64> {
        use Gate::*;
        match self {
            RotX(_, t) | RotY(_, t) | RotZ(_, t) | RotXX(_, _, t) | RotYY(_, _, t) | RotZZ(_, _, t) => Some(*t),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        use Gate::*;
        match self {
            PauliX(_) => "x",
            PauliY(_) => "y",
            PauliZ(_) => "z",
            Hadamard(_) => "h",
            RotX(..) => "rx",
            RotY(..) => "ry",
            RotZ(..) => "rz",
            RotXX(..) => "rxx",
            RotYY(..) => "ryy",
            RotZZ(..) => "rzz",
            Cnot { .. } => "cx",
            Unitary { .. } => "u",
            ControlledUnitary { .. } => "cu",
        }
    }

    /// Checks qubit indices against a register of `num_qubits`.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= num_qubits {
                return Err(SimError::arg(format!(
                    "gate `{}` targets qubit {q} in a {num_qubits}-qubit register",
                    self.name()
                )));
            }
            if qs[..i].contains(&q) {
                return Err(SimError::arg(format!("gate `{}` repeats qubit {q}", self.name())));
            }
        }
        Ok(())
    }

    /// Matrix on [`Gate::qubits`], little-endian in that local ordering.
    pub fn local_matrix(&self) -> DMatrix<Complex64> {
        use Gate::*;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let from2 = |m: [[Complex64; 2]; 2]| DMatrix::from_fn(2, 2, |r, k| m[r][k]);
        match self {
            PauliX(_) => from2(Pauli::X.matrix()),
            PauliY(_) => from2(Pauli::Y.matrix()),
            PauliZ(_) => from2(Pauli::Z.matrix()),
            Hadamard(_) => {
                from2([[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]])
            }
            RotX(_, t) | RotY(_, t) | RotZ(_, t) => from2(single_rotation_matrix(self, *t)),
            RotXX(_, _, t) | RotYY(_, _, t) | RotZZ(_, _, t) => {
                let axis = match self {
                    RotXX(..) => Pauli::X,
                    RotYY(..) => Pauli::Y,
                    _ => Pauli::Z,
                };
                let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
                let p = axis.matrix();
                DMatrix::from_fn(4, 4, |r, k| {
                    let pp = p[r & 1][k & 1] * p[r >> 1][k >> 1];
                    let id = if r == k { c(co, 0.0) } else { c(0.0, 0.0) };
                    id - c(0.0, si) * pp
                })
            }
            Cnot { .. } => {
                // local bit 0 = control, bit 1 = target
                let mut m = DMatrix::zeros(4, 4);
                m[(0, 0)] = c(1.0, 0.0);
                m[(2, 2)] = c(1.0, 0.0);
                m[(3, 1)] = c(1.0, 0.0);
                m[(1, 3)] = c(1.0, 0.0);
                m
            }
            Unitary { matrix, .. } => matrix.clone(),
            ControlledUnitary { matrix, .. } => {
                let d = matrix.nrows();
                let mut m = DMatrix::zeros(2 * d, 2 * d);
                for r in 0..d {
                    m[(2 * r, 2 * r)] = c(1.0, 0.0);
                    for k in 0..d {
                        m[(2 * r + 1, 2 * k + 1)] = matrix[(r, k)];
                    }
                }
                m
            }
        }
    }

    pub fn inverse(&self) -> Gate {
        use Gate::*;
        match self {
            RotX(q, t) => RotX(*q, -t),
            RotY(q, t) => RotY(*q, -t),
            RotZ(q, t) => RotZ(*q, -t),
            RotXX(a, b, t) => RotXX(*a, *b, -t),
            RotYY(a, b, t) => RotYY(*a, *b, -t),
            RotZZ(a, b, t) => RotZZ(*a, *b, -t),
            Unitary { targets, matrix } => Unitary { targets: targets.clone(), matrix: matrix.adjoint() },
            ControlledUnitary { control, targets, matrix } => {
                ControlledUnitary { control: *control, targets: targets.clone(), matrix: matrix.adjoint() }
            }
            g => g.clone(),
        }
    }
}

fn single_rotation_matrix(g: &Gate, t: f64) -> [[Complex64; 2]; 2] {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    let c = Complex64::new;
    match g {
        Gate::RotX(..) => [[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]],
        Gate::RotY(..) => [[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]],
        _ => [[c(co, -si), c(0.0, 0.0)], [c(0.0, 0.0), c(co, si)]],
    }
}

fn check_matrix(targets: &[usize], m: &DMatrix<Complex64>) -> Result<()> {
    if targets.is_empty() {
        return Err(SimError::arg("dense gate needs at least one target"));
    }
    let dim = 1usize << targets.len();
    if m.nrows() != dim || m.ncols() != dim {
        return Err(SimError::arg(format!(
            "dense gate on {} qubits needs a {dim}x{dim} matrix, got {}x{}",
            targets.len(),
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = (m.adjoint() * m - DMatrix::identity(dim, dim)).camax();
    if defect > UNITARY_TOL {
        return Err(SimError::arg(format!("matrix is not unitary (|U†U − I| = {defect:e})")));
    }
    Ok(())
}

/// An ordered gate list over a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

type BasisChange = fn(usize) -> Gate;

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, gates: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends `other`, which may act on a smaller register.
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.num_qubits > self.num_qubits {
            return Err(SimError::arg(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.num_qubits, self.num_qubits
            )));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(self)
    }

    /// Reversed circuit of inverted gates.
    pub fn inverse(&self) -> Circuit {
        Circuit { num_qubits: self.num_qubits, gates: self.gates.iter().rev().map(Gate::inverse).collect() }
    }

    /// Number of layers under as-soon-as-possible scheduling.
    pub fn depth(&self) -> usize {
        let mut front = vec![0usize; self.num_qubits];
        for g in &self.gates {
            let qs = g.qubits();
            let layer = qs.iter().map(|&q| front[q]).max().unwrap_or(0) + 1;
            for q in qs {
                front[q] = layer;
            }
        }
        front.into_iter().max().unwrap_or(0)
    }

    /// Rewrites native two-qubit rotations into CNOT–RotZ–CNOT ladders with
    /// single-qubit basis changes (H for X, RotX(π/2) for Y).
    pub fn lower_to_cnot(&self) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        for g in &self.gates {
            let (a, b, t, into, back): (usize, usize, f64, Option<BasisChange>, Option<BasisChange>) = match *g {
                Gate::RotZZ(a, b, t) => (a, b, t, None, None),
                Gate::RotXX(a, b, t) => (a, b, t, Some(Gate::Hadamard), Some(Gate::Hadamard)),
                Gate::RotYY(a, b, t) => {
                    (a, b, t, Some(|q| Gate::RotX(q, FRAC_PI_2)), Some(|q| Gate::RotX(q, -FRAC_PI_2)))
                }
                _ => {
                    out.gates.push(g.clone());
                    continue;
                }
            };
            if let Some(f) = into {
                out.gates.push(f(a));
                out.gates.push(f(b));
            }
            out.gates.push(Gate::Cnot { control: a, target: b });
            out.gates.push(Gate::RotZ(b, t));
            out.gates.push(Gate::Cnot { control: a, target: b });
            if let Some(f) = back {
                out.gates.push(f(a));
                out.gates.push(f(b));
            }
        }
        out
    }

    /// Line-oriented text form: a `qubits N` header, then one gate per line
    /// as `name targets... [angle]`. Dense gates list the target count,
    /// the targets, then row-major `re im` pairs.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "qubits {}", self.num_qubits);
        for g in &self.gates {
            let _ = writeln!(s, "{g}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (lineno, header) = lines.next().ok_or_else(|| SimError::arg("empty circuit text"))?;
        let n = header
            .strip_prefix("qubits ")
            .and_then(|r| r.trim().parse::<usize>().ok())
            .ok_or_else(|| SimError::arg(format!("line {lineno}: expected `qubits N` header")))?;
        let mut c = Circuit::new(n);
        for (lineno, line) in lines {
            let g = parse_gate(line).map_err(|e| SimError::arg(format!("line {lineno}: {e}")))?;
            c.push(g).map_err(|e| SimError::arg(format!("line {lineno}: {e}")))?;
        }
        Ok(c)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        let write_matrix = |f: &mut fmt::Formatter<'_>, targets: &[usize], m: &DMatrix<Complex64>| {
            write!(f, " {}", targets.len())?;
            for t in targets {
                write!(f, " {t}")?;
            }
            for r in 0..m.nrows() {
                for k in 0..m.ncols() {
                    write!(f, " {} {}", m[(r, k)].re, m[(r, k)].im)?;
                }
            }
            Ok(())
        };
        match self {
            Gate::Unitary { targets, matrix } => write_matrix(f, targets, matrix),
            Gate::ControlledUnitary { control, targets, matrix } => {
                write!(f, " {control}")?;
                write_matrix(f, targets, matrix)
            }
            g => {
                for q in g.qubits() {
                    write!(f, " {q}")?;
                }
                if let Some(t) = g.angle() {
                    write!(f, " {t}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_gate(line: &str) -> Result<Gate> {
    let mut toks = line.split_whitespace();
    let name = toks.next().ok_or_else(|| SimError::arg("empty gate line"))?;
    let rest: Vec<&str> = toks.collect();
    let mut pos = 0usize;
    let mut qubit = || -> Result<usize> {
        let t = rest.get(pos).ok_or_else(|| SimError::arg(format!("`{name}`: missing qubit index")))?;
        pos += 1;
        t.parse().map_err(|_| SimError::arg(format!("`{name}`: bad qubit index `{t}`")))
    };
    let float = |t: Option<&&str>| -> Result<f64> {
        let t = t.ok_or_else(|| SimError::arg(format!("`{name}`: missing number")))?;
        t.parse().map_err(|_| SimError::arg(format!("`{name}`: bad number `{t}`")))
    };
    let g = match name {
        "x" => Gate::PauliX(qubit()?),
        "y" => Gate::PauliY(qubit()?),
        "z" => Gate::PauliZ(qubit()?),
        "h" => Gate::Hadamard(qubit()?),
        "rx" | "ry" | "rz" => {
            let q = qubit()?;
            let t = float(rest.get(1))?;
            pos = 2;
            match name {
                "rx" => Gate::RotX(q, t),
                "ry" => Gate::RotY(q, t),
                _ => Gate::RotZ(q, t),
            }
        }
        "rxx" | "ryy" | "rzz" => {
            let (a, b) = (qubit()?, qubit()?);
            let t = float(rest.get(2))?;
            pos = 3;
            match name {
                "rxx" => Gate::RotXX(a, b, t),
                "ryy" => Gate::RotYY(a, b, t),
                _ => Gate::RotZZ(a, b, t),
            }
        }
        "cx" => {
            let (control, target) = (qubit()?, qubit()?);
            Gate::Cnot { control, target }
        }
        "u" | "cu" => {
            let control = if name == "cu" { Some(qubit()?) } else { None };
            let k = qubit()?;
            if k == 0 || k > 12 {
                return Err(SimError::arg(format!("`{name}`: unsupported target count {k}")));
            }
            let targets = (0..k).map(|_| qubit()).collect::<Result<Vec<_>>>()?;
            let dim = 1usize << k;
            let start = if control.is_some() { 2 + k } else { 1 + k };
            let mut m = DMatrix::zeros(dim, dim);
            for r in 0..dim {
                for c in 0..dim {
                    let at = start + 2 * (r * dim + c);
                    m[(r, c)] = Complex64::new(float(rest.get(at))?, float(rest.get(at + 1))?);
                }
            }
            pos = start + 2 * dim * dim;
            match control {
                Some(control) => Gate::controlled(control, targets, m)?,
                None => Gate::unitary(targets, m)?,
            }
        }
        other => return Err(SimError::arg(format!("unknown gate `{other}`"))),
    };
    if pos != rest.len() {
        return Err(SimError::arg(format!("`{name}`: trailing tokens")));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip_covers_every_kind() {
        let mut c = Circuit::new(4);
        c.push(Gate::PauliX(0)).unwrap();
        c.push(Gate::Hadamard(3)).unwrap();
        c.push(Gate::RotY(1, 0.25)).unwrap();
        c.push(Gate::RotZZ(0, 2, -1e-3)).unwrap();
        c.push(Gate::Cnot { control: 2, target: 1 }).unwrap();
        c.push(Gate::controlled(3, vec![0], Gate::PauliY(0).local_matrix()).unwrap()).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("qubits 4\nx 0\nh 3\nry 1 0.25\nrzz 0 2 -0.001\ncx 2 1\ncu 3 1 0 "));
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
    }

    #[test]
    fn push_rejects_bad_targets() {
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::PauliX(2)).is_err());
        assert!(c.push(Gate::RotXX(1, 1, 0.3)).is_err());
        assert!(c.push(Gate::Cnot { control: 0, target: 0 }).is_err());
    }

    #[test]
    fn from_text_reports_line() {
        let err = Circuit::from_text("qubits 2\nx 0\nfoo 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(Circuit::from_text("rx 0 1").is_err());
        assert!(Circuit::from_text("qubits 1\nrx 0").is_err());
        assert!(Circuit::from_text("qubits 1\nx 0 0").is_err());
    }

    #[test]
    fn dense_gate_must_be_unitary() {
        let m = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(Gate::unitary(vec![0], m).is_err());
        let m = DMatrix::identity(4, 4);
        assert!(Gate::unitary(vec![0], m).is_err());
    }

    #[test]
    fn depth_counts_layers() {
        let mut c = Circuit::new(3);
        c.push(Gate::PauliX(0)).unwrap().push(Gate::PauliX(2)).unwrap();
        assert_eq!(c.depth(), 1);
        c.push(Gate::RotZZ(0, 1, 0.1)).unwrap().push(Gate::RotZZ(1, 2, 0.1)).unwrap();
        assert_eq!(c.depth(), 3);
    }

    #[test]
    fn local_matrices_are_unitary() {
        let gates = [
            Gate::Hadamard(0),
            Gate::RotX(0, 0.7),
            Gate::RotY(0, -1.1),
            Gate::RotZ(0, 2.3),
            Gate::RotXX(0, 1, 0.4),
            Gate::RotYY(0, 1, 0.9),
            Gate::RotZZ(0, 1, -0.2),
            Gate::Cnot { control: 0, target: 1 },
        ];
        for g in gates {
            let m = g.local_matrix();
            let d = m.nrows();
            assert!((m.adjoint() * &m - DMatrix::identity(d, d)).camax() < 1e-12, "{g}");
        }
    }
}
