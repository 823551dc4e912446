//! Gate-list circuit representation shared by the dense and stabilizer backends.

use crate::error::{Error, Result};

/// Supported gate kinds. Rotations carry an angle, the rest are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    X,
    Y,
    Z,
    H,
    S,
    Cnot,
    Cz,
}

impl GateKind {
    pub fn is_rotation(&self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ)
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateKind::Cnot | GateKind::Cz)
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
        }
    }
}

/// One gate instance: kind, target qubit indices, optional rotation angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: Option<f64>,
}

impl Gate {
    fn single(kind: GateKind, qubit: usize) -> Self {
        Gate { kind, qubits: vec![qubit], angle: None }
    }

    fn rotation(kind: GateKind, qubit: usize, angle: f64) -> Self {
        Gate { kind, qubits: vec![qubit], angle: Some(angle) }
    }

    pub fn rx(qubit: usize, angle: f64) -> Self {
        Self::rotation(GateKind::RX, qubit, angle)
    }

    pub fn ry(qubit: usize, angle: f64) -> Self {
        Self::rotation(GateKind::RY, qubit, angle)
    }

    pub fn rz(qubit: usize, angle: f64) -> Self {
        Self::rotation(GateKind::RZ, qubit, angle)
    }

    pub fn x(qubit: usize) -> Self {
        Self::single(GateKind::X, qubit)
    }

    pub fn y(qubit: usize) -> Self {
        Self::single(GateKind::Y, qubit)
    }

    pub fn z(qubit: usize) -> Self {
        Self::single(GateKind::Z, qubit)
    }

    pub fn h(qubit: usize) -> Self {
        Self::single(GateKind::H, qubit)
    }

    pub fn s(qubit: usize) -> Self {
        Self::single(GateKind::S, qubit)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate { kind: GateKind::Cnot, qubits: vec![control, target], angle: None }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate { kind: GateKind::Cz, qubits: vec![a, b], angle: None }
    }

    /// Check qubit indices are distinct and in range, and the angle is finite.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for &q in &self.qubits {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::DuplicateQubits { gate: self.kind.name() });
        }
        if let Some(a) = self.angle {
            if !a.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "non-finite angle on {} gate",
                    self.kind.name()
                )));
            }
        }
        Ok(())
    }
}

/// Ordered gate list with layer boundaries.
///
/// `layer_marks[k]` is the index one past the last gate of layer `k`; marks are
/// strictly increasing and the last mark covers every gate. Noise channels are
/// inserted at layer boundaries by the dense backend.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub layer_marks: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new(), layer_marks: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    /// Close the current layer at the present gate count.
    pub fn mark_layer(&mut self) {
        self.layer_marks.push(self.gates.len());
    }

    pub fn n_layers(&self) -> usize {
        self.layer_marks.len()
    }

    /// Gate index range of layer `k`.
    pub fn layer_range(&self, k: usize) -> std::ops::Range<usize> {
        let start = if k == 0 { 0 } else { self.layer_marks[k - 1] };
        start..self.layer_marks[k]
    }

    pub fn validate(&self) -> Result<()> {
        for gate in &self.gates {
            gate.validate(self.n_qubits)?;
        }
        let mut prev = 0usize;
        for (i, &mark) in self.layer_marks.iter().enumerate() {
            if i > 0 && mark <= prev {
                return Err(Error::InvalidLayering(format!(
                    "layer mark {mark} is not increasing"
                )));
            }
            prev = mark;
        }
        if !self.gates.is_empty() {
            if self.layer_marks.last() != Some(&self.gates.len()) {
                return Err(Error::InvalidLayering(format!(
                    "{} gates but layer marks end at {:?}",
                    self.gates.len(),
                    self.layer_marks.last()
                )));
            }
        } else if !self.layer_marks.is_empty() && self.layer_marks != [0] {
            return Err(Error::InvalidLayering(
                "empty circuit with non-trivial layer marks".into(),
            ));
        }
        Ok(())
    }
}
