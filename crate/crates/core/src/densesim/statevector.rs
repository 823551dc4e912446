//! Pure-state simulation with bit-kernel gate application.

use num_complex::Complex64;

use crate::circuit::{Gate, GateKind};
use crate::error::{Error, Result};

use super::{gate_matrix, MAX_DENSE_QUBITS};

/// Qubit 0 is the most significant bit of the basis index, so basis index
/// `0b10` on two qubits reads as the ket |10>.
pub(crate) fn qubit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

pub(crate) fn parity_sign(index: usize) -> f64 {
    if index.count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { requested: n_qubits, max: MAX_DENSE_QUBITS });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                got: amplitudes.len(),
            });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match gate.kind {
            GateKind::Cnot => self.apply_cnot(gate.qubits[0], gate.qubits[1]),
            GateKind::Cz => self.apply_cz(gate.qubits[0], gate.qubits[1]),
            _ => self.apply_single(&gate_matrix(gate), gate.qubits[0]),
        }
        Ok(())
    }

    fn apply_single(&mut self, u: &[[Complex64; 2]; 2], qubit: usize) {
        let mask = qubit_mask(self.n_qubits, qubit);
        for i0 in 0..self.dim() {
            if i0 & mask == 0 {
                let i1 = i0 | mask;
                let a = self.amplitudes[i0];
                let b = self.amplitudes[i1];
                self.amplitudes[i0] = u[0][0] * a + u[0][1] * b;
                self.amplitudes[i1] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = qubit_mask(self.n_qubits, control);
        let tmask = qubit_mask(self.n_qubits, target);
        for i in 0..self.dim() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let amask = qubit_mask(self.n_qubits, a);
        let bmask = qubit_mask(self.n_qubits, b);
        for i in 0..self.dim() {
            if i & amask != 0 && i & bmask != 0 {
                self.amplitudes[i] = -self.amplitudes[i];
            }
        }
    }

    /// Measurement probabilities in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Exact expectation of the all-Z Pauli string.
    pub fn expectation_zn(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| parity_sign(i) * a.norm_sqr())
            .sum()
    }
}
