//! Density-matrix simulation: unitary conjugation plus Pauli channels.

use num_complex::Complex64;

use crate::circuit::{Gate, GateKind};
use crate::error::{Error, Result};
use crate::noise::PauliNoiseParams;

use super::statevector::{parity_sign, qubit_mask, StateVector};
use super::{gate_matrix, MAX_DENSE_QUBITS};

/// Row-major 2^n x 2^n density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n_qubits: usize,
    pub entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { requested: n_qubits, max: MAX_DENSE_QUBITS });
        }
        let d = 1 << n_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        entries[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, entries })
    }

    pub fn from_statevector(sv: &StateVector) -> Self {
        let d = sv.dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                entries[r * d + c] = sv.amplitudes[r] * sv.amplitudes[c].conj();
            }
        }
        Self { n_qubits: sv.n_qubits, entries }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let mut dm = Self::zero_state(n_qubits)?;
        let d = dm.dim();
        dm.entries[0] = Complex64::new(0.0, 0.0);
        for i in 0..d {
            dm.entries[i * d + i] = Complex64::new(1.0 / d as f64, 0.0);
        }
        Ok(dm)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dim();
        (0..d).map(|i| self.entries[i * d + i]).sum()
    }

    /// Largest absolute deviation from Hermiticity, for invariant checks.
    pub fn hermiticity_violation(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                let diff = (self.entries[r * d + c] - self.entries[c * d + r].conj()).norm();
                worst = worst.max(diff);
            }
        }
        worst
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match gate.kind {
            GateKind::Cnot => {
                let c = qubit_mask(self.n_qubits, gate.qubits[0]);
                let t = qubit_mask(self.n_qubits, gate.qubits[1]);
                self.apply_permutation(|i| if i & c != 0 { i ^ t } else { i });
            }
            GateKind::Cz => {
                let a = qubit_mask(self.n_qubits, gate.qubits[0]);
                let b = qubit_mask(self.n_qubits, gate.qubits[1]);
                self.apply_diagonal_signs(|i| i & a != 0 && i & b != 0);
            }
            _ => self.apply_single(&gate_matrix(gate), gate.qubits[0]),
        }
        Ok(())
    }

    /// rho -> U rho U^dag for a single-qubit unitary: kernel over row pairs,
    /// then the conjugate kernel over column pairs.
    fn apply_single(&mut self, u: &[[Complex64; 2]; 2], qubit: usize) {
        let d = self.dim();
        let mask = qubit_mask(self.n_qubits, qubit);
        for r0 in 0..d {
            if r0 & mask == 0 {
                let r1 = r0 | mask;
                for c in 0..d {
                    let a = self.entries[r0 * d + c];
                    let b = self.entries[r1 * d + c];
                    self.entries[r0 * d + c] = u[0][0] * a + u[0][1] * b;
                    self.entries[r1 * d + c] = u[1][0] * a + u[1][1] * b;
                }
            }
        }
        for c0 in 0..d {
            if c0 & mask == 0 {
                let c1 = c0 | mask;
                for r in 0..d {
                    let a = self.entries[r * d + c0];
                    let b = self.entries[r * d + c1];
                    self.entries[r * d + c0] = a * u[0][0].conj() + b * u[0][1].conj();
                    self.entries[r * d + c1] = a * u[1][0].conj() + b * u[1][1].conj();
                }
            }
        }
    }

    /// Conjugation by a self-inverse basis permutation.
    fn apply_permutation<F: Fn(usize) -> usize>(&mut self, perm: F) {
        let d = self.dim();
        for r in 0..d {
            let p = perm(r);
            if p > r {
                for c in 0..d {
                    self.entries.swap(r * d + c, p * d + c);
                }
            }
        }
        for c in 0..d {
            let p = perm(c);
            if p > c {
                for r in 0..d {
                    self.entries.swap(r * d + c, r * d + p);
                }
            }
        }
    }

    /// Conjugation by a diagonal +/-1 unitary; `flips` marks the -1 entries.
    fn apply_diagonal_signs<F: Fn(usize) -> bool>(&mut self, flips: F) {
        let d = self.dim();
        for r in 0..d {
            for c in 0..d {
                if flips(r) != flips(c) {
                    self.entries[r * d + c] = -self.entries[r * d + c];
                }
            }
        }
    }

    /// Single-qubit Pauli channel
    /// `rho -> (1 - px - py - pz) rho + px XrhoX + py YrhoY + pz ZrhoZ`.
    ///
    /// The three conjugations reduce to one elementwise pass: X and Y both move
    /// `rho[r, c]` to `rho[r^m, c^m]` (Y with a sign when the target bits of r
    /// and c differ), Z keeps the element with the same sign rule.
    pub fn apply_pauli_channel(&mut self, p: &PauliNoiseParams, qubit: usize) -> Result<()> {
        p.validate()?;
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits: self.n_qubits });
        }
        if p.is_zero() {
            return Ok(());
        }
        let d = self.dim();
        let mask = qubit_mask(self.n_qubits, qubit);
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            let rb = r & mask != 0;
            for c in 0..d {
                let cb = c & mask != 0;
                let kept = self.entries[r * d + c];
                let moved = self.entries[(r ^ mask) * d + (c ^ mask)];
                out[r * d + c] = if rb == cb {
                    kept * (1.0 - p.p_x - p.p_y) + moved * (p.p_x + p.p_y)
                } else {
                    kept * (1.0 - p.p_x - p.p_y - 2.0 * p.p_z) + moved * (p.p_x - p.p_y)
                };
            }
        }
        self.entries = out;
        Ok(())
    }

    /// Diagonal measurement probabilities (real parts; tiny negative values
    /// from float drift are clamped).
    pub fn probabilities(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.entries[i * d + i].re.max(0.0)).collect()
    }

    pub fn expectation_zn(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .map(|i| parity_sign(i) * self.entries[i * d + i].re)
            .sum()
    }
}
