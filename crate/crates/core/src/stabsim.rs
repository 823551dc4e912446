//! Tableau-based Clifford simulation.
//!
//! Expectation values of Pauli strings on Clifford circuits applied to |0...0>
//! are computed two independent ways: forward tableau evolution with
//! destabilizer bookkeeping ([`pauli_expectation`]), and Heisenberg
//! back-propagation of the observable ([`backpropagate`]). The two routes are
//! compared against each other and against the dense simulator in tests.
//!
//! Rotation gates with angles that are exact multiples of pi/2 are
//! canonicalized to fixed sequences of {H, S, S-dagger, X, Y, Z} before any
//! tableau or string update; the mapping is unit-tested against dense 2x2
//! conjugation.

use std::f64::consts::FRAC_PI_2;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

/// Pauli letter on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

/// Signed n-qubit Pauli string stored as X/Z bit masks (Y sets both bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliString {
    pub n_qubits: usize,
    pub x_bits: u64,
    pub z_bits: u64,
    pub negative: bool,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self { n_qubits, x_bits: 0, z_bits: 0, negative: false }
    }

    /// The all-Z observable measured by the models.
    pub fn all_z(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            x_bits: 0,
            z_bits: (1u64 << n_qubits) - 1,
            negative: false,
        }
    }

    pub fn from_letters(letters: &[PauliLetter], negative: bool) -> Self {
        let mut s = Self::identity(letters.len());
        s.negative = negative;
        for (q, &l) in letters.iter().enumerate() {
            match l {
                PauliLetter::I => {}
                PauliLetter::X => s.x_bits |= 1 << q,
                PauliLetter::Y => {
                    s.x_bits |= 1 << q;
                    s.z_bits |= 1 << q;
                }
                PauliLetter::Z => s.z_bits |= 1 << q,
            }
        }
        s
    }

    pub fn letter(&self, qubit: usize) -> PauliLetter {
        let x = self.x_bits >> qubit & 1 == 1;
        let z = self.z_bits >> qubit & 1 == 1;
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    pub fn is_identity_letters(&self) -> bool {
        self.x_bits == 0 && self.z_bits == 0
    }

    pub fn anticommutes(&self, other: &PauliString) -> bool {
        let cross = (self.x_bits & other.z_bits).count_ones()
            + (self.z_bits & other.x_bits).count_ones();
        cross % 2 == 1
    }

    /// Expectation on |0...0>: the sign if every letter is I or Z, else 0.
    pub fn expectation_on_zero(&self) -> i8 {
        if self.x_bits != 0 {
            0
        } else if self.negative {
            -1
        } else {
            1
        }
    }
}

/// Primitive Clifford operations the tableau knows how to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Prim {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
}

impl Prim {
    fn inverse(self) -> Self {
        match self {
            Prim::S(q) => Prim::Sdg(q),
            Prim::Sdg(q) => Prim::S(q),
            other => other,
        }
    }
}

/// Multiple of pi/2 in {0, 1, 2, 3} if the angle is Clifford, else None.
pub fn clifford_angle_multiple(angle: f64) -> Option<u8> {
    let ratio = angle / FRAC_PI_2;
    let k = ratio.round();
    if (ratio - k).abs() > 1e-9 {
        return None;
    }
    Some((k as i64).rem_euclid(4) as u8)
}

/// Decompose a gate into tableau primitives; errors on non-Clifford angles.
fn canonicalize(gate: &Gate) -> Result<Vec<Prim>> {
    let q = gate.qubits[0];
    let prims = match gate.kind {
        GateKind::H => vec![Prim::H(q)],
        GateKind::S => vec![Prim::S(q)],
        GateKind::X => vec![Prim::X(q)],
        GateKind::Y => vec![Prim::Y(q)],
        GateKind::Z => vec![Prim::Z(q)],
        GateKind::Cnot => vec![Prim::Cnot(gate.qubits[0], gate.qubits[1])],
        GateKind::Cz => vec![Prim::Cz(gate.qubits[0], gate.qubits[1])],
        GateKind::RZ | GateKind::RY | GateKind::RX => {
            let angle = gate.angle.expect("rotation gate angle");
            let k = clifford_angle_multiple(angle).ok_or_else(|| {
                Error::NonClifford(format!("{}({angle}) is not a pi/2 multiple", gate.kind.name()))
            })?;
            match (gate.kind, k) {
                (_, 0) => vec![],
                (GateKind::RZ, 1) => vec![Prim::S(q)],
                (GateKind::RZ, 2) => vec![Prim::Z(q)],
                (GateKind::RZ, 3) => vec![Prim::Sdg(q)],
                (GateKind::RY, 1) => vec![Prim::Z(q), Prim::H(q)],
                (GateKind::RY, 2) => vec![Prim::Y(q)],
                (GateKind::RY, 3) => vec![Prim::H(q), Prim::Z(q)],
                (GateKind::RX, 1) => vec![Prim::H(q), Prim::S(q), Prim::H(q)],
                (GateKind::RX, 2) => vec![Prim::X(q)],
                (GateKind::RX, 3) => vec![Prim::H(q), Prim::Sdg(q), Prim::H(q)],
                _ => unreachable!(),
            }
        }
    };
    Ok(prims)
}

/// Circuit whose every gate is Clifford (rotations restricted to pi/2 multiples).
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordCircuit {
    circuit: Circuit,
}

impl CliffordCircuit {
    pub fn new(circuit: Circuit) -> Result<Self> {
        circuit.validate()?;
        for gate in &circuit.gates {
            canonicalize(gate)?;
        }
        Ok(Self { circuit })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn into_circuit(self) -> Circuit {
        self.circuit
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }

    /// Mutate one rotation angle, keeping the Clifford restriction.
    pub fn set_rotation_angle(&mut self, gate_index: usize, angle: f64) -> Result<()> {
        if clifford_angle_multiple(angle).is_none() {
            return Err(Error::NonClifford(format!("angle {angle} is not a pi/2 multiple")));
        }
        let gate = &mut self.circuit.gates[gate_index];
        if !gate.kind.is_rotation() {
            return Err(Error::NonClifford(format!(
                "gate {} at index {gate_index} is not a rotation",
                gate.kind.name()
            )));
        }
        gate.angle = Some(angle);
        Ok(())
    }
}

/// One generator row: a Pauli with sign, stored as bit masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Row {
    x: u64,
    z: u64,
    sign: bool,
}

/// Standard 2n-row tableau (destabilizers then stabilizers) for |0...0>.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerTableau {
    pub n_qubits: usize,
    rows: Vec<Row>,
}

impl StabilizerTableau {
    pub fn new(n_qubits: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n_qubits);
        for q in 0..n_qubits {
            rows.push(Row { x: 1 << q, z: 0, sign: false });
        }
        for q in 0..n_qubits {
            rows.push(Row { x: 0, z: 1 << q, sign: false });
        }
        Self { n_qubits, rows }
    }

    fn stabilizer(&self, i: usize) -> PauliString {
        let row = self.rows[self.n_qubits + i];
        PauliString {
            n_qubits: self.n_qubits,
            x_bits: row.x,
            z_bits: row.z,
            negative: row.sign,
        }
    }

    fn destabilizer(&self, i: usize) -> PauliString {
        let row = self.rows[i];
        PauliString {
            n_qubits: self.n_qubits,
            x_bits: row.x,
            z_bits: row.z,
            negative: row.sign,
        }
    }

    /// Conjugate every generator row by the gate.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        for prim in canonicalize(gate)? {
            for row in &mut self.rows {
                apply_prim_to_bits(prim, &mut row.x, &mut row.z, &mut row.sign);
            }
        }
        Ok(())
    }

    /// Stabilizer generators must commute pairwise.
    pub fn stabilizers_commute(&self) -> bool {
        for i in 0..self.n_qubits {
            for j in (i + 1)..self.n_qubits {
                if self.stabilizer(i).anticommutes(&self.stabilizer(j)) {
                    return false;
                }
            }
        }
        true
    }

    /// All 2n rows must stay independent over GF(2).
    pub fn full_rank(&self) -> bool {
        let mut basis: Vec<(u64, u64)> = Vec::new();
        for row in &self.rows {
            let mut x = row.x;
            let mut z = row.z;
            for &(bx, bz) in &basis {
                let pivot = leading_bit(bx, bz);
                if take_bit(x, z, pivot) {
                    x ^= bx;
                    z ^= bz;
                }
            }
            if x == 0 && z == 0 {
                return false;
            }
            basis.push((x, z));
        }
        true
    }
}

/// Position of the leading set bit in the concatenated (x | z) register.
fn leading_bit(x: u64, z: u64) -> u32 {
    if x != 0 {
        64 + (63 - x.leading_zeros())
    } else {
        63 - z.leading_zeros()
    }
}

fn take_bit(x: u64, z: u64, pos: u32) -> bool {
    if pos >= 64 {
        x >> (pos - 64) & 1 == 1
    } else {
        z >> pos & 1 == 1
    }
}

/// Forward conjugation rule P -> U P U^dag applied to one signed Pauli.
fn apply_prim_to_bits(prim: Prim, x: &mut u64, z: &mut u64, sign: &mut bool) {
    match prim {
        Prim::H(q) => {
            let m = 1u64 << q;
            let xb = *x & m;
            let zb = *z & m;
            if xb != 0 && zb != 0 {
                *sign = !*sign;
            }
            *x = (*x & !m) | zb;
            *z = (*z & !m) | xb;
        }
        Prim::S(q) => {
            let m = 1u64 << q;
            if *x & m != 0 && *z & m != 0 {
                *sign = !*sign;
            }
            *z ^= *x & m;
        }
        Prim::Sdg(q) => {
            let m = 1u64 << q;
            if *x & m != 0 && *z & m == 0 {
                *sign = !*sign;
            }
            *z ^= *x & m;
        }
        Prim::X(q) => {
            if *z >> q & 1 == 1 {
                *sign = !*sign;
            }
        }
        Prim::Y(q) => {
            if (*x ^ *z) >> q & 1 == 1 {
                *sign = !*sign;
            }
        }
        Prim::Z(q) => {
            if *x >> q & 1 == 1 {
                *sign = !*sign;
            }
        }
        Prim::Cnot(a, b) => {
            let ma = 1u64 << a;
            let mb = 1u64 << b;
            let xa = *x & ma != 0;
            let za = *z & ma != 0;
            let xb = *x & mb != 0;
            let zb = *z & mb != 0;
            if xa && zb && xb == za {
                *sign = !*sign;
            }
            if xa {
                *x ^= mb;
            }
            if zb {
                *z ^= ma;
            }
        }
        Prim::Cz(a, b) => {
            let ma = 1u64 << a;
            let mb = 1u64 << b;
            let xa = *x & ma != 0;
            let za = *z & ma != 0;
            let xb = *x & mb != 0;
            let zb = *z & mb != 0;
            if xa && xb && (za != zb) {
                *sign = !*sign;
            }
            if xb {
                *z ^= ma;
            }
            if xa {
                *z ^= mb;
            }
        }
    }
}

fn apply_prim(prim: Prim, p: &mut PauliString) {
    apply_prim_to_bits(prim, &mut p.x_bits, &mut p.z_bits, &mut p.negative);
}

/// Power of i picked up when multiplying single-qubit Paulis (x1,z1)*(x2,z2),
/// from the standard tableau row-sum bookkeeping.
fn phase_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    }
}

/// Multiply accumulator by a signed Pauli row, tracking the i-power mod 4.
fn multiply_into(acc: &mut (u64, u64, i32), row: &PauliString, n_qubits: usize) {
    let mut exp = 0;
    for q in 0..n_qubits {
        exp += phase_exponent(
            acc.0 >> q & 1 == 1,
            acc.1 >> q & 1 == 1,
            row.x_bits >> q & 1 == 1,
            row.z_bits >> q & 1 == 1,
        );
    }
    if row.negative {
        exp += 2;
    }
    acc.0 ^= row.x_bits;
    acc.1 ^= row.z_bits;
    acc.2 = (acc.2 + exp).rem_euclid(4);
}

/// Exact expectation of a Pauli observable on `circuit |0...0>`.
///
/// Zero when the evolved observable anticommutes with some stabilizer;
/// otherwise the observable is (up to sign) the product of the stabilizer
/// generators selected by destabilizer anticommutation, and the expectation
/// is the sign match.
pub fn pauli_expectation(circuit: &CliffordCircuit, observable: &PauliString) -> Result<i8> {
    let n = circuit.n_qubits();
    if observable.n_qubits != n {
        return Err(Error::DimensionMismatch { expected: n, got: observable.n_qubits });
    }
    let mut tableau = StabilizerTableau::new(n);
    for gate in &circuit.circuit().gates {
        tableau.apply_gate(gate)?;
    }

    for i in 0..n {
        if observable.anticommutes(&tableau.stabilizer(i)) {
            return Ok(0);
        }
    }

    let mut acc = (0u64, 0u64, 0i32);
    for i in 0..n {
        if observable.anticommutes(&tableau.destabilizer(i)) {
            let row = tableau.stabilizer(i);
            multiply_into(&mut acc, &row, n);
        }
    }
    debug_assert_eq!(acc.0, observable.x_bits);
    debug_assert_eq!(acc.1, observable.z_bits);
    debug_assert_eq!(acc.2 % 2, 0);
    let product_negative = acc.2 == 2;
    Ok(if product_negative == observable.negative { 1 } else { -1 })
}

/// Heisenberg back-propagation: returns `U^dag O U` for the circuit suffix
/// starting at gate index `cut`.
pub fn backpropagate(
    circuit: &CliffordCircuit,
    observable: &PauliString,
    cut: usize,
) -> Result<PauliString> {
    let gates = &circuit.circuit().gates;
    if cut > gates.len() {
        return Err(Error::DimensionMismatch { expected: gates.len(), got: cut });
    }
    if observable.n_qubits != circuit.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits(),
            got: observable.n_qubits,
        });
    }
    let mut p = *observable;
    for gate in gates[cut..].iter().rev() {
        let prims = canonicalize(gate)?;
        for prim in prims.into_iter().rev() {
            apply_prim(prim.inverse(), &mut p);
        }
    }
    Ok(p)
}
