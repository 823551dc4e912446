//! Exact dense simulation of layered circuits: statevector for noiseless runs,
//! density matrix with Pauli channels and readout errors for noisy ones, plus
//! finite-shot sampling of the all-Z observable.

mod density;
mod statevector;

pub use density::DensityMatrix;
pub use statevector::StateVector;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::noise::{ChannelPlacement, NoiseModel};

use statevector::parity_sign;

/// Hard cap on dense simulation size (the density matrix at 10 qubits already
/// holds 2^20 complex entries).
pub const MAX_DENSE_QUBITS: usize = 10;

/// 2x2 matrix of a single-qubit gate.
pub(crate) fn gate_matrix(gate: &Gate) -> [[Complex64; 2]; 2] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match gate.kind {
        GateKind::X => [[z, one], [one, z]],
        GateKind::Y => [[z, -i], [i, z]],
        GateKind::Z => [[one, z], [z, -one]],
        GateKind::H => {
            let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            [[r, r], [r, -r]]
        }
        GateKind::S => [[one, z], [z, i]],
        GateKind::RX => {
            let half = gate.angle.expect("rotation gate angle") / 2.0;
            let c = Complex64::new(half.cos(), 0.0);
            let s = Complex64::new(0.0, -half.sin());
            [[c, s], [s, c]]
        }
        GateKind::RY => {
            let half = gate.angle.expect("rotation gate angle") / 2.0;
            let c = Complex64::new(half.cos(), 0.0);
            let s = Complex64::new(half.sin(), 0.0);
            [[c, -s], [s, c]]
        }
        GateKind::RZ => {
            let half = gate.angle.expect("rotation gate angle") / 2.0;
            [[Complex64::from_polar(1.0, -half), z], [z, Complex64::from_polar(1.0, half)]]
        }
        GateKind::Cnot | GateKind::Cz => unreachable!("two-qubit gates have no 2x2 matrix"),
    }
}

/// Readout transfer factor for the all-Z observable under symmetric per-qubit
/// bit flips: `(1 - 2 p_flip)^n * z_expectation`.
pub fn apply_readout_flip(z_expectation: f64, p_flip: f64, n_qubits: usize) -> f64 {
    (1.0 - 2.0 * p_flip).powi(n_qubits as i32) * z_expectation
}

/// Fold symmetric per-qubit readout flips into a probability vector.
pub(crate) fn fold_symmetric_readout(probs: &mut [f64], p_flip: f64, n_qubits: usize) {
    if p_flip == 0.0 {
        return;
    }
    let keep = 1.0 - p_flip;
    for q in 0..n_qubits {
        let mask = 1usize << (n_qubits - 1 - q);
        for i in 0..probs.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a = probs[i];
                let b = probs[j];
                probs[i] = keep * a + p_flip * b;
                probs[j] = p_flip * a + keep * b;
            }
        }
    }
}

fn check_distribution(probs: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &p in probs {
        if !(p >= -1e-12) {
            return Err(Error::InvalidDistribution(format!("negative probability {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {sum}")));
    }
    Ok(())
}

/// Exact all-Z expectation of a bitstring distribution.
pub fn expectation_from_probs(probs: &[f64]) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(i, p)| parity_sign(i) * p)
        .sum()
}

/// Finite-shot estimate of the all-Z expectation.
///
/// Each sampled bitstring contributes (-1)^parity, so the even-parity count
/// over `n_shots` draws is binomially distributed; drawing it directly gives
/// the same estimator distribution as sampling bitstrings one at a time.
pub fn sample_expectation<R: Rng>(probs: &[f64], n_shots: u64, rng: &mut R) -> Result<f64> {
    if n_shots == 0 {
        return Err(Error::InvalidConfig("n_shots must be at least 1".into()));
    }
    check_distribution(probs)?;
    let p_even: f64 = probs
        .iter()
        .enumerate()
        .filter(|(i, _)| i.count_ones() & 1 == 0)
        .map(|(_, p)| p.max(0.0))
        .sum();
    let k = Binomial::new(n_shots, p_even.min(1.0))
        .expect("valid binomial parameters")
        .sample(rng);
    Ok((2.0 * k as f64 - n_shots as f64) / n_shots as f64)
}

/// Sampled histogram of bitstring counts (used for readout unfolding).
pub fn sample_histogram<R: Rng>(probs: &[f64], n_shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    check_distribution(probs)?;
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let total = *cdf.last().expect("non-empty distribution");
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n_shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        counts[idx] += 1;
    }
    Ok(counts)
}

/// Noiseless execution: evolve the statevector and return the exact or
/// shot-sampled all-Z expectation.
pub fn run_circuit<R: Rng>(circuit: &Circuit, shots: Option<u64>, rng: &mut R) -> Result<f64> {
    circuit.validate()?;
    let mut sv = StateVector::zero_state(circuit.n_qubits)?;
    for gate in &circuit.gates {
        sv.apply_gate(gate)?;
    }
    match shots {
        None => Ok(sv.expectation_zn()),
        Some(n) => sample_expectation(&sv.probabilities(), n, rng),
    }
}

/// Measurement probabilities of a circuit run under the noise model.
///
/// Pauli channels act on every qubit once before the first layer and then
/// after each layer (or only after the last, for `ChannelPlacement::Ends`);
/// an empty circuit still gets both the opening and closing application.
/// Readout errors are folded into the final distribution.
pub fn noisy_probabilities(circuit: &Circuit, noise: &NoiseModel) -> Result<Vec<f64>> {
    circuit.validate()?;
    noise.pauli.validate()?;
    noise.readout.validate()?;
    if let Some(resp) = &noise.readout.response {
        if resp.dim() != 1 << circuit.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << circuit.n_qubits,
                got: resp.dim(),
            });
        }
    }

    let mut dm = DensityMatrix::zero_state(circuit.n_qubits)?;
    let channel_all = |dm: &mut DensityMatrix| -> Result<()> {
        if !noise.pauli.is_zero() {
            for q in 0..circuit.n_qubits {
                dm.apply_pauli_channel(&noise.pauli, q)?;
            }
        }
        Ok(())
    };

    channel_all(&mut dm)?;
    let n_layers = circuit.n_layers();
    for k in 0..n_layers {
        for idx in circuit.layer_range(k) {
            dm.apply_gate(&circuit.gates[idx])?;
        }
        match noise.placement {
            ChannelPlacement::EveryLayer => channel_all(&mut dm)?,
            ChannelPlacement::Ends => {
                if k == n_layers - 1 {
                    channel_all(&mut dm)?;
                }
            }
        }
    }
    if n_layers == 0 {
        channel_all(&mut dm)?;
    }

    let mut probs = dm.probabilities();
    if let Some(resp) = &noise.readout.response {
        probs = resp.fold(&probs)?;
    } else {
        fold_symmetric_readout(&mut probs, noise.readout.p_flip, circuit.n_qubits);
    }
    Ok(probs)
}

/// Noisy execution: density-matrix evolution through the channel schedule,
/// then exact or shot-sampled all-Z expectation. A noiseless model skips the
/// channels entirely and takes the statevector path, so it agrees bitwise
/// with [`run_circuit`].
pub fn run_noisy<R: Rng>(
    circuit: &Circuit,
    noise: &NoiseModel,
    shots: Option<u64>,
    rng: &mut R,
) -> Result<f64> {
    if noise.is_noiseless() {
        return run_circuit(circuit, shots, rng);
    }
    let probs = noisy_probabilities(circuit, noise)?;
    match shots {
        None => Ok(expectation_from_probs(&probs)),
        Some(n) => sample_expectation(&probs, n, rng),
    }
}
