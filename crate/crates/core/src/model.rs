//! Data re-uploading ansatz: per layer and qubit the input component is
//! uploaded through an RY/RZ pair, followed by a CNOT ring entangler. The
//! model output is the all-Z expectation of the circuit on |0...0>.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::densesim::{run_circuit, run_noisy};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;

/// Activation applied to the input inside the RY upload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Log,
    ArccosAffine,
}

impl Activation {
    pub fn apply(&self, x: f64) -> Result<f64> {
        match self {
            Activation::Identity => Ok(x),
            Activation::Log => {
                if x <= 0.0 {
                    Err(Error::ActivationDomain(format!("log requires x > 0, got {x}")))
                } else {
                    Ok(x.ln())
                }
            }
            Activation::ArccosAffine => {
                if !(0.0..=1.0).contains(&x) {
                    Err(Error::ActivationDomain(format!(
                        "arccos_affine requires x in [0, 1], got {x}"
                    )))
                } else {
                    Ok((2.0 * x - 1.0).acos())
                }
            }
        }
    }
}

/// Ansatz shape: qubit count, layer count, input activation. The entangler is
/// always the Fig-style CNOT ring (a single CNOT for two qubits, nothing for one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub activation: Activation,
}

impl ModelSpec {
    pub fn new(n_qubits: usize, n_layers: usize, activation: Activation) -> Result<Self> {
        let spec = Self { n_qubits, n_layers, activation };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_layers == 0 {
            return Err(Error::InvalidConfig(
                "model needs at least one qubit and one layer".into(),
            ));
        }
        Ok(())
    }

    /// Four trainable angles per (layer, qubit) pair.
    pub fn param_count(&self) -> usize {
        4 * self.n_layers * self.n_qubits
    }

    /// Two rotation gates per (layer, qubit) pair.
    pub fn rotation_count(&self) -> usize {
        2 * self.n_layers * self.n_qubits
    }
}

/// Flat trainable parameter vector, ordered [layer][qubit][theta1..theta4].
#[derive(Debug, Clone, PartialEq)]
pub struct UploadingParams {
    flat: Vec<f64>,
    n_layers: usize,
    n_qubits: usize,
}

impl UploadingParams {
    pub fn from_flat(flat: Vec<f64>, spec: &ModelSpec) -> Result<Self> {
        if flat.len() != spec.param_count() {
            return Err(Error::DimensionMismatch {
                expected: spec.param_count(),
                got: flat.len(),
            });
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        Ok(Self { flat, n_layers: spec.n_layers, n_qubits: spec.n_qubits })
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.flat
    }

    /// The (theta1, theta2, theta3, theta4) block for one uploading gate.
    pub fn gate_params(&self, layer: usize, qubit: usize) -> [f64; 4] {
        let base = 4 * (layer * self.n_qubits + qubit);
        [self.flat[base], self.flat[base + 1], self.flat[base + 2], self.flat[base + 3]]
    }
}

/// Emit the CNOT ring of one layer: 0->1, 1->2, ..., (n-1)->0.
/// Two qubits get the single 0->1 gate, one qubit none.
fn push_entangler(circuit: &mut Circuit, n_qubits: usize) {
    match n_qubits {
        0 | 1 => {}
        2 => circuit.push(Gate::cnot(0, 1)),
        n => {
            for q in 0..n - 1 {
                circuit.push(Gate::cnot(q, q + 1));
            }
            circuit.push(Gate::cnot(n - 1, 0));
        }
    }
}

/// Build the ansatz from explicit per-rotation angles, ordered
/// [layer][qubit][(ry, rz)]. This fixes the circuit frame shared by the real
/// model and its Clifford surrogates.
pub fn build_with_angles(spec: &ModelSpec, angles: &[f64]) -> Result<Circuit> {
    spec.validate()?;
    if angles.len() != spec.rotation_count() {
        return Err(Error::DimensionMismatch {
            expected: spec.rotation_count(),
            got: angles.len(),
        });
    }
    let mut circuit = Circuit::new(spec.n_qubits);
    let mut idx = 0;
    for _layer in 0..spec.n_layers {
        for qubit in 0..spec.n_qubits {
            circuit.push(Gate::ry(qubit, angles[idx]));
            circuit.push(Gate::rz(qubit, angles[idx + 1]));
            idx += 2;
        }
        push_entangler(&mut circuit, spec.n_qubits);
        circuit.mark_layer();
    }
    Ok(circuit)
}

/// Rotation angles of the uploading gates for input `x`: RY carries
/// `theta1 * activation(x_j) + theta2`, RZ carries `theta3 * x_j + theta4`
/// (RY is applied first).
pub fn upload_angles(x: &[f64], params: &UploadingParams, spec: &ModelSpec) -> Result<Vec<f64>> {
    if x.len() != spec.n_qubits {
        return Err(Error::DimensionMismatch { expected: spec.n_qubits, got: x.len() });
    }
    let mut angles = Vec::with_capacity(spec.rotation_count());
    for layer in 0..spec.n_layers {
        for (qubit, &xj) in x.iter().enumerate() {
            let [t1, t2, t3, t4] = params.gate_params(layer, qubit);
            angles.push(t1 * spec.activation.apply(xj)? + t2);
            angles.push(t3 * xj + t4);
        }
    }
    Ok(angles)
}

/// Build the ansatz circuit for one input point.
pub fn build_circuit(x: &[f64], params: &UploadingParams, spec: &ModelSpec) -> Result<Circuit> {
    let angles = upload_angles(x, params, spec)?;
    build_with_angles(spec, &angles)
}

/// Evaluation backend for predictions.
#[derive(Debug, Clone, Copy)]
pub enum Backend<'a> {
    Noiseless,
    Noisy(&'a NoiseModel),
}

/// Model prediction: all-Z expectation of the built circuit under the backend,
/// exact when `shots` is None.
pub fn predict<R: Rng>(
    x: &[f64],
    params: &UploadingParams,
    spec: &ModelSpec,
    backend: Backend<'_>,
    shots: Option<u64>,
    rng: &mut R,
) -> Result<f64> {
    let circuit = build_circuit(x, params, spec)?;
    match backend {
        Backend::Noiseless => run_circuit(&circuit, shots, rng),
        Backend::Noisy(noise) => run_noisy(&circuit, noise, shots, rng),
    }
}

/// Native-gate form of a general single-qubit unitary:
/// `RZ(phi) RX(-pi/2) RZ(theta) RX(pi/2) RZ(lambda)` as an applied sequence
/// (rightmost factor first), equal to U(theta, phi, lambda) up to global phase.
pub fn decompose_native(qubit: usize, theta: f64, phi: f64, lambda: f64) -> [Gate; 5] {
    [
        Gate::rz(qubit, lambda),
        Gate::rx(qubit, FRAC_PI_2),
        Gate::rz(qubit, theta),
        Gate::rx(qubit, -FRAC_PI_2),
        Gate::rz(qubit, phi),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{ChannelPlacement, PauliNoiseParams, ReadoutParams};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn spec(n: usize, l: usize) -> ModelSpec {
        ModelSpec::new(n, l, Activation::Identity).unwrap()
    }

    #[test]
    fn full_flip_predicts_minus_one() {
        let s = spec(1, 1);
        let params = UploadingParams::from_flat(vec![PI, 0.0, 0.0, 0.0], &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = predict(&[1.0], &params, &s, Backend::Noiseless, None, &mut rng).unwrap();
        assert!((y + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_params_predict_plus_one() {
        for (n, l) in [(1, 1), (2, 2), (3, 1)] {
            let s = spec(n, l);
            let params = UploadingParams::from_flat(vec![0.0; s.param_count()], &s).unwrap();
            let x = vec![0.5; n];
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let y = predict(&x, &params, &s, Backend::Noiseless, None, &mut rng).unwrap();
            assert!((y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_prediction_is_cosine() {
        // theta = (1, 0, 0, 0): RY(x) on |0> gives <Z> = cos(x).
        let s = spec(1, 1);
        let params = UploadingParams::from_flat(vec![1.0, 0.0, 0.0, 0.0], &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for x0 in [0.0, 0.3, 0.77, 1.0] {
            let y = predict(&[x0], &params, &s, Backend::Noiseless, None, &mut rng).unwrap();
            assert!((y - x0.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_qubit_layer_gate_count() {
        // Per layer: 2 rotations per qubit plus the degenerate two-qubit ring
        // (a single CNOT).
        let s = spec(2, 1);
        let params = UploadingParams::from_flat(vec![0.1; 8], &s).unwrap();
        let c = build_circuit(&[0.2, 0.9], &params, &s).unwrap();
        assert_eq!(c.gates.len(), 5);
        assert_eq!(c.layer_marks.len(), 1);
    }

    #[test]
    fn ring_wraps_for_three_qubits() {
        let s = spec(3, 1);
        let params = UploadingParams::from_flat(vec![0.0; 12], &s).unwrap();
        let c = build_circuit(&[0.1, 0.2, 0.3], &params, &s).unwrap();
        assert_eq!(c.gates.len(), 6 + 3);
        let cnots: Vec<_> = c.gates.iter().filter(|g| g.kind.is_two_qubit()).collect();
        assert_eq!(cnots[0].qubits, vec![0, 1]);
        assert_eq!(cnots[1].qubits, vec![1, 2]);
        assert_eq!(cnots[2].qubits, vec![2, 0]);
    }

    #[test]
    fn maximal_depolarization_predicts_zero() {
        let s = spec(2, 2);
        let params = UploadingParams::from_flat(vec![0.7; 16], &s).unwrap();
        let noise = NoiseModel::new(
            PauliNoiseParams::new(0.25, 0.25, 0.25).unwrap(),
            ReadoutParams::ideal(),
            ChannelPlacement::EveryLayer,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = predict(&[0.4, 0.6], &params, &s, Backend::Noisy(&noise), None, &mut rng).unwrap();
        assert!(y.abs() < 1e-10);
    }

    #[test]
    fn prediction_bounded_by_one() {
        let s = spec(2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        for _ in 0..50 {
            let flat: Vec<f64> = (0..s.param_count()).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
            let params = UploadingParams::from_flat(flat, &s).unwrap();
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let mut prng = ChaCha8Rng::seed_from_u64(0);
            let y = predict(&x, &params, &s, Backend::Noiseless, None, &mut prng).unwrap();
            assert!(y.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn log_activation_rejects_zero_input() {
        let s = ModelSpec::new(1, 1, Activation::Log).unwrap();
        let params = UploadingParams::from_flat(vec![1.0, 0.0, 0.0, 0.0], &s).unwrap();
        assert!(build_circuit(&[0.0], &params, &s).is_err());
        assert!(build_circuit(&[0.5], &params, &s).is_ok());
    }

    #[test]
    fn param_block_indexing_round_trips() {
        let s = spec(3, 2);
        let flat: Vec<f64> = (0..s.param_count()).map(|i| i as f64).collect();
        let params = UploadingParams::from_flat(flat.clone(), &s).unwrap();
        let mut rebuilt = Vec::new();
        for layer in 0..2 {
            for qubit in 0..3 {
                rebuilt.extend_from_slice(&params.gate_params(layer, qubit));
            }
        }
        assert_eq!(rebuilt, flat);
    }

    proptest::proptest! {
        #[test]
        fn flatten_unflatten_bijection(values in proptest::collection::vec(-10.0f64..10.0, 24)) {
            let s = spec(3, 2);
            let params = UploadingParams::from_flat(values.clone(), &s).unwrap();
            let mut rebuilt = Vec::new();
            for layer in 0..2 {
                for qubit in 0..3 {
                    rebuilt.extend_from_slice(&params.gate_params(layer, qubit));
                }
            }
            proptest::prop_assert_eq!(&rebuilt, &values);
            proptest::prop_assert_eq!(params.flat(), values.as_slice());
        }
    }

    // Native decomposition oracle: multiply the five 2x2 matrices and compare
    // with U(theta, phi, lambda) after global-phase alignment.

    fn u3(theta: f64, phi: f64, lambda: f64) -> [[Complex64; 2]; 2] {
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        [
            [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
            [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
        ]
    }

    fn sequence_product(gates: &[Gate]) -> [[Complex64; 2]; 2] {
        use crate::densesim::StateVector;
        let mut cols = [[Complex64::new(0.0, 0.0); 2]; 2];
        for col in 0..2 {
            let mut amps = vec![Complex64::new(0.0, 0.0); 2];
            amps[col] = Complex64::new(1.0, 0.0);
            let mut sv = StateVector::from_amplitudes(1, amps).unwrap();
            for g in gates {
                sv.apply_gate(g).unwrap();
            }
            cols[0][col] = sv.amplitudes[0];
            cols[1][col] = sv.amplitudes[1];
        }
        cols
    }

    fn phase_aligned_distance(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
        // Align on the largest entry of b.
        let mut best = (0, 0);
        for r in 0..2 {
            for c in 0..2 {
                if b[r][c].norm() > b[best.0][best.1].norm() {
                    best = (r, c);
                }
            }
        }
        let phase = b[best.0][best.1] / a[best.0][best.1];
        let phase = phase / Complex64::new(phase.norm(), 0.0);
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((a[r][c] * phase - b[r][c]).norm());
            }
        }
        worst
    }

    #[test]
    fn native_decomposition_matches_u3() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // Identity and X corner cases first.
        for (t, p, l) in [(0.0, 0.0, 0.0), (PI, 0.0, PI)] {
            let gates = decompose_native(0, t, p, l);
            assert!(phase_aligned_distance(&sequence_product(&gates), &u3(t, p, l)) < 1e-12);
        }
        // RY(theta) = U(theta, 0, 0).
        for _ in 0..100 {
            let t = rng.gen_range(-2.0 * PI..2.0 * PI);
            let gates = decompose_native(0, t, 0.0, 0.0);
            let ry = sequence_product(&[Gate::ry(0, t)]);
            assert!(phase_aligned_distance(&sequence_product(&gates), &ry) < 1e-12);
        }
        // Random triples.
        for _ in 0..1000 {
            let t = rng.gen_range(-2.0 * PI..2.0 * PI);
            let p = rng.gen_range(-2.0 * PI..2.0 * PI);
            let l = rng.gen_range(-2.0 * PI..2.0 * PI);
            let gates = decompose_native(0, t, p, l);
            assert!(phase_aligned_distance(&sequence_product(&gates), &u3(t, p, l)) < 1e-12);
        }
    }
}
