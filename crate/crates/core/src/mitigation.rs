//! Learned linear noise map from Clifford surrogate circuits.
//!
//! The circuit frame of the model is resampled with Clifford rotation angles,
//! rewritten so the all-Z expectation is exactly +/-1, and executed noisily.
//! Each surrogate yields a depolarizing estimate `lambda_C = 1 - noisy/ideal`;
//! their mean and spread define an effective inversion applied to every noisy
//! expectation. A single surrogate kept aside serves as a drift probe: when
//! the mitigated probe value wanders from its known +/-1 target, the map is
//! relearned.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::GateKind;
use crate::error::{Error, Result};
use crate::model::{build_with_angles, ModelSpec};
use crate::noise::ResponseMatrix;
use crate::stabsim::{backpropagate, pauli_expectation, CliffordCircuit, PauliLetter, PauliString};

/// Learned linear map: `mitigated = (1 - lambda_0) / ((1 - lambda_0)^2 + sigma^2) * noisy`,
/// algebraically `noisy / (1 - lambda_eff)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseMap {
    pub lambda_0: f64,
    pub sigma: f64,
    pub lambda_eff: f64,
    pub learned_at_epoch: usize,
}

impl NoiseMap {
    pub fn from_estimates(lambda_0: f64, sigma: f64, learned_at_epoch: usize) -> Result<Self> {
        if (1.0 - lambda_0).abs() < 1e-12 {
            return Err(Error::NoiseTooStrong { lambda_eff: 1.0 });
        }
        let lambda_eff = lambda_0 - sigma * sigma / (1.0 - lambda_0);
        Ok(Self { lambda_0, sigma, lambda_eff, learned_at_epoch })
    }

    /// The do-nothing map (lambda_eff = 0).
    pub fn identity() -> Self {
        Self { lambda_0: 0.0, sigma: 0.0, lambda_eff: 0.0, learned_at_epoch: 0 }
    }

    pub fn is_identity(&self) -> bool {
        self.lambda_0 == 0.0 && self.sigma == 0.0
    }

    /// Invert the learned depolarizing action on one noisy expectation.
    pub fn mitigate(&self, noisy_value: f64) -> Result<f64> {
        if (1.0 - self.lambda_eff).abs() < 1e-9 {
            return Err(Error::NoiseTooStrong { lambda_eff: self.lambda_eff });
        }
        let one_minus = 1.0 - self.lambda_0;
        Ok(one_minus / (one_minus * one_minus + self.sigma * self.sigma) * noisy_value)
    }
}

/// Surrogate circuits with their exact and measured expectations.
#[derive(Debug, Clone)]
pub struct CliffordTrainingSet {
    pub circuits: Vec<CliffordCircuit>,
    pub ideal_values: Vec<f64>,
    pub noisy_values: Vec<f64>,
}

/// Probe circuit used to monitor map staleness: one non-zero surrogate whose
/// noiseless expectation `target` is +/-1 by construction.
#[derive(Debug, Clone)]
pub struct DriftProbe {
    pub circuit: CliffordCircuit,
    pub target: f64,
    pub threshold: f64,
}

const CLIFFORD_ANGLES: [f64; 4] = [0.0, FRAC_PI_2, std::f64::consts::PI, 3.0 * FRAC_PI_2];

/// Sample a Clifford surrogate of the ansatz frame: same gate layout and
/// depth, every rotation angle drawn uniformly from {0, pi/2, pi, 3pi/2}.
pub fn sample_clifford_frame<R: Rng>(spec: &ModelSpec, rng: &mut R) -> Result<CliffordCircuit> {
    let angles: Vec<f64> = (0..spec.rotation_count())
        .map(|_| CLIFFORD_ANGLES[rng.gen_range(0..4)])
        .collect();
    CliffordCircuit::new(build_with_angles(spec, &angles)?)
}

/// Angle pair (RY, RZ) that conjugates the given letter to +Z when placed as
/// the first-applied uploading pair on that qubit.
fn correcting_angles(letter: PauliLetter) -> (f64, f64) {
    match letter {
        PauliLetter::X => (FRAC_PI_2, 0.0),
        PauliLetter::Y => (FRAC_PI_2, FRAC_PI_2),
        PauliLetter::Z | PauliLetter::I => (0.0, 0.0),
    }
}

/// Rewrite a frame circuit so its all-Z expectation is exactly +/-1.
///
/// The observable is back-propagated through everything after the opening
/// rotation sub-layer (the last gates reached by back-propagation). Each
/// surviving letter is then folded to Z or I by rewriting that qubit's opening
/// RY/RZ angles within the Clifford set, which pins the expectation on |0...0>
/// to a sign. Gate count and depth are untouched; circuits that are already
/// non-zero come back unchanged.
pub fn make_nonzero(circuit: &CliffordCircuit) -> Result<CliffordCircuit> {
    let n = circuit.n_qubits();
    let cut = 2 * n;
    let gates = &circuit.circuit().gates;
    if gates.len() < cut {
        return Err(Error::InvalidLayering(format!(
            "frame circuit too short: {} gates, expected at least {cut}",
            gates.len()
        )));
    }
    for q in 0..n {
        if gates[2 * q].kind != GateKind::RY
            || gates[2 * q].qubits[0] != q
            || gates[2 * q + 1].kind != GateKind::RZ
            || gates[2 * q + 1].qubits[0] != q
        {
            return Err(Error::InvalidLayering(
                "circuit does not open with the per-qubit RY/RZ sub-layer".into(),
            ));
        }
    }

    let observable = PauliString::all_z(n);
    let suffix_obs = backpropagate(circuit, &observable, cut)?;

    let mut rewritten = circuit.clone();
    for q in 0..n {
        let letter = suffix_obs.letter(q);
        if letter == PauliLetter::I {
            continue;
        }
        // Keep the sampled angles when they already map the letter into {Z, I}.
        let kept = backpropagate(&one_qubit_pair(&rewritten, q)?, &single_letter(n, q, letter), 0)?;
        if matches!(kept.letter(q), PauliLetter::Z | PauliLetter::I) {
            continue;
        }
        let (a, b) = correcting_angles(letter);
        rewritten.set_rotation_angle(2 * q, a)?;
        rewritten.set_rotation_angle(2 * q + 1, b)?;
    }

    let value = pauli_expectation(&rewritten, &observable)?;
    debug_assert_eq!(value.abs(), 1, "rewrite must pin the expectation to +/-1");
    if value == 0 {
        return Err(Error::InvalidLayering("non-zero rewrite failed".into()));
    }
    Ok(rewritten)
}

/// The opening RY/RZ pair of one qubit as a standalone circuit.
fn one_qubit_pair(circuit: &CliffordCircuit, qubit: usize) -> Result<CliffordCircuit> {
    let mut c = crate::circuit::Circuit::new(circuit.n_qubits());
    c.push(circuit.circuit().gates[2 * qubit].clone());
    c.push(circuit.circuit().gates[2 * qubit + 1].clone());
    c.mark_layer();
    CliffordCircuit::new(c)
}

fn single_letter(n: usize, qubit: usize, letter: PauliLetter) -> PauliString {
    let mut letters = vec![PauliLetter::I; n];
    letters[qubit] = letter;
    PauliString::from_letters(&letters, false)
}

/// Learn the noise map from `m` non-zero surrogates.
///
/// `executor` returns the noisy expectation of a circuit (readout unfolding
/// already applied when an asymmetric response is configured). Estimates are
/// aggregated with equal weights; `sigma` is the population standard deviation.
pub fn learn_noise_map<R, E>(
    spec: &ModelSpec,
    m: usize,
    executor: &mut E,
    epoch: usize,
    rng: &mut R,
) -> Result<(NoiseMap, CliffordTrainingSet)>
where
    R: Rng,
    E: FnMut(&CliffordCircuit) -> Result<f64>,
{
    if m < 2 {
        return Err(Error::DegenerateTrainingSet(m));
    }
    let observable = PauliString::all_z(spec.n_qubits);
    let mut circuits = Vec::with_capacity(m);
    let mut ideal_values = Vec::with_capacity(m);
    let mut noisy_values = Vec::with_capacity(m);
    let mut lambdas = Vec::with_capacity(m);
    for _ in 0..m {
        let frame = sample_clifford_frame(spec, rng)?;
        let circuit = make_nonzero(&frame)?;
        let ideal = pauli_expectation(&circuit, &observable)? as f64;
        let noisy = executor(&circuit)?;
        lambdas.push(1.0 - noisy / ideal);
        circuits.push(circuit);
        ideal_values.push(ideal);
        noisy_values.push(noisy);
    }
    let lambda_0: f64 = lambdas.iter().sum::<f64>() / m as f64;
    let variance: f64 = lambdas.iter().map(|l| (l - lambda_0).powi(2)).sum::<f64>() / m as f64;
    let map = NoiseMap::from_estimates(lambda_0, variance.sqrt(), epoch)?;
    Ok((map, CliffordTrainingSet { circuits, ideal_values, noisy_values }))
}

/// Drift metric: distance between the probe's known noiseless value and its
/// mitigated estimate. The caller compares against the probe threshold.
pub fn drift_distance<E>(probe: &DriftProbe, map: &NoiseMap, executor: &mut E) -> Result<f64>
where
    E: FnMut(&CliffordCircuit) -> Result<f64>,
{
    let noisy = executor(&probe.circuit)?;
    Ok((probe.target - map.mitigate(noisy)?).abs())
}

/// Bayesian iterative unfolding of a measured histogram through a
/// column-stochastic response matrix. Starts from the uniform prior unless one
/// is given; returns the normalized unfolded histogram.
pub fn biu_unfold(
    measured: &[f64],
    response: &ResponseMatrix,
    iterations: usize,
    prior: Option<&[f64]>,
) -> Result<Vec<f64>> {
    response.validate()?;
    let d = response.dim();
    if measured.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: measured.len() });
    }
    let total: f64 = measured.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidDistribution(format!(
            "measured histogram sums to {total}"
        )));
    }
    let mut truth: Vec<f64> = match prior {
        Some(p) => {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            p.to_vec()
        }
        None => vec![1.0 / d as f64; d],
    };
    for _ in 0..iterations {
        let folded = response.fold(&truth)?;
        let mut next = vec![0.0; d];
        for j in 0..d {
            let mut acc = 0.0;
            for i in 0..d {
                if folded[i] > 1e-300 {
                    acc += response.entries[i][j] * measured[i] / folded[i];
                }
            }
            next[j] = truth[j] * acc;
        }
        let norm: f64 = next.iter().sum();
        if norm > 0.0 {
            for v in &mut next {
                *v /= norm;
            }
        }
        truth = next;
    }
    Ok(truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::expectation_from_probs;
    use crate::model::Activation;
    use crate::stabsim::clifford_angle_multiple;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, l: usize) -> ModelSpec {
        ModelSpec::new(n, l, Activation::Identity).unwrap()
    }

    #[test]
    fn map_algebra_is_consistent() {
        let map = NoiseMap::from_estimates(0.3, 0.07, 5).unwrap();
        for v in [-0.9, -0.2, 0.0, 0.4, 1.0] {
            let mitigated = map.mitigate(v).unwrap();
            assert!((mitigated * (1.0 - map.lambda_eff) - v).abs() < 1e-12);
        }
        // Linearity.
        let (a, b, x, y) = (0.7, -1.3, 0.2, 0.5);
        let lhs = map.mitigate(a * x + b * y).unwrap();
        let rhs = a * map.mitigate(x).unwrap() + b * map.mitigate(y).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn exact_depolarizing_inversion() {
        let map = NoiseMap::from_estimates(0.2, 0.0, 0).unwrap();
        assert!((map.lambda_eff - 0.2).abs() < 1e-15);
        assert!((map.mitigate(0.8).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(map.mitigate(0.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_map_is_exact_passthrough() {
        let map = NoiseMap::identity();
        for v in [-0.37, 0.0, 0.9] {
            assert_eq!(map.mitigate(v).unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn saturated_map_errors() {
        let map = NoiseMap::from_estimates(1.0 - 1e-13, 0.0, 0);
        assert!(map.is_err());
    }

    #[test]
    fn frame_sampling_respects_structure_and_distribution() {
        let s = spec(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut angle_counts = [0usize; 4];
        let mut draws = 0usize;
        for _ in 0..1000 {
            let frame = sample_clifford_frame(&s, &mut rng).unwrap();
            let gates = &frame.circuit().gates;
            assert_eq!(gates.len(), 2 * 2 * 2 + 2);
            for g in gates.iter().filter(|g| g.kind.is_rotation()) {
                let k = clifford_angle_multiple(g.angle.unwrap()).unwrap();
                angle_counts[k as usize] += 1;
                draws += 1;
            }
        }
        for &count in &angle_counts {
            let freq = count as f64 / draws as f64;
            assert!((freq - 0.25).abs() < 0.05, "angle frequency {freq}");
        }
    }

    #[test]
    fn make_nonzero_pins_expectation_everywhere() {
        let observable_for = |n: usize| PauliString::all_z(n);
        for n in 1..=5usize {
            let s = spec(n, 2);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..100 {
                let frame = sample_clifford_frame(&s, &mut rng).unwrap();
                let fixed = make_nonzero(&frame).unwrap();
                let value = pauli_expectation(&fixed, &observable_for(n)).unwrap();
                assert_eq!(value.abs(), 1);
                assert_eq!(fixed.circuit().gates.len(), frame.circuit().gates.len());
                assert_eq!(fixed.circuit().layer_marks, frame.circuit().layer_marks);
            }
        }
    }

    #[test]
    fn make_nonzero_is_idempotent_on_nonzero_circuits() {
        let s = spec(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut seen = 0;
        for _ in 0..200 {
            let frame = sample_clifford_frame(&s, &mut rng).unwrap();
            let obs = PauliString::all_z(3);
            if pauli_expectation(&frame, &obs).unwrap().abs() == 1 {
                seen += 1;
                let fixed = make_nonzero(&frame).unwrap();
                assert_eq!(fixed.circuit(), frame.circuit());
            }
        }
        assert!(seen > 0, "sampler never produced an already non-zero frame");
    }

    #[test]
    fn learn_recovers_injected_depolarizing_noise() {
        let s = spec(1, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let observable = PauliString::all_z(1);
        let lambda = 0.2;
        let mut executor = |c: &CliffordCircuit| -> Result<f64> {
            let ideal = pauli_expectation(c, &observable)? as f64;
            Ok((1.0 - lambda) * ideal)
        };
        let (map, set) = learn_noise_map(&s, 20, &mut executor, 0, &mut rng).unwrap();
        assert!((map.lambda_0 - 0.2).abs() < 1e-12);
        assert!(map.sigma.abs() < 1e-12);
        assert!((map.lambda_eff - 0.2).abs() < 1e-12);
        assert!(set.ideal_values.iter().all(|v| v.abs() == 1.0));
        // End-to-end: learned map inverts the injected channel exactly.
        assert!((map.mitigate(0.8 * (1.0 - lambda)).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn noiseless_executor_learns_identity() {
        let s = spec(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let observable = PauliString::all_z(2);
        let mut executor = |c: &CliffordCircuit| -> Result<f64> {
            Ok(pauli_expectation(c, &observable)? as f64)
        };
        let (map, _) = learn_noise_map(&s, 10, &mut executor, 0, &mut rng).unwrap();
        assert!(map.lambda_eff.abs() < 1e-12);
        assert!((map.mitigate(0.35).unwrap() - 0.35).abs() < 1e-12);
    }

    #[test]
    fn degenerate_training_set_rejected() {
        let s = spec(1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut executor = |_: &CliffordCircuit| Ok(1.0);
        assert!(learn_noise_map(&s, 1, &mut executor, 0, &mut rng).is_err());
    }

    #[test]
    fn drift_is_zero_for_exact_inverse() {
        let s = spec(1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let frame = sample_clifford_frame(&s, &mut rng).unwrap();
        let circuit = make_nonzero(&frame).unwrap();
        let target = pauli_expectation(&circuit, &PauliString::all_z(1)).unwrap() as f64;
        let probe = DriftProbe { circuit, target, threshold: 0.1 };
        let lambda = 0.15;
        let map = NoiseMap::from_estimates(lambda, 0.0, 0).unwrap();
        let mut executor = |c: &CliffordCircuit| -> Result<f64> {
            Ok((1.0 - lambda) * pauli_expectation(c, &PauliString::all_z(1)).unwrap() as f64)
        };
        let d = drift_distance(&probe, &map, &mut executor).unwrap();
        assert!(d < 1e-12);
        // A stale map leaves a visible gap.
        let stale = NoiseMap::from_estimates(0.05, 0.0, 0).unwrap();
        let d = drift_distance(&probe, &stale, &mut executor).unwrap();
        assert!(d > 0.05);
    }

    #[test]
    fn biu_identity_response_returns_input() {
        let r = ResponseMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let measured = vec![0.3, 0.7];
        let out = biu_unfold(&measured, &r, 10, None).unwrap();
        for (a, b) in out.iter().zip(measured.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn biu_recovers_forward_folded_truth() {
        let r = ResponseMatrix::single_qubit(0.08, 0.03).unwrap();
        let truth = vec![0.85, 0.15];
        let measured = r.fold(&truth).unwrap();
        let out = biu_unfold(&measured, &r, 50, None).unwrap();
        let tv: f64 = out.iter().zip(truth.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv < 1e-3, "total variation {tv}");
    }

    #[test]
    fn biu_matches_closed_form_bitflip_inversion() {
        let p = 0.02;
        let r = ResponseMatrix::single_qubit(p, p).unwrap();
        let truth = vec![0.9, 0.1];
        let measured = r.fold(&truth).unwrap();
        let unfolded = biu_unfold(&measured, &r, 200, None).unwrap();
        let expected = expectation_from_probs(&measured) / (1.0 - 2.0 * p);
        assert!((expectation_from_probs(&unfolded) - expected).abs() < 1e-6);
    }
}
