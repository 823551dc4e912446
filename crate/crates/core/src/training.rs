//! Full-batch Adam training of the re-uploading model with parameter-shift
//! gradients, in four modes: noiseless, noisy, noisy with a final mitigation
//! pass (fqem), and noisy with the map relearned and applied throughout
//! (rtqem). Every circuit execution owns a pre-assigned RNG substream, so
//! histories are reproducible and independent of relearn activity.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::densesim::{
    expectation_from_probs, noisy_probabilities, run_circuit, run_noisy, sample_histogram,
};
use crate::error::{Error, Result};
use crate::mitigation::{
    biu_unfold, drift_distance, learn_noise_map, make_nonzero, sample_clifford_frame, DriftProbe,
    NoiseMap,
};
use crate::model::{build_circuit, build_with_angles, upload_angles, ModelSpec, UploadingParams};
use crate::noise::{walk_step, NoiseModel, RandomWalkConfig};
use crate::rng::RngFactory;
use crate::stabsim::{pauli_expectation, PauliString};

/// Input points in [0,1]^n with scalar targets rescaled to [0,1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: inputs.len(), got: targets.len() });
        }
        if inputs.is_empty() {
            return Err(Error::InvalidConfig("dataset must not be empty".into()));
        }
        let dim = inputs[0].len();
        for x in &inputs {
            if x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
            }
            for &v in x {
                if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                    return Err(Error::InvalidConfig(format!("input {v} outside [0, 1]")));
                }
            }
        }
        for &t in &targets {
            if !t.is_finite() || !(-1e-9..=1.0 + 1e-9).contains(&t) {
                return Err(Error::InvalidConfig(format!("target {t} outside [0, 1]")));
            }
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn n_dim(&self) -> usize {
        self.inputs[0].len()
    }
}

/// Training mode (which runs carry noise and when the map is applied).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Noiseless,
    Noisy,
    Fqem,
    Rtqem,
}

impl Mode {
    pub fn uses_noise(&self) -> bool {
        !matches!(self, Mode::Noiseless)
    }
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub mode: Mode,
    #[serde(default = "default_epochs")]
    pub n_epochs: usize,
    #[serde(default = "default_shots")]
    pub n_shots: Option<u64>,
    pub n_data: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    pub seed: u64,
    /// Drift threshold for relearning the map; infinity disables the check.
    #[serde(default = "default_epsilon")]
    pub epsilon_ell: f64,
    #[serde(default)]
    pub walk: Option<RandomWalkConfig>,
    /// Clifford training-set size for each map learn.
    #[serde(default = "default_m")]
    pub mitigation_set_size: usize,
    /// Shot-level repetitions behind each final prediction.
    #[serde(default = "default_n_runs")]
    pub n_runs: usize,
    #[serde(default)]
    pub record_params: bool,
    #[serde(default = "default_biu_iterations")]
    pub biu_iterations: usize,
}

fn default_epochs() -> usize {
    50
}
fn default_shots() -> Option<u64> {
    Some(10_000)
}
fn default_eta() -> f64 {
    0.1
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_m() -> usize {
    20
}
fn default_n_runs() -> usize {
    20
}
fn default_biu_iterations() -> usize {
    50
}

impl TrainingConfig {
    pub fn validate(&self, spec: &ModelSpec, dataset: &Dataset, noise: Option<&NoiseModel>) -> Result<()> {
        spec.validate()?;
        if dataset.n_dim() != spec.n_qubits {
            return Err(Error::DimensionMismatch { expected: spec.n_qubits, got: dataset.n_dim() });
        }
        if self.n_data != dataset.len() {
            return Err(Error::InvalidConfig(format!(
                "n_data = {} but dataset has {} points",
                self.n_data,
                dataset.len()
            )));
        }
        if self.n_epochs == 0 {
            return Err(Error::InvalidConfig("n_epochs must be at least 1".into()));
        }
        if !(self.eta > 0.0) {
            return Err(Error::InvalidConfig("eta must be positive".into()));
        }
        if self.epsilon_ell.is_nan() || self.epsilon_ell < 0.0 {
            return Err(Error::InvalidConfig("epsilon_ell must be non-negative".into()));
        }
        if self.n_runs == 0 {
            return Err(Error::InvalidConfig("n_runs must be at least 1".into()));
        }
        match (self.mode.uses_noise(), noise.is_some()) {
            (true, false) => {
                return Err(Error::InvalidConfig(format!(
                    "mode {:?} requires a noise model",
                    self.mode
                )))
            }
            (false, true) => {
                return Err(Error::InvalidConfig("noiseless mode must not carry a noise model".into()))
            }
            _ => {}
        }
        if self.walk.is_some() && !self.mode.uses_noise() {
            return Err(Error::InvalidConfig("walk evolution requires a noisy mode".into()));
        }
        if let Some(walk) = &self.walk {
            walk.validate()?;
        }
        if matches!(self.mode, Mode::Rtqem | Mode::Fqem) && self.mitigation_set_size < 2 {
            return Err(Error::DegenerateTrainingSet(self.mitigation_set_size));
        }
        Ok(())
    }
}

/// Adam optimizer state with bias-corrected moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: usize,
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(dim: usize, eta: f64) -> Self {
        Self {
            first_moment: vec![0.0; dim],
            second_moment: vec![0.0; dim],
            step_count: 0,
            eta,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected Adam update; returns the advanced state and parameters.
pub fn adam_step(mut state: AdamState, params: &[f64], gradient: &[f64]) -> Result<(AdamState, Vec<f64>)> {
    if params.len() != state.first_moment.len() || gradient.len() != params.len() {
        return Err(Error::DimensionMismatch { expected: state.first_moment.len(), got: gradient.len() });
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let mut out = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let g = gradient[i];
        state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * g;
        state.second_moment[i] = state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * g * g;
        let m_hat = state.first_moment[i] / bc1;
        let v_hat = state.second_moment[i] / bc2;
        out.push(params[i] - state.eta * m_hat / (v_hat.sqrt() + state.epsilon));
    }
    Ok((state, out))
}

/// Mean squared error between predictions and targets.
pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() || predictions.is_empty() {
        return Err(Error::DimensionMismatch { expected: targets.len(), got: predictions.len() });
    }
    let n = predictions.len() as f64;
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n)
}

/// Parameter-shift derivative for rotation generators:
/// `(1/2) [f(mu + pi/2) - f(mu - pi/2)]`.
pub fn psr_derivative<F>(mut evaluate: F, mu: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let plus = evaluate(mu + FRAC_PI_2)?;
    let minus = evaluate(mu - FRAC_PI_2)?;
    Ok(0.5 * (plus - minus))
}

/// Output of one full gradient pass.
#[derive(Debug, Clone)]
pub struct GradientPass {
    pub gradient: Vec<f64>,
    pub predictions: Vec<f64>,
    pub loss: f64,
}

/// Full-batch MSE gradient via the parameter shift rule.
///
/// `evaluate(angles, eval_index)` returns the raw expectation of the ansatz
/// built from explicit rotation angles; `eval_index` pre-assigns the RNG
/// substream so the schedule is reproducible. The shift is applied to the
/// rotation angle a parameter feeds (theta1 and theta3 scale the input, so
/// their derivatives carry the chain factors kappa(x_j) and x_j). When a map
/// is given, every expectation (base prediction and both shifts) is mitigated
/// before entering the chain rule. The pass costs `(2p + 1) * n_data`
/// evaluations.
pub fn loss_gradient<E>(
    params: &[f64],
    dataset: &Dataset,
    spec: &ModelSpec,
    map: Option<&NoiseMap>,
    evaluate: &mut E,
) -> Result<GradientPass>
where
    E: FnMut(&[f64], u64) -> Result<f64>,
{
    let n = dataset.len() as f64;
    let mitigate = |v: f64| -> Result<f64> {
        match map {
            Some(m) => m.mitigate(v),
            None => Ok(v),
        }
    };

    let uploading = UploadingParams::from_flat(params.to_vec(), spec)?;
    let mut point_angles = Vec::with_capacity(dataset.len());
    let mut point_kappas = Vec::with_capacity(dataset.len());
    for x in &dataset.inputs {
        point_angles.push(upload_angles(x, &uploading, spec)?);
        let kappas: Vec<f64> = x
            .iter()
            .map(|&xj| spec.activation.apply(xj))
            .collect::<Result<_>>()?;
        point_kappas.push(kappas);
    }

    let mut eval_index = 0u64;
    let mut predictions = Vec::with_capacity(dataset.len());
    for angles in &point_angles {
        let raw = evaluate(angles, eval_index)?;
        eval_index += 1;
        predictions.push(mitigate(raw)?);
    }
    let loss = mse_loss(&predictions, &dataset.targets)?;
    let residuals: Vec<f64> = predictions
        .iter()
        .zip(&dataset.targets)
        .map(|(p, t)| p - t)
        .collect();

    let mut gradient = vec![0.0; params.len()];
    let mut scratch = Vec::new();
    for p in 0..params.len() {
        // Flat layout: [layer][qubit][theta1..theta4]; theta1/theta2 feed the
        // RY angle, theta3/theta4 the RZ angle of the same (layer, qubit).
        let block = p / 4;
        let role = p % 4;
        let qubit = block % spec.n_qubits;
        let slot = 2 * block + usize::from(role >= 2);
        let mut acc = 0.0;
        for i in 0..dataset.len() {
            let chain = match role {
                0 => point_kappas[i][qubit],
                2 => dataset.inputs[i][qubit],
                _ => 1.0,
            };
            scratch.clear();
            scratch.extend_from_slice(&point_angles[i]);
            let base = scratch[slot];
            let dy = psr_derivative(
                |a| {
                    scratch[slot] = a;
                    let raw = evaluate(&scratch, eval_index)?;
                    eval_index += 1;
                    mitigate(raw)
                },
                base,
            )?;
            acc += residuals[i] * chain * dy;
        }
        gradient[p] = 2.0 / n * acc;
    }
    Ok(GradientPass { gradient, predictions, loss })
}

/// Per-point prediction statistics over repeated shot-level runs, and the MSE
/// of the per-point means against the targets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub mse: f64,
}

/// Repeat predictions `n_runs` times per point; `evaluate(point, run)` returns
/// one (already mitigated) prediction.
pub fn evaluate_mse<E>(dataset: &Dataset, n_runs: usize, evaluate: &mut E) -> Result<PredictionStats>
where
    E: FnMut(usize, usize) -> Result<f64>,
{
    if n_runs == 0 {
        return Err(Error::InvalidConfig("n_runs must be at least 1".into()));
    }
    let mut means = Vec::with_capacity(dataset.len());
    let mut stds = Vec::with_capacity(dataset.len());
    for i in 0..dataset.len() {
        let mut values = Vec::with_capacity(n_runs);
        for r in 0..n_runs {
            values.push(evaluate(i, r)?);
        }
        // Shifted accumulation so repeated identical values give exactly zero spread.
        let shift = values[0];
        let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n_runs as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n_runs as f64;
        means.push(mean);
        stds.push(var.sqrt());
    }
    let mse = mse_loss(&means, &dataset.targets)?;
    Ok(PredictionStats { means, stds, mse })
}

/// Exact noiseless MSE loss of a parameter vector (no shots), used to replay
/// training trajectories in a clean simulator.
pub fn noiseless_loss(params: &[f64], spec: &ModelSpec, dataset: &Dataset) -> Result<f64> {
    let uploading = UploadingParams::from_flat(params.to_vec(), spec)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    use rand::SeedableRng;
    let mut preds = Vec::with_capacity(dataset.len());
    for x in &dataset.inputs {
        let circuit = build_circuit(x, &uploading, spec)?;
        preds.push(run_circuit(&circuit, None, &mut rng)?);
    }
    mse_loss(&preds, &dataset.targets)
}

/// Everything produced by one training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub loss_history: Vec<f64>,
    pub mean_abs_gradient_history: Vec<f64>,
    /// (epoch, lambda_eff) pairs, one per map learn (including initialization).
    pub lambda_eff_history: Vec<(usize, f64)>,
    /// Threshold-triggered relearns during the epoch loop (initialization and
    /// the fqem final learn are not counted).
    pub relearn_count: usize,
    pub final_params: Vec<f64>,
    pub mse: f64,
    pub prediction_means: Vec<f64>,
    pub prediction_stds: Vec<f64>,
    pub noise_maps: Vec<NoiseMap>,
    pub params_history: Option<Vec<Vec<f64>>>,
}

/// Execution context: model, live noise, shot budget and stream factory.
struct EvalContext {
    spec: ModelSpec,
    noise: Option<NoiseModel>,
    shots: Option<u64>,
    biu_iterations: usize,
    factory: RngFactory,
}

impl EvalContext {
    /// Raw expectation of a circuit on the stream `(label, a, b)`. An
    /// asymmetric readout response is unfolded here, before any noise map.
    fn expectation(&self, circuit: &Circuit, label: &str, a: u64, b: u64) -> Result<f64> {
        let mut rng = self.factory.indexed_stream(label, a, b);
        match &self.noise {
            None => run_circuit(circuit, self.shots, &mut rng),
            Some(noise) => match &noise.readout.response {
                None => run_noisy(circuit, noise, self.shots, &mut rng),
                Some(response) => {
                    let probs = noisy_probabilities(circuit, noise)?;
                    let measured = match self.shots {
                        None => probs,
                        Some(n) => {
                            let counts = sample_histogram(&probs, n, &mut rng)?;
                            counts.iter().map(|&c| c as f64 / n as f64).collect()
                        }
                    };
                    let unfolded = biu_unfold(&measured, response, self.biu_iterations, None)?;
                    Ok(expectation_from_probs(&unfolded))
                }
            },
        }
    }

    fn expectation_of_angles(&self, angles: &[f64], label: &str, a: u64, b: u64) -> Result<f64> {
        let circuit = build_with_angles(&self.spec, angles)?;
        self.expectation(&circuit, label, a, b)
    }

    fn predict(&self, x: &[f64], params: &[f64], label: &str, a: u64, b: u64) -> Result<f64> {
        let uploading = UploadingParams::from_flat(params.to_vec(), &self.spec)?;
        let circuit = build_circuit(x, &uploading, &self.spec)?;
        self.expectation(&circuit, label, a, b)
    }
}

fn learn_map_with_ctx(
    ctx: &EvalContext,
    spec: &ModelSpec,
    m: usize,
    epoch: usize,
    exec_label: &'static str,
    clifford_rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<NoiseMap> {
    let mut counter = 0u64;
    let mut executor = |c: &crate::stabsim::CliffordCircuit| -> Result<f64> {
        let v = ctx.expectation(c.circuit(), exec_label, epoch as u64, counter)?;
        counter += 1;
        Ok(v)
    };
    let (map, _set) = learn_noise_map(spec, m, &mut executor, epoch, clifford_rng)?;
    Ok(map)
}

/// Run one training according to the configured mode.
///
/// rtqem: per epoch, the probe drift is checked before the gradient pass and
/// the map relearned when it exceeds the threshold; predictions and every PSR
/// expectation go through the current map. fqem trains unmitigated and learns
/// a single map for the final predictions. With a walk configured, the Pauli
/// parameters advance one step at the end of every epoch.
///
/// `initial_map` seeds the rtqem map instead of the unconditional learn at
/// initialization (an identity initial map plus an infinite threshold makes
/// rtqem coincide with the noisy mode exactly).
pub fn train(
    config: &TrainingConfig,
    spec: &ModelSpec,
    dataset: &Dataset,
    noise: Option<&NoiseModel>,
    initial_map: Option<NoiseMap>,
) -> Result<RunArtifacts> {
    config.validate(spec, dataset, noise)?;
    let factory = RngFactory::new(config.seed);

    let mut params: Vec<f64> = {
        let mut rng = factory.stream("params");
        (0..spec.param_count())
            .map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI))
            .collect()
    };
    let mut adam = AdamState::new(params.len(), config.eta);
    let mut ctx = EvalContext {
        spec: *spec,
        noise: noise.cloned(),
        shots: config.n_shots,
        biu_iterations: config.biu_iterations,
        factory,
    };

    let mut loss_history = Vec::with_capacity(config.n_epochs);
    let mut grad_history = Vec::with_capacity(config.n_epochs);
    let mut lambda_eff_history = Vec::new();
    let mut noise_maps = Vec::new();
    let mut params_history = config.record_params.then(Vec::new);
    let mut relearn_count = 0usize;
    let mut current_map: Option<NoiseMap> = None;

    // rtqem bookkeeping: a fixed non-zero probe circuit with known +/-1 value,
    // and the initial map (learned now unless one was injected).
    let probe: Option<DriftProbe> = if config.mode == Mode::Rtqem {
        let mut rng = ctx.factory.stream("probe-circuit");
        let frame = sample_clifford_frame(spec, &mut rng)?;
        let circuit = make_nonzero(&frame)?;
        let target = pauli_expectation(&circuit, &PauliString::all_z(spec.n_qubits))? as f64;
        Some(DriftProbe { circuit, target, threshold: config.epsilon_ell })
    } else {
        None
    };
    if config.mode == Mode::Rtqem {
        let map = match initial_map {
            Some(m) => m,
            None => {
                let mut rng = ctx.factory.stream("clifford-init");
                let map = learn_map_with_ctx(
                    &ctx,
                    spec,
                    config.mitigation_set_size,
                    0,
                    "mitigation-init",
                    &mut rng,
                )?;
                lambda_eff_history.push((0, map.lambda_eff));
                noise_maps.push(map);
                map
            }
        };
        current_map = Some(map);
    }

    let mut walk_rng = ctx.factory.stream("walk");

    for epoch in 0..config.n_epochs {
        if config.mode == Mode::Rtqem && config.epsilon_ell.is_finite() {
            let probe = probe.as_ref().expect("probe exists in rtqem mode");
            let map = current_map.as_ref().expect("map exists in rtqem mode");
            let mut probe_exec = |c: &crate::stabsim::CliffordCircuit| -> Result<f64> {
                ctx.expectation(c.circuit(), "probe", epoch as u64, 0)
            };
            let d = drift_distance(probe, map, &mut probe_exec)?;
            if d > config.epsilon_ell {
                let mut rng = ctx.factory.indexed_stream("clifford", epoch as u64, 0);
                let map = learn_map_with_ctx(
                    &ctx,
                    spec,
                    config.mitigation_set_size,
                    epoch,
                    "mitigation",
                    &mut rng,
                )?;
                lambda_eff_history.push((epoch, map.lambda_eff));
                noise_maps.push(map);
                current_map = Some(map);
                relearn_count += 1;
            }
        }

        let map_for_training = if config.mode == Mode::Rtqem { current_map.as_ref() } else { None };
        let pass = {
            let ctx_ref = &ctx;
            let mut evaluate = |angles: &[f64], idx: u64| {
                ctx_ref.expectation_of_angles(angles, "shots", epoch as u64, idx)
            };
            loss_gradient(&params, dataset, spec, map_for_training, &mut evaluate)?
        };
        if !pass.loss.is_finite() {
            return Err(Error::NanLoss { epoch, loss: pass.loss });
        }
        loss_history.push(pass.loss);
        grad_history.push(
            pass.gradient.iter().map(|g| g.abs()).sum::<f64>() / pass.gradient.len() as f64,
        );

        let (next_adam, next_params) = adam_step(adam, &params, &pass.gradient)?;
        adam = next_adam;
        params = next_params;
        if let Some(history) = params_history.as_mut() {
            history.push(params.clone());
        }

        if let (Some(walk), Some(noise)) = (&config.walk, ctx.noise.as_mut()) {
            noise.pauli = walk_step(&noise.pauli, walk, &mut walk_rng);
        }
    }

    if config.mode == Mode::Fqem {
        let mut rng = ctx.factory.stream("clifford-final");
        let map = learn_map_with_ctx(
            &ctx,
            spec,
            config.mitigation_set_size,
            config.n_epochs,
            "mitigation-final",
            &mut rng,
        )?;
        lambda_eff_history.push((config.n_epochs, map.lambda_eff));
        noise_maps.push(map);
        current_map = Some(map);
    }

    let final_map = match config.mode {
        Mode::Rtqem | Mode::Fqem => current_map,
        _ => None,
    };
    let stats = {
        let ctx_ref = &ctx;
        let params_ref = &params;
        let mut evaluate = |i: usize, r: usize| -> Result<f64> {
            let raw = ctx_ref.predict(
                &dataset.inputs[i],
                params_ref,
                "evaluate",
                i as u64,
                r as u64,
            )?;
            match &final_map {
                Some(m) => m.mitigate(raw),
                None => Ok(raw),
            }
        };
        evaluate_mse(dataset, config.n_runs, &mut evaluate)?
    };

    Ok(RunArtifacts {
        loss_history,
        mean_abs_gradient_history: grad_history,
        lambda_eff_history,
        relearn_count,
        final_params: params,
        mse: stats.mse,
        prediction_means: stats.means,
        prediction_stds: stats.stds,
        noise_maps,
        params_history,
    })
}
