//! Noise model: local Pauli channels, readout errors, the expectation
//! concentration bound, and the random-walk noise evolution.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-qubit Pauli application probabilities, uniform across qubits.
///
/// The channel is `rho -> (1 - px - py - pz) rho + px XrhoX + py YrhoY + pz ZrhoZ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliNoiseParams {
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl PauliNoiseParams {
    pub fn new(p_x: f64, p_y: f64, p_z: f64) -> Result<Self> {
        let p = Self { p_x, p_y, p_z };
        p.validate()?;
        Ok(p)
    }

    pub fn zero() -> Self {
        Self { p_x: 0.0, p_y: 0.0, p_z: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let sum = self.p_x + self.p_y + self.p_z;
        if self.p_x < 0.0 || self.p_y < 0.0 || self.p_z < 0.0 || sum > 1.0 {
            return Err(Error::InvalidProbabilities(format!(
                "pauli probabilities ({}, {}, {}) must be non-negative with sum <= 1",
                self.p_x, self.p_y, self.p_z
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.p_x == 0.0 && self.p_y == 0.0 && self.p_z == 0.0
    }

    /// Bloch transfer factors `(q_x, q_y, q_z)`: the channel contracts the
    /// sigma-axis component by `1 - 2(p_b + p_c)` where `b, c` are the other axes.
    pub fn transfer_factors(&self) -> (f64, f64, f64) {
        (
            1.0 - 2.0 * (self.p_y + self.p_z),
            1.0 - 2.0 * (self.p_x + self.p_z),
            1.0 - 2.0 * (self.p_x + self.p_y),
        )
    }
}

/// Column-stochastic readout response matrix: entry `(i, j)` is the
/// probability of measuring outcome `i` given true outcome `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseMatrix {
    pub entries: Vec<Vec<f64>>,
}

impl ResponseMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self { entries };
        m.validate()?;
        Ok(m)
    }

    /// Single-qubit response from asymmetric flip probabilities
    /// `p10 = P(1|0)` and `p01 = P(0|1)`.
    pub fn single_qubit(p10: f64, p01: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - p10, p01], vec![p10, 1.0 - p01]])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.entries.len();
        for row in &self.entries {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: row.len() });
            }
        }
        for j in 0..d {
            let mut col = 0.0;
            for row in &self.entries {
                if row[j] < -1e-12 {
                    return Err(Error::InvalidProbabilities(
                        "response matrix has a negative entry".into(),
                    ));
                }
                col += row[j];
            }
            if (col - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidProbabilities(format!(
                    "response matrix column {j} sums to {col}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Apply the response to a probability vector: `measured = R * truth`.
    pub fn fold(&self, probs: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if probs.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: probs.len() });
        }
        let mut out = vec![0.0; d];
        for (i, row) in self.entries.iter().enumerate() {
            out[i] = row.iter().zip(probs).map(|(r, p)| r * p).sum();
        }
        Ok(out)
    }
}

/// Readout noise: a symmetric per-qubit flip probability, optionally replaced
/// by an explicit (possibly asymmetric) response matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutParams {
    pub p_flip: f64,
    pub response: Option<ResponseMatrix>,
}

impl ReadoutParams {
    pub fn symmetric(p_flip: f64) -> Result<Self> {
        let r = Self { p_flip, response: None };
        r.validate()?;
        Ok(r)
    }

    pub fn ideal() -> Self {
        Self { p_flip: 0.0, response: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.p_flip) {
            return Err(Error::InvalidProbabilities(format!(
                "readout flip probability {} outside [0, 1/2]",
                self.p_flip
            )));
        }
        if let Some(r) = &self.response {
            r.validate()?;
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.p_flip == 0.0 && self.response.is_none()
    }
}

/// Where Pauli channels are inserted relative to the ansatz layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelPlacement {
    /// Once before the first layer and once after the last.
    Ends,
    /// Once before the first layer, then after every layer.
    EveryLayer,
}

/// Full noise description consumed by the dense backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub pauli: PauliNoiseParams,
    pub readout: ReadoutParams,
    pub placement: ChannelPlacement,
}

impl NoiseModel {
    pub fn new(pauli: PauliNoiseParams, readout: ReadoutParams, placement: ChannelPlacement) -> Result<Self> {
        pauli.validate()?;
        readout.validate()?;
        Ok(Self { pauli, readout, placement })
    }

    pub fn is_noiseless(&self) -> bool {
        self.pauli.is_zero() && self.readout.is_ideal()
    }
}

/// Random-walk evolution of the Pauli parameters: one step per epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomWalkConfig {
    pub sigma_delta: f64,
    pub n_steps: usize,
    pub seed: Option<u64>,
}

impl RandomWalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_delta < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "walk step scale {} must be non-negative",
                self.sigma_delta
            )));
        }
        Ok(())
    }
}

/// Per-component clamp keeping the walked channel physical.
pub const WALK_CLAMP_MAX: f64 = 0.25;

/// Advance the Pauli parameters one random-walk step: each component moves by
/// `r * delta` with `r` uniform on {-1, +1} and `delta ~ Normal(0, sigma_delta)`,
/// then is clamped to `[0, 0.25]`. Readout parameters are not walked.
pub fn walk_step<R: Rng>(p: &PauliNoiseParams, cfg: &RandomWalkConfig, rng: &mut R) -> PauliNoiseParams {
    if cfg.sigma_delta == 0.0 {
        return *p;
    }
    let normal = Normal::new(0.0, cfg.sigma_delta).expect("validated sigma");
    let mut step = |value: f64| -> f64 {
        let r = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let delta: f64 = normal.sample(rng);
        (value + r * delta).clamp(0.0, WALK_CLAMP_MAX)
    };
    PauliNoiseParams {
        p_x: step(p.p_x),
        p_y: step(p.p_y),
        p_z: step(p.p_z),
    }
}

/// Concentration bound on the noisy expectation of the all-Z observable:
/// `2 * q_M^n * q^(2l + 2) * (1 - 1/2^n)` with `q_M = 1 - 2 p_flip` and `q`
/// the largest Bloch transfer factor (the weakest contraction, so the bound
/// stays an upper bound under anisotropic noise).
pub fn nibp_bound(n_qubits: usize, n_layers: usize, pauli: &PauliNoiseParams, readout: &ReadoutParams) -> f64 {
    let (qx, qy, qz) = pauli.transfer_factors();
    let q = qx.max(qy).max(qz);
    let q_m = 1.0 - 2.0 * readout.p_flip;
    let dim_term = 1.0 - 1.0 / (1u64 << n_qubits) as f64;
    2.0 * q_m.powi(n_qubits as i32) * q.powi(2 * n_layers as i32 + 2) * dim_term
}

/// Readout assignment fidelity of a single-qubit response matrix:
/// `1 - [P(1|0) + P(0|1)] / 2`.
pub fn assignment_fidelity(response: &ResponseMatrix) -> Result<f64> {
    response.validate()?;
    if response.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: response.dim() });
    }
    let p10 = response.entries[1][0];
    let p01 = response.entries[0][1];
    Ok(1.0 - 0.5 * (p10 + p01))
}
