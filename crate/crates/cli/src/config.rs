//! Run configuration: a flat TOML (or JSON) file, schema-validated with
//! unknown keys rejected, resolved into the domain objects of the core crate.

use std::path::Path;

use serde::{Deserialize, Serialize};

use qremlab::model::{Activation, ModelSpec};
use qremlab::noise::{
    ChannelPlacement, NoiseModel, PauliNoiseParams, RandomWalkConfig, ReadoutParams,
    ResponseMatrix,
};
use qremlab::targets::{Sampling, TargetKind, TargetSpec};
use qremlab::training::{Mode, TrainingConfig};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub mode: Mode,
    pub output_dir: String,
    pub model: ModelSection,
    pub target: TargetSection,
    #[serde(default)]
    pub noise: Option<NoiseSection>,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub walk: Option<WalkSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n_qubits: usize,
    pub n_layers: usize,
    #[serde(default = "default_activation")]
    pub activation: Activation,
}

fn default_activation() -> Activation {
    Activation::Identity
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub kind: TargetKind,
    #[serde(default = "default_one")]
    pub n_dim: usize,
    pub n_data: usize,
    #[serde(default)]
    pub sampling: Option<Sampling>,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub csv_path: Option<String>,
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    #[serde(default)]
    pub p_flip: f64,
    #[serde(default = "default_placement")]
    pub placement: ChannelPlacement,
    /// Optional explicit 2^n x 2^n column-stochastic readout response.
    #[serde(default)]
    pub response: Option<Vec<Vec<f64>>>,
}

fn default_placement() -> ChannelPlacement {
    ChannelPlacement::EveryLayer
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    #[serde(default = "default_epochs")]
    pub n_epochs: usize,
    /// Shots per circuit execution; 0 requests exact expectations.
    #[serde(default = "default_shots")]
    pub n_shots: u64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon_ell: f64,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_n_runs")]
    pub n_runs: usize,
    #[serde(default)]
    pub record_params: bool,
    #[serde(default = "default_biu")]
    pub biu_iterations: usize,
}

fn default_epochs() -> usize {
    50
}
fn default_shots() -> u64 {
    10_000
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
fn default_biu() -> usize {
    50
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            n_epochs: default_epochs(),
            n_shots: default_shots(),
            eta: default_eta(),
            epsilon_ell: default_epsilon(),
            m: default_m(),
            n_runs: default_n_runs(),
            record_params: false,
            biu_iterations: default_biu(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSection {
    pub sigma_delta: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_svg")]
    pub svg: bool,
}

fn default_svg() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { svg: default_svg() }
    }
}

impl RunConfig {
    /// Parse a TOML (default) or JSON (.json) config file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = if path.extension().and_then(|e| e.to_str()) == Some("json") {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        config.resolve()?;
        Ok(config)
    }

    pub fn model_spec(&self) -> CliResult<ModelSpec> {
        ModelSpec::new(self.model.n_qubits, self.model.n_layers, self.model.activation)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn target_spec(&self) -> CliResult<TargetSpec> {
        let sampling = self.target.sampling.unwrap_or(match self.target.kind {
            TargetKind::PdfProxy => Sampling::Logarithmic,
            _ => Sampling::Uniform,
        });
        let spec = TargetSpec {
            kind: self.target.kind,
            n_dim: self.target.n_dim,
            n_data: self.target.n_data,
            sampling,
            beta: self.target.beta.clone(),
            csv_path: self.target.csv_path.clone(),
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn noise_model(&self) -> CliResult<Option<NoiseModel>> {
        match &self.noise {
            None => Ok(None),
            Some(section) => {
                let pauli = PauliNoiseParams::new(section.p_x, section.p_y, section.p_z)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                let response = match &section.response {
                    None => None,
                    Some(rows) => Some(
                        ResponseMatrix::new(rows.clone())
                            .map_err(|e| CliError::Config(e.to_string()))?,
                    ),
                };
                let readout = ReadoutParams { p_flip: section.p_flip, response };
                readout.validate().map_err(|e| CliError::Config(e.to_string()))?;
                NoiseModel::new(pauli, readout, section.placement)
                    .map(Some)
                    .map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }

    pub fn training_config(&self) -> CliResult<TrainingConfig> {
        let walk = self.walk.as_ref().map(|w| RandomWalkConfig {
            sigma_delta: w.sigma_delta,
            n_steps: self.training.n_epochs,
            seed: w.seed,
        });
        Ok(TrainingConfig {
            mode: self.mode,
            n_epochs: self.training.n_epochs,
            n_shots: if self.training.n_shots == 0 { None } else { Some(self.training.n_shots) },
            n_data: self.target.n_data,
            eta: self.training.eta,
            seed: self.seed,
            epsilon_ell: self.training.epsilon_ell,
            walk,
            mitigation_set_size: self.training.m,
            n_runs: self.training.n_runs,
            record_params: self.training.record_params,
            biu_iterations: self.training.biu_iterations,
        })
    }

    /// Short target identifier used in comparison tables.
    pub fn target_label(&self) -> String {
        match self.target.kind {
            TargetKind::PdfProxy => "pdf_proxy".into(),
            TargetKind::MultidimCos => format!("cos_{}d", self.target.n_dim),
            TargetKind::CsvFile => {
                let path = self.target.csv_path.as_deref().unwrap_or("csv");
                Path::new(path)
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("csv")
                    .to_string()
            }
        }
    }

    /// Cross-field checks that serde cannot express.
    fn resolve(&self) -> CliResult<()> {
        if self.mode.uses_noise() && self.noise.is_none() {
            return Err(CliError::Config(format!(
                "mode '{:?}' requires a [noise] section",
                self.mode
            )));
        }
        if !self.mode.uses_noise() && self.noise.is_some() {
            return Err(CliError::Config(
                "noiseless mode must not have a [noise] section".into(),
            ));
        }
        if self.target.kind == TargetKind::CsvFile && self.target.csv_path.is_none() {
            return Err(CliError::Config("csv_file target requires csv_path".into()));
        }
        if self.target.kind != TargetKind::CsvFile && self.target.n_dim != self.model.n_qubits {
            return Err(CliError::Config(format!(
                "target n_dim {} must match model n_qubits {}",
                self.target.n_dim, self.model.n_qubits
            )));
        }
        if self.walk.is_some() && !self.mode.uses_noise() {
            return Err(CliError::Config("walk requires a noisy mode".into()));
        }
        Ok(())
    }
}
