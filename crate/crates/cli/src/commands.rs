//! The three CLI verbs: run, compare, sweep-threshold.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qremlab::rng::RngFactory;
use qremlab::targets::{gen_multidim_cos, gen_pdf_proxy, load_csv, TargetKind};
use qremlab::training::{noiseless_loss, train, Dataset, Mode};

use crate::artifacts::{
    write_gradients_csv, write_loss_csv, write_predictions_csv, write_predictions_svg,
    ArtifactsFile,
};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Environment variable prefixing all output directories.
pub const OUTPUT_ROOT_ENV: &str = "QREMLAB_OUT";

fn output_root(override_root: Option<&Path>) -> PathBuf {
    if let Some(root) = override_root {
        return root.to_path_buf();
    }
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) => PathBuf::from(root),
        None => PathBuf::from("."),
    }
}

/// Build the dataset configured by the target section; generation draws only
/// from the run's "dataset" stream.
pub fn build_dataset(config: &RunConfig) -> CliResult<Dataset> {
    let spec = config.target_spec()?;
    let factory = RngFactory::new(config.seed);
    let mut rng = factory.stream("dataset");
    let dataset = match spec.kind {
        TargetKind::MultidimCos => gen_multidim_cos(&spec, &mut rng)?,
        TargetKind::PdfProxy => gen_pdf_proxy(&spec)?,
        TargetKind::CsvFile => {
            let path = spec
                .csv_path
                .as_deref()
                .ok_or_else(|| CliError::Config("csv_file target requires csv_path".into()))?;
            load_csv(path)?.dataset
        }
    };
    if dataset.len() != config.target.n_data && spec.kind != TargetKind::CsvFile {
        return Err(CliError::Numeric(format!(
            "generated {} points, expected {}",
            dataset.len(),
            config.target.n_data
        )));
    }
    Ok(dataset)
}

/// Execute one configured run and persist its artifacts. Returns the output
/// directory.
pub fn run(config_path: &Path, override_root: Option<&Path>) -> CliResult<PathBuf> {
    let config = RunConfig::load(config_path)?;
    run_configured(config, override_root)
}

pub fn run_configured(mut config: RunConfig, override_root: Option<&Path>) -> CliResult<PathBuf> {
    let model_spec = config.model_spec()?;
    let mut dataset = build_dataset(&config)?;
    if config.target.kind == TargetKind::CsvFile {
        // CSV row count wins over the configured n_data.
        config.target.n_data = dataset.len();
    }
    if dataset.n_dim() != model_spec.n_qubits {
        return Err(CliError::Config(format!(
            "dataset dimension {} does not match model qubits {}",
            dataset.n_dim(),
            model_spec.n_qubits
        )));
    }
    // The log activation cannot upload x = 0; nudge exact zeros to the grid floor.
    if config.model.activation == qremlab::model::Activation::Log {
        for x in &mut dataset.inputs {
            for v in x.iter_mut() {
                if *v <= 0.0 {
                    *v = qremlab::targets::PDF_PROXY_X_MIN;
                }
            }
        }
    }

    let training_config = config.training_config()?;
    let noise = config.noise_model()?;
    let training_config_err = |e: qremlab::Error| match e {
        qremlab::Error::InvalidConfig(msg) => CliError::Config(msg),
        other => CliError::Numeric(other.to_string()),
    };
    training_config
        .validate(&model_spec, &dataset, noise.as_ref())
        .map_err(training_config_err)?;

    let artifacts = train(&training_config, &model_spec, &dataset, noise.as_ref(), None)
        .map_err(|e| CliError::Numeric(e.to_string()))?;

    let dir = output_root(override_root).join(&config.output_dir);
    std::fs::create_dir_all(&dir)?;
    write_loss_csv(&dir, &artifacts.loss_history)?;
    write_gradients_csv(&dir, &artifacts.mean_abs_gradient_history)?;
    write_predictions_csv(&dir, &dataset, &artifacts)?;
    if config.output.svg {
        write_predictions_svg(&dir, &dataset, &artifacts)?;
    }
    ArtifactsFile::new(config, artifacts).write(&dir)?;
    Ok(dir)
}

/// MSE summary across runs: one row per target, one column per mode.
pub fn compare(dirs: &[PathBuf]) -> CliResult<String> {
    if dirs.is_empty() {
        return Err(CliError::Artifacts("compare needs at least one artifact directory".into()));
    }
    let modes = [Mode::Noiseless, Mode::Noisy, Mode::Fqem, Mode::Rtqem];
    let mode_name = |m: Mode| match m {
        Mode::Noiseless => "noiseless",
        Mode::Noisy => "noisy",
        Mode::Fqem => "fqem",
        Mode::Rtqem => "rtqem",
    };

    let mut table: BTreeMap<String, BTreeMap<&'static str, f64>> = BTreeMap::new();
    for dir in dirs {
        let file = ArtifactsFile::read(dir)?;
        table
            .entry(file.target_label.clone())
            .or_default()
            .insert(mode_name(file.config.mode), file.artifacts.mse);
    }

    let mut out = String::new();
    write!(out, "{:<16}", "target").expect("string write");
    for m in modes {
        write!(out, "{:>12}", mode_name(m)).expect("string write");
    }
    out.push('\n');
    for (target, row) in &table {
        write!(out, "{target:<16}").expect("string write");
        for m in modes {
            match row.get(mode_name(m)) {
                Some(mse) => write!(out, "{mse:>12.6}").expect("string write"),
                None => write!(out, "{:>12}", "-").expect("string write"),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub epsilon_ell: f64,
    pub relearn_count: usize,
    pub final_noiseless_loss: f64,
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub entries: Vec<SweepEntry>,
}

/// Run the rtqem configuration once per threshold with shared seeds, replaying
/// each epoch's parameters in a noiseless simulator to get the clean loss
/// trajectory alongside the noisy one.
pub fn sweep_threshold(
    config_path: &Path,
    thresholds: &[f64],
    override_root: Option<&Path>,
) -> CliResult<SweepSummary> {
    let base = RunConfig::load(config_path)?;
    if base.mode != Mode::Rtqem {
        return Err(CliError::Config("sweep-threshold requires mode = \"rtqem\"".into()));
    }
    if base.walk.is_none() {
        return Err(CliError::Config("sweep-threshold requires a [walk] section".into()));
    }
    if thresholds.is_empty() {
        return Err(CliError::Config("sweep-threshold needs at least one threshold".into()));
    }

    let model_spec = base.model_spec()?;
    let dataset = build_dataset(&base)?;
    let mut entries = Vec::new();
    for &eps in thresholds {
        let mut config = base.clone();
        config.training.epsilon_ell = eps;
        config.training.record_params = true;
        let eps_label = if eps.is_infinite() { "inf".to_string() } else { format!("{eps}") };
        config.output_dir = format!("{}/eps-{eps_label}", base.output_dir);
        let dir = run_configured(config.clone(), override_root)?;

        let file = ArtifactsFile::read(&dir)?;
        let params_history = file
            .artifacts
            .params_history
            .as_ref()
            .ok_or_else(|| CliError::Artifacts("sweep run did not record parameters".into()))?;
        let mut replay = String::from("epoch,noiseless_loss\n");
        let mut final_loss = f64::NAN;
        for (epoch, params) in params_history.iter().enumerate() {
            let loss = noiseless_loss(params, &model_spec, &dataset)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            writeln!(replay, "{epoch},{loss}").expect("string write");
            final_loss = loss;
        }
        std::fs::write(dir.join("noiseless_replay.csv"), replay)?;

        entries.push(SweepEntry {
            epsilon_ell: eps,
            relearn_count: file.artifacts.relearn_count,
            final_noiseless_loss: final_loss,
            output_dir: dir.display().to_string(),
        });
    }

    let summary = SweepSummary { entries };
    let summary_dir = output_root(override_root).join(&base.output_dir);
    std::fs::create_dir_all(&summary_dir)?;
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Numeric(format!("serializing sweep summary: {e}")))?;
    std::fs::write(summary_dir.join("sweep_summary.json"), json)?;
    Ok(summary)
}
