//! On-disk run outputs: artifacts.json, the CSV files, and the SVG plot.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qremlab::training::{Dataset, RunArtifacts};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Version of the artifacts.json layout.
pub const ARTIFACTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactsFile {
    pub schema_version: u32,
    pub package_version: String,
    pub target_label: String,
    /// Full resolved configuration echo.
    pub config: RunConfig,
    pub artifacts: RunArtifacts,
}

impl ArtifactsFile {
    pub fn new(config: RunConfig, artifacts: RunArtifacts) -> Self {
        Self {
            schema_version: ARTIFACTS_SCHEMA_VERSION,
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            target_label: config.target_label(),
            config,
            artifacts,
        }
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join("artifacts.json");
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Numeric(format!("serializing artifacts: {e}")))?;
        std::fs::write(&path, json)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> CliResult<Self> {
        let path = dir.join("artifacts.json");
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Artifacts(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Artifacts(format!("corrupt {}: {e}", path.display())))
    }
}

pub fn write_loss_csv(dir: &Path, losses: &[f64]) -> CliResult<()> {
    let mut out = String::from("epoch,loss\n");
    for (epoch, loss) in losses.iter().enumerate() {
        writeln!(out, "{epoch},{loss}").expect("string write");
    }
    std::fs::write(dir.join("loss.csv"), out)?;
    Ok(())
}

pub fn write_gradients_csv(dir: &Path, gradients: &[f64]) -> CliResult<()> {
    let mut out = String::from("epoch,mean_abs_gradient\n");
    for (epoch, g) in gradients.iter().enumerate() {
        writeln!(out, "{epoch},{g}").expect("string write");
    }
    std::fs::write(dir.join("gradients.csv"), out)?;
    Ok(())
}

/// Per-point predictions: inputs, target, mean and std over the repeated runs.
pub fn write_predictions_csv(dir: &Path, dataset: &Dataset, artifacts: &RunArtifacts) -> CliResult<()> {
    let n_dim = dataset.n_dim();
    let mut out = String::new();
    for i in 0..n_dim {
        write!(out, "x{},", i + 1).expect("string write");
    }
    out.push_str("target,mean,std\n");
    for (i, x) in dataset.inputs.iter().enumerate() {
        for v in x {
            write!(out, "{v},").expect("string write");
        }
        writeln!(
            out,
            "{},{},{}",
            dataset.targets[i], artifacts.prediction_means[i], artifacts.prediction_stds[i]
        )
        .expect("string write");
    }
    std::fs::write(dir.join("predictions.csv"), out)?;
    Ok(())
}

/// Minimal polyline plot of targets vs mean predictions (one standard
/// deviation as vertical whiskers). One-dimensional targets are plotted over
/// x, higher-dimensional ones over the point index.
pub fn write_predictions_svg(dir: &Path, dataset: &Dataset, artifacts: &RunArtifacts) -> CliResult<()> {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const MARGIN: f64 = 45.0;

    let xs: Vec<f64> = if dataset.n_dim() == 1 {
        dataset.inputs.iter().map(|x| x[0]).collect()
    } else {
        (0..dataset.len()).map(|i| i as f64).collect()
    };
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("finite inputs"));

    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for i in 0..dataset.len() {
        y_min = y_min.min(dataset.targets[i]).min(artifacts.prediction_means[i] - artifacts.prediction_stds[i]);
        y_max = y_max.max(dataset.targets[i]).max(artifacts.prediction_means[i] + artifacts.prediction_stds[i]);
    }
    let y_pad = 0.05 * (y_max - y_min).max(1e-9);
    let (y_min, y_max) = (y_min - y_pad, y_max + y_pad);

    let to_px = |x: f64, y: f64| -> (f64, f64) {
        let px = MARGIN + (x - x_min) / (x_max - x_min).max(1e-12) * (W - 2.0 * MARGIN);
        let py = H - MARGIN - (y - y_min) / (y_max - y_min).max(1e-12) * (H - 2.0 * MARGIN);
        (px, py)
    };
    let polyline = |values: &dyn Fn(usize) -> f64| -> String {
        order
            .iter()
            .map(|&i| {
                let (px, py) = to_px(xs[i], values(i));
                format!("{px:.2},{py:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut svg = String::new();
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).expect("string write");
    writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#).expect("string write");
    writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    )
    .expect("string write");
    for &i in &order {
        let (px, py_lo) = to_px(xs[i], artifacts.prediction_means[i] - artifacts.prediction_stds[i]);
        let (_, py_hi) = to_px(xs[i], artifacts.prediction_means[i] + artifacts.prediction_stds[i]);
        writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{py_lo:.2}" x2="{px:.2}" y2="{py_hi:.2}" stroke="#d62728" stroke-width="1" opacity="0.5"/>"##
        )
        .expect("string write");
    }
    writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#222" stroke-width="1.5"/>"##,
        polyline(&|i| dataset.targets[i])
    )
    .expect("string write");
    writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
        polyline(&|i| artifacts.prediction_means[i])
    )
    .expect("string write");
    writeln!(
        svg,
        r#"<text x="{MARGIN}" y="25" font-family="monospace" font-size="13">target (dark) vs prediction mean (red), mse = {:.6}</text>"#,
        artifacts.mse
    )
    .expect("string write");
    writeln!(svg, "</svg>").expect("string write");
    std::fs::write(dir.join("predictions.svg"), svg)?;
    Ok(())
}
