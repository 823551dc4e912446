//! Regression targets: the multidimensional cosine family, a 1-D
//! falling-distribution proxy on a logarithmic grid, and CSV ingestion.

use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::training::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    CsvFile,
    PdfProxy,
    MultidimCos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    Logarithmic,
    Uniform,
}

/// Target generator configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub kind: TargetKind,
    pub n_dim: usize,
    pub n_data: usize,
    pub sampling: Sampling,
    pub beta: Option<Vec<f64>>,
    pub csv_path: Option<String>,
}

impl TargetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_data < 2 {
            return Err(Error::InvalidConfig("n_data must be at least 2".into()));
        }
        if self.n_dim == 0 {
            return Err(Error::InvalidConfig("n_dim must be at least 1".into()));
        }
        if let Some(beta) = &self.beta {
            if beta.len() != self.n_dim {
                return Err(Error::DimensionMismatch { expected: self.n_dim, got: beta.len() });
            }
        }
        Ok(())
    }
}

/// Equidistant coefficients on [0.5, 2.5]; a single dimension sits at 0.5.
pub fn default_beta(n_dim: usize) -> Vec<f64> {
    if n_dim == 1 {
        return vec![0.5];
    }
    (0..n_dim)
        .map(|i| 0.5 + 2.0 * i as f64 / (n_dim - 1) as f64)
        .collect()
}

/// Raw multidimensional target before rescaling:
/// `sum_i [ (cos(beta_i x_i))^i + (-1)^(i-1) beta_i x_i ]` with i starting at 1.
pub fn multidim_cos_raw(x: &[f64], beta: &[f64]) -> f64 {
    x.iter()
        .zip(beta.iter())
        .enumerate()
        .map(|(idx, (&xi, &bi))| {
            let i = idx + 1;
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            (bi * xi).cos().powi(i as i32) + sign * bi * xi
        })
        .sum()
}

fn rescale_to_unit(values: &mut [f64]) -> (f64, f64) {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    if span > 0.0 {
        for v in values.iter_mut() {
            *v = (*v - min) / span;
        }
    } else {
        for v in values.iter_mut() {
            *v = 0.0;
        }
    }
    (min, span)
}

/// Multidimensional cosine dataset: every input component drawn uniformly on
/// [0, 1], targets rescaled to span exactly [0, 1]. Deterministic for a fixed
/// (spec, stream).
pub fn gen_multidim_cos<R: Rng>(spec: &TargetSpec, rng: &mut R) -> Result<Dataset> {
    spec.validate()?;
    let beta = match &spec.beta {
        Some(b) => b.clone(),
        None => default_beta(spec.n_dim),
    };
    let inputs: Vec<Vec<f64>> = (0..spec.n_data)
        .map(|_| (0..spec.n_dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let mut targets: Vec<f64> = inputs.iter().map(|x| multidim_cos_raw(x, &beta)).collect();
    rescale_to_unit(&mut targets);
    Dataset::new(inputs, targets)
}

/// Lower edge of the logarithmic input grid (log sampling cannot reach 0).
pub const PDF_PROXY_X_MIN: f64 = 1e-3;

/// Shape parameters of the falling 1-D proxy `x^-a (1-x)^b`.
pub const PDF_PROXY_SHAPE: (f64, f64) = (0.3, 3.0);

/// 1-D proxy target on a geometric grid over [1e-3, 1]: steep rise toward
/// small x, vanishing at x = 1, rescaled to [0, 1].
pub fn gen_pdf_proxy(spec: &TargetSpec) -> Result<Dataset> {
    spec.validate()?;
    if spec.n_dim != 1 {
        return Err(Error::InvalidConfig("pdf_proxy target is one-dimensional".into()));
    }
    let n = spec.n_data;
    let (a, b) = PDF_PROXY_SHAPE;
    let log_min = PDF_PROXY_X_MIN.ln();
    let inputs: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            vec![(log_min * (1.0 - t)).exp()]
        })
        .collect();
    let mut targets: Vec<f64> = inputs
        .iter()
        .map(|x| x[0].powf(-a) * (1.0 - x[0]).powf(b))
        .collect();
    rescale_to_unit(&mut targets);
    Dataset::new(inputs, targets)
}

/// CSV dataset plus the affine factors needed to undo the target rescaling.
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    pub y_offset: f64,
    pub y_span: f64,
}

/// Load a dataset from a CSV file with header `x1,...,xn,y`; targets are
/// rescaled to [0, 1] and the original scale recorded.
pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<LoadedCsv> {
    let file = std::fs::File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();

    let header = lines
        .next()
        .ok_or_else(|| Error::CsvParse { line: 1, message: "empty file".into() })??;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 2 || columns.last() != Some(&"y") {
        return Err(Error::CsvParse {
            line: 1,
            message: format!("expected header x1,...,xn,y, got '{header}'"),
        });
    }
    let n_dim = columns.len() - 1;
    for (i, col) in columns[..n_dim].iter().enumerate() {
        if *col != format!("x{}", i + 1) {
            return Err(Error::CsvParse {
                line: 1,
                message: format!("expected column x{}, got '{col}'", i + 1),
            });
        }
    }

    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n_dim + 1 {
            return Err(Error::CsvParse {
                line: line_no,
                message: format!("expected {} fields, got {}", n_dim + 1, fields.len()),
            });
        }
        let mut row = Vec::with_capacity(n_dim);
        for f in &fields[..n_dim] {
            row.push(f.parse::<f64>().map_err(|e| Error::CsvParse {
                line: line_no,
                message: format!("bad input value '{f}': {e}"),
            })?);
        }
        let y = fields[n_dim].parse::<f64>().map_err(|e| Error::CsvParse {
            line: line_no,
            message: format!("bad target value '{}': {e}", fields[n_dim]),
        })?;
        inputs.push(row);
        targets.push(y);
    }
    if inputs.is_empty() {
        return Err(Error::CsvParse { line: 2, message: "no data rows".into() });
    }
    let (y_offset, y_span) = rescale_to_unit(&mut targets);
    Ok(LoadedCsv { dataset: Dataset::new(inputs, targets)?, y_offset, y_span })
}
