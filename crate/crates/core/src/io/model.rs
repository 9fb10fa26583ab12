use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::gpr::{GpHyperparameters, Posterior, TrainedModel, TrainingSource};
use crate::kernel::KernelHyperparameters;
use crate::molgraph::RadiiTable;
use crate::selection::Record;
use crate::smiles::graph_from_smiles;

use super::json::{to_json_string, write_atomic};
use super::IoError;

pub const FORMAT_VERSION: u64 = 1;

/// On-disk form of a [`TrainedModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u64,
    pub kernel: KernelHyperparameters,
    pub gp: GpHyperparameters,
    pub normalized: bool,
    pub fitted_mean: f64,
    /// Signal variance used in `C` (estimated in constant-mean mode).
    pub signal_variance: f64,
    /// Diagonal term used in `C`.
    pub noise: f64,
    pub records: Vec<Record>,
    pub weights: Vec<f64>,
    /// Lower triangle of the Cholesky factor of `C`, packed row by row.
    pub cholesky: Vec<f64>,
    pub radii: RadiiTable,
}

impl ModelFile {
    pub fn from_model(model: &TrainedModel) -> Result<Self, IoError> {
        let source = model.source.as_ref().ok_or(IoError::MissingSource)?;
        let post = &model.posterior;
        let n = model.n_train();
        let mut cholesky = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                cholesky.push(post.chol[(i, j)]);
            }
        }
        Ok(ModelFile {
            format_version: FORMAT_VERSION,
            kernel: model.kernel,
            gp: model.gp,
            normalized: model.normalized,
            fitted_mean: post.mean,
            signal_variance: post.signal,
            noise: post.noise,
            records: model
                .graphs
                .iter()
                .zip(&source.smiles)
                .zip(post.y.iter())
                .map(|((g, s), &target)| Record {
                    id: g.id.clone(),
                    smiles: s.clone(),
                    target,
                })
                .collect(),
            weights: post.weights.as_slice().to_vec(),
            cholesky,
            radii: source.radii.clone(),
        })
    }

    /// Rebuilds the model and checks the stored factor against a freshly
    /// computed 5x5 principal minor of `C`.
    pub fn into_model(self) -> Result<TrainedModel, IoError> {
        let corrupt = |m: String| IoError::CorruptModel(m);
        let n = self.records.len();
        if n == 0 {
            return Err(corrupt("no training records".into()));
        }
        if self.weights.len() != n || self.cholesky.len() != n * (n + 1) / 2 {
            return Err(corrupt(format!(
                "{} records but {} weights and {} factor entries",
                n,
                self.weights.len(),
                self.cholesky.len()
            )));
        }
        let mut chol = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in 0..=i {
                chol[(i, j)] = self.cholesky[k];
                k += 1;
            }
        }
        if chol.diagonal().iter().any(|d| !(*d > 0.0)) {
            return Err(corrupt("Cholesky factor has a non-positive diagonal".into()));
        }
        self.radii.validate()?;
        let graphs = self
            .records
            .iter()
            .map(|r| graph_from_smiles(&r.smiles, r.id.clone(), &self.radii))
            .collect::<Result<Vec<_>, _>>()?;
        let posterior = Posterior {
            mean: self.fitted_mean,
            signal: self.signal_variance,
            noise: self.noise,
            weights: DVector::from_vec(self.weights),
            chol,
            y: DVector::from_iterator(n, self.records.iter().map(|r| r.target)),
        };
        let smiles = self.records.iter().map(|r| r.smiles.clone()).collect();
        let model = TrainedModel::from_parts(graphs, self.kernel, self.gp, self.normalized, posterior)?
            .with_source(TrainingSource {
                smiles,
                radii: self.radii,
            });
        check_minor(&model)?;
        Ok(model)
    }
}

/// Indices of an evenly spaced principal minor of up to five rows.
fn minor_indices(n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..5).map(|k| k * (n - 1) / 4).collect();
    idx.dedup();
    idx
}

fn check_minor(model: &TrainedModel) -> Result<(), IoError> {
    let post = &model.posterior;
    let idx = minor_indices(model.n_train());
    let k = model.training_kernel(&idx, &idx)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            let expected = post.signal * k[(a, b)] + if i == j { post.noise } else { 0.0 };
            let stored = post.chol.row(i).dot(&post.chol.row(j));
            worst = worst.max((stored - expected).abs());
            scale = scale.max(expected.abs());
        }
    }
    if worst > 1e-6 * scale {
        return Err(IoError::CorruptModel(format!(
            "stored factor disagrees with the recomputed covariance by {worst:e}"
        )));
    }
    Ok(())
}

pub fn model_to_string(model: &TrainedModel) -> Result<String, IoError> {
    to_json_string(&ModelFile::from_model(model)?)
}

pub fn model_from_str(text: &str) -> Result<TrainedModel, IoError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| IoError::CorruptModel(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| IoError::CorruptModel("missing format_version".into()))?;
    if found != FORMAT_VERSION {
        return Err(IoError::VersionMismatch {
            found,
            expected: FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| IoError::CorruptModel(e.to_string()))?;
    file.into_model()
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<(), IoError> {
    write_atomic(path, model_to_string(model)?.as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel, IoError> {
    model_from_str(&super::read_to_string(path.as_ref())?)
}
