//! Datasets, configuration, JSON output and model files.

mod config;
mod csv_data;
mod json;
mod model;

use thiserror::Error;

use crate::gpr::GpError;
use crate::molgraph::GraphError;
use crate::selection::SelectionError;
use crate::smiles::SmilesError;

pub use config::RunConfig;
pub use csv_data::{load_csv, load_molecules, read_csv, Molecule};
pub use json::{to_json_string, write_atomic, write_json, ExactFloatFormatter, MatrixJson};
pub use model::{load_model, model_from_str, model_to_string, save_model, ModelFile, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("row {row}: cannot parse target {value:?}")]
    UnparsableTarget { row: usize, value: String },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("model has no training SMILES and cannot be saved")]
    MissingSource,
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

impl IoError {
    pub fn code(&self) -> &'static str {
        match self {
            IoError::Read { .. } => "ReadError",
            IoError::Write { .. } => "WriteError",
            IoError::MissingColumn(_) => "MissingColumn",
            IoError::DuplicateId(_) => "DuplicateId",
            IoError::UnparsableTarget { .. } => "UnparsableTarget",
            IoError::Csv(_) => "MalformedCsv",
            IoError::Json(_) => "InvalidJson",
            IoError::InvalidConfig(_) => "InvalidConfig",
            IoError::VersionMismatch { .. } => "VersionMismatch",
            IoError::CorruptModel(_) => "CorruptModel",
            IoError::MissingSource => "MissingSource",
            IoError::Smiles(e) => e.code(),
            IoError::Graph(e) => e.code(),
            IoError::Gp(e) => e.code(),
            IoError::Selection(e) => e.code(),
        }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
