//! Dataset diagnostics: Bertz complexity, histograms, element-subset metrics,
//! train/test graph distances and an MDS-style embedding of a covariance or
//! distance matrix.

mod bertz;
mod distance;
mod histogram;
mod mds;

use thiserror::Error;

use crate::gpr::GpError;
use crate::kernel::KernelError;
use crate::selection::SelectionError;

pub use bertz::{adjacent_edge_pairs, bertz_index, bertz_report, refine_colors, symmetry_classes, BciReport};
pub use distance::{
    distance_diagnostics, distance_diagnostics_with_bins, element_subset_eval, subset_metrics,
    DistanceReport, SubsetMetrics, TestDistance, FAR_THRESHOLD,
};
pub use histogram::{histogram, histogram_with_edges, Binning, Histogram};
pub use mds::{embed_mds, EmbedMode, EmbeddingResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no values given")]
    EmptyInput,
    #[error("invalid binning: {0}")]
    InvalidBinning(String),
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({i}, {j})")]
    NonSymmetricInput { i: usize, j: usize },
    #[error("embedding dimension {d_max} must lie in 1..={m}")]
    InvalidDimension { d_max: usize, m: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

impl AnalysisError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalysisError::EmptyInput => "EmptyInput",
            AnalysisError::InvalidBinning(_) => "InvalidBinning",
            AnalysisError::NotSquare { .. } => "NotSquare",
            AnalysisError::NonSymmetricInput { .. } => "NonSymmetricInput",
            AnalysisError::InvalidDimension { .. } => "InvalidDimension",
            AnalysisError::NonFinite => "NonFinite",
            AnalysisError::Kernel(e) => e.code(),
            AnalysisError::Gp(e) => e.code(),
            AnalysisError::Selection(e) => e.code(),
        }
    }
}
