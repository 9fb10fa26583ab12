use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::gpr::GpError;
use crate::io::IoError;
use crate::kernel::KernelError;
use crate::molgraph::GraphError;
use crate::selection::SelectionError;
use crate::smiles::SmilesError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Any failure surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error object.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Smiles(e) => e.code(),
            Error::Graph(e) => e.code(),
            Error::Kernel(e) => e.code(),
            Error::Gp(e) => e.code(),
            Error::Selection(e) => e.code(),
            Error::Analysis(e) => e.code(),
            Error::Io(e) => e.code(),
        }
    }
}
