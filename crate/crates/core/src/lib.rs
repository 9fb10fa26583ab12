//! Gaussian process regression over molecular graphs.
//!
//! Molecules enter as SMILES strings, are perceived into labeled, weighted
//! heavy-atom graphs ([`molgraph::MolecularGraph`]) and compared with a
//! marginalized graph kernel ([`kernel`]). The kernel drives a Gaussian process
//! regressor ([`gpr`]) whose hyperparameters are chosen by sorted-id k-fold
//! cross-validation ([`selection`]). [`analysis`] holds dataset diagnostics:
//! Bertz complexity, train/test graph distances and an MDS-style reduction of
//! the GP covariance matrix. [`io`] covers CSV datasets, JSON configuration
//! and model persistence.

pub mod analysis;
pub mod error;
pub mod gpr;
pub mod io;
pub mod kernel;
pub mod molgraph;
pub mod selection;
pub mod smiles;

pub use error::{Error, Result};
pub use gpr::{GpHyperparameters, MeanMode, TrainedModel};
pub use kernel::{KernelHyperparameters, KernelMatrix, Solver};
pub use molgraph::{Element, MolecularGraph, RadiiTable};
pub use selection::{Dataset, Record};
