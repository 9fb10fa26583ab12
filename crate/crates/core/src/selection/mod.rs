//! Sorted-id splitting, k-fold cross-validation, grid search and error metrics.

mod grid;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gpr::GpError;
use crate::kernel::KernelError;
use crate::molgraph::{MolecularGraph, RadiiTable};
use crate::smiles::{graph_from_smiles, SmilesError};

pub use grid::{
    evaluate_protocol, grid_search, grid_search_graphs, Candidate, CandidateResult, CvReport,
    CvTimings, GridOutcome, HyperGrid, ProtocolResult,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("train fraction {0} must lie in (0, 1)")]
    InvalidFraction(f64),
    #[error("split of {n} records with fraction {fraction} leaves an empty {side} set")]
    EmptySplit {
        n: usize,
        fraction: f64,
        side: &'static str,
    },
    #[error("{n} records cannot be split into {k} folds")]
    TooFewRecords { n: usize, k: usize },
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("{predictions} predictions but {truths} truths")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("metric needs at least {min} values, got {n}")]
    TooFewValues { n: usize, min: usize },
    #[error("values have zero variance")]
    DegenerateVariance,
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("hyperparameter grid is empty: {0}")]
    EmptyGrid(&'static str),
    #[error("every grid candidate failed")]
    NoViableCandidate,
    #[error("record {id:?}: {source}")]
    Smiles { id: String, source: SmilesError },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Gp(#[from] GpError),
}

impl SelectionError {
    pub fn code(&self) -> &'static str {
        match self {
            SelectionError::EmptyDataset => "EmptyDataset",
            SelectionError::InvalidFraction(_) => "InvalidFraction",
            SelectionError::EmptySplit { .. } => "EmptySplit",
            SelectionError::TooFewRecords { .. } => "TooFewRecords",
            SelectionError::InvalidFoldCount(_) => "InvalidFoldCount",
            SelectionError::LengthMismatch { .. } => "LengthMismatch",
            SelectionError::TooFewValues { .. } => "TooFewValues",
            SelectionError::DegenerateVariance => "DegenerateVariance",
            SelectionError::DuplicateId(_) => "DuplicateId",
            SelectionError::EmptyGrid(_) => "EmptyGrid",
            SelectionError::NoViableCandidate => "NoViableCandidate",
            SelectionError::Smiles { source, .. } => source.code(),
            SelectionError::Kernel(e) => e.code(),
            SelectionError::Gp(e) => e.code(),
        }
    }
}

/// One molecule with its target in kcal/mol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub smiles: String,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    records: Vec<Record>,
    pub provenance: String,
}

impl Dataset {
    /// Rejects repeated ids.
    pub fn new(records: Vec<Record>, provenance: impl Into<String>) -> Result<Self, SelectionError> {
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(SelectionError::DuplicateId(r.id.clone()));
            }
        }
        Ok(Dataset {
            records,
            provenance: provenance.into(),
        })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.target).collect()
    }

    /// Copy with records in byte-wise ascending id order.
    pub fn sorted(&self) -> Dataset {
        let mut records = self.records.clone();
        records.sort_by(|a, b| a.id.as_bytes().cmp(b.id.as_bytes()));
        Dataset {
            records,
            provenance: self.provenance.clone(),
        }
    }

    fn subset(&self, range: std::ops::Range<usize>, tag: &str) -> Dataset {
        Dataset {
            records: self.records[range].to_vec(),
            provenance: format!("{}#{}", self.provenance, tag),
        }
    }

    /// Perceives every SMILES, using the record id as graph id.
    pub fn graphs(&self, radii: &RadiiTable) -> Result<Vec<MolecularGraph>, SelectionError> {
        use rayon::prelude::*;
        self.records
            .par_iter()
            .map(|r| {
                graph_from_smiles(&r.smiles, r.id.clone(), radii).map_err(|source| {
                    SelectionError::Smiles {
                        id: r.id.clone(),
                        source,
                    }
                })
            })
            .collect()
    }
}

/// Number of training records for fraction `f` of `n`: `ceil(f n)`, with a
/// small allowance so that `f = a / n` yields exactly `a`.
pub fn train_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Sorts by id and cuts after the first `ceil(f N)` records.
pub fn split_by_id(dataset: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset), SelectionError> {
    if dataset.is_empty() {
        return Err(SelectionError::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SelectionError::InvalidFraction(train_fraction));
    }
    let n = dataset.len();
    let cut = train_size(n, train_fraction);
    let side = if cut == 0 {
        Some("train")
    } else if cut == n {
        Some("test")
    } else {
        None
    };
    if let Some(side) = side {
        return Err(SelectionError::EmptySplit {
            n,
            fraction: train_fraction,
            side,
        });
    }
    let sorted = dataset.sorted();
    Ok((sorted.subset(0..cut, "train"), sorted.subset(cut..n, "test")))
}

/// Contiguous validation blocks over `0..n`; the first `n mod k` blocks get one
/// extra record.
pub fn fold_ranges(n: usize, k: usize) -> Result<Vec<std::ops::Range<usize>>, SelectionError> {
    if k < 2 {
        return Err(SelectionError::InvalidFoldCount(k));
    }
    if n < k {
        return Err(SelectionError::TooFewRecords { n, k });
    }
    let (base, extra) = (n / k, n % k);
    let mut start = 0;
    Ok((0..k)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect())
}

/// `(train', validation)` pairs over the id-sorted dataset.
pub fn kfold(dataset: &Dataset, k: usize) -> Result<Vec<(Dataset, Dataset)>, SelectionError> {
    let sorted = dataset.sorted();
    let n = sorted.len();
    Ok(fold_ranges(n, k)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut train = sorted.records[..r.start].to_vec();
            train.extend_from_slice(&sorted.records[r.end..]);
            (
                Dataset {
                    records: train,
                    provenance: format!("{}#fold{}-train", sorted.provenance, i),
                },
                sorted.subset(r, &format!("fold{}-validation", i)),
            )
        })
        .collect())
}

fn check_lengths(pred: &[f64], truth: &[f64]) -> Result<(), SelectionError> {
    if pred.len() != truth.len() {
        return Err(SelectionError::LengthMismatch {
            predictions: pred.len(),
            truths: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(SelectionError::TooFewValues { n: 0, min: 1 });
    }
    Ok(())
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64, SelectionError> {
    check_lengths(pred, truth)?;
    let s: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(s / pred.len() as f64)
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64, SelectionError> {
    check_lengths(pred, truth)?;
    let s: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((s / pred.len() as f64).sqrt())
}

/// Squared Pearson correlation coefficient.
pub fn pearson_r2(pred: &[f64], truth: &[f64]) -> Result<f64, SelectionError> {
    check_lengths(pred, truth)?;
    if pred.len() < 2 {
        return Err(SelectionError::TooFewValues {
            n: pred.len(),
            min: 2,
        });
    }
    let n = pred.len() as f64;
    let (mp, mt) = (pred.iter().sum::<f64>() / n, truth.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, t) in pred.iter().zip(truth) {
        let (dp, dt) = (p - mp, t - mt);
        sxy += dp * dt;
        sxx += dp * dp;
        syy += dt * dt;
    }
    if syy == 0.0 || sxx == 0.0 {
        return Err(SelectionError::DegenerateVariance);
    }
    Ok((sxy * sxy / (sxx * syy)).clamp(0.0, 1.0))
}
