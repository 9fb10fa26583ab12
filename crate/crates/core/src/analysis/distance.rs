use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::gpr::TrainedModel;
use crate::kernel::{cross_kernel_matrix, distance_from_normalized, kernel_matrix, KernelHyperparameters};
use crate::molgraph::{Element, MolecularGraph};
use crate::selection::{mae, rmse};

use super::histogram::{histogram_with_edges, Histogram};
use super::AnalysisError;

/// A test molecule whose nearest training molecule is farther than this is
/// flagged as far from the training set.
pub const FAR_THRESHOLD: f64 = 1.0;

const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestDistance {
    pub id: String,
    pub mean: f64,
    pub min: f64,
    pub far: bool,
}

/// Kernel-induced distances between and within a training and a test set.
/// The three histograms share bins over `[0, sqrt 2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    /// Mean over unordered training pairs.
    pub train_mean: f64,
    /// Mean distance from each training molecule to all training molecules,
    /// itself included.
    pub train_column_means: Vec<f64>,
    pub tests: Vec<TestDistance>,
    pub train_train: Histogram,
    pub train_test: Histogram,
    pub test_means: Histogram,
}

pub fn distance_diagnostics(
    train: &[MolecularGraph],
    test: &[MolecularGraph],
    hyper: &KernelHyperparameters,
) -> Result<DistanceReport, AnalysisError> {
    distance_diagnostics_with_bins(train, test, hyper, DEFAULT_BINS)
}

pub fn distance_diagnostics_with_bins(
    train: &[MolecularGraph],
    test: &[MolecularGraph],
    hyper: &KernelHyperparameters,
    bins: usize,
) -> Result<DistanceReport, AnalysisError> {
    if train.is_empty() || test.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    if bins == 0 {
        return Err(AnalysisError::InvalidBinning("zero bins".into()));
    }
    let kt = kernel_matrix(train, hyper, true)?.values;
    let kx = cross_kernel_matrix(test, train, hyper, true)?;
    let n = train.len();
    let dt = kt.map(distance_from_normalized);
    let dx = kx.map(distance_from_normalized);

    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(dt[(i, j)]);
        }
    }
    let train_mean = if pairs.is_empty() {
        0.0
    } else {
        pairs.iter().sum::<f64>() / pairs.len() as f64
    };
    let train_column_means = (0..n).map(|j| dt.column(j).sum() / n as f64).collect();
    let tests: Vec<TestDistance> = test
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let row = dx.row(i);
            let min = row.min();
            TestDistance {
                id: g.id.clone(),
                mean: row.sum() / n as f64,
                min,
                far: min > FAR_THRESHOLD,
            }
        })
        .collect();

    let top = 2f64.sqrt();
    let edges: Vec<f64> = (0..=bins).map(|i| top * i as f64 / bins as f64).collect();
    let means: Vec<f64> = tests.iter().map(|t| t.mean).collect();
    Ok(DistanceReport {
        train_mean,
        train_column_means,
        train_train: histogram_with_edges(&pairs, &edges)?,
        train_test: histogram_with_edges(dx.as_slice(), &edges)?,
        test_means: histogram_with_edges(&means, &edges)?,
        tests,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetMetrics {
    pub elements: Vec<String>,
    pub size: usize,
    /// Absent when no molecule falls in the subset.
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
}

/// Metrics restricted to molecules whose elements (hydrogen included) all
/// belong to each given set.
pub fn subset_metrics(
    graphs: &[MolecularGraph],
    truth: &[f64],
    pred: &[f64],
    sets: &[BTreeSet<Element>],
) -> Vec<SubsetMetrics> {
    let elements: Vec<BTreeSet<Element>> = graphs.iter().map(|g| g.element_set()).collect();
    sets.iter()
        .map(|set| {
            let keep: Vec<usize> = (0..graphs.len()).filter(|&i| elements[i].is_subset(set)).collect();
            let p: Vec<f64> = keep.iter().map(|&i| pred[i]).collect();
            let t: Vec<f64> = keep.iter().map(|&i| truth[i]).collect();
            SubsetMetrics {
                elements: set.iter().map(|e| e.symbol().to_string()).collect(),
                size: keep.len(),
                mae: mae(&p, &t).ok(),
                rmse: rmse(&p, &t).ok(),
            }
        })
        .collect()
}

/// Predicts the test graphs with `model` and reports [`subset_metrics`].
pub fn element_subset_eval(
    model: &TrainedModel,
    test: &[MolecularGraph],
    truth: &[f64],
    sets: &[BTreeSet<Element>],
) -> Result<Vec<SubsetMetrics>, AnalysisError> {
    let pred = model.predict_mean(test)?;
    Ok(subset_metrics(test, truth, pred.as_slice(), sets))
}
