use std::cmp::Ordering;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gpr::{GpHyperparameters, MeanMode, Posterior, Prediction, TrainedModel, TrainingSource};
use crate::kernel::{kernel_matrix, KernelHyperparameters, Solver};
use crate::molgraph::{AdjacencyConvention, MolecularGraph, RadiiTable};

use super::{fold_ranges, mae, pearson_r2, rmse, split_by_id, Dataset, SelectionError};

/// Candidate lists for every hyperparameter plus the settings shared by all
/// candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperGrid {
    pub nu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub zeta: Vec<f64>,
    pub q: Vec<f64>,
    pub alpha: Vec<f64>,
    pub sigma2: Vec<f64>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub mean: MeanMode,
    #[serde(default = "default_true")]
    pub normalized: bool,
    #[serde(default = "default_edge_mismatch")]
    pub edge_mismatch: f64,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default, rename = "adjacency_exponent_convention")]
    pub adjacency: AdjacencyConvention,
}

fn default_folds() -> usize {
    10
}

fn default_true() -> bool {
    true
}

fn default_edge_mismatch() -> f64 {
    1.0
}

impl Default for HyperGrid {
    fn default() -> Self {
        HyperGrid {
            nu: vec![0.1, 0.3, 0.5],
            lambda: vec![0.05, 0.10, 0.20],
            zeta: vec![0.5, 1.0],
            q: vec![0.01, 0.05, 0.10],
            alpha: vec![1e-4, 1e-2, 1e-1],
            sigma2: vec![1.0, 10.0],
            folds: default_folds(),
            mean: MeanMode::default(),
            normalized: true,
            edge_mismatch: default_edge_mismatch(),
            solver: Solver::Auto,
            adjacency: AdjacencyConvention::Squared,
        }
    }
}

/// One point of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub nu: f64,
    pub lambda: f64,
    pub zeta: f64,
    pub q: f64,
    pub alpha: f64,
    pub sigma2: f64,
}

impl Candidate {
    fn tuple(&self) -> [f64; 6] {
        [self.nu, self.lambda, self.zeta, self.q, self.alpha, self.sigma2]
    }

    /// Lexicographic order on `(nu, lambda, zeta, q, alpha, sigma2)`.
    pub fn lex_cmp(&self, other: &Candidate) -> Ordering {
        self.tuple()
            .iter()
            .zip(other.tuple().iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl HyperGrid {
    /// A grid holding exactly one candidate.
    pub fn single(kernel: &KernelHyperparameters, gp: &GpHyperparameters, folds: usize) -> Self {
        HyperGrid {
            nu: vec![kernel.nu],
            lambda: vec![kernel.lambda],
            zeta: vec![kernel.zeta],
            q: vec![kernel.q],
            alpha: vec![gp.alpha],
            sigma2: vec![gp.sigma2],
            folds,
            mean: gp.mean,
            normalized: true,
            edge_mismatch: kernel.edge_mismatch,
            solver: kernel.solver,
            adjacency: kernel.adjacency,
        }
    }

    fn kernel_configs(&self) -> Vec<[f64; 4]> {
        let mut out = Vec::new();
        for &nu in &self.nu {
            for &lambda in &self.lambda {
                for &zeta in &self.zeta {
                    for &q in &self.q {
                        out.push([nu, lambda, zeta, q]);
                    }
                }
            }
        }
        out
    }

    fn gp_configs(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        for &alpha in &self.alpha {
            for &sigma2 in &self.sigma2 {
                out.push([alpha, sigma2]);
            }
        }
        out
    }

    /// All candidates in canonical order (`sigma2` varies fastest).
    pub fn candidates(&self) -> Vec<Candidate> {
        let gps = self.gp_configs();
        self.kernel_configs()
            .into_iter()
            .flat_map(|[nu, lambda, zeta, q]| {
                gps.iter().map(move |&[alpha, sigma2]| Candidate {
                    nu,
                    lambda,
                    zeta,
                    q,
                    alpha,
                    sigma2,
                })
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nu.len() * self.lambda.len() * self.zeta.len() * self.q.len() * self.alpha.len() * self.sigma2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kernel(&self, c: &Candidate) -> KernelHyperparameters {
        KernelHyperparameters {
            edge_mismatch: self.edge_mismatch,
            solver: self.solver,
            adjacency: self.adjacency,
            ..KernelHyperparameters::new(c.nu, c.lambda, c.zeta, c.q)
        }
    }

    pub fn gp(&self, c: &Candidate) -> GpHyperparameters {
        GpHyperparameters::new(c.sigma2, c.alpha, self.mean)
    }

    /// Checks every list is non-empty and every candidate is in range.
    pub fn validate(&self) -> Result<(), SelectionError> {
        for (name, list) in [
            ("nu", &self.nu),
            ("lambda", &self.lambda),
            ("zeta", &self.zeta),
            ("q", &self.q),
            ("alpha", &self.alpha),
            ("sigma2", &self.sigma2),
        ] {
            if list.is_empty() {
                return Err(SelectionError::EmptyGrid(name));
            }
        }
        if self.folds < 2 {
            return Err(SelectionError::InvalidFoldCount(self.folds));
        }
        for c in self.candidates() {
            self.kernel(&c).validate()?;
            self.gp(&c).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub index: usize,
    pub candidate: Candidate,
    /// `None` where the fit failed.
    pub fold_mae: Vec<Option<f64>>,
    pub fold_rmse: Vec<Option<f64>>,
    /// `None` (infinite) when any fold failed.
    pub mean_mae: Option<f64>,
    pub mean_rmse: Option<f64>,
    pub error: Option<String>,
}

impl CandidateResult {
    pub fn score(&self) -> f64 {
        self.mean_mae.unwrap_or(f64::INFINITY)
    }
}

/// Cross-validation results; contains no timing so that repeated runs are
/// byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub n_records: usize,
    pub folds: usize,
    pub fold_sizes: Vec<usize>,
    pub candidates: Vec<CandidateResult>,
    pub selected: usize,
    pub selected_candidate: Candidate,
    pub selected_mean_mae: f64,
}

/// Wall-clock seconds, kept apart from [`CvReport`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CvTimings {
    /// Kernel assembly time per candidate, split evenly over the candidates
    /// that share the kernel.
    pub kernel_seconds: Vec<f64>,
    /// Fit and validation time per candidate, summed over folds.
    pub fit_seconds: Vec<f64>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub report: CvReport,
    pub timings: CvTimings,
}

/// Sorts the dataset by id, perceives it and runs [`grid_search_graphs`].
pub fn grid_search(dataset: &Dataset, grid: &HyperGrid, radii: &RadiiTable) -> Result<GridOutcome, SelectionError> {
    let sorted = dataset.sorted();
    let graphs = sorted.graphs(radii)?;
    grid_search_graphs(&graphs, &sorted.targets(), grid)
}

/// k-fold grid search over graphs already in id order. The kernel matrix of
/// each kernel configuration is computed once over all graphs and sliced per
/// fold; fits that fail count as infinite error.
pub fn grid_search_graphs(
    graphs: &[MolecularGraph],
    y: &[f64],
    grid: &HyperGrid,
) -> Result<GridOutcome, SelectionError> {
    let start = Instant::now();
    grid.validate()?;
    if graphs.len() != y.len() {
        return Err(SelectionError::LengthMismatch {
            predictions: graphs.len(),
            truths: y.len(),
        });
    }
    let folds = fold_ranges(graphs.len(), grid.folds)?;
    let candidates = grid.candidates();
    let n_gp = grid.gp_configs().len();
    let mut results = Vec::with_capacity(candidates.len());
    let mut timings = CvTimings::default();

    for block in candidates.chunks(n_gp) {
        let kernel = grid.kernel(&block[0]);
        let t0 = Instant::now();
        let k = kernel_matrix(graphs, &kernel, grid.normalized);
        let kernel_time = t0.elapsed().as_secs_f64() / n_gp as f64;
        match k {
            Err(e) => {
                for c in block {
                    results.push(failed(results.len(), *c, folds.len(), e.to_string()));
                    timings.kernel_seconds.push(kernel_time);
                    timings.fit_seconds.push(0.0);
                }
            }
            Ok(k) => {
                let jobs: Vec<(usize, usize)> = (0..n_gp)
                    .flat_map(|g| (0..folds.len()).map(move |f| (g, f)))
                    .collect();
                let outcomes: Vec<(Result<(f64, f64), String>, f64)> = jobs
                    .par_iter()
                    .map(|&(g, f)| {
                        let t = Instant::now();
                        let r = validate_fold(&k.values, y, &folds[f], &grid.gp(&block[g]));
                        (r, t.elapsed().as_secs_f64())
                    })
                    .collect();
                for (g, c) in block.iter().enumerate() {
                    let per_fold = &outcomes[g * folds.len()..(g + 1) * folds.len()];
                    results.push(summarize(results.len(), *c, per_fold));
                    timings.kernel_seconds.push(kernel_time);
                    timings.fit_seconds.push(per_fold.iter().map(|o| o.1).sum());
                }
            }
        }
    }

    let selected = select(&results).ok_or(SelectionError::NoViableCandidate)?;
    timings.total_seconds = start.elapsed().as_secs_f64();
    Ok(GridOutcome {
        report: CvReport {
            n_records: graphs.len(),
            folds: folds.len(),
            fold_sizes: folds.iter().map(|r| r.len()).collect(),
            selected,
            selected_candidate: results[selected].candidate,
            selected_mean_mae: results[selected].score(),
            candidates: results,
        },
        timings,
    })
}

fn validate_fold(
    k: &DMatrix<f64>,
    y: &[f64],
    val: &std::ops::Range<usize>,
    gp: &GpHyperparameters,
) -> Result<(f64, f64), String> {
    let train: Vec<usize> = (0..y.len()).filter(|i| !val.contains(i)).collect();
    let valid: Vec<usize> = val.clone().collect();
    let k_train = k.select_rows(&train).select_columns(&train);
    let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    let cross = k.select_rows(&valid).select_columns(&train);
    let post = Posterior::fit(&k_train, &y_train, gp).map_err(|e| e.to_string())?;
    let pred = post.predict_mean(&cross).map_err(|e| e.to_string())?;
    let truth = &y[val.clone()];
    let m = mae(pred.as_slice(), truth).map_err(|e| e.to_string())?;
    let r = rmse(pred.as_slice(), truth).map_err(|e| e.to_string())?;
    Ok((m, r))
}

fn failed(index: usize, candidate: Candidate, folds: usize, error: String) -> CandidateResult {
    CandidateResult {
        index,
        candidate,
        fold_mae: vec![None; folds],
        fold_rmse: vec![None; folds],
        mean_mae: None,
        mean_rmse: None,
        error: Some(error),
    }
}

fn summarize(index: usize, candidate: Candidate, per_fold: &[(Result<(f64, f64), String>, f64)]) -> CandidateResult {
    let fold_mae: Vec<Option<f64>> = per_fold.iter().map(|o| o.0.as_ref().ok().map(|v| v.0)).collect();
    let fold_rmse: Vec<Option<f64>> = per_fold.iter().map(|o| o.0.as_ref().ok().map(|v| v.1)).collect();
    let error = per_fold.iter().find_map(|o| o.0.as_ref().err().cloned());
    let mean = |v: &[Option<f64>]| -> Option<f64> {
        let vals: Option<Vec<f64>> = v.iter().copied().collect();
        vals.map(|x| x.iter().sum::<f64>() / x.len() as f64)
    };
    CandidateResult {
        index,
        candidate,
        mean_mae: mean(&fold_mae),
        mean_rmse: mean(&fold_rmse),
        fold_mae,
        fold_rmse,
        error,
    }
}

/// Minimum mean MAE; ties go to the lexicographically smallest tuple, then
/// to the earliest index.
fn select(results: &[CandidateResult]) -> Option<usize> {
    results
        .iter()
        .filter(|r| r.mean_mae.is_some())
        .min_by(|a, b| {
            a.score()
                .total_cmp(&b.score())
                .then_with(|| a.candidate.lex_cmp(&b.candidate))
                .then_with(|| a.index.cmp(&b.index))
        })
        .map(|r| r.index)
}

/// Grid search on the training part of a sorted-id split, refit of the best
/// candidate on all training records, and scoring on the held-out part.
#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub train: Dataset,
    pub test: Dataset,
    pub cv: GridOutcome,
    pub model: TrainedModel,
    pub test_prediction: Prediction,
    pub test_mae: f64,
    pub test_rmse: f64,
    pub test_r2: Option<f64>,
}

pub fn evaluate_protocol(
    dataset: &Dataset,
    train_fraction: f64,
    grid: &HyperGrid,
    radii: &RadiiTable,
) -> Result<ProtocolResult, SelectionError> {
    grid.validate()?;
    let (train, test) = split_by_id(dataset, train_fraction)?;
    let train_graphs = train.graphs(radii)?;
    let test_graphs = test.graphs(radii)?;
    let y = train.targets();
    let cv = grid_search_graphs(&train_graphs, &y, grid)?;
    let best = cv.report.selected_candidate;
    let model = TrainedModel::fit_with(train_graphs, &y, &grid.kernel(&best), &grid.gp(&best), grid.normalized)?
        .with_source(TrainingSource {
            smiles: train.records().iter().map(|r| r.smiles.clone()).collect(),
            radii: radii.clone(),
        });
    let test_prediction = model.predict(&test_graphs)?;
    let truth = test.targets();
    let pred = test_prediction.mean.as_slice();
    Ok(ProtocolResult {
        test_mae: mae(pred, &truth)?,
        test_rmse: rmse(pred, &truth)?,
        test_r2: pearson_r2(pred, &truth).ok(),
        train,
        test,
        cv,
        model,
        test_prediction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = HyperGrid::default();
        assert_eq!(g.len(), 324);
        let c = g.candidates();
        assert_eq!(c.len(), 324);
        assert_eq!(c[0].tuple(), [0.1, 0.05, 0.5, 0.01, 1e-4, 1.0]);
        assert_eq!(c[1].sigma2, 10.0);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn invalid_grid() {
        let mut g = HyperGrid::default();
        g.q = vec![];
        assert!(matches!(g.validate(), Err(SelectionError::EmptyGrid("q"))));
        let mut g = HyperGrid::default();
        g.nu.push(1.5);
        assert!(g.validate().is_err());
    }

    #[test]
    fn selection_tie_break() {
        let c = |nu| Candidate {
            nu,
            lambda: 0.1,
            zeta: 1.0,
            q: 0.05,
            alpha: 0.01,
            sigma2: 1.0,
        };
        let r = |index, nu, m: Option<f64>| CandidateResult {
            index,
            candidate: c(nu),
            fold_mae: vec![m],
            fold_rmse: vec![m],
            mean_mae: m,
            mean_rmse: m,
            error: None,
        };
        let results = vec![r(0, 0.5, Some(1.0)), r(1, 0.3, Some(1.0)), r(2, 0.1, None), r(3, 0.3, Some(1.0))];
        assert_eq!(select(&results), Some(1));
        assert_eq!(select(&[r(0, 0.1, None)]), None);
    }
}
