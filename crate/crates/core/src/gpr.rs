//! Gaussian process regression with a graph-kernel covariance.
//!
//! The covariance of the training targets is `C = s K + a I`, where `K` is the
//! (by default cosine-normalized) kernel matrix. Depending on [`MeanMode`] the
//! prior mean is zero, the training-target mean, or the generalized
//! least-squares estimate of a constant, in which case the signal variance is
//! also estimated from the data.
//!
//! [`Posterior`] does the algebra on precomputed kernel matrices and is what
//! cross-validation reuses; [`TrainedModel`] adds the training graphs so that
//! new molecules can be scored.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{
    self, KernelError, KernelHyperparameters, PreparedGraph,
};
use crate::molgraph::{MolecularGraph, RadiiTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("GP hyperparameter {name} = {value} is out of range ({range})")]
    InvalidHyperparameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("covariance matrix is not positive definite (alpha = {alpha}); try a larger alpha")]
    NotPositiveDefinite { alpha: f64 },
    #[error("{graphs} graphs but {targets} targets")]
    LengthMismatch { graphs: usize, targets: usize },
    #[error("no training data")]
    EmptyTraining,
    #[error("target {index} is not finite")]
    NonFiniteTarget { index: usize },
    #[error("kernel matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl GpError {
    pub fn code(&self) -> &'static str {
        match self {
            GpError::InvalidHyperparameter { .. } => "InvalidHyperparameter",
            GpError::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            GpError::LengthMismatch { .. } => "LengthMismatch",
            GpError::EmptyTraining => "EmptyTraining",
            GpError::NonFiniteTarget { .. } => "NonFiniteTarget",
            GpError::ShapeMismatch { .. } => "ShapeMismatch",
            GpError::Kernel(e) => e.code(),
        }
    }
}

/// How the prior mean is handled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanMode {
    /// Zero prior mean on the raw targets.
    Zero,
    /// Zero prior mean on targets centered by their training mean.
    #[default]
    Centered,
    /// Constant mean and signal variance estimated by generalized least squares.
    Constant,
}

/// Floor for the estimated signal variance when the targets are constant.
const MIN_ESTIMATED_VARIANCE: f64 = 1e-100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpHyperparameters {
    /// Signal variance in kcal^2/mol^2.
    pub sigma2: f64,
    /// Diagonal term: observation noise and regularization.
    pub alpha: f64,
    #[serde(default)]
    pub mean: MeanMode,
}

impl Default for GpHyperparameters {
    fn default() -> Self {
        GpHyperparameters {
            sigma2: 1.0,
            alpha: 1e-2,
            mean: MeanMode::Centered,
        }
    }
}

impl GpHyperparameters {
    pub fn new(sigma2: f64, alpha: f64, mean: MeanMode) -> Self {
        GpHyperparameters { sigma2, alpha, mean }
    }

    pub fn validate(&self) -> Result<(), GpError> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(GpError::InvalidHyperparameter {
                name: "sigma2",
                value: self.sigma2,
                range: "> 0",
            });
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(GpError::InvalidHyperparameter {
                name: "alpha",
                value: self.alpha,
                range: ">= 0",
            });
        }
        Ok(())
    }
}

/// Posterior quantities for a fixed training kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    /// Fitted prior mean.
    pub mean: f64,
    /// Signal variance actually used: `sigma2`, or the estimate in constant mode.
    pub signal: f64,
    /// Diagonal term actually used.
    pub noise: f64,
    /// `C^-1 (y - mean)`.
    pub weights: DVector<f64>,
    /// Lower Cholesky factor of `C`.
    pub chol: DMatrix<f64>,
    /// Training targets.
    pub y: DVector<f64>,
}

impl Posterior {
    /// Fits against a symmetric training kernel matrix.
    pub fn fit(k: &DMatrix<f64>, y: &[f64], gp: &GpHyperparameters) -> Result<Self, GpError> {
        gp.validate()?;
        let n = y.len();
        if n == 0 {
            return Err(GpError::EmptyTraining);
        }
        if k.nrows() != n || k.ncols() != n {
            return Err(GpError::ShapeMismatch {
                rows: k.nrows(),
                cols: k.ncols(),
                expected_rows: n,
                expected_cols: n,
            });
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(GpError::NonFiniteTarget { index });
        }
        let y = DVector::from_column_slice(y);
        let not_pd = || GpError::NotPositiveDefinite { alpha: gp.alpha };

        let (mean, signal, noise, chol, residual) = match gp.mean {
            MeanMode::Zero | MeanMode::Centered => {
                let mean = if gp.mean == MeanMode::Zero { 0.0 } else { y.mean() };
                let c = covariance(k, gp.sigma2, gp.alpha);
                let chol = cholesky(c).ok_or_else(not_pd)?;
                (mean, gp.sigma2, gp.alpha, chol, y.add_scalar(-mean))
            }
            MeanMode::Constant => {
                let ratio = gp.alpha / gp.sigma2;
                let psi = cholesky(covariance(k, 1.0, ratio)).ok_or_else(not_pd)?;
                let ones = DVector::from_element(n, 1.0);
                let psi_inv_1 = chol_solve(&psi, &ones);
                let psi_inv_y = chol_solve(&psi, &y);
                let mean = psi_inv_y.sum() / psi_inv_1.sum();
                let mut r = y.add_scalar(-mean);
                if r.amax() <= 64.0 * f64::EPSILON * y.amax() {
                    // constant targets: residuals are pure rounding
                    r.fill(0.0);
                }
                let s2 = (r.dot(&chol_solve(&psi, &r)) / n as f64).max(MIN_ESTIMATED_VARIANCE);
                (mean, s2, s2 * ratio, psi * s2.sqrt(), r)
            }
        };
        let weights = chol_solve(&chol, &residual);
        Ok(Posterior {
            mean,
            signal,
            noise,
            weights,
            chol,
            y,
        })
    }

    pub fn n_train(&self) -> usize {
        self.y.len()
    }

    /// Posterior mean for test points; `cross` is test-by-train.
    pub fn predict_mean(&self, cross: &DMatrix<f64>) -> Result<DVector<f64>, GpError> {
        self.check_cross(cross)?;
        Ok((cross * &self.weights * self.signal).add_scalar(self.mean))
    }

    /// Posterior variances, given test-by-train kernels and the test
    /// self-kernels (all ones when normalized).
    pub fn predict_variance(
        &self,
        cross: &DMatrix<f64>,
        test_diag: &[f64],
    ) -> Result<DVector<f64>, GpError> {
        self.check_cross(cross)?;
        let v = self.whitened(cross);
        Ok(DVector::from_iterator(
            cross.nrows(),
            (0..cross.nrows()).map(|i| {
                let explained = v.column(i).norm_squared();
                (self.signal * test_diag[i] - explained).max(0.0)
            }),
        ))
    }

    /// Full posterior covariance, given test-by-train and test-by-test kernels.
    pub fn predict_covariance(
        &self,
        cross: &DMatrix<f64>,
        test: &DMatrix<f64>,
    ) -> Result<DMatrix<f64>, GpError> {
        self.check_cross(cross)?;
        let v = self.whitened(cross);
        let mut sigma = test * self.signal - v.transpose() * &v;
        for i in 0..sigma.nrows() {
            sigma[(i, i)] = sigma[(i, i)].max(0.0);
        }
        Ok(sigma)
    }

    /// `ln p(y) = -r^T C^-1 r / 2 - ln|C| / 2 - N ln(2 pi) / 2`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.n_train() as f64;
        let r = self.y.add_scalar(-self.mean);
        let log_det: f64 = self.chol.diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
        -0.5 * r.dot(&self.weights) - 0.5 * log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }

    /// `L^-1 (s K_D*)`, one column per test point.
    fn whitened(&self, cross: &DMatrix<f64>) -> DMatrix<f64> {
        let rhs = cross.transpose() * self.signal;
        self.chol
            .solve_lower_triangular(&rhs)
            .expect("Cholesky factor has a positive diagonal")
    }

    fn check_cross(&self, cross: &DMatrix<f64>) -> Result<(), GpError> {
        if cross.ncols() != self.n_train() {
            return Err(GpError::ShapeMismatch {
                rows: cross.nrows(),
                cols: cross.ncols(),
                expected_rows: cross.nrows(),
                expected_cols: self.n_train(),
            });
        }
        Ok(())
    }
}

fn covariance(k: &DMatrix<f64>, scale: f64, diag: f64) -> DMatrix<f64> {
    let mut c = k * scale;
    for i in 0..c.nrows() {
        c[(i, i)] += diag;
    }
    c
}

fn cholesky(c: DMatrix<f64>) -> Option<DMatrix<f64>> {
    let l = c.cholesky()?.unpack();
    // nalgebra accepts tiny positive pivots; reject what cannot be solved stably
    l.diagonal().iter().all(|d| d.is_finite() && *d > 0.0).then_some(l)
}

fn chol_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let z = l.solve_lower_triangular(b).expect("positive diagonal");
    l.tr_solve_lower_triangular(&z).expect("positive diagonal")
}

/// Where the training graphs came from, needed to save a model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSource {
    pub smiles: Vec<String>,
    pub radii: RadiiTable,
}

/// A fitted regressor over molecular graphs.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub graphs: Vec<MolecularGraph>,
    pub kernel: KernelHyperparameters,
    pub gp: GpHyperparameters,
    pub normalized: bool,
    pub posterior: Posterior,
    pub source: Option<TrainingSource>,
    prepared: Vec<PreparedGraph>,
    self_kernels: Vec<f64>,
}

impl TrainedModel {
    /// Fits on cosine-normalized kernels.
    pub fn fit(
        graphs: Vec<MolecularGraph>,
        y: &[f64],
        kernel: &KernelHyperparameters,
        gp: &GpHyperparameters,
    ) -> Result<Self, GpError> {
        Self::fit_with(graphs, y, kernel, gp, true)
    }

    pub fn fit_with(
        graphs: Vec<MolecularGraph>,
        y: &[f64],
        kernel: &KernelHyperparameters,
        gp: &GpHyperparameters,
        normalized: bool,
    ) -> Result<Self, GpError> {
        if graphs.len() != y.len() {
            return Err(GpError::LengthMismatch {
                graphs: graphs.len(),
                targets: y.len(),
            });
        }
        if graphs.is_empty() {
            return Err(GpError::EmptyTraining);
        }
        gp.validate()?;
        kernel.validate()?;
        let prepared = kernel::prepare_all(&graphs, kernel);
        let self_kernels = kernel::self_kernels(&graphs, &prepared, kernel)?;
        let k = kernel::square_from_prepared(&prepared, &self_kernels, kernel, normalized)?;
        let posterior = Posterior::fit(&k, y, gp)?;
        Ok(TrainedModel {
            graphs,
            kernel: *kernel,
            gp: *gp,
            normalized,
            posterior,
            source: None,
            prepared,
            self_kernels,
        })
    }

    /// Rebuilds a model from stored posterior quantities without refitting.
    pub fn from_parts(
        graphs: Vec<MolecularGraph>,
        kernel: KernelHyperparameters,
        gp: GpHyperparameters,
        normalized: bool,
        posterior: Posterior,
    ) -> Result<Self, GpError> {
        if graphs.len() != posterior.n_train() {
            return Err(GpError::LengthMismatch {
                graphs: graphs.len(),
                targets: posterior.n_train(),
            });
        }
        kernel.validate()?;
        let prepared = kernel::prepare_all(&graphs, &kernel);
        let self_kernels = kernel::self_kernels(&graphs, &prepared, &kernel)?;
        Ok(TrainedModel {
            graphs,
            kernel,
            gp,
            normalized,
            posterior,
            source: None,
            prepared,
            self_kernels,
        })
    }

    pub fn with_source(mut self, source: TrainingSource) -> Self {
        self.source = Some(source);
        self
    }

    pub fn n_train(&self) -> usize {
        self.graphs.len()
    }

    pub fn targets(&self) -> &[f64] {
        self.posterior.y.as_slice()
    }

    /// Unnormalized `K(G, G)` of every training graph.
    pub fn self_kernels(&self) -> &[f64] {
        &self.self_kernels
    }

    /// Kernel values between the given training indices, as used in `C`.
    pub fn training_kernel(&self, rows: &[usize], cols: &[usize]) -> Result<DMatrix<f64>, GpError> {
        let pick = |idx: &[usize]| -> (Vec<PreparedGraph>, Vec<f64>) {
            (
                idx.iter().map(|&i| self.prepared[i].clone()).collect(),
                idx.iter().map(|&i| self.self_kernels[i]).collect(),
            )
        };
        let (pr, dr) = pick(rows);
        let (pc, dc) = pick(cols);
        let mut m = kernel::cross_from_prepared(&pr, &dr, &pc, &dc, &self.kernel, self.normalized)?;
        if self.normalized {
            for (a, &i) in rows.iter().enumerate() {
                for (b, &j) in cols.iter().enumerate() {
                    if i == j {
                        m[(a, b)] = 1.0;
                    }
                }
            }
        }
        Ok(m)
    }

    /// Test-by-train kernel matrix and the test self-kernels in the model's
    /// normalization.
    pub fn cross_kernel(
        &self,
        graphs: &[MolecularGraph],
    ) -> Result<(DMatrix<f64>, Vec<f64>), GpError> {
        if graphs.is_empty() {
            return Ok((DMatrix::zeros(0, self.n_train()), Vec::new()));
        }
        let prepared = kernel::prepare_all(graphs, &self.kernel);
        let diag = kernel::self_kernels(graphs, &prepared, &self.kernel)?;
        let cross = kernel::cross_from_prepared(
            &prepared,
            &diag,
            &self.prepared,
            &self.self_kernels,
            &self.kernel,
            self.normalized,
        )?;
        let test_diag = if self.normalized {
            vec![1.0; graphs.len()]
        } else {
            diag
        };
        Ok((cross, test_diag))
    }

    pub fn predict_mean(&self, graphs: &[MolecularGraph]) -> Result<DVector<f64>, GpError> {
        let (cross, _) = self.cross_kernel(graphs)?;
        self.posterior.predict_mean(&cross)
    }

    pub fn predict_variance(&self, graphs: &[MolecularGraph]) -> Result<DVector<f64>, GpError> {
        let (cross, diag) = self.cross_kernel(graphs)?;
        self.posterior.predict_variance(&cross, &diag)
    }

    /// Mean and variance with a single kernel evaluation pass.
    pub fn predict(&self, graphs: &[MolecularGraph]) -> Result<Prediction, GpError> {
        let (cross, diag) = self.cross_kernel(graphs)?;
        Ok(Prediction {
            mean: self.posterior.predict_mean(&cross)?,
            variance: self.posterior.predict_variance(&cross, &diag)?,
        })
    }

    /// Full posterior covariance over the given graphs.
    pub fn predict_covariance(&self, graphs: &[MolecularGraph]) -> Result<DMatrix<f64>, GpError> {
        let (cross, _) = self.cross_kernel(graphs)?;
        let test = kernel::kernel_matrix(graphs, &self.kernel, self.normalized)?.values;
        self.posterior.predict_covariance(&cross, &test)
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.posterior.log_marginal_likelihood()
    }

    /// The training covariance `C = s K + a I`.
    pub fn covariance(&self) -> Result<DMatrix<f64>, GpError> {
        let idx: Vec<usize> = (0..self.n_train()).collect();
        let k = self.training_kernel(&idx, &idx)?;
        Ok(covariance(&k, self.posterior.signal, self.posterior.noise))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: DVector<f64>,
    pub variance: DVector<f64>,
}
