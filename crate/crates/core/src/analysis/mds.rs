use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMode {
    /// Use the matrix entries directly as distances.
    #[default]
    Raw,
    /// Treat the matrix as a covariance: `d_ij = sqrt(C_ii + C_jj - 2 C_ij)`.
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    /// All eigenvalues of `T`, descending.
    pub eigenvalues: Vec<f64>,
    /// Relative Frobenius error for `d = 1..=d_max`.
    pub error_curve: Vec<f64>,
    /// Smallest `d` with error below 10%, if any.
    pub d_at_10pct: Option<usize>,
    /// Coordinates of each point in the first `d_max` axes.
    pub points: Vec<Vec<f64>>,
}

/// Embeds points from a distance-like matrix anchored at the first point:
/// `T_ij = (D_1j^2 + D_i1^2 - D_ij^2) / 2`, `T = U S U^T`, `X = U sqrt(S)`.
pub fn embed_mds(c: &DMatrix<f64>, d_max: usize, mode: EmbedMode) -> Result<EmbeddingResult, AnalysisError> {
    let m = c.nrows();
    if c.ncols() != m {
        return Err(AnalysisError::NotSquare { rows: m, cols: c.ncols() });
    }
    if m < 2 || d_max < 1 || d_max > m {
        return Err(AnalysisError::InvalidDimension { d_max, m });
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let tol = 1e-10 * c.amax().max(1.0);
    for i in 0..m {
        for j in i + 1..m {
            if (c[(i, j)] - c[(j, i)]).abs() > tol {
                return Err(AnalysisError::NonSymmetricInput { i, j });
            }
        }
    }
    let d = match mode {
        EmbedMode::Raw => c.clone(),
        EmbedMode::Distance => DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                0.0
            } else {
                (c[(i, i)] + c[(j, j)] - 2.0 * c[(i, j)]).max(0.0).sqrt()
            }
        }),
    };
    let t = DMatrix::from_fn(m, m, |i, j| {
        0.5 * (d[(0, j)].powi(2) + d[(i, 0)].powi(2) - d[(i, j)].powi(2))
    });
    // exact symmetry for the eigensolver
    let t = (&t + t.transpose()) * 0.5;
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let x = DMatrix::from_fn(m, d_max, |i, a| {
        let k = order[a];
        eig.eigenvectors[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt()
    });

    let norm = d.norm();
    let mut sq = DMatrix::<f64>::zeros(m, m);
    let mut error_curve = Vec::with_capacity(d_max);
    for a in 0..d_max {
        let mut diff = 0.0;
        for i in 0..m {
            for j in 0..m {
                let delta = x[(i, a)] - x[(j, a)];
                sq[(i, j)] += delta * delta;
                diff += (sq[(i, j)].sqrt() - d[(i, j)]).powi(2);
            }
        }
        error_curve.push(if norm > 0.0 { diff.sqrt() / norm } else { diff.sqrt() });
    }
    let d_at_10pct = error_curve.iter().position(|&e| e < 0.1).map(|k| k + 1);
    Ok(EmbeddingResult {
        eigenvalues,
        error_curve,
        d_at_10pct,
        points: (0..m).map(|i| x.row(i).iter().copied().collect()).collect(),
    })
}
