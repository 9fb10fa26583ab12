use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::molgraph::MolecularGraph;

use super::solver::{evaluate, PreparedGraph};
use super::{normalize, KernelError, KernelHyperparameters};

/// A square kernel matrix together with how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub values: DMatrix<f64>,
    pub normalized: bool,
    pub hyper: KernelHyperparameters,
}

pub fn prepare_all(graphs: &[MolecularGraph], hyper: &KernelHyperparameters) -> Vec<PreparedGraph> {
    graphs
        .par_iter()
        .map(|g| PreparedGraph::new(g, hyper))
        .collect()
}

/// `K(G, G)` for every graph; fails on a non-positive value.
pub fn self_kernels(
    graphs: &[MolecularGraph],
    prepared: &[PreparedGraph],
    hyper: &KernelHyperparameters,
) -> Result<Vec<f64>, KernelError> {
    let values: Vec<f64> = prepared
        .par_iter()
        .map(|p| evaluate(p, p, hyper))
        .collect::<Result<_, _>>()?;
    for (g, &k) in graphs.iter().zip(&values) {
        if !(k > 0.0) {
            return Err(KernelError::DegenerateSelfKernel { id: g.id.clone() });
        }
    }
    Ok(values)
}

/// Symmetric kernel matrix over `graphs`. Only `i < j` entries are evaluated;
/// each entry is produced by exactly one task, so the result does not depend
/// on the thread count.
pub fn kernel_matrix(
    graphs: &[MolecularGraph],
    hyper: &KernelHyperparameters,
    normalized: bool,
) -> Result<KernelMatrix, KernelError> {
    if graphs.is_empty() {
        return Err(KernelError::EmptyInput);
    }
    hyper.validate()?;
    let prepared = prepare_all(graphs, hyper);
    let diag = self_kernels(graphs, &prepared, hyper)?;
    let values = square_from_prepared(&prepared, &diag, hyper, normalized)?;
    Ok(KernelMatrix {
        values,
        normalized,
        hyper: *hyper,
    })
}

pub(crate) fn square_from_prepared(
    prepared: &[PreparedGraph],
    diag: &[f64],
    hyper: &KernelHyperparameters,
    normalized: bool,
) -> Result<DMatrix<f64>, KernelError> {
    let n = prepared.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let upper: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| evaluate(&prepared[i], &prepared[j], hyper))
        .collect::<Result<_, _>>()?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = if normalized { 1.0 } else { diag[i] };
    }
    for (&(i, j), &k) in pairs.iter().zip(&upper) {
        let v = if normalized {
            normalize(k, diag[i], diag[j])
        } else {
            k
        };
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(m)
}

pub(crate) fn cross_from_prepared(
    rows: &[PreparedGraph],
    row_diag: &[f64],
    cols: &[PreparedGraph],
    col_diag: &[f64],
    hyper: &KernelHyperparameters,
    normalized: bool,
) -> Result<DMatrix<f64>, KernelError> {
    let (n, m) = (rows.len(), cols.len());
    let values: Vec<f64> = (0..n * m)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / m, idx % m);
            let k = evaluate(&rows[i], &cols[j], hyper)?;
            Ok(if normalized {
                normalize(k, row_diag[i], col_diag[j])
            } else {
                k
            })
        })
        .collect::<Result<_, KernelError>>()?;
    Ok(DMatrix::from_row_slice(n, m, &values))
}

/// Rectangular kernel matrix with rows from `a` and columns from `b`.
pub fn cross_kernel_matrix(
    a: &[MolecularGraph],
    b: &[MolecularGraph],
    hyper: &KernelHyperparameters,
    normalized: bool,
) -> Result<DMatrix<f64>, KernelError> {
    if a.is_empty() || b.is_empty() {
        return Err(KernelError::EmptyInput);
    }
    hyper.validate()?;
    let pa = prepare_all(a, hyper);
    let pb = prepare_all(b, hyper);
    let da = self_kernels(a, &pa, hyper)?;
    let db = self_kernels(b, &pb, hyper)?;
    cross_from_prepared(&pa, &da, &pb, &db, hyper, normalized)
}
