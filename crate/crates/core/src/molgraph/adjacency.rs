use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{GraphError, MolecularGraph, RadiiTable};

/// How the squared bond length is scaled in the adjacency exponent.
///
/// `Squared` uses `(zeta * sigma)^2`, which keeps the exponent dimensionless.
/// `Unsquared` divides by `zeta * sigma` as literally printed in the original
/// formulation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjacencyConvention {
    #[default]
    Squared,
    Unsquared,
}

/// Adjacency weight of one bond of length `length` and scale `sigma`.
pub fn edge_weight(length: f64, sigma: f64, zeta: f64, convention: AdjacencyConvention) -> f64 {
    let scale = zeta * sigma;
    let denom = match convention {
        AdjacencyConvention::Squared => scale * scale,
        AdjacencyConvention::Unsquared => scale,
    };
    (-0.5 * length * length / denom).exp()
}

/// Symmetric weighted adjacency matrix with zero diagonal.
pub fn build_adjacency(
    graph: &MolecularGraph,
    zeta: f64,
    radii: &RadiiTable,
    convention: AdjacencyConvention,
) -> Result<DMatrix<f64>, GraphError> {
    if !(zeta > 0.0) {
        return Err(GraphError::InvalidZeta(zeta));
    }
    let n = graph.n_vertices();
    let mut a = DMatrix::zeros(n, n);
    for e in graph.edges() {
        let sigma = radii.radius_sum(graph.vertices()[e.i].element, graph.vertices()[e.j].element)?;
        let w = edge_weight(e.label.length, sigma, zeta, convention);
        a[(e.i, e.j)] = w;
        a[(e.j, e.i)] = w;
    }
    Ok(a)
}

/// Random-walk transition matrix `(1 - q) D^-1 A`; every row sums to `1 - q`.
pub fn transition_matrix(a: &DMatrix<f64>, q: f64) -> Result<DMatrix<f64>, GraphError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(GraphError::InvalidStoppingProbability(q));
    }
    let mut p = a.clone();
    for (i, mut row) in p.row_iter_mut().enumerate() {
        let degree: f64 = row.iter().sum();
        if !(degree > 0.0) {
            return Err(GraphError::IsolatedVertex(i));
        }
        row *= (1.0 - q) / degree;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_carbon_bond_weight() {
        let w = edge_weight(1.52, 1.52, 1.0, AdjacencyConvention::Squared);
        assert!((w - (-0.5f64).exp()).abs() < 1e-15);
        assert!((w - 0.6065).abs() < 1e-4);
    }

    #[test]
    fn large_zeta_saturates() {
        for conv in [AdjacencyConvention::Squared, AdjacencyConvention::Unsquared] {
            let w = edge_weight(1.52, 1.52, 1e9, conv);
            assert!((w - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn unsquared_convention_differs() {
        let sq = edge_weight(1.3224, 1.52, 0.5, AdjacencyConvention::Squared);
        let un = edge_weight(1.3224, 1.52, 0.5, AdjacencyConvention::Unsquared);
        assert!((un - (-0.5 * 1.3224f64.powi(2) / 0.76).exp()).abs() < 1e-15);
        assert!((sq - un).abs() > 1e-3);
    }

    #[test]
    fn single_edge_transition() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.37, 0.37, 0.0]);
        let p = transition_matrix(&a, 0.25).unwrap();
        assert_eq!(p, DMatrix::from_row_slice(2, 2, &[0.0, 0.75, 0.75, 0.0]));
    }

    #[test]
    fn star_transition_rows() {
        let mut a = DMatrix::zeros(4, 4);
        for leaf in 1..4 {
            a[(0, leaf)] = 0.8;
            a[(leaf, 0)] = 0.8;
        }
        let p = transition_matrix(&a, 0.1).unwrap();
        for leaf in 1..4 {
            assert!((p[(0, leaf)] - 0.3).abs() < 1e-15);
            assert!((p[(leaf, 0)] - 0.9).abs() < 1e-15);
        }
        for row in p.row_iter() {
            assert!((row.sum() - 0.9).abs() < 1e-14);
        }
    }

    #[test]
    fn isolated_vertex_and_bad_q() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(transition_matrix(&a, 0.1), Err(GraphError::IsolatedVertex(2)));
        assert_eq!(
            transition_matrix(&a, 1.0),
            Err(GraphError::InvalidStoppingProbability(1.0))
        );
    }
}
