//! Marginalized graph kernel.
//!
//! `K(G, G')` is the expected similarity of label sequences seen along two
//! simultaneous random walks. Walks start uniformly (`p_s = 1/n`), stop with
//! probability `q` at every step and otherwise move along a bond with
//! probability `(1 - q) A_ij / sum_k A_ik`. Vertices are compared with
//! [`vertex_kernel`], bonds with [`edge_kernel`].
//!
//! The infinite path sum reduces to the linear system
//! `(I - M) r = q^2 1` on the product graph with
//! `M[(i,j),(k,l)] = p_t(k|i) p'_t(l|j) K_v(k,l) K_e(e_ik, e'_jl)`, and
//! `K = sum_ij p_s(i) p'_s(j) K_v(i,j) r_ij`. Three solvers are provided: a
//! dense Cholesky factorization of the symmetrized system, preconditioned
//! conjugate gradients on the same system and a fixed-point sweep
//! `r <- b + M r`. The last two apply `M` as an operator.

mod matrix;
mod oracle;
mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{AdjacencyConvention, EdgeLabel, GraphError, MolecularGraph, VertexLabel};

pub(crate) use matrix::{cross_from_prepared, square_from_prepared};
pub use matrix::{cross_kernel_matrix, kernel_matrix, prepare_all, self_kernels, KernelMatrix};
pub use oracle::{brute_force_kernel, ORACLE_MAX_LENGTH, ORACLE_MAX_PRODUCT};
pub use solver::PreparedGraph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("hyperparameter {name} = {value} is out of range ({range})")]
    InvalidHyperparameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("fixed-point iteration did not converge within {iterations} iterations")]
    FixedPointDivergence { iterations: usize },
    #[error("product-graph system is not positive definite")]
    SingularSystem,
    #[error("self-kernel of graph {id:?} is not positive")]
    DegenerateSelfKernel { id: String },
    #[error("oracle limited to n*n' <= {max} and path length <= {max_length}; got n*n' = {product}, L = {length}")]
    OracleScaleExceeded {
        product: usize,
        length: usize,
        max: usize,
        max_length: usize,
    },
    #[error("no graphs given")]
    EmptyInput,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl KernelError {
    pub fn code(&self) -> &'static str {
        match self {
            KernelError::InvalidHyperparameter { .. } => "InvalidHyperparameter",
            KernelError::FixedPointDivergence { .. } => "FixedPointDivergence",
            KernelError::SingularSystem => "SingularSystem",
            KernelError::DegenerateSelfKernel { .. } => "DegenerateSelfKernel",
            KernelError::OracleScaleExceeded { .. } => "OracleScaleExceeded",
            KernelError::EmptyInput => "EmptyInput",
            KernelError::Graph(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    /// Dense for product graphs up to [`DENSE_LIMIT`] vertices, conjugate
    /// gradients above.
    #[default]
    Auto,
    Dense,
    FixedPoint,
    /// Preconditioned conjugate gradients on the symmetrized system.
    ConjugateGradient,
}

/// Largest product-graph size handled by [`Solver::Auto`] with the dense solver.
pub const DENSE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelHyperparameters {
    /// Vertex mismatch similarity, in (0, 1).
    pub nu: f64,
    /// Edge-length scale in angstrom.
    pub lambda: f64,
    /// Adjacency length-scale multiplier.
    pub zeta: f64,
    /// Stopping probability, in (0, 1).
    pub q: f64,
    /// Factor applied when the discrete edge labels differ, in (0, 1].
    #[serde(default = "default_edge_mismatch")]
    pub edge_mismatch: f64,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default, rename = "adjacency_exponent_convention")]
    pub adjacency: AdjacencyConvention,
}

fn default_edge_mismatch() -> f64 {
    1.0
}

fn default_tolerance() -> f64 {
    1e-12
}

fn default_max_iterations() -> usize {
    10_000
}

impl Default for KernelHyperparameters {
    fn default() -> Self {
        KernelHyperparameters {
            nu: 0.3,
            lambda: 0.1,
            zeta: 1.0,
            q: 0.05,
            edge_mismatch: default_edge_mismatch(),
            solver: Solver::Auto,
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
            adjacency: AdjacencyConvention::Squared,
        }
    }
}

impl KernelHyperparameters {
    pub fn new(nu: f64, lambda: f64, zeta: f64, q: f64) -> Self {
        KernelHyperparameters {
            nu,
            lambda,
            zeta,
            q,
            ..Default::default()
        }
    }

    pub fn with_solver(mut self, solver: Solver) -> Self {
        self.solver = solver;
        self
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let check = |name, value: f64, ok: bool, range| {
            if ok {
                Ok(())
            } else {
                Err(KernelError::InvalidHyperparameter { name, value, range })
            }
        };
        check("nu", self.nu, self.nu > 0.0 && self.nu < 1.0, "(0, 1)")?;
        check("lambda", self.lambda, self.lambda > 0.0 && self.lambda.is_finite(), "> 0")?;
        check("zeta", self.zeta, self.zeta > 0.0 && self.zeta.is_finite(), "> 0")?;
        check("q", self.q, self.q > 0.0 && self.q < 1.0, "(0, 1)")?;
        check(
            "edge_mismatch",
            self.edge_mismatch,
            self.edge_mismatch > 0.0 && self.edge_mismatch <= 1.0,
            "(0, 1]",
        )?;
        check("tolerance", self.tolerance, self.tolerance > 0.0, "> 0")?;
        check(
            "max_iterations",
            self.max_iterations as f64,
            self.max_iterations > 0,
            ">= 1",
        )
    }
}

/// 1 for identical labels, `nu` otherwise.
pub fn vertex_kernel(a: &VertexLabel, b: &VertexLabel, nu: f64) -> f64 {
    if a == b {
        1.0
    } else {
        nu
    }
}

/// Gaussian on bond length, scaled by `edge_mismatch` when the discrete
/// labels differ.
pub fn edge_kernel(a: &EdgeLabel, b: &EdgeLabel, lambda: f64, edge_mismatch: f64) -> f64 {
    let d = a.length - b.length;
    let base = (-d * d / (2.0 * lambda * lambda)).exp();
    if a.same_kind(b) {
        base
    } else {
        base * edge_mismatch
    }
}

/// Unnormalized kernel value.
pub fn mgk_raw(
    a: &MolecularGraph,
    b: &MolecularGraph,
    hyper: &KernelHyperparameters,
) -> Result<f64, KernelError> {
    hyper.validate()?;
    let pa = PreparedGraph::new(a, hyper);
    let pb = PreparedGraph::new(b, hyper);
    solver::evaluate(&pa, &pb, hyper)
}

/// Cosine-normalized kernel `K(a,b) / sqrt(K(a,a) K(b,b))`.
pub fn mgk_normalized(
    a: &MolecularGraph,
    b: &MolecularGraph,
    hyper: &KernelHyperparameters,
) -> Result<f64, KernelError> {
    hyper.validate()?;
    let pa = PreparedGraph::new(a, hyper);
    let pb = PreparedGraph::new(b, hyper);
    let kaa = solver::self_kernel(&pa, hyper)?;
    let kbb = solver::self_kernel(&pb, hyper)?;
    let kab = solver::evaluate(&pa, &pb, hyper)?;
    Ok(normalize(kab, kaa, kbb))
}

pub(crate) fn normalize(kab: f64, kaa: f64, kbb: f64) -> f64 {
    (kab / (kaa * kbb).sqrt()).clamp(0.0, 1.0)
}

/// Kernel-induced metric `sqrt(2 - 2 K^)`, in `[0, sqrt 2]`.
pub fn distance_from_normalized(k: f64) -> f64 {
    (2.0 - 2.0 * k).max(0.0).sqrt()
}

pub fn graph_distance(
    a: &MolecularGraph,
    b: &MolecularGraph,
    hyper: &KernelHyperparameters,
) -> Result<f64, KernelError> {
    Ok(distance_from_normalized(mgk_normalized(a, b, hyper)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{BondOrder, Element, Hybridization};

    fn label(element: Element) -> VertexLabel {
        VertexLabel {
            element,
            charge: 0,
            hybridization: Hybridization::Sp3,
            aromatic: false,
            conjugated: false,
            hydrogens: 0,
        }
    }

    fn bond(length: f64) -> EdgeLabel {
        EdgeLabel {
            order: BondOrder::Single,
            aromatic: false,
            conjugated: false,
            ring: false,
            length,
        }
    }

    #[test]
    fn vertex_kernel_branches() {
        let c = label(Element::C);
        let o = label(Element::O);
        assert_eq!(vertex_kernel(&c, &c, 0.3), 1.0);
        assert_eq!(vertex_kernel(&c, &o, 0.3), 0.3);
        assert_eq!(vertex_kernel(&o, &c, 0.3), vertex_kernel(&c, &o, 0.3));
        let mut charged = c;
        charged.charge = 1;
        assert_eq!(vertex_kernel(&c, &charged, 0.4), 0.4);
    }

    #[test]
    fn edge_kernel_values() {
        assert_eq!(edge_kernel(&bond(1.52), &bond(1.52), 0.2, 1.0), 1.0);
        let k = edge_kernel(&bond(1.52), &bond(1.32), 0.2, 1.0);
        assert!((k - (-0.5f64).exp()).abs() < 1e-12);
        assert!(edge_kernel(&bond(1.0), &bond(100.0), 0.2, 1.0) < 1e-300);
        let mut dbl = bond(1.52);
        dbl.order = BondOrder::Double;
        assert_eq!(edge_kernel(&bond(1.52), &dbl, 0.2, 1.0), 1.0);
        assert_eq!(edge_kernel(&bond(1.52), &dbl, 0.2, 0.5), 0.5);
    }

    #[test]
    fn hyperparameter_validation() {
        assert!(KernelHyperparameters::default().validate().is_ok());
        for bad in [
            KernelHyperparameters::new(1.0, 0.1, 1.0, 0.1),
            KernelHyperparameters::new(0.3, 0.0, 1.0, 0.1),
            KernelHyperparameters::new(0.3, 0.1, -1.0, 0.1),
            KernelHyperparameters::new(0.3, 0.1, 1.0, 1.0),
            KernelHyperparameters {
                edge_mismatch: 0.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                bad.validate(),
                Err(KernelError::InvalidHyperparameter { .. })
            ));
        }
    }

    #[test]
    fn distance_values() {
        assert_eq!(distance_from_normalized(1.0), 0.0);
        assert!((distance_from_normalized(0.5) - 1.0).abs() < 1e-15);
        assert!((distance_from_normalized(0.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hyperparameters_json_defaults() {
        let h: KernelHyperparameters =
            serde_json::from_str(r#"{"nu":0.5,"lambda":0.2,"zeta":1.0,"q":0.1,"solver":"fixed-point"}"#)
                .unwrap();
        assert_eq!(h.solver, Solver::FixedPoint);
        assert_eq!(h.edge_mismatch, 1.0);
        assert_eq!(h.tolerance, 1e-12);
        assert_eq!(h.max_iterations, 10_000);
    }
}
