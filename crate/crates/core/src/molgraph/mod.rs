//! Labeled, weighted molecular graphs.
//!
//! Vertices are heavy atoms; hydrogens live in the vertex label as a count.
//! Edges are covalent bonds stored once with `i < j`. Each edge keeps the
//! element length scale `sigma = r_i + r_j` it was built with so that the
//! adjacency weights can be recomputed for any `zeta` without the radii table.

mod adjacency;
mod radii;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adjacency::{build_adjacency, edge_weight, transition_matrix, AdjacencyConvention};
pub use radii::{edge_length, OrderFactors, RadiiTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("element {0} is missing from the radii table")]
    ElementMissingFromTable(Element),
    #[error("covalent radius for {element} is {radius} A, outside (0.2, 2.0)")]
    RadiusOutOfRange { element: Element, radius: f64 },
    #[error("order factor {name} = {value} must be positive")]
    InvalidOrderFactor { name: &'static str, value: f64 },
    #[error("vertex {0} has no neighbours")]
    IsolatedVertex(usize),
    #[error("stopping probability q = {0} must lie in (0, 1)")]
    InvalidStoppingProbability(f64),
    #[error("adjacency scale zeta = {0} must be positive")]
    InvalidZeta(f64),
    #[error("graph has no vertices")]
    Empty,
    #[error("graph is not connected")]
    Disconnected,
    #[error("edge ({0}, {1}) is invalid")]
    InvalidEdge(usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) has non-positive length")]
    NonPositiveLength(usize, usize),
    #[error("edge ({0}, {1}) is aromatic but not in a ring")]
    AromaticOutsideRing(usize, usize),
    #[error("vertex {0} carries more than 4 hydrogens")]
    TooManyHydrogens(usize),
}

impl GraphError {
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::ElementMissingFromTable(_) => "ElementMissingFromTable",
            GraphError::RadiusOutOfRange { .. } => "RadiusOutOfRange",
            GraphError::InvalidOrderFactor { .. } => "InvalidOrderFactor",
            GraphError::IsolatedVertex(_) => "IsolatedVertex",
            GraphError::InvalidStoppingProbability(_) => "InvalidStoppingProbability",
            GraphError::InvalidZeta(_) => "InvalidZeta",
            GraphError::Empty => "EmptyGraph",
            GraphError::Disconnected => "Disconnected",
            GraphError::InvalidEdge(..) => "InvalidEdge",
            GraphError::DuplicateEdge(..) => "DuplicateEdge",
            GraphError::NonPositiveLength(..) => "NonPositiveLength",
            GraphError::AromaticOutsideRing(..) => "AromaticOutsideRing",
            GraphError::TooManyHydrogens(_) => "TooManyHydrogens",
        }
    }
}

/// The ten supported elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    C,
    H,
    N,
    O,
    P,
    S,
    F,
    Cl,
    Br,
    I,
}

impl Element {
    pub const ALL: [Element; 10] = [
        Element::C,
        Element::H,
        Element::N,
        Element::O,
        Element::P,
        Element::S,
        Element::F,
        Element::Cl,
        Element::Br,
        Element::I,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::C => "C",
            Element::H => "H",
            Element::N => "N",
            Element::O => "O",
            Element::P => "P",
            Element::S => "S",
            Element::F => "F",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        Element::ALL.into_iter().find(|e| e.symbol() == symbol)
    }

    /// Allowed valences, ascending.
    pub fn valences(self) -> &'static [u8] {
        match self {
            Element::C => &[4],
            Element::N => &[3],
            Element::O => &[2],
            Element::P => &[3, 5],
            Element::S => &[2, 4, 6],
            Element::H | Element::F | Element::Cl | Element::Br | Element::I => &[1],
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hybridization {
    Sp,
    Sp2,
    Sp3,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexLabel {
    pub element: Element,
    pub charge: i8,
    pub hybridization: Hybridization,
    pub aromatic: bool,
    pub conjugated: bool,
    pub hydrogens: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondOrder {
    Single,
    Aromatic,
    Double,
    Triple,
}

impl BondOrder {
    pub fn value(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Aromatic => 1.5,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub order: BondOrder,
    pub aromatic: bool,
    pub conjugated: bool,
    pub ring: bool,
    /// Equilibrium bond length in angstrom.
    pub length: f64,
}

impl EdgeLabel {
    /// Equality of the discrete part of the label (everything but the length).
    pub fn same_kind(&self, other: &EdgeLabel) -> bool {
        self.order == other.order
            && self.aromatic == other.aromatic
            && self.conjugated == other.conjugated
            && self.ring == other.ring
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub label: EdgeLabel,
    /// Element length scale `r_i + r_j` in angstrom.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolecularGraph {
    pub id: String,
    vertices: Vec<VertexLabel>,
    edges: Vec<Edge>,
}

impl MolecularGraph {
    /// Builds a graph, normalizing edges to `i < j` and checking the structural
    /// invariants (valid endpoints, no duplicates, connected, positive lengths).
    pub fn new(
        id: impl Into<String>,
        vertices: Vec<VertexLabel>,
        edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        let n = vertices.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for (v, label) in vertices.iter().enumerate() {
            if label.hydrogens > 4 {
                return Err(GraphError::TooManyHydrogens(v));
            }
        }
        let mut seen = std::collections::HashSet::new();
        let mut edges = edges;
        for e in edges.iter_mut() {
            if e.i == e.j || e.i >= n || e.j >= n {
                return Err(GraphError::InvalidEdge(e.i, e.j));
            }
            if e.i > e.j {
                std::mem::swap(&mut e.i, &mut e.j);
            }
            if !seen.insert((e.i, e.j)) {
                return Err(GraphError::DuplicateEdge(e.i, e.j));
            }
            if !(e.label.length > 0.0) || !(e.sigma > 0.0) {
                return Err(GraphError::NonPositiveLength(e.i, e.j));
            }
            if e.label.aromatic && !e.label.ring {
                return Err(GraphError::AromaticOutsideRing(e.i, e.j));
            }
        }
        let graph = MolecularGraph {
            id: id.into(),
            vertices,
            edges,
        };
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    pub fn vertices(&self) -> &[VertexLabel] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Neighbour lists as `(neighbour, edge index)`.
    pub fn neighbours(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.i].push((e.j, k));
            adj[e.j].push((e.i, k));
        }
        adj
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.i == v || e.j == v).count()
    }

    /// Elements present in the molecule, with `H` included when any vertex
    /// carries hydrogens.
    pub fn element_set(&self) -> std::collections::BTreeSet<Element> {
        let mut set: std::collections::BTreeSet<Element> =
            self.vertices.iter().map(|v| v.element).collect();
        if self.vertices.iter().any(|v| v.hydrogens > 0) {
            set.insert(Element::H);
        }
        set
    }

    /// Relabels vertices so that old vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> MolecularGraph {
        assert_eq!(perm.len(), self.vertices.len());
        let mut vertices = self.vertices.clone();
        for (old, &new) in perm.iter().enumerate() {
            vertices[new] = self.vertices[old];
        }
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (perm[e.i], perm[e.j]);
                Edge {
                    i: a.min(b),
                    j: a.max(b),
                    ..*e
                }
            })
            .collect();
        MolecularGraph {
            id: self.id.clone(),
            vertices,
            edges,
        }
    }

    fn is_connected(&self) -> bool {
        let adj = self.neighbours();
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn carbon() -> VertexLabel {
        VertexLabel {
            element: Element::C,
            charge: 0,
            hybridization: Hybridization::Sp3,
            aromatic: false,
            conjugated: false,
            hydrogens: 3,
        }
    }

    fn single(i: usize, j: usize) -> Edge {
        Edge {
            i,
            j,
            label: EdgeLabel {
                order: BondOrder::Single,
                aromatic: false,
                conjugated: false,
                ring: false,
                length: 1.52,
            },
            sigma: 1.52,
        }
    }

    #[test]
    fn edges_are_stored_upper_triangular() {
        let g = MolecularGraph::new("x", vec![carbon(); 2], vec![single(1, 0)]).unwrap();
        assert_eq!((g.edges()[0].i, g.edges()[0].j), (0, 1));
    }

    #[test]
    fn rejects_structural_defects() {
        assert_eq!(
            MolecularGraph::new("x", vec![carbon(); 3], vec![single(0, 1)]),
            Err(GraphError::Disconnected)
        );
        assert_eq!(
            MolecularGraph::new("x", vec![carbon(); 2], vec![single(0, 1), single(1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            MolecularGraph::new("x", vec![carbon(); 2], vec![single(1, 1)]),
            Err(GraphError::InvalidEdge(1, 1))
        );
        assert_eq!(
            MolecularGraph::new("x", vec![], vec![]),
            Err(GraphError::Empty)
        );
    }

    #[test]
    fn element_symbols_round_trip() {
        for e in Element::ALL {
            assert_eq!(Element::from_symbol(e.symbol()), Some(e));
        }
        assert_eq!(Element::from_symbol("Na"), None);
    }
}
