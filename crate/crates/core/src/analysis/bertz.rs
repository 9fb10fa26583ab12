use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::molgraph::{BondOrder, MolecularGraph};

use super::histogram::{histogram, Binning, Histogram};
use super::AnalysisError;

/// Unordered pairs of distinct edges (by index, smaller first) that share a
/// vertex.
pub fn adjacent_edge_pairs(graph: &MolecularGraph) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for incident in graph.neighbours() {
        for (a, &(_, e)) in incident.iter().enumerate() {
            for &(_, f) in &incident[a + 1..] {
                pairs.push((e.min(f), e.max(f)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Color refinement: a vertex's color is the rank of (own color, sorted
/// neighbour colors) among all such signatures, iterated until the number of
/// colors stops growing. Starts from the full vertex labels, so colors are
/// canonical: equal for vertices related by an automorphism and independent
/// of vertex numbering.
pub fn refine_colors(graph: &MolecularGraph) -> Vec<usize> {
    let adj = graph.neighbours();
    let mut colors = rank(graph.vertices().to_vec());
    let mut distinct = count_distinct(&colors);
    loop {
        let signatures: Vec<(usize, Vec<usize>)> = adj
            .iter()
            .enumerate()
            .map(|(v, nb)| {
                let mut around: Vec<usize> = nb.iter().map(|&(u, _)| colors[u]).collect();
                around.sort_unstable();
                (colors[v], around)
            })
            .collect();
        let next = rank(signatures);
        let d = count_distinct(&next);
        colors = next;
        if d == distinct {
            return colors;
        }
        distinct = d;
    }
}

fn rank<T: Ord + Clone>(keys: Vec<T>) -> Vec<usize> {
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present"))
        .collect()
}

fn count_distinct(colors: &[usize]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

type EdgeKind = (BondOrder, bool, bool, bool);
type PairSignature = (usize, [(usize, EdgeKind); 2]);

fn pair_signature(graph: &MolecularGraph, colors: &[usize], (e, f): (usize, usize)) -> PairSignature {
    let (ea, eb) = (&graph.edges()[e], &graph.edges()[f]);
    let shared = if ea.i == eb.i || ea.i == eb.j { ea.i } else { ea.j };
    let end = |edge: &crate::molgraph::Edge| -> (usize, EdgeKind) {
        let other = if edge.i == shared { edge.j } else { edge.i };
        let l = edge.label;
        (colors[other], (l.order, l.aromatic, l.conjugated, l.ring))
    };
    let mut ends = [end(ea), end(eb)];
    ends.sort();
    (colors[shared], ends)
}

/// Groups adjacent-edge pairs into symmetry classes by canonical signature:
/// the color of the shared atom plus the colors and bond labels of the two
/// outer atoms. Classes come out in signature order.
pub fn symmetry_classes(pairs: &[(usize, usize)], graph: &MolecularGraph) -> Vec<Vec<(usize, usize)>> {
    let colors = refine_colors(graph);
    let mut classes: BTreeMap<PairSignature, Vec<(usize, usize)>> = BTreeMap::new();
    for &p in pairs {
        classes.entry(pair_signature(graph, &colors, p)).or_default().push(p);
    }
    classes.into_values().collect()
}

fn n_log2_n(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * (n as f64).log2()
    }
}

/// `2 n log2 n - sum_i n_i log2 n_i` over symmetry classes of adjacent-edge
/// pairs, in bits.
pub fn bertz_index(graph: &MolecularGraph) -> f64 {
    let pairs = adjacent_edge_pairs(graph);
    let classes = symmetry_classes(&pairs, graph);
    let bci = 2.0 * n_log2_n(pairs.len()) - classes.iter().map(|c| n_log2_n(c.len())).sum::<f64>();
    bci.max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BciReport {
    pub ids: Vec<String>,
    pub values: Vec<f64>,
    pub mean: f64,
    pub histogram: Histogram,
}

pub fn bertz_report(graphs: &[MolecularGraph], binning: Binning) -> Result<BciReport, AnalysisError> {
    if graphs.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let values: Vec<f64> = graphs.iter().map(bertz_index).collect();
    Ok(BciReport {
        ids: graphs.iter().map(|g| g.id.clone()).collect(),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        histogram: histogram(&values, binning)?,
        values,
    })
}
