//! Truncated path-sum evaluation of the kernel by explicit enumeration.
//!
//! Used as a test oracle. Walks of each graph are enumerated level by level
//! and merged when they carry the same label sequence (the similarity of two
//! walks depends on their labels only), which keeps small molecules tractable
//! up to twelve steps. No linear system is involved.

use std::collections::BTreeMap;

use crate::molgraph::{edge_weight, BondOrder, EdgeLabel, MolecularGraph, VertexLabel};

use super::{edge_kernel, vertex_kernel, KernelError, KernelHyperparameters};

pub const ORACLE_MAX_PRODUCT: usize = 36;
pub const ORACLE_MAX_LENGTH: usize = 12;

type EdgeKey = (BondOrder, bool, bool, bool, u64);

fn edge_key(e: &EdgeLabel) -> EdgeKey {
    (e.order, e.aromatic, e.conjugated, e.ring, e.length.to_bits())
}

/// One distinct label-sequence prefix.
struct Node {
    vertex: VertexLabel,
    edge_in: Option<EdgeLabel>,
    /// Probability mass of walks with this prefix, by end vertex.
    ends: BTreeMap<usize, f64>,
    children: Vec<usize>,
}

struct WalkTrie {
    nodes: Vec<Node>,
    roots: Vec<usize>,
    q: f64,
}

impl WalkTrie {
    fn build(g: &MolecularGraph, hyper: &KernelHyperparameters, max_len: usize) -> WalkTrie {
        let n = g.n_vertices();
        let mut out: Vec<Vec<(usize, f64, EdgeLabel)>> = vec![Vec::new(); n];
        for e in g.edges() {
            let w = edge_weight(e.label.length, e.sigma, hyper.zeta, hyper.adjacency);
            out[e.i].push((e.j, w, e.label));
            out[e.j].push((e.i, w, e.label));
        }
        let degree: Vec<f64> = out.iter().map(|s| s.iter().map(|x| x.1).sum()).collect();

        let mut nodes: Vec<Node> = Vec::new();
        let mut roots = Vec::new();
        let mut by_label: BTreeMap<VertexLabel, usize> = BTreeMap::new();
        for (v, label) in g.vertices().iter().enumerate() {
            let idx = *by_label.entry(*label).or_insert_with(|| {
                nodes.push(Node {
                    vertex: *label,
                    edge_in: None,
                    ends: BTreeMap::new(),
                    children: Vec::new(),
                });
                roots.push(nodes.len() - 1);
                nodes.len() - 1
            });
            *nodes[idx].ends.entry(v).or_insert(0.0) += 1.0 / n as f64;
        }

        let mut level = roots.clone();
        for _ in 1..max_len {
            let mut next_level = Vec::new();
            for &parent in &level {
                let mut children: BTreeMap<(EdgeKey, VertexLabel), usize> = BTreeMap::new();
                let ends: Vec<(usize, f64)> =
                    nodes[parent].ends.iter().map(|(&v, &w)| (v, w)).collect();
                for (v, w) in ends {
                    for &(u, a, label) in &out[v] {
                        let p = (1.0 - hyper.q) * a / degree[v];
                        let key = (edge_key(&label), g.vertices()[u]);
                        let child = *children.entry(key).or_insert_with(|| {
                            nodes.push(Node {
                                vertex: g.vertices()[u],
                                edge_in: Some(label),
                                ends: BTreeMap::new(),
                                children: Vec::new(),
                            });
                            nodes.len() - 1
                        });
                        *nodes[child].ends.entry(u).or_insert(0.0) += w * p;
                    }
                }
                let kids: Vec<usize> = children.into_values().collect();
                next_level.extend(&kids);
                nodes[parent].children = kids;
            }
            level = next_level;
        }
        WalkTrie {
            nodes,
            roots,
            q: hyper.q,
        }
    }

    fn stop_mass(&self, node: usize) -> f64 {
        self.q * self.nodes[node].ends.values().sum::<f64>()
    }
}

/// Sum over all walk pairs of length `1..=max_len` (number of vertices).
pub fn brute_force_kernel(
    a: &MolecularGraph,
    b: &MolecularGraph,
    hyper: &KernelHyperparameters,
    max_len: usize,
) -> Result<f64, KernelError> {
    hyper.validate()?;
    let product = a.n_vertices() * b.n_vertices();
    if product > ORACLE_MAX_PRODUCT || max_len == 0 || max_len > ORACLE_MAX_LENGTH {
        return Err(KernelError::OracleScaleExceeded {
            product,
            length: max_len,
            max: ORACLE_MAX_PRODUCT,
            max_length: ORACLE_MAX_LENGTH,
        });
    }
    let ta = WalkTrie::build(a, hyper, max_len);
    let tb = WalkTrie::build(b, hyper, max_len);
    let mut total = 0.0;
    for &ra in &ta.roots {
        for &rb in &tb.roots {
            let sim = vertex_kernel(&ta.nodes[ra].vertex, &tb.nodes[rb].vertex, hyper.nu);
            accumulate(&ta, &tb, ra, rb, sim, hyper, &mut total);
        }
    }
    Ok(total)
}

fn accumulate(
    ta: &WalkTrie,
    tb: &WalkTrie,
    na: usize,
    nb: usize,
    sim: f64,
    hyper: &KernelHyperparameters,
    total: &mut f64,
) {
    *total += sim * ta.stop_mass(na) * tb.stop_mass(nb);
    for &ca in &ta.nodes[na].children {
        let (va, ea) = (&ta.nodes[ca].vertex, ta.nodes[ca].edge_in.expect("child edge"));
        for &cb in &tb.nodes[nb].children {
            let (vb, eb) = (&tb.nodes[cb].vertex, tb.nodes[cb].edge_in.expect("child edge"));
            let step = vertex_kernel(va, vb, hyper.nu)
                * edge_kernel(&ea, &eb, hyper.lambda, hyper.edge_mismatch);
            accumulate(ta, tb, ca, cb, sim * step, hyper, total);
        }
    }
}
