use crate::molgraph::{
    edge_length, BondOrder, Edge, EdgeLabel, Element, Hybridization, MolecularGraph, RadiiTable,
    VertexLabel,
};

use super::{BondSymbol, RawMolecule, SmilesError};

/// [`perceive_with`] using the default radii table.
pub fn perceive(raw: &RawMolecule) -> Result<MolecularGraph, SmilesError> {
    perceive_with(raw, &RadiiTable::default())
}

/// Derives vertex and edge labels for the heavy-atom graph.
///
/// Explicit hydrogen atoms are folded into their neighbour's hydrogen count.
/// Ring membership comes from bridge detection: a bond is in a ring iff it is
/// not a bridge. Aromaticity is taken from lowercase notation.
pub fn perceive_with(raw: &RawMolecule, radii: &RadiiTable) -> Result<MolecularGraph, SmilesError> {
    let heavy: Vec<usize> = (0..raw.atoms.len())
        .filter(|&a| raw.atoms[a].element != Element::H)
        .collect();
    if heavy.is_empty() {
        return Err(SmilesError::NoHeavyAtoms);
    }
    let mut index = vec![usize::MAX; raw.atoms.len()];
    for (new, &old) in heavy.iter().enumerate() {
        index[old] = new;
    }
    let n = heavy.len();

    let mut folded = vec![0u8; n];
    for (h, atom) in raw.atoms.iter().enumerate() {
        if atom.element != Element::H {
            continue;
        }
        let bonds: Vec<_> = raw.bonds.iter().filter(|b| b.a == h || b.b == h).collect();
        let foldable = atom.charge == 0
            && atom.bracket_hydrogens.unwrap_or(0) == 0
            && bonds.len() == 1
            && matches!(bonds[0].symbol, BondSymbol::Single | BondSymbol::Implicit);
        let other = bonds.first().map(|b| if b.a == h { b.b } else { b.a });
        match other {
            Some(o) if foldable && raw.atoms[o].element != Element::H => folded[index[o]] += 1,
            _ => return Err(SmilesError::ExplicitHydrogen { atom: h }),
        }
    }

    let bonds: Vec<(usize, usize, BondSymbol)> = raw
        .bonds
        .iter()
        .filter(|b| index[b.a] != usize::MAX && index[b.b] != usize::MAX)
        .map(|b| (index[b.a], index[b.b], b.symbol))
        .collect();
    let mut adj = vec![Vec::new(); n];
    for (k, &(a, b, _)) in bonds.iter().enumerate() {
        adj[a].push((b, k));
        adj[b].push((a, k));
    }
    let bridge = find_bridges(n, &adj, bonds.len());
    let ring: Vec<bool> = bridge.iter().map(|&b| !b).collect();

    let atom = |v: usize| &raw.atoms[heavy[v]];
    let orders: Vec<BondOrder> = bonds
        .iter()
        .enumerate()
        .map(|(k, &(a, b, symbol))| match symbol {
            BondSymbol::Single => BondOrder::Single,
            BondSymbol::Double => BondOrder::Double,
            BondSymbol::Triple => BondOrder::Triple,
            BondSymbol::Aromatic if ring[k] => BondOrder::Aromatic,
            BondSymbol::Implicit if ring[k] && atom(a).aromatic && atom(b).aromatic => {
                BondOrder::Aromatic
            }
            BondSymbol::Aromatic | BondSymbol::Implicit => BondOrder::Single,
        })
        .collect();

    let is_multiple = |o: BondOrder| o != BondOrder::Single;
    let carries_multiple: Vec<bool> = (0..n)
        .map(|v| adj[v].iter().any(|&(_, k)| is_multiple(orders[k])))
        .collect();
    let single_conjugated: Vec<bool> = bonds
        .iter()
        .enumerate()
        .map(|(k, &(a, b, _))| orders[k] == BondOrder::Single && carries_multiple[a] && carries_multiple[b])
        .collect();
    // a multiple bond is conjugated when it touches another multiple bond or
    // a conjugated single bond (C=C-C=C: all three bonds)
    let conjugated: Vec<bool> = bonds
        .iter()
        .enumerate()
        .map(|(k, &(a, b, _))| match orders[k] {
            BondOrder::Aromatic => true,
            BondOrder::Double | BondOrder::Triple => [a, b].iter().any(|&v| {
                adj[v]
                    .iter()
                    .any(|&(_, other)| other != k && (is_multiple(orders[other]) || single_conjugated[other]))
            }),
            BondOrder::Single => single_conjugated[k],
        })
        .collect();

    let mut vertices = Vec::with_capacity(n);
    for v in 0..n {
        let a = atom(v);
        let incident = || adj[v].iter().map(|&(_, k)| orders[k]);
        let has_aromatic_bond = incident().any(|o| o == BondOrder::Aromatic);
        let hydrogens = match a.bracket_hydrogens {
            Some(h) => h as u32 + folded[v] as u32,
            None => {
                let bond_sum: u32 = incident()
                    .map(|o| match o {
                        BondOrder::Single | BondOrder::Aromatic => 1,
                        BondOrder::Double => 2,
                        BondOrder::Triple => 3,
                    })
                    .sum::<u32>()
                    + folded[v] as u32;
                let valences = a.element.valences();
                let exceeded = SmilesError::ValenceExceeded {
                    atom: heavy[v],
                    element: a.element,
                };
                let implicit = if a.aromatic || has_aromatic_bond {
                    if bond_sum > *valences.last().expect("non-empty") as u32 {
                        return Err(exceeded);
                    }
                    // one valence unit goes to the pi system when it fits
                    (valences[0] as u32).saturating_sub(bond_sum + 1)
                } else {
                    let target = valences
                        .iter()
                        .map(|&x| x as u32)
                        .find(|&x| x >= bond_sum)
                        .ok_or(exceeded)?;
                    target - bond_sum
                };
                implicit + folded[v] as u32
            }
        };
        let doubles = incident().filter(|&o| o == BondOrder::Double).count();
        let triples = incident().filter(|&o| o == BondOrder::Triple).count();
        let hybridization = if triples > 0 || doubles >= 2 {
            Hybridization::Sp
        } else if a.aromatic || has_aromatic_bond || doubles == 1 {
            Hybridization::Sp2
        } else {
            Hybridization::Sp3
        };
        vertices.push(VertexLabel {
            element: a.element,
            charge: a.charge,
            hybridization,
            aromatic: a.aromatic,
            conjugated: adj[v].iter().any(|&(_, k)| conjugated[k]),
            hydrogens: hydrogens.min(u8::MAX as u32) as u8,
        });
    }

    let mut edges = Vec::with_capacity(bonds.len());
    for (k, &(a, b, _)) in bonds.iter().enumerate() {
        let (ea, eb) = (vertices[a].element, vertices[b].element);
        edges.push(Edge {
            i: a,
            j: b,
            label: EdgeLabel {
                order: orders[k],
                aromatic: orders[k] == BondOrder::Aromatic,
                conjugated: conjugated[k],
                ring: ring[k],
                length: edge_length(orders[k], ea, eb, radii)?,
            },
            sigma: radii.radius_sum(ea, eb)?,
        });
    }
    Ok(MolecularGraph::new("", vertices, edges)?)
}

/// Marks bridges (edges on no cycle) with an iterative lowlink DFS.
fn find_bridges(n: usize, adj: &[Vec<(usize, usize)>], n_edges: usize) -> Vec<bool> {
    let mut bridge = vec![false; n_edges];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, edge used to enter it, next neighbour offset)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (v, parent_edge, ref mut next)) = stack.last_mut() {
            if let Some(&(u, k)) = adj[v].get(*next) {
                *next += 1;
                if k == parent_edge {
                    continue;
                }
                if disc[u] == usize::MAX {
                    disc[u] = time;
                    low[u] = time;
                    time += 1;
                    stack.push((u, k, 0));
                } else {
                    low[v] = low[v].min(disc[u]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        bridge[parent_edge] = true;
                    }
                }
            }
        }
    }
    bridge
}

#[cfg(test)]
mod tests {
    use super::super::{parse, tokenize};
    use super::*;

    fn graph(s: &str) -> MolecularGraph {
        perceive(&parse(&tokenize(s).unwrap()).unwrap()).unwrap()
    }

    fn hydrogens(g: &MolecularGraph) -> Vec<u8> {
        g.vertices().iter().map(|v| v.hydrogens).collect()
    }

    #[test]
    fn ethanol() {
        let g = graph("CCO");
        assert_eq!(hydrogens(&g), vec![3, 2, 1]);
        assert!(g
            .vertices()
            .iter()
            .all(|v| v.hybridization == Hybridization::Sp3 && !v.conjugated));
        assert!(g.edges().iter().all(|e| !e.label.ring));
    }

    #[test]
    fn benzene() {
        let g = graph("c1ccccc1");
        assert_eq!(hydrogens(&g), vec![1; 6]);
        for v in g.vertices() {
            assert!(v.aromatic && v.conjugated);
            assert_eq!(v.hybridization, Hybridization::Sp2);
        }
        assert_eq!(g.edges().len(), 6);
        for e in g.edges() {
            assert_eq!(e.label.order, BondOrder::Aromatic);
            assert_eq!(e.label.order.value(), 1.5);
            assert!(e.label.ring && e.label.conjugated && e.label.aromatic);
        }
    }

    #[test]
    fn formaldehyde() {
        let g = graph("C=O");
        assert_eq!(hydrogens(&g), vec![2, 0]);
        assert_eq!(g.vertices()[0].hybridization, Hybridization::Sp2);
        assert_eq!(g.vertices()[1].hybridization, Hybridization::Sp2);
        assert_eq!(g.edges()[0].label.order.value(), 2.0);
        assert!(!g.edges()[0].label.conjugated);
    }

    #[test]
    fn heteroaromatics() {
        // pyridine, furan, pyrrole, thiophene, naphthalene
        assert_eq!(hydrogens(&graph("n1ccccc1")), vec![0, 1, 1, 1, 1, 1]);
        assert_eq!(hydrogens(&graph("o1cccc1")), vec![0, 1, 1, 1, 1]);
        assert_eq!(hydrogens(&graph("[nH]1cccc1")), vec![1, 1, 1, 1, 1]);
        assert_eq!(hydrogens(&graph("s1cccc1")), vec![0, 1, 1, 1, 1]);
        let naph = graph("c1ccc2ccccc2c1");
        assert_eq!(hydrogens(&naph), vec![1, 1, 1, 0, 1, 1, 1, 1, 0, 1]);
    }

    #[test]
    fn biaryl_link_is_single() {
        let g = graph("c1ccccc1c1ccccc1");
        let link = g.edges().iter().find(|e| e.i == 5 && e.j == 6).unwrap();
        assert_eq!(link.label.order, BondOrder::Single);
        assert!(!link.label.ring);
        assert!(link.label.conjugated);
    }

    #[test]
    fn hypervalent_and_charged() {
        let g = graph("CS(=O)(=O)Cl");
        assert_eq!(hydrogens(&g), vec![3, 0, 0, 0, 0]);
        let g = graph("OP(=O)(O)O");
        assert_eq!(hydrogens(&g), vec![1, 0, 0, 1, 1]);
        let g = graph("C[N+](=O)[O-]");
        assert_eq!(g.vertices()[1].charge, 1);
        assert_eq!(g.vertices()[3].charge, -1);
        assert_eq!(hydrogens(&g), vec![3, 0, 0, 0]);
    }

    #[test]
    fn hybridization_rules() {
        let g = graph("C#N");
        assert_eq!(g.vertices()[0].hybridization, Hybridization::Sp);
        assert_eq!(hydrogens(&g), vec![1, 0]);
        let g = graph("C=C=C");
        assert_eq!(g.vertices()[1].hybridization, Hybridization::Sp);
        assert!(g.edges().iter().all(|e| e.label.conjugated));
    }

    #[test]
    fn conjugation() {
        let g = graph("C=CC=C");
        assert!(g.edges().iter().all(|e| e.label.conjugated));
        assert!(g.vertices().iter().all(|v| v.conjugated));
        let g = graph("C=CCC=C");
        assert!(!g.edges()[1].label.conjugated);
        assert!(!g.vertices()[2].conjugated);
    }

    #[test]
    fn explicit_hydrogens_fold() {
        let g = graph("[H]C([H])([H])[H]");
        assert_eq!(g.n_vertices(), 1);
        assert_eq!(hydrogens(&g), vec![4]);
        assert_eq!(graph("[H]OC"), graph("OC"));
    }

    #[test]
    fn valence_errors() {
        let p = |s: &str| perceive(&parse(&tokenize(s).unwrap()).unwrap());
        assert!(matches!(
            p("C(C)(C)(C)(C)C"),
            Err(SmilesError::ValenceExceeded { atom: 0, element: Element::C })
        ));
        assert!(matches!(p("O=O=O"), Err(SmilesError::ValenceExceeded { .. })));
        assert!(matches!(p("FF(F)"), Err(SmilesError::ValenceExceeded { .. })));
        assert_eq!(p("[H][H]"), Err(SmilesError::NoHeavyAtoms));
        assert!(matches!(p("C[H]C"), Err(SmilesError::ExplicitHydrogen { .. })));
        // bracket atoms bypass the valence table
        assert!(p("C[C](C)(C)(C)C").is_ok());
    }

    #[test]
    fn rings() {
        let g = graph("C1CC1CC");
        let ring: Vec<bool> = g.edges().iter().map(|e| e.label.ring).collect();
        assert_eq!(ring, vec![true, true, true, false, false]);
        let g = graph("C1CCC2CC2C1");
        assert!(g.edges().iter().all(|e| e.label.ring));
    }
}
