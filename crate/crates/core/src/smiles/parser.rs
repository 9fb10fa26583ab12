use std::collections::BTreeMap;

use crate::molgraph::Element;

use super::{BondSymbol, SmilesError, SmilesToken, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawAtom {
    pub element: Element,
    /// Written in lowercase.
    pub aromatic: bool,
    pub charge: i8,
    /// Hydrogen count from a bracket atom; `None` for organic-subset atoms.
    pub bracket_hydrogens: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawBond {
    pub a: usize,
    pub b: usize,
    pub symbol: BondSymbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawMolecule {
    pub atoms: Vec<RawAtom>,
    pub bonds: Vec<RawBond>,
}

impl RawMolecule {
    fn add_bond(&mut self, a: usize, b: usize, symbol: BondSymbol) -> Result<(), SmilesError> {
        let key = (a.min(b), a.max(b));
        if self
            .bonds
            .iter()
            .any(|bond| (bond.a.min(bond.b), bond.a.max(bond.b)) == key)
        {
            return Err(SmilesError::DuplicateBond(key.0, key.1));
        }
        self.bonds.push(RawBond { a, b, symbol });
        Ok(())
    }
}

/// Resolves branches and ring closures into an atom/bond list.
pub fn parse(tokens: &[SmilesToken]) -> Result<RawMolecule, SmilesError> {
    let mut mol = RawMolecule::default();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondSymbol, usize)> = None;
    let mut branches: Vec<usize> = Vec::new();
    // ring number -> (atom, bond symbol written at the opening digit)
    let mut open_rings: BTreeMap<u8, (usize, Option<BondSymbol>)> = BTreeMap::new();

    for token in tokens {
        let pos = token.span.start;
        match token.kind {
            TokenKind::OrganicAtom(spec) | TokenKind::BracketAtom(spec) => {
                let idx = mol.atoms.len();
                mol.atoms.push(RawAtom {
                    element: spec.element,
                    aromatic: spec.aromatic,
                    charge: spec.charge,
                    bracket_hydrogens: spec.hydrogens,
                });
                if let Some(p) = prev {
                    let symbol = pending.take().map_or(BondSymbol::Implicit, |(s, _)| s);
                    mol.add_bond(p, idx, symbol)?;
                }
                prev = Some(idx);
            }
            TokenKind::Bond(symbol) => {
                if prev.is_none() || pending.is_some() {
                    return Err(SmilesError::DanglingBond { pos });
                }
                pending = Some((symbol, pos));
            }
            TokenKind::BranchOpen => {
                let p = prev.ok_or(SmilesError::UnexpectedToken { pos })?;
                if pending.is_some() {
                    return Err(SmilesError::UnexpectedToken { pos });
                }
                branches.push(p);
            }
            TokenKind::BranchClose => {
                if let Some((_, bond_pos)) = pending {
                    return Err(SmilesError::DanglingBond { pos: bond_pos });
                }
                let p = branches
                    .pop()
                    .ok_or(SmilesError::UnbalancedParentheses { pos })?;
                if prev == Some(p) {
                    // "()" carries no atom
                    return Err(SmilesError::UnexpectedToken { pos });
                }
                prev = Some(p);
            }
            TokenKind::RingDigit(ring) | TokenKind::RingTwoDigit(ring) => {
                let current = prev.ok_or(SmilesError::UnexpectedToken { pos })?;
                let written = pending.take().map(|(s, _)| s);
                match open_rings.remove(&ring) {
                    Some((other, opened)) => {
                        if other == current {
                            return Err(SmilesError::SelfBond { ring });
                        }
                        let symbol = match (opened, written) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(SmilesError::ConflictingRingBondOrder { ring })
                            }
                            (Some(a), _) | (None, Some(a)) => a,
                            (None, None) => BondSymbol::Implicit,
                        };
                        mol.add_bond(other, current, symbol)?;
                    }
                    None => {
                        open_rings.insert(ring, (current, written));
                    }
                }
            }
        }
    }

    if let Some((_, pos)) = pending {
        return Err(SmilesError::DanglingBond { pos });
    }
    if !branches.is_empty() {
        let pos = tokens
            .iter()
            .rev()
            .find(|t| t.kind == TokenKind::BranchOpen)
            .map_or(0, |t| t.span.start);
        return Err(SmilesError::UnbalancedParentheses { pos });
    }
    if let Some((&ring, _)) = open_rings.iter().next() {
        return Err(SmilesError::UnclosedRingBond { ring });
    }
    if mol.atoms.is_empty() {
        return Err(SmilesError::Empty);
    }
    Ok(mol)
}
