//! Restricted SMILES reader.
//!
//! Supported: the organic subset `C N O P S F Cl Br I`, aromatic `c n o s`,
//! bracket atoms `[<element><H count?><charge?>]` (charge and H count accepted
//! in either order), bonds `- = # :`, branches and ring closures `1-9`, `%nn`.
//! Not supported: stereo marks, isotopes, wildcards, atom classes and `.`.
//! Elements are limited to C, H, O, N, P, S, F, Cl, Br and I.
//!
//! Reading happens in three steps, each usable on its own:
//! [`tokenize`] -> [`parse`] -> [`perceive`].

mod lexer;
mod parser;
mod perceive;

use thiserror::Error;

use crate::molgraph::{Element, GraphError, MolecularGraph, RadiiTable};

pub use lexer::{render, tokenize, AtomSpec, BondSymbol, SmilesToken, TokenKind};
pub use parser::{parse, RawAtom, RawBond, RawMolecule};
pub use perceive::{perceive, perceive_with};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmilesError {
    #[error("empty SMILES string")]
    Empty,
    #[error("illegal character {ch:?} at {pos}")]
    IllegalCharacter { pos: usize, ch: char },
    #[error("unsupported element {symbol} at {pos}")]
    UnsupportedElement { pos: usize, symbol: String },
    #[error("malformed bracket atom at {pos}: {reason}")]
    MalformedBracket { pos: usize, reason: &'static str },
    #[error("unbalanced parentheses at {pos}")]
    UnbalancedParentheses { pos: usize },
    #[error("ring bond {ring} is never closed")]
    UnclosedRingBond { ring: u8 },
    #[error("ring bond {ring} has conflicting bond symbols")]
    ConflictingRingBondOrder { ring: u8 },
    #[error("ring bond {ring} closes on the atom that opened it")]
    SelfBond { ring: u8 },
    #[error("atoms {0} and {1} are bonded twice")]
    DuplicateBond(usize, usize),
    #[error("bond symbol at {pos} is not followed by an atom")]
    DanglingBond { pos: usize },
    #[error("unexpected token at {pos}")]
    UnexpectedToken { pos: usize },
    #[error("atom {atom} ({element}) exceeds its allowed valence")]
    ValenceExceeded { atom: usize, element: Element },
    #[error("explicit hydrogen atom {atom} cannot be folded into a heavy atom")]
    ExplicitHydrogen { atom: usize },
    #[error("molecule has no heavy atoms")]
    NoHeavyAtoms,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl SmilesError {
    pub fn code(&self) -> &'static str {
        match self {
            SmilesError::Empty => "EmptySmiles",
            SmilesError::IllegalCharacter { .. } => "IllegalCharacter",
            SmilesError::UnsupportedElement { .. } => "UnsupportedElement",
            SmilesError::MalformedBracket { .. } => "MalformedBracket",
            SmilesError::UnbalancedParentheses { .. } => "UnbalancedParentheses",
            SmilesError::UnclosedRingBond { .. } => "UnclosedRingBond",
            SmilesError::ConflictingRingBondOrder { .. } => "ConflictingRingBondOrder",
            SmilesError::SelfBond { .. } => "SelfBond",
            SmilesError::DuplicateBond(..) => "DuplicateBond",
            SmilesError::DanglingBond { .. } => "DanglingBond",
            SmilesError::UnexpectedToken { .. } => "UnexpectedToken",
            SmilesError::ValenceExceeded { .. } => "ValenceExceeded",
            SmilesError::ExplicitHydrogen { .. } => "ExplicitHydrogen",
            SmilesError::NoHeavyAtoms => "NoHeavyAtoms",
            SmilesError::Graph(e) => e.code(),
        }
    }
}

/// Tokenize, parse and perceive in one go.
pub fn graph_from_smiles(
    smiles: &str,
    id: impl Into<String>,
    radii: &RadiiTable,
) -> Result<MolecularGraph, SmilesError> {
    let tokens = tokenize(smiles)?;
    let raw = parse(&tokens)?;
    let mut graph = perceive_with(&raw, radii)?;
    graph.id = id.into();
    Ok(graph)
}
