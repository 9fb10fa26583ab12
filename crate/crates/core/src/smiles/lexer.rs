use std::ops::Range;

use crate::molgraph::Element;

use super::SmilesError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondSymbol {
    Single,
    Double,
    Triple,
    Aromatic,
    Implicit,
}

impl BondSymbol {
    fn from_char(c: u8) -> Option<BondSymbol> {
        match c {
            b'-' => Some(BondSymbol::Single),
            b'=' => Some(BondSymbol::Double),
            b'#' => Some(BondSymbol::Triple),
            b':' => Some(BondSymbol::Aromatic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtomSpec {
    pub element: Element,
    pub aromatic: bool,
    pub charge: i8,
    /// Explicit hydrogen count; `None` for organic-subset atoms.
    pub hydrogens: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    OrganicAtom(AtomSpec),
    BracketAtom(AtomSpec),
    Bond(BondSymbol),
    BranchOpen,
    BranchClose,
    RingDigit(u8),
    RingTwoDigit(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmilesToken {
    pub kind: TokenKind,
    pub span: Range<usize>,
    pub text: String,
}

/// Concatenates token texts; inverse of [`tokenize`].
pub fn render(tokens: &[SmilesToken]) -> String {
    tokens.iter().map(|t| t.text.as_str()).collect()
}

pub fn tokenize(smiles: &str) -> Result<Vec<SmilesToken>, SmilesError> {
    if smiles.is_empty() {
        return Err(SmilesError::Empty);
    }
    if let Some((pos, ch)) = smiles.char_indices().find(|(_, c)| !c.is_ascii()) {
        return Err(SmilesError::IllegalCharacter { pos, ch });
    }
    let bytes = smiles.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let start = pos;
        let c = bytes[pos];
        let kind = match c {
            b'[' => {
                let (spec, end) = bracket_atom(bytes, pos)?;
                pos = end;
                TokenKind::BracketAtom(spec)
            }
            b'(' => {
                pos += 1;
                TokenKind::BranchOpen
            }
            b')' => {
                pos += 1;
                TokenKind::BranchClose
            }
            b'0'..=b'9' => {
                pos += 1;
                TokenKind::RingDigit(c - b'0')
            }
            b'%' => match (bytes.get(pos + 1), bytes.get(pos + 2)) {
                (Some(a @ b'0'..=b'9'), Some(b @ b'0'..=b'9')) => {
                    pos += 3;
                    TokenKind::RingTwoDigit((a - b'0') * 10 + (b - b'0'))
                }
                _ => return Err(SmilesError::IllegalCharacter { pos, ch: '%' }),
            },
            b'-' | b'=' | b'#' | b':' => {
                pos += 1;
                TokenKind::Bond(BondSymbol::from_char(c).expect("bond character"))
            }
            c if c.is_ascii_alphabetic() => {
                let (spec, end) = organic_atom(bytes, pos)?;
                pos = end;
                TokenKind::OrganicAtom(spec)
            }
            _ => {
                return Err(SmilesError::IllegalCharacter {
                    pos,
                    ch: c as char,
                })
            }
        };
        tokens.push(SmilesToken {
            kind,
            span: start..pos,
            text: smiles[start..pos].to_string(),
        });
    }
    Ok(tokens)
}

fn organic_atom(bytes: &[u8], pos: usize) -> Result<(AtomSpec, usize), SmilesError> {
    let c = bytes[pos];
    let next = bytes.get(pos + 1).copied();
    let (element, aromatic, len) = match c {
        b'C' if next == Some(b'l') => (Element::Cl, false, 2),
        b'B' if next == Some(b'r') => (Element::Br, false, 2),
        b'C' => (Element::C, false, 1),
        b'N' => (Element::N, false, 1),
        b'O' => (Element::O, false, 1),
        b'P' => (Element::P, false, 1),
        b'S' => (Element::S, false, 1),
        b'F' => (Element::F, false, 1),
        b'I' => (Element::I, false, 1),
        b'c' => (Element::C, true, 1),
        b'n' => (Element::N, true, 1),
        b'o' => (Element::O, true, 1),
        b's' => (Element::S, true, 1),
        b'H' => return Err(SmilesError::IllegalCharacter { pos, ch: 'H' }),
        _ => {
            let len = if c.is_ascii_uppercase() && next.is_some_and(|n| n.is_ascii_lowercase()) {
                2
            } else {
                1
            };
            let symbol = String::from_utf8_lossy(&bytes[pos..pos + len]).into_owned();
            return Err(SmilesError::UnsupportedElement { pos, symbol });
        }
    };
    Ok((
        AtomSpec {
            element,
            aromatic,
            charge: 0,
            hydrogens: None,
        },
        pos + len,
    ))
}

fn bracket_atom(bytes: &[u8], open: usize) -> Result<(AtomSpec, usize), SmilesError> {
    let malformed = |reason| SmilesError::MalformedBracket { pos: open, reason };
    let close = bytes[open..]
        .iter()
        .position(|&b| b == b']')
        .map(|off| open + off)
        .ok_or_else(|| malformed("missing ']'"))?;
    let body = &bytes[open + 1..close];
    let mut i: usize;
    if body.first().is_some_and(|b| b.is_ascii_digit()) {
        return Err(malformed("isotopes are not supported"));
    }
    let first = *body.first().ok_or_else(|| malformed("empty bracket"))?;
    let (element, aromatic) = if first.is_ascii_uppercase() {
        let two = body.get(1).is_some_and(|b| b.is_ascii_lowercase());
        let len = if two { 2 } else { 1 };
        let symbol = std::str::from_utf8(&body[..len]).expect("ascii");
        i = len;
        match Element::from_symbol(symbol) {
            Some(e) => (e, false),
            None => {
                return Err(SmilesError::UnsupportedElement {
                    pos: open + 1,
                    symbol: symbol.to_string(),
                })
            }
        }
    } else if first.is_ascii_lowercase() {
        let two = body.get(1).is_some_and(|b| b.is_ascii_lowercase());
        if two {
            let symbol = String::from_utf8_lossy(&body[..2]).into_owned();
            return Err(SmilesError::UnsupportedElement {
                pos: open + 1,
                symbol,
            });
        }
        i = 1;
        match first {
            b'c' => (Element::C, true),
            b'n' => (Element::N, true),
            b'o' => (Element::O, true),
            b's' => (Element::S, true),
            _ => {
                return Err(SmilesError::UnsupportedElement {
                    pos: open + 1,
                    symbol: (first as char).to_string(),
                })
            }
        }
    } else if first == b'*' {
        return Err(malformed("wildcard atoms are not supported"));
    } else {
        return Err(malformed("expected an element symbol"));
    };

    let mut hydrogens = None;
    let mut charge = None;
    while i < body.len() {
        match body[i] {
            b'H' if hydrogens.is_none() => {
                i += 1;
                let (count, used) = read_number(&body[i..]);
                i += used;
                hydrogens = Some(if used == 0 { 1 } else { count });
            }
            sign @ (b'+' | b'-') if charge.is_none() => {
                i += 1;
                let (count, used) = read_number(&body[i..]);
                i += used;
                let magnitude = if used > 0 {
                    count
                } else {
                    let repeats = body[i..].iter().take_while(|&&b| b == sign).count();
                    i += repeats;
                    1 + repeats as u32
                };
                if magnitude > 8 {
                    return Err(malformed("charge out of range"));
                }
                let magnitude = magnitude as i8;
                charge = Some(if sign == b'+' { magnitude } else { -magnitude });
            }
            b'@' => return Err(malformed("stereo marks are not supported")),
            b':' => return Err(malformed("atom classes are not supported")),
            _ => return Err(malformed("unexpected character")),
        }
    }
    let hydrogens = hydrogens.unwrap_or(0);
    if hydrogens > 4 {
        return Err(malformed("hydrogen count above 4"));
    }
    Ok((
        AtomSpec {
            element,
            aromatic,
            charge: charge.unwrap_or(0),
            hydrogens: Some(hydrogens as u8),
        },
        close + 1,
    ))
}

fn read_number(bytes: &[u8]) -> (u32, usize) {
    let digits = bytes.iter().take_while(|b| b.is_ascii_digit()).count().min(3);
    let value = bytes[..digits]
        .iter()
        .fold(0u32, |acc, &d| acc * 10 + (d - b'0') as u32);
    (value, digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<TokenKind> {
        tokenize(s).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn organic(element: Element, aromatic: bool) -> TokenKind {
        TokenKind::OrganicAtom(AtomSpec {
            element,
            aromatic,
            charge: 0,
            hydrogens: None,
        })
    }

    #[test]
    fn ethanol() {
        assert_eq!(
            kinds("CCO"),
            vec![
                organic(Element::C, false),
                organic(Element::C, false),
                organic(Element::O, false)
            ]
        );
    }

    #[test]
    fn benzene() {
        let k = kinds("c1ccccc1");
        assert_eq!(k.len(), 8);
        assert_eq!(
            k.iter().filter(|t| **t == organic(Element::C, true)).count(),
            6
        );
        assert_eq!(k[1], TokenKind::RingDigit(1));
        assert_eq!(k[7], TokenKind::RingDigit(1));
    }

    #[test]
    fn carboxylate() {
        let tokens = tokenize("C(=O)[O-]").unwrap();
        let expected = vec![
            (organic(Element::C, false), "C"),
            (TokenKind::BranchOpen, "("),
            (TokenKind::Bond(BondSymbol::Double), "="),
            (organic(Element::O, false), "O"),
            (TokenKind::BranchClose, ")"),
            (
                TokenKind::BracketAtom(AtomSpec {
                    element: Element::O,
                    aromatic: false,
                    charge: -1,
                    hydrogens: Some(0),
                }),
                "[O-]",
            ),
        ];
        assert_eq!(tokens.len(), expected.len());
        for (t, (kind, text)) in tokens.iter().zip(expected) {
            assert_eq!(t.kind, kind);
            assert_eq!(t.text, text);
        }
        assert_eq!(tokens[5].span, 5..9);
    }

    #[test]
    fn halogens_and_bracket_forms() {
        assert_eq!(
            kinds("ClCBr"),
            vec![
                organic(Element::Cl, false),
                organic(Element::C, false),
                organic(Element::Br, false)
            ]
        );
        let spec = |s: &str| match kinds(s)[0] {
            TokenKind::BracketAtom(a) => a,
            _ => panic!(),
        };
        assert_eq!(spec("[NH4+]").hydrogens, Some(4));
        assert_eq!(spec("[NH4+]").charge, 1);
        assert_eq!(spec("[N+H4]").hydrogens, Some(4));
        assert_eq!(spec("[S+2]").charge, 2);
        assert_eq!(spec("[O--]").charge, -2);
        assert_eq!(spec("[nH]").aromatic, true);
        assert_eq!(spec("[nH]").hydrogens, Some(1));
        assert_eq!(spec("[Cl-]").element, Element::Cl);
    }

    #[test]
    fn ring_two_digit() {
        assert_eq!(kinds("C%12")[1], TokenKind::RingTwoDigit(12));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            tokenize("CB"),
            Err(SmilesError::UnsupportedElement { pos: 1, .. })
        ));
        assert!(matches!(
            tokenize("[Na+]"),
            Err(SmilesError::UnsupportedElement { .. })
        ));
        assert!(matches!(
            tokenize("C[Se]"),
            Err(SmilesError::UnsupportedElement { .. })
        ));
        assert!(matches!(
            tokenize("[C@H](F)Cl"),
            Err(SmilesError::MalformedBracket { .. })
        ));
        assert!(matches!(
            tokenize("[13C]"),
            Err(SmilesError::MalformedBracket { .. })
        ));
        assert!(matches!(
            tokenize("[CH4"),
            Err(SmilesError::MalformedBracket { .. })
        ));
        assert!(matches!(
            tokenize("C/C=C/C"),
            Err(SmilesError::IllegalCharacter { pos: 1, ch: '/' })
        ));
        assert!(matches!(
            tokenize("CC.O"),
            Err(SmilesError::IllegalCharacter { ch: '.', .. })
        ));
        assert!(matches!(
            tokenize("C*"),
            Err(SmilesError::IllegalCharacter { ch: '*', .. })
        ));
        assert!(matches!(tokenize("CÅ"), Err(SmilesError::IllegalCharacter { .. })));
        assert_eq!(tokenize(""), Err(SmilesError::Empty));
    }

    #[test]
    fn render_inverts_tokenize() {
        for s in ["CN(C)C(=O)c1ccc(cc1)OC", "CS(=O)(=O)Cl", "C%10CC%10", "[NH4+]", "O=[N+]([O-])c1ccccc1"] {
            assert_eq!(render(&tokenize(s).unwrap()), s);
        }
    }
}
