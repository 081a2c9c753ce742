use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::elements::{self, Element};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the bond-order sum used for valence; aromatic counts 1.
    pub fn valence_contribution(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    #[serde(serialize_with = "ser_symbol")]
    pub element: &'static Element,
    pub aromatic: bool,
    pub charge: i8,
    /// Hydrogens written inside a bracket atom (`[NH4+]` has 4).
    pub explicit_h: u8,
    /// Hydrogens implied by default valence; always 0 for bracket atoms.
    pub implicit_h: u8,
    pub bracket: bool,
    /// Byte offset of the atom token in the source string.
    pub position: usize,
}

fn ser_symbol<S: serde::Serializer>(e: &&'static Element, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(e.symbol)
}

impl Atom {
    pub fn total_h(&self) -> u32 {
        self.explicit_h as u32 + self.implicit_h as u32
    }

    pub fn is_heavy(&self) -> bool {
        self.element.atomic_number > 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MolecularGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
}

impl MolecularGraph {
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.is_heavy()).count()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.bonds
            .iter()
            .find(|bd| (bd.a == a && bd.b == b) || (bd.a == b && bd.b == a))
    }

    fn bond_order_sum(&self, atom: usize) -> u32 {
        self.bonds
            .iter()
            .filter(|b| b.a == atom || b.b == atom)
            .map(|b| b.order.valence_contribution() as u32)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmilesErrorKind {
    Empty,
    UnmatchedParenthesis,
    EmptyBranch,
    UnmatchedRingClosure,
    ConflictingRingBond,
    DuplicateBond,
    SelfBond,
    UnknownElement(String),
    UnexpectedCharacter(char),
    BondWithoutAtom,
    UnterminatedBracket,
    InvalidBracketAtom(String),
    ImpossibleValence(String),
}

impl fmt::Display for SmilesErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SmilesErrorKind::*;
        match self {
            Empty => write!(f, "empty SMILES string"),
            UnmatchedParenthesis => write!(f, "unmatched parenthesis"),
            EmptyBranch => write!(f, "empty branch"),
            UnmatchedRingClosure => write!(f, "unmatched ring closure"),
            ConflictingRingBond => write!(f, "ring-closure bond symbols disagree"),
            DuplicateBond => write!(f, "duplicate bond between the same atoms"),
            SelfBond => write!(f, "ring closure bonds an atom to itself"),
            UnknownElement(s) => write!(f, "unknown element `{s}`"),
            UnexpectedCharacter(c) => write!(f, "unexpected character `{c}`"),
            BondWithoutAtom => write!(f, "bond symbol not between two atoms"),
            UnterminatedBracket => write!(f, "unterminated bracket atom"),
            InvalidBracketAtom(s) => write!(f, "invalid bracket atom: {s}"),
            ImpossibleValence(s) => write!(f, "impossible valence for {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SMILES error at position {position}: {kind}")]
pub struct SmilesError {
    pub position: usize,
    pub kind: SmilesErrorKind,
}

fn err<T>(position: usize, kind: SmilesErrorKind) -> Result<T, SmilesError> {
    Err(SmilesError { position, kind })
}

#[derive(Debug, Clone, Copy)]
struct PendingBond {
    order: BondOrder,
    position: usize,
}

struct RingOpen {
    atom: usize,
    bond: Option<BondOrder>,
    position: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    graph: MolecularGraph,
    prev: Option<usize>,
    branches: Vec<(Option<usize>, usize)>,
    pending: Option<PendingBond>,
    rings: HashMap<u32, RingOpen>,
    // true right after '(' until the first atom or bond of the branch
    branch_empty: bool,
}

/// Parses an organic-subset SMILES string.
///
/// Supports bracket atoms with charge and hydrogen count, branches, ring
/// closures (`0`-`9` and `%nn`), bond symbols `- = # :`, lowercase aromatic
/// atoms and dot-disconnected components. Stereo markers (`/ \ @`) and
/// isotopes are accepted and ignored.
pub fn parse_smiles(s: &str) -> Result<MolecularGraph, SmilesError> {
    let trimmed = s.trim();
    if trimmed.is_empty() {
        return err(0, SmilesErrorKind::Empty);
    }
    let offset = s.find(trimmed).unwrap_or(0);
    let mut p = Parser {
        src: trimmed.as_bytes(),
        pos: 0,
        graph: MolecularGraph {
            atoms: Vec::new(),
            bonds: Vec::new(),
        },
        prev: None,
        branches: Vec::new(),
        pending: None,
        rings: HashMap::new(),
        branch_empty: false,
    };
    p.run().map_err(|mut e| {
        e.position += offset;
        e
    })?;
    let mut graph = p.graph;
    assign_implicit_hydrogens(&mut graph).map_err(|mut e| {
        e.position += offset;
        e
    })?;
    Ok(graph)
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    if self.prev.is_none() {
                        return err(start, SmilesErrorKind::UnmatchedParenthesis);
                    }
                    if self.pending.is_some() {
                        return err(start, SmilesErrorKind::BondWithoutAtom);
                    }
                    self.branches.push((self.prev, start));
                    self.branch_empty = true;
                    self.pos += 1;
                }
                b')' => {
                    if self.branch_empty {
                        return err(start, SmilesErrorKind::EmptyBranch);
                    }
                    if let Some(b) = self.pending {
                        return err(b.position, SmilesErrorKind::BondWithoutAtom);
                    }
                    match self.branches.pop() {
                        Some((prev, _)) => self.prev = prev,
                        None => return err(start, SmilesErrorKind::UnmatchedParenthesis),
                    }
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending.is_some() || self.prev.is_none() {
                        return err(start, SmilesErrorKind::BondWithoutAtom);
                    }
                    let order = match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    };
                    self.pending = Some(PendingBond {
                        order,
                        position: start,
                    });
                    self.branch_empty = false;
                    self.pos += 1;
                }
                b'.' => {
                    if self.pending.is_some() || self.prev.is_none() {
                        return err(start, SmilesErrorKind::BondWithoutAtom);
                    }
                    if self.branch_empty {
                        return err(start, SmilesErrorKind::EmptyBranch);
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' => {
                    self.pos += 1;
                    self.ring_closure((c - b'0') as u32, start)?;
                }
                b'%' => {
                    let digits = self.src.get(start + 1..start + 3);
                    match digits {
                        Some(d) if d.iter().all(u8::is_ascii_digit) => {
                            let label = ((d[0] - b'0') * 10 + (d[1] - b'0')) as u32;
                            self.pos += 3;
                            self.ring_closure(label, start)?;
                        }
                        _ => return err(start, SmilesErrorKind::UnexpectedCharacter('%')),
                    }
                }
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom)?;
                }
            }
        }
        if let Some(b) = self.pending {
            return err(b.position, SmilesErrorKind::BondWithoutAtom);
        }
        if let Some(&(_, pos)) = self.branches.last() {
            return err(pos, SmilesErrorKind::UnmatchedParenthesis);
        }
        if let Some(open) = self.rings.values().min_by_key(|r| r.position) {
            return err(open.position, SmilesErrorKind::UnmatchedRingClosure);
        }
        Ok(())
    }

    fn add_atom(&mut self, atom: Atom) -> Result<(), SmilesError> {
        let idx = self.graph.atoms.len();
        let aromatic = atom.aromatic;
        self.graph.atoms.push(atom);
        if let Some(prev) = self.prev {
            let order = match self.pending.take() {
                Some(b) => b.order,
                None if aromatic && self.graph.atoms[prev].aromatic => BondOrder::Aromatic,
                None => BondOrder::Single,
            };
            self.graph.bonds.push(Bond {
                a: prev,
                b: idx,
                order,
            });
        }
        self.prev = Some(idx);
        self.branch_empty = false;
        Ok(())
    }

    fn ring_closure(&mut self, label: u32, start: usize) -> Result<(), SmilesError> {
        let Some(current) = self.prev else {
            return err(start, SmilesErrorKind::UnmatchedRingClosure);
        };
        let bond = self.pending.take().map(|b| b.order);
        match self.rings.remove(&label) {
            None => {
                self.rings.insert(
                    label,
                    RingOpen {
                        atom: current,
                        bond,
                        position: start,
                    },
                );
            }
            Some(open) => {
                if open.atom == current {
                    return err(start, SmilesErrorKind::SelfBond);
                }
                if self.graph.bond_between(open.atom, current).is_some() {
                    return err(start, SmilesErrorKind::DuplicateBond);
                }
                let order = match (open.bond, bond) {
                    (Some(a), Some(b)) if a != b => {
                        return err(start, SmilesErrorKind::ConflictingRingBond)
                    }
                    (Some(a), _) | (None, Some(a)) => a,
                    (None, None) => {
                        if self.graph.atoms[open.atom].aromatic
                            && self.graph.atoms[current].aromatic
                        {
                            BondOrder::Aromatic
                        } else {
                            BondOrder::Single
                        }
                    }
                };
                self.graph.bonds.push(Bond {
                    a: open.atom,
                    b: current,
                    order,
                });
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom, SmilesError> {
        let start = self.pos;
        let c = self.src[start];
        let next = self.src.get(start + 1).copied();
        let (symbol, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => ("Cl", false, 2),
            (b'B', Some(b'r')) => ("Br", false, 2),
            (b'B', _) => ("B", false, 1),
            (b'C', _) => ("C", false, 1),
            (b'N', _) => ("N", false, 1),
            (b'O', _) => ("O", false, 1),
            (b'P', _) => ("P", false, 1),
            (b'S', _) => ("S", false, 1),
            (b'F', _) => ("F", false, 1),
            (b'I', _) => ("I", false, 1),
            (b'b', _) => ("B", true, 1),
            (b'c', _) => ("C", true, 1),
            (b'n', _) => ("N", true, 1),
            (b'o', _) => ("O", true, 1),
            (b'p', _) => ("P", true, 1),
            (b's', _) => ("S", true, 1),
            _ if c.is_ascii_alphabetic() || c == b'*' => {
                let end = if next.is_some_and(|n| n.is_ascii_lowercase()) {
                    2
                } else {
                    1
                };
                let tok = String::from_utf8_lossy(&self.src[start..start + end]).into_owned();
                return err(start, SmilesErrorKind::UnknownElement(tok));
            }
            _ => {
                let ch = std::str::from_utf8(&self.src[start..])
                    .ok()
                    .and_then(|s| s.chars().next())
                    .unwrap_or('\u{FFFD}');
                return err(start, SmilesErrorKind::UnexpectedCharacter(ch));
            }
        };
        self.pos += len;
        Ok(Atom {
            element: elements::lookup(symbol).expect("organic subset is in the table"),
            aromatic,
            charge: 0,
            explicit_h: 0,
            implicit_h: 0,
            bracket: false,
            position: start,
        })
    }

    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        let start = self.pos;
        let Some(rel_end) = self.src[start..].iter().position(|&b| b == b']') else {
            return err(start, SmilesErrorKind::UnterminatedBracket);
        };
        let end = start + rel_end;
        let body = &self.src[start + 1..end];
        self.pos = end + 1;
        let invalid = |msg: &str| {
            err(
                start,
                SmilesErrorKind::InvalidBracketAtom(format!(
                    "{msg} in `[{}]`",
                    String::from_utf8_lossy(body)
                )),
            )
        };

        let mut i = 0;
        // isotope, ignored
        while i < body.len() && body[i].is_ascii_digit() {
            i += 1;
        }

        let Some(&first) = body.get(i) else {
            return invalid("missing element");
        };
        let (element, aromatic) = if first.is_ascii_uppercase() {
            let two = body
                .get(i + 1)
                .filter(|b| b.is_ascii_lowercase())
                .and_then(|&b2| elements::lookup(std::str::from_utf8(&[first, b2]).ok()?));
            match two {
                Some(e) => {
                    i += 2;
                    (e, false)
                }
                None => {
                    let sym = (first as char).to_string();
                    match elements::lookup(&sym) {
                        Some(e) => {
                            i += 1;
                            (e, false)
                        }
                        None => {
                            return err(start + 1 + i, SmilesErrorKind::UnknownElement(sym));
                        }
                    }
                }
            }
        } else if first.is_ascii_lowercase() {
            // aromatic: se, as, or single letters
            let two = body
                .get(i + 1)
                .filter(|b| b.is_ascii_lowercase())
                .and_then(|&b2| {
                    let cand = format!("{}{}", (first as char).to_ascii_uppercase(), b2 as char);
                    elements::lookup(&cand).filter(|e| elements::aromatic_capable(e.symbol))
                });
            match two {
                Some(e) => {
                    i += 2;
                    (e, true)
                }
                None => {
                    let sym = (first as char).to_ascii_uppercase().to_string();
                    match elements::lookup(&sym).filter(|e| elements::aromatic_capable(e.symbol)) {
                        Some(e) => {
                            i += 1;
                            (e, true)
                        }
                        None => {
                            return err(
                                start + 1 + i,
                                SmilesErrorKind::UnknownElement((first as char).to_string()),
                            );
                        }
                    }
                }
            }
        } else if first == b'*' {
            return err(start + 1 + i, SmilesErrorKind::UnknownElement("*".into()));
        } else {
            return invalid("missing element");
        };

        // chirality, ignored
        if body.get(i) == Some(&b'@') {
            while body.get(i) == Some(&b'@') {
                i += 1;
            }
            if let Some(tag) = body.get(i..i + 2) {
                if matches!(tag, b"TH" | b"AL" | b"SP" | b"TB" | b"OH") {
                    i += 2;
                    while i < body.len() && body[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
        }

        let mut explicit_h = 0u8;
        if body.get(i) == Some(&b'H') {
            i += 1;
            explicit_h = 1;
            if let Some(&d) = body.get(i) {
                if d.is_ascii_digit() {
                    explicit_h = d - b'0';
                    i += 1;
                }
            }
        }

        let mut charge: i32 = 0;
        if let Some(&sign) = body.get(i).filter(|&&b| b == b'+' || b == b'-') {
            let unit = if sign == b'+' { 1 } else { -1 };
            i += 1;
            if body.get(i).is_some_and(u8::is_ascii_digit) {
                let mut mag = 0i32;
                while let Some(&d) = body.get(i).filter(|b| b.is_ascii_digit()) {
                    mag = mag * 10 + (d - b'0') as i32;
                    i += 1;
                }
                charge = unit * mag;
            } else {
                charge = unit;
                while body.get(i) == Some(&sign) {
                    charge += unit;
                    i += 1;
                }
            }
            if charge.abs() > 15 {
                return invalid("charge out of range");
            }
        }

        // atom class, ignored
        if body.get(i) == Some(&b':') {
            i += 1;
            let digits_start = i;
            while i < body.len() && body[i].is_ascii_digit() {
                i += 1;
            }
            if i == digits_start {
                return invalid("empty atom class");
            }
        }

        if i != body.len() {
            return invalid("trailing characters");
        }

        Ok(Atom {
            element,
            aromatic,
            charge: charge as i8,
            explicit_h,
            implicit_h: 0,
            bracket: true,
            position: start,
        })
    }
}

/// Assigns implicit hydrogens to organic-subset atoms from their default
/// valences. Aromatic atoms first try to reserve one valence for the
/// delocalized system; if no valence fits that way they are treated as
/// lone-pair donors (furan oxygen, thiophene sulfur).
fn assign_implicit_hydrogens(graph: &mut MolecularGraph) -> Result<(), SmilesError> {
    for idx in 0..graph.atoms.len() {
        if graph.atoms[idx].bracket {
            continue;
        }
        let used = graph.bond_order_sum(idx);
        let atom = &graph.atoms[idx];
        let valences = atom.element.default_valences;
        let fit = |reserve: u32| {
            valences
                .iter()
                .map(|&v| v as u32)
                .find(|&v| v >= used + reserve)
                .map(|v| v - used - reserve)
        };
        let h = if atom.aromatic {
            // only the lowest valence may donate a lone pair
            let lowest = valences[0] as u32;
            if lowest > used {
                Some(lowest - used - 1)
            } else if lowest == used {
                Some(0)
            } else {
                fit(1)
            }
        } else {
            fit(0)
        };
        match h {
            Some(h) => graph.atoms[idx].implicit_h = h as u8,
            None => {
                let symbol = if atom.aromatic {
                    atom.element.symbol.to_ascii_lowercase()
                } else {
                    atom.element.symbol.to_string()
                };
                return err(
                    atom.position,
                    SmilesErrorKind::ImpossibleValence(format!(
                        "{symbol} with bond-order sum {used}"
                    )),
                );
            }
        }
    }
    Ok(())
}
