//! Substructure patterns in a SMARTS subset, with a backtracking matcher.
//!
//! Supported atom primitives: element symbols (aliphatic upper case,
//! aromatic lower case), `*`, `A`, `a`, `#n`, `D`, `H`, `X`, `R`, `r`,
//! formal charge (`+`, `-`, `+n`, `++`, `+0`), isotope prefix and a trailing
//! atom-map class `:n`. Logical operators `!`, `&`, `,`, `;` follow the usual
//! precedence. Bond primitives: `-`, `=`, `#`, `:`, `~`, `@` with the same
//! operators. An omitted bond means single or aromatic. Recursive
//! SMARTS is not supported and is reported as an error.

use std::collections::BTreeMap;

use super::element::Element;
use super::error::SmartsError;
use super::mol::{BondOrder, Molecule};

#[derive(Debug, Clone, PartialEq)]
pub enum AtomPrimitive {
    /// Element with required aromaticity (`C` aliphatic, `c` aromatic).
    Element { element: Element, aromatic: bool },
    AtomicNumber(u8),
    Any,
    Aliphatic,
    Aromatic,
    Degree(u8),
    TotalH(u8),
    Connectivity(u8),
    Charge(i8),
    /// `R` alone: in any ring. `Rn`: in exactly n SSSR rings.
    RingCount(Option<u8>),
    /// `rn`: member of an SSSR ring of size n. `r` alone: any ring.
    RingSize(Option<u8>),
    Isotope(u16),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<P> {
    Prim(P),
    Not(Box<Expr<P>>),
    And(Vec<Expr<P>>),
    Or(Vec<Expr<P>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondPrimitive {
    Single,
    Double,
    Triple,
    Aromatic,
    Any,
    Ring,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternAtom {
    pub expr: Expr<AtomPrimitive>,
    /// Atom-map class, `0` when absent.
    pub map: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternBond {
    pub begin: usize,
    pub end: usize,
    /// `None` is the implicit single-or-aromatic bond.
    pub expr: Option<Expr<BondPrimitive>>,
}

/// A compiled substructure pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    source: String,
    atoms: Vec<PatternAtom>,
    bonds: Vec<PatternBond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    order: Vec<usize>,
}

/// Per-molecule facts the matcher needs, computed once per target.
pub struct Target<'a> {
    pub mol: &'a Molecule,
    ring_count: Vec<u8>,
    ring_sizes: Vec<u64>,
    ring_bond: Vec<bool>,
}

impl<'a> Target<'a> {
    pub fn new(mol: &'a Molecule) -> Target<'a> {
        let n = mol.atom_count();
        let mut ring_count = vec![0u8; n];
        let mut ring_sizes = vec![0u64; n];
        for r in mol.rings() {
            for &a in r {
                ring_count[a] = ring_count[a].saturating_add(1);
                if r.len() < 64 {
                    ring_sizes[a] |= 1 << r.len();
                }
            }
        }
        let ring_bond = (0..mol.bond_count()).map(|b| mol.is_ring_bond(b)).collect();
        Target { mol, ring_count, ring_sizes, ring_bond }
    }

    fn atom_prim(&self, p: &AtomPrimitive, i: usize) -> bool {
        let a = self.mol.atom(i);
        match *p {
            AtomPrimitive::Element { element, aromatic } => a.element == element && a.aromatic == aromatic,
            AtomPrimitive::AtomicNumber(z) => a.element.atomic_number() == z,
            AtomPrimitive::Any => true,
            AtomPrimitive::Aliphatic => !a.aromatic,
            AtomPrimitive::Aromatic => a.aromatic,
            AtomPrimitive::Degree(d) => self.mol.degree(i) == d as usize,
            AtomPrimitive::TotalH(h) => a.implicit_h == h,
            AtomPrimitive::Connectivity(x) => self.mol.degree(i) + a.implicit_h as usize == x as usize,
            AtomPrimitive::Charge(c) => a.charge == c,
            AtomPrimitive::RingCount(None) => self.ring_count[i] > 0,
            AtomPrimitive::RingCount(Some(n)) => self.ring_count[i] == n,
            AtomPrimitive::RingSize(None) => self.ring_count[i] > 0,
            AtomPrimitive::RingSize(Some(n)) => n < 64 && self.ring_sizes[i] >> n & 1 == 1,
            AtomPrimitive::Isotope(v) => a.isotope == Some(v),
        }
    }

    fn bond_prim(&self, p: BondPrimitive, b: usize) -> bool {
        let order = self.mol.bond(b).order;
        match p {
            BondPrimitive::Single => order == BondOrder::Single,
            BondPrimitive::Double => order == BondOrder::Double,
            BondPrimitive::Triple => order == BondOrder::Triple,
            BondPrimitive::Aromatic => order == BondOrder::Aromatic,
            BondPrimitive::Any => true,
            BondPrimitive::Ring => self.ring_bond[b],
        }
    }
}

fn eval<P>(e: &Expr<P>, f: &impl Fn(&P) -> bool) -> bool {
    match e {
        Expr::Prim(p) => f(p),
        Expr::Not(x) => !eval(x, f),
        Expr::And(xs) => xs.iter().all(|x| eval(x, f)),
        Expr::Or(xs) => xs.iter().any(|x| eval(x, f)),
    }
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Pattern, SmartsError> {
        PatternParser::new(text).run()
    }

    /// Query matching the heavy-atom skeleton of `mol`: element, aromaticity,
    /// charge and bond order must agree. Dummy atoms are left out.
    pub fn from_molecule(mol: &Molecule) -> Pattern {
        let mut index = vec![None; mol.atom_count()];
        let mut atoms = Vec::new();
        for (i, a) in mol.atoms().iter().enumerate() {
            if a.element.is_dummy() {
                continue;
            }
            index[i] = Some(atoms.len());
            atoms.push(PatternAtom {
                expr: Expr::And(vec![
                    Expr::Prim(AtomPrimitive::Element { element: a.element, aromatic: a.aromatic }),
                    Expr::Prim(AtomPrimitive::Charge(a.charge)),
                ]),
                map: 0,
            });
        }
        let bonds = mol
            .bonds()
            .iter()
            .filter_map(|b| {
                let prim = match b.order {
                    BondOrder::Single => BondPrimitive::Single,
                    BondOrder::Double => BondPrimitive::Double,
                    BondOrder::Triple => BondPrimitive::Triple,
                    BondOrder::Aromatic => BondPrimitive::Aromatic,
                };
                Some(PatternBond { begin: index[b.begin]?, end: index[b.end]?, expr: Some(Expr::Prim(prim)) })
            })
            .collect();
        let source = super::canon::canonical_smiles(mol);
        assemble(source, atoms, bonds)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn atoms(&self) -> &[PatternAtom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[PatternBond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Pattern atom carrying map class `map`.
    pub fn mapped_atom(&self, map: u16) -> Option<usize> {
        self.atoms.iter().position(|a| a.map == map)
    }

    /// Whether pattern atom `p` accepts molecule atom `i`.
    pub fn atom_matches(&self, p: usize, target: &Target, i: usize) -> bool {
        eval(&self.atoms[p].expr, &|prim| target.atom_prim(prim, i))
    }

    /// Whether pattern bond `pb` accepts molecule bond `b`.
    pub fn bond_matches(&self, pb: usize, target: &Target, b: usize) -> bool {
        match &self.bonds[pb].expr {
            None => matches!(target.mol.bond(b).order, BondOrder::Single | BondOrder::Aromatic),
            Some(e) => eval(e, &|prim| target.bond_prim(*prim, b)),
        }
    }

    /// All embeddings; entry `k` of a mapping is the molecule atom for pattern atom `k`.
    pub fn find_all(&self, mol: &Molecule) -> Vec<Vec<usize>> {
        self.find_in(&Target::new(mol), None, usize::MAX)
    }

    /// Embeddings with distinct atom sets, keeping the first found for each set.
    pub fn find_unique(&self, mol: &Molecule) -> Vec<Vec<usize>> {
        unique_by_atom_set(self.find_all(mol))
    }

    pub fn has_match(&self, mol: &Molecule) -> bool {
        !self.find_in(&Target::new(mol), None, 1).is_empty()
    }

    /// Embeddings in a prepared target, optionally anchoring pattern atom 0.
    pub fn find_in(&self, target: &Target, anchor: Option<usize>, limit: usize) -> Vec<Vec<usize>> {
        let n = target.mol.atom_count();
        let p = self.atoms.len();
        let mut out = Vec::new();
        if p == 0 || p > n || limit == 0 {
            return out;
        }
        // Predicate cache: 0 unknown, 1 accepted, 2 rejected.
        let mut allowed = vec![0u8; p * n];
        if let Some(a) = anchor {
            if a >= n || !self.atom_matches(0, target, a) {
                return out;
            }
        } else {
            for k in 0..p {
                let mut any = false;
                for i in 0..n {
                    let ok = self.atom_matches(k, target, i);
                    allowed[k * n + i] = if ok { 1 } else { 2 };
                    any |= ok;
                }
                if !any {
                    return out;
                }
            }
        }
        let mut state = Search {
            pattern: self,
            target,
            allowed,
            n,
            mapping: vec![usize::MAX; p],
            used: vec![false; n],
            out: &mut out,
            limit,
            anchor,
        };
        state.extend(0);
        out
    }

    /// True when pattern atom 0 can be placed on molecule atom `i`.
    pub fn matches_at(&self, target: &Target, i: usize) -> bool {
        !self.find_in(target, Some(i), 1).is_empty()
    }
}

fn assemble(source: String, atoms: Vec<PatternAtom>, bonds: Vec<PatternBond>) -> Pattern {
    let n = atoms.len();
    let mut adjacency = vec![Vec::new(); n];
    for (k, b) in bonds.iter().enumerate() {
        adjacency[b.begin].push((b.end, k));
        adjacency[b.end].push((b.begin, k));
    }
    // Breadth-first per component so each atom after a component root has
    // an already-placed neighbour.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut q = std::collections::VecDeque::from([root]);
        while let Some(a) = q.pop_front() {
            order.push(a);
            for &(nb, _) in &adjacency[a] {
                if !seen[nb] {
                    seen[nb] = true;
                    q.push_back(nb);
                }
            }
        }
    }
    Pattern { source, atoms, bonds, adjacency, order }
}

pub fn unique_by_atom_set(all: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut seen = std::collections::HashSet::new();
    all.into_iter()
        .filter(|m| {
            let mut key = m.clone();
            key.sort_unstable();
            seen.insert(key)
        })
        .collect()
}

struct Search<'p, 't, 'o> {
    pattern: &'p Pattern,
    target: &'t Target<'t>,
    allowed: Vec<u8>,
    n: usize,
    mapping: Vec<usize>,
    used: Vec<bool>,
    out: &'o mut Vec<Vec<usize>>,
    limit: usize,
    anchor: Option<usize>,
}

impl Search<'_, '_, '_> {
    fn accepts(&mut self, k: usize, i: usize) -> bool {
        let slot = &mut self.allowed[k * self.n + i];
        if *slot == 0 {
            *slot = if self.pattern.atom_matches(k, self.target, i) { 1 } else { 2 };
        }
        *slot == 1
    }

    fn extend(&mut self, depth: usize) {
        if self.out.len() >= self.limit {
            return;
        }
        if depth == self.pattern.order.len() {
            self.out.push(self.mapping.clone());
            return;
        }
        let k = self.pattern.order[depth];
        // A mapped pattern neighbour narrows the candidates to its neighbours.
        let via = self.pattern.adjacency[k].iter().find(|(nb, _)| self.mapping[*nb] != usize::MAX).copied();
        let candidates: Vec<usize> = match (k, self.anchor) {
            (0, Some(a)) => vec![a],
            _ => match via {
                Some((nb, _)) => self.target.mol.neighbors(self.mapping[nb]).iter().map(|(x, _)| *x).collect(),
                None => (0..self.n).collect(),
            },
        };
        for i in candidates {
            if i >= self.n || self.used[i] || !self.accepts(k, i) {
                continue;
            }
            let bonds_ok = self.pattern.adjacency[k].iter().all(|&(nb, pb)| {
                let m = self.mapping[nb];
                if m == usize::MAX {
                    return true;
                }
                match self.target.mol.bond_between(i, m) {
                    Some(b) => self.pattern.bond_matches(pb, self.target, b),
                    None => false,
                }
            });
            if !bonds_ok {
                continue;
            }
            self.mapping[k] = i;
            self.used[i] = true;
            self.extend(depth + 1);
            self.used[i] = false;
            self.mapping[k] = usize::MAX;
            if self.out.len() >= self.limit {
                return;
            }
        }
    }
}

struct PatternParser<'a> {
    text: &'a [u8],
    source: &'a str,
    pos: usize,
    atoms: Vec<PatternAtom>,
    bonds: Vec<PatternBond>,
}

type PResult<T> = Result<T, SmartsError>;

impl<'a> PatternParser<'a> {
    fn new(source: &'a str) -> Self {
        PatternParser { text: source.as_bytes(), source, pos: 0, atoms: Vec::new(), bonds: Vec::new() }
    }

    fn err<T>(&self, offset: usize, message: impl Into<String>) -> PResult<T> {
        Err(SmartsError { offset, message: message.into() })
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn run(mut self) -> PResult<Pattern> {
        if self.source.trim().is_empty() {
            return self.err(0, "empty pattern");
        }
        let mut prev: Option<usize> = None;
        let mut pending: Option<(Option<Expr<BondPrimitive>>, usize)> = None;
        let mut stack: Vec<Option<usize>> = Vec::new();
        let mut rings: BTreeMap<u16, (usize, Option<Expr<BondPrimitive>>, usize)> = BTreeMap::new();
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    if prev.is_none() {
                        return self.err(start, "branch without a preceding atom");
                    }
                    stack.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    match stack.pop() {
                        Some(p) => prev = p,
                        None => return self.err(start, "unbalanced parenthesis"),
                    }
                    self.pos += 1;
                }
                b'.' => {
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b'/' | b'\\' => {
                    if prev.is_none() || pending.is_some() {
                        return self.err(start, "misplaced bond");
                    }
                    let e = self.bond_expr()?;
                    pending = Some((Some(e), start));
                }
                b'0'..=b'9' | b'%' => {
                    let digit = if c == b'%' {
                        let d = self.text.get(self.pos + 1..self.pos + 3);
                        match d {
                            Some(d) if d.iter().all(u8::is_ascii_digit) => {
                                self.pos += 3;
                                ((d[0] - b'0') * 10 + (d[1] - b'0')) as u16
                            }
                            _ => return self.err(start, "bad ring-closure number"),
                        }
                    } else {
                        self.pos += 1;
                        (c - b'0') as u16
                    };
                    let Some(atom) = prev else { return self.err(start, "ring closure without atom") };
                    let bond = pending.take().and_then(|(e, _)| e);
                    match rings.remove(&digit) {
                        None => {
                            rings.insert(digit, (atom, bond, start));
                        }
                        Some((other, open_bond, _)) => {
                            let expr = match (open_bond, bond) {
                                (Some(a), Some(b)) if a != b => {
                                    return self.err(start, "ring-closure bonds disagree")
                                }
                                (Some(a), _) | (None, Some(a)) => Some(a),
                                (None, None) => None,
                            };
                            self.bonds.push(PatternBond { begin: other, end: atom, expr });
                        }
                    }
                }
                _ => {
                    let atom = if c == b'[' { self.bracket_atom()? } else { self.bare_atom()? };
                    let idx = self.atoms.len();
                    self.atoms.push(atom);
                    if let Some(p) = prev {
                        let expr = pending.take().and_then(|(e, _)| e);
                        self.bonds.push(PatternBond { begin: p, end: idx, expr });
                    }
                    prev = Some(idx);
                }
            }
        }
        if let Some((_, off)) = pending {
            return self.err(off, "bond without a following atom");
        }
        if !stack.is_empty() {
            return self.err(self.text.len(), "unbalanced parenthesis");
        }
        if let Some((_, (_, _, off))) = rings.iter().next() {
            return self.err(*off, "unclosed ring closure");
        }
        if self.bonds.iter().any(|b| b.begin == b.end) {
            return self.err(0, "bond from an atom to itself");
        }
        Ok(assemble(self.source.to_string(), self.atoms, self.bonds))
    }

    fn bond_expr(&mut self) -> PResult<Expr<BondPrimitive>> {
        // Bond expressions stop at the next atom, digit, branch or dot.
        let start = self.pos;
        while let Some(c) = self.peek() {
            if matches!(c, b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b'&' | b',' | b';' | b'/' | b'\\') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = &self.source[start..self.pos];
        parse_logic(text, start, &|tok, off| {
            let prim = match tok.as_bytes()[0] {
                b'-' | b'/' | b'\\' => BondPrimitive::Single,
                b'=' => BondPrimitive::Double,
                b'#' => BondPrimitive::Triple,
                b':' => BondPrimitive::Aromatic,
                b'~' => BondPrimitive::Any,
                b'@' => BondPrimitive::Ring,
                other => {
                    return Err(SmartsError {
                        offset: off,
                        message: format!("unsupported bond primitive {:?}", other as char),
                    })
                }
            };
            Ok((prim, 1))
        })
    }

    fn bare_atom(&mut self) -> PResult<PatternAtom> {
        let start = self.pos;
        let rest = &self.source[start..];
        let (expr, len) = if rest.starts_with("Cl") {
            (Expr::Prim(AtomPrimitive::Element { element: Element::CL, aromatic: false }), 2)
        } else if rest.starts_with("Br") {
            (Expr::Prim(AtomPrimitive::Element { element: Element::BR, aromatic: false }), 2)
        } else {
            let c = self.text[start];
            let prim = match c {
                b'*' => AtomPrimitive::Any,
                b'A' => AtomPrimitive::Aliphatic,
                b'a' => AtomPrimitive::Aromatic,
                b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I' => AtomPrimitive::Element {
                    element: Element::from_symbol(&(c as char).to_string()).expect("organic subset"),
                    aromatic: false,
                },
                b'b' | b'c' | b'n' | b'o' | b'p' | b's' => AtomPrimitive::Element {
                    element: Element::from_symbol(&(c.to_ascii_uppercase() as char).to_string()).expect("organic subset"),
                    aromatic: true,
                },
                b'$' => return self.err(start, "recursive SMARTS is not supported"),
                other => return self.err(start, format!("unsupported token {:?}", other as char)),
            };
            (Expr::Prim(prim), 1)
        };
        self.pos += len;
        Ok(PatternAtom { expr, map: 0 })
    }

    fn bracket_atom(&mut self) -> PResult<PatternAtom> {
        let open = self.pos;
        let close = match self.source[open..].find(']') {
            Some(k) => open + k,
            None => return self.err(open, "unterminated bracket atom"),
        };
        let mut body = &self.source[open + 1..close];
        let mut map = 0;
        if let Some(k) = body.rfind(':') {
            let digits = &body[k + 1..];
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                map = digits.parse().map_err(|_| SmartsError { offset: open + 1 + k, message: "bad map class".into() })?;
                body = &body[..k];
            }
        }
        if body.is_empty() {
            return self.err(open, "empty bracket atom");
        }
        if body.contains('$') {
            return self.err(open + 1 + body.find('$').unwrap_or(0), "recursive SMARTS is not supported");
        }
        let expr = parse_logic(body, open + 1, &atom_token)?;
        self.pos = close + 1;
        Ok(PatternAtom { expr, map })
    }
}

/// Parses one atom primitive at the start of `s`; returns it and its length.
fn atom_token(s: &str, off: usize) -> PResult<(AtomPrimitive, usize)> {
    let b = s.as_bytes();
    let number = |from: usize| -> (Option<u32>, usize) {
        let mut end = from;
        while end < b.len() && b[end].is_ascii_digit() {
            end += 1;
        }
        (s[from..end].parse().ok(), end)
    };
    let c = b[0];
    let prim = match c {
        b'*' => (AtomPrimitive::Any, 1),
        b'a' if !(b.len() > 1 && b[1] == b's') => (AtomPrimitive::Aromatic, 1),
        b'A' if !(b.len() > 1 && b[1].is_ascii_lowercase() && Element::from_symbol(&s[..2]).is_some()) => {
            (AtomPrimitive::Aliphatic, 1)
        }
        b'#' => match number(1) {
            (Some(z), end) if z <= 255 => (AtomPrimitive::AtomicNumber(z as u8), end),
            _ => return Err(SmartsError { offset: off, message: "expected atomic number after #".into() }),
        },
        b'D' | b'H' | b'X' | b'R' | b'r' => {
            let (n, end) = number(1);
            let n = n.map(|v| v.min(255) as u8);
            let prim = match c {
                b'D' => AtomPrimitive::Degree(n.unwrap_or(1)),
                b'H' => AtomPrimitive::TotalH(n.unwrap_or(1)),
                b'X' => AtomPrimitive::Connectivity(n.unwrap_or(1)),
                b'R' => AtomPrimitive::RingCount(n),
                _ => AtomPrimitive::RingSize(n),
            };
            (prim, end)
        }
        b'+' | b'-' => {
            let unit: i32 = if c == b'+' { 1 } else { -1 };
            match number(1) {
                (Some(v), end) => (AtomPrimitive::Charge((unit * v as i32).clamp(-8, 8) as i8), end),
                (None, _) => {
                    let mut end = 1;
                    while end < b.len() && b[end] == c {
                        end += 1;
                    }
                    (AtomPrimitive::Charge((unit * end as i32).clamp(-8, 8) as i8), end)
                }
            }
        }
        b'0'..=b'9' => match number(0) {
            (Some(v), end) if v <= u16::MAX as u32 => (AtomPrimitive::Isotope(v as u16), end),
            _ => return Err(SmartsError { offset: off, message: "bad isotope".into() }),
        },
        b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
            if s.starts_with("se") {
                (AtomPrimitive::Element { element: Element::SE, aromatic: true }, 2)
            } else {
                let e = Element::from_symbol(&(c.to_ascii_uppercase() as char).to_string()).expect("listed");
                (AtomPrimitive::Element { element: e, aromatic: true }, 1)
            }
        }
        b'a' => (AtomPrimitive::Element { element: Element::AS, aromatic: true }, 2),
        c if c.is_ascii_uppercase() => {
            let two = b.len() > 1 && b[1].is_ascii_lowercase();
            if two {
                if let Some(e) = Element::from_symbol(&s[..2]) {
                    return Ok((AtomPrimitive::Element { element: e, aromatic: false }, 2));
                }
            }
            match Element::from_symbol(&s[..1]) {
                Some(e) => (AtomPrimitive::Element { element: e, aromatic: false }, 1),
                None => {
                    return Err(SmartsError { offset: off, message: format!("unknown element in {s:?}") })
                }
            }
        }
        other => {
            return Err(SmartsError { offset: off, message: format!("unsupported atom primitive {:?}", other as char) })
        }
    };
    Ok(prim)
}

/// Operator-precedence parse of a primitive expression: `;` < `,` < `&` < implicit-and < `!`.
fn parse_logic<P: Clone>(
    text: &str,
    base: usize,
    token: &dyn Fn(&str, usize) -> PResult<(P, usize)>,
) -> PResult<Expr<P>> {
    fn split_on(text: &str, sep: char) -> Vec<(usize, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, ch) in text.char_indices() {
            if ch == sep {
                out.push((start, &text[start..i]));
                start = i + 1;
            }
        }
        out.push((start, &text[start..]));
        out
    }
    fn combine<P>(mut parts: Vec<Expr<P>>, and: bool) -> Expr<P> {
        if parts.len() == 1 {
            parts.pop().expect("one part")
        } else if and {
            Expr::And(parts)
        } else {
            Expr::Or(parts)
        }
    }
    let mut low = Vec::new();
    for (o1, t1) in split_on(text, ';') {
        let mut ors = Vec::new();
        for (o2, t2) in split_on(t1, ',') {
            let mut ands = Vec::new();
            for (o3, t3) in split_on(t2, '&') {
                let off = base + o1 + o2 + o3;
                if t3.is_empty() {
                    return Err(SmartsError { offset: off, message: "empty expression".into() });
                }
                // Implicit conjunction of unary terms.
                let mut terms = Vec::new();
                let mut k = 0;
                while k < t3.len() {
                    let mut negate = false;
                    while t3[k..].starts_with('!') {
                        negate = !negate;
                        k += 1;
                    }
                    if k >= t3.len() {
                        return Err(SmartsError { offset: off + k, message: "dangling negation".into() });
                    }
                    let (prim, len) = token(&t3[k..], off + k)?;
                    let e = Expr::Prim(prim);
                    terms.push(if negate { Expr::Not(Box::new(e)) } else { e });
                    k += len;
                }
                ands.push(combine(terms, true));
            }
            ors.push(combine(ands, true));
        }
        low.push(combine(ors, false));
    }
    Ok(combine(low, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::sanitize::mol_from_smiles;

    fn count(pattern: &str, smiles: &str) -> usize {
        Pattern::parse(pattern).unwrap().find_unique(&mol_from_smiles(smiles).unwrap()).len()
    }

    #[test]
    fn basic_matches() {
        assert_eq!(count("[OH]", "CCO"), 1);
        assert_eq!(count("c1ccccc1", "C1CCCCC1"), 0);
        assert_eq!(count("c1ccccc1", "c1ccccc1"), 1);
        assert_eq!(Pattern::parse("c1ccccc1").unwrap().find_all(&mol_from_smiles("c1ccccc1").unwrap()).len(), 12);
        assert_eq!(count("[N+](=O)[O-]", "c1ccccc1[N+](=O)[O-]"), 1);
        assert_eq!(count("C=O", "CC(=O)O"), 1);
        assert_eq!(count("[#6]", "CCO"), 2);
        assert_eq!(count("[C;D1]", "CC(C)O"), 2);
        assert_eq!(count("[!#6;!#1]", "CC(N)O"), 2);
        assert_eq!(count("[CH3,OH]", "CC(N)O"), 2);
        assert_eq!(count("[R]", "C1CC1C"), 3);
        assert_eq!(count("[r3]", "C1CC1C1CCCC1"), 3);
        assert_eq!(count("[C;X4]", "CC=C"), 1);
        assert_eq!(count("*~*", "CC"), 1);
        assert_eq!(count("C-!@C", "CC1CC1"), 1);
        assert_eq!(count("[+0]", "C[N+](C)(C)C"), 4);
        assert_eq!(count("a", "c1ccccc1C"), 6);
        assert_eq!(count("Cl", "CCl"), 1);
        assert_eq!(count("[Cl]", "CCl"), 1);
    }

    #[test]
    fn map_classes() {
        let p = Pattern::parse("[C:1](=O)[O;H1:2]").unwrap();
        assert_eq!(p.mapped_atom(1), Some(0));
        assert_eq!(p.mapped_atom(2), Some(2));
    }

    #[test]
    fn errors_are_reported() {
        assert!(Pattern::parse("[$(CO)]").is_err());
        assert!(Pattern::parse("C(C").is_err());
        assert!(Pattern::parse("[C").is_err());
        assert!(Pattern::parse("[Q]").is_err());
        assert!(Pattern::parse("C1CC").is_err());
        assert!(Pattern::parse("C?").is_err());
        assert!(Pattern::parse("").is_err());
    }

    #[test]
    fn anchored_matching() {
        let m = mol_from_smiles("CCO").unwrap();
        let t = Target::new(&m);
        let p = Pattern::parse("[CH2]O").unwrap();
        assert!(!p.matches_at(&t, 0));
        assert!(p.matches_at(&t, 1));
    }
}
