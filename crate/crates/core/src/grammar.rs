//! Context-free grammars: data model, the line-oriented text format,
//! reduction to useful symbols, Parikh vectors of words, and a bounded
//! vector-fixpoint oracle for the Parikh image.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::BudgetExceeded;

/// Upper bound on the total number of vectors held by the oracle fixpoint.
pub const DEFAULT_ORACLE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NonterminalId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TerminalId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Terminal(TerminalId),
    Nonterminal(NonterminalId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Production {
    pub lhs: NonterminalId,
    /// Empty for an ε-production.
    pub rhs: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrammarError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing axiom declaration (`start: <NT>`)")]
    MissingAxiom,
    #[error("axiom `{0}` has no productions")]
    UndeclaredAxiom(String),
    #[error("grammar has no terminals")]
    EmptyAlphabet,
    #[error("duplicate production at line {line}: {production}")]
    DuplicateProduction { line: usize, production: String },
    #[error("nonterminal `{0}` has no productions")]
    NoProductions(String),
    #[error("symbol `{0}` is both a terminal and a nonterminal")]
    OverlappingSymbol(String),
    #[error("symbol id out of range in production for `{0}`")]
    UnknownSymbol(String),
    #[error("alphabet must be sorted and duplicate-free")]
    UnsortedAlphabet,
    #[error("unknown terminal `{0}`")]
    UnknownTerminal(String),
}

/// A context-free grammar.
///
/// Terminals are kept in lexicographic order of their names; that order is
/// the coordinate order of every [`ParikhVector`] computed against the
/// grammar. Productions are stored grouped by left-hand side, in nonterminal
/// order, keeping the relative order of alternatives.
///
/// A grammar with no productions at all is the reduced form of a grammar
/// whose language is empty; it can only be obtained from [`reduce_grammar`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    nonterminals: Vec<String>,
    alphabet: Vec<String>,
    productions: Vec<Production>,
    axiom: NonterminalId,
}

impl Grammar {
    /// Builds and validates a grammar from its parts.
    pub fn new(
        nonterminals: Vec<String>,
        alphabet: Vec<String>,
        mut productions: Vec<Production>,
        axiom: NonterminalId,
    ) -> Result<Grammar, GrammarError> {
        if alphabet.is_empty() {
            return Err(GrammarError::EmptyAlphabet);
        }
        if alphabet.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GrammarError::UnsortedAlphabet);
        }
        if axiom.0 >= nonterminals.len() {
            return Err(GrammarError::MissingAxiom);
        }
        let terminal_names: HashSet<&str> = alphabet.iter().map(String::as_str).collect();
        if let Some(n) = nonterminals
            .iter()
            .find(|n| terminal_names.contains(n.as_str()))
        {
            return Err(GrammarError::OverlappingSymbol(n.clone()));
        }
        let mut seen = HashSet::new();
        for p in &productions {
            let lhs_name = nonterminals
                .get(p.lhs.0)
                .ok_or_else(|| GrammarError::UnknownSymbol(format!("#{}", p.lhs.0)))?;
            let in_range = p.rhs.iter().all(|s| match s {
                Symbol::Terminal(t) => t.0 < alphabet.len(),
                Symbol::Nonterminal(n) => n.0 < nonterminals.len(),
            });
            if !in_range {
                return Err(GrammarError::UnknownSymbol(lhs_name.clone()));
            }
            if !seen.insert(p) {
                return Err(GrammarError::DuplicateProduction {
                    line: 0,
                    production: lhs_name.clone(),
                });
            }
        }
        for (i, name) in nonterminals.iter().enumerate() {
            if !productions.iter().any(|p| p.lhs.0 == i) {
                return Err(GrammarError::NoProductions(name.clone()));
            }
        }
        productions.sort_by_key(|p| p.lhs);
        Ok(Grammar {
            nonterminals,
            alphabet,
            productions,
            axiom,
        })
    }

    fn empty_language(axiom_name: String, alphabet: Vec<String>) -> Grammar {
        Grammar {
            nonterminals: vec![axiom_name],
            alphabet,
            productions: Vec::new(),
            axiom: NonterminalId(0),
        }
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn axiom(&self) -> NonterminalId {
        self.axiom
    }

    /// Number of terminals, i.e. the dimension of Parikh vectors.
    pub fn dim(&self) -> usize {
        self.alphabet.len()
    }

    pub fn nonterminal_ids(&self) -> impl Iterator<Item = NonterminalId> {
        (0..self.nonterminals.len()).map(NonterminalId)
    }

    pub fn productions_of(&self, nt: NonterminalId) -> impl Iterator<Item = &Production> {
        self.productions.iter().filter(move |p| p.lhs == nt)
    }

    pub fn has_production(&self, lhs: NonterminalId, rhs: &[Symbol]) -> bool {
        self.productions_of(lhs).any(|p| p.rhs == rhs)
    }

    pub fn nonterminal_name(&self, nt: NonterminalId) -> &str {
        &self.nonterminals[nt.0]
    }

    pub fn terminal_name(&self, t: TerminalId) -> &str {
        &self.alphabet[t.0]
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        match s {
            Symbol::Terminal(t) => self.terminal_name(t),
            Symbol::Nonterminal(n) => self.nonterminal_name(n),
        }
    }

    pub fn nonterminal_id(&self, name: &str) -> Option<NonterminalId> {
        self.nonterminals
            .iter()
            .position(|n| n == name)
            .map(NonterminalId)
    }

    pub fn terminal_id(&self, name: &str) -> Option<TerminalId> {
        self.alphabet
            .binary_search_by(|t| t.as_str().cmp(name))
            .ok()
            .map(TerminalId)
    }

    /// True for the reduced form of a grammar generating ∅.
    pub fn is_empty_language(&self) -> bool {
        self.productions.is_empty()
    }

    /// Parikh vector of a word given as a sequence of terminal names.
    pub fn parikh_of_word<S: AsRef<str>>(&self, word: &[S]) -> Result<ParikhVector, GrammarError> {
        let mut v = ParikhVector::zero(self.dim());
        for sym in word {
            let name = sym.as_ref();
            let t = self
                .terminal_id(name)
                .ok_or_else(|| GrammarError::UnknownTerminal(name.to_string()))?;
            v.0[t.0] += 1;
        }
        Ok(v)
    }

    fn format_rhs(&self, rhs: &[Symbol]) -> String {
        if rhs.is_empty() {
            return "eps".to_string();
        }
        rhs.iter()
            .map(|&s| self.symbol_name(s))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Canonical printer; its output parses back to an equal grammar.
impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start: {}", self.nonterminal_name(self.axiom))?;
        for nt in self.nonterminal_ids() {
            let alts: Vec<String> = self
                .productions_of(nt)
                .map(|p| self.format_rhs(&p.rhs))
                .collect();
            if !alts.is_empty() {
                writeln!(f, "{} -> {}", self.nonterminal_name(nt), alts.join(" | "))?;
            }
        }
        Ok(())
    }
}

fn is_epsilon_token(tok: &str) -> bool {
    tok == "eps" || tok == "ε"
}

fn column_of(line: &str, byte_offset: usize) -> usize {
    line[..byte_offset].chars().count() + 1
}

fn check_token(tok: &str, line_no: usize, line: &str, offset: usize) -> Result<(), GrammarError> {
    if tok.contains(['(', ')']) || tok == "->" || tok.contains(':') {
        return Err(GrammarError::Syntax {
            line: line_no,
            column: column_of(line, offset),
            message: format!("invalid symbol name `{tok}`"),
        });
    }
    Ok(())
}

/// Whitespace-separated tokens together with their byte offsets in `s`.
fn tokens_with_offsets(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(st)) => {
                out.push((st, &s[st..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push((st, &s[st..]));
    }
    out
}

struct RawProduction {
    line: usize,
    lhs: String,
    rhs: Vec<String>,
}

/// Parses the line-oriented grammar format:
///
/// ```text
/// # comment
/// start: S
/// S -> a S b | eps
/// ```
///
/// A token is a nonterminal iff it appears on some left-hand side; every
/// other right-hand-side token is a terminal.
pub fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut axiom: Option<String> = None;
    let mut raw: Vec<RawProduction> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let lead = line.len() - line.trim_start().len();

        if let Some(rest) = trimmed.strip_prefix("start:") {
            let syntax = |column, message: &str| GrammarError::Syntax {
                line: line_no,
                column,
                message: message.to_string(),
            };
            if axiom.is_some() {
                return Err(syntax(lead + 1, "duplicate `start:` line"));
            }
            if !raw.is_empty() {
                return Err(syntax(lead + 1, "`start:` must precede all productions"));
            }
            let base = lead + "start:".len();
            let toks = tokens_with_offsets(rest);
            match toks.as_slice() {
                [(off, name)] => {
                    check_token(name, line_no, line, base + off)?;
                    axiom = Some(name.to_string());
                }
                [] => return Err(syntax(column_of(line, line.len()), "expected axiom name")),
                [_, (off, _), ..] => {
                    return Err(syntax(
                        column_of(line, base + off),
                        "expected a single axiom name",
                    ))
                }
            }
            continue;
        }

        let arrow = line.find("->").ok_or_else(|| GrammarError::Syntax {
            line: line_no,
            column: lead + 1,
            message: "expected `start:` or a production `LHS -> ...`".to_string(),
        })?;
        let lhs_toks = tokens_with_offsets(&line[..arrow]);
        let lhs = match lhs_toks.as_slice() {
            [(off, name)] => {
                check_token(name, line_no, line, *off)?;
                name.to_string()
            }
            [] => {
                return Err(GrammarError::Syntax {
                    line: line_no,
                    column: column_of(line, arrow),
                    message: "missing left-hand side".to_string(),
                })
            }
            [_, (off, _), ..] => {
                return Err(GrammarError::Syntax {
                    line: line_no,
                    column: column_of(line, *off),
                    message: "left-hand side must be a single nonterminal".to_string(),
                })
            }
        };

        let mut alt_start = arrow + 2;
        for alt in line[arrow + 2..].split('|') {
            let toks = tokens_with_offsets(alt);
            let alt_at = |off: usize| column_of(line, alt_start + off);
            if toks.is_empty() {
                return Err(GrammarError::Syntax {
                    line: line_no,
                    column: column_of(line, alt_start),
                    message: "empty alternative (write `eps` for the empty word)".to_string(),
                });
            }
            let rhs = if toks.len() == 1 && is_epsilon_token(toks[0].1) {
                Vec::new()
            } else {
                let mut rhs = Vec::with_capacity(toks.len());
                for &(off, tok) in &toks {
                    if is_epsilon_token(tok) {
                        return Err(GrammarError::Syntax {
                            line: line_no,
                            column: alt_at(off),
                            message: "`eps` must be the only symbol of its alternative".to_string(),
                        });
                    }
                    check_token(tok, line_no, line, alt_start + off)?;
                    rhs.push(tok.to_string());
                }
                rhs
            };
            raw.push(RawProduction {
                line: line_no,
                lhs: lhs.clone(),
                rhs,
            });
            alt_start += alt.len() + 1;
        }
    }

    let axiom = axiom.ok_or(GrammarError::MissingAxiom)?;

    let mut nonterminals: Vec<String> = Vec::new();
    for p in &raw {
        if !nonterminals.contains(&p.lhs) {
            nonterminals.push(p.lhs.clone());
        }
    }
    let axiom_id = nonterminals
        .iter()
        .position(|n| *n == axiom)
        .map(NonterminalId)
        .ok_or_else(|| GrammarError::UndeclaredAxiom(axiom.clone()))?;

    let alphabet: Vec<String> = raw
        .iter()
        .flat_map(|p| p.rhs.iter())
        .filter(|t| !nonterminals.contains(t))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if alphabet.is_empty() {
        return Err(GrammarError::EmptyAlphabet);
    }

    let resolve = |tok: &str| -> Symbol {
        match nonterminals.iter().position(|n| n == tok) {
            Some(i) => Symbol::Nonterminal(NonterminalId(i)),
            None => Symbol::Terminal(TerminalId(
                alphabet.binary_search_by(|t| t.as_str().cmp(tok)).unwrap(),
            )),
        }
    };

    let mut seen = HashSet::new();
    let mut productions = Vec::with_capacity(raw.len());
    for p in &raw {
        let prod = Production {
            lhs: NonterminalId(nonterminals.iter().position(|n| *n == p.lhs).unwrap()),
            rhs: p.rhs.iter().map(|t| resolve(t)).collect(),
        };
        if !seen.insert(prod.clone()) {
            let rhs = if p.rhs.is_empty() {
                "eps".to_string()
            } else {
                p.rhs.join(" ")
            };
            return Err(GrammarError::DuplicateProduction {
                line: p.line,
                production: format!("{} -> {}", p.lhs, rhs),
            });
        }
        productions.push(prod);
    }

    Grammar::new(nonterminals, alphabet, productions, axiom_id)
}

/// Removes non-generating nonterminals, then unreachable ones, along with
/// every production that mentions a removed symbol. The alphabet is kept
/// unchanged so Parikh coordinates agree with the input grammar.
pub fn reduce_grammar(g: &Grammar) -> Grammar {
    let n = g.nonterminals.len();
    let mut generating = vec![false; n];
    let mut changed = true;
    while changed {
        changed = false;
        for p in &g.productions {
            if generating[p.lhs.0] {
                continue;
            }
            let ok = p.rhs.iter().all(|s| match s {
                Symbol::Terminal(_) => true,
                Symbol::Nonterminal(x) => generating[x.0],
            });
            if ok {
                generating[p.lhs.0] = true;
                changed = true;
            }
        }
    }
    if !generating[g.axiom.0] {
        return Grammar::empty_language(
            g.nonterminal_name(g.axiom).to_string(),
            g.alphabet.clone(),
        );
    }

    let useful: Vec<&Production> = g
        .productions
        .iter()
        .filter(|p| {
            generating[p.lhs.0]
                && p.rhs.iter().all(|s| match s {
                    Symbol::Terminal(_) => true,
                    Symbol::Nonterminal(x) => generating[x.0],
                })
        })
        .collect();

    let mut reachable = vec![false; n];
    reachable[g.axiom.0] = true;
    let mut stack = vec![g.axiom];
    while let Some(a) = stack.pop() {
        for p in useful.iter().filter(|p| p.lhs == a) {
            for s in &p.rhs {
                if let Symbol::Nonterminal(x) = s {
                    if !reachable[x.0] {
                        reachable[x.0] = true;
                        stack.push(*x);
                    }
                }
            }
        }
    }

    let mut remap = vec![None; n];
    let mut nonterminals = Vec::new();
    for i in 0..n {
        if reachable[i] {
            remap[i] = Some(NonterminalId(nonterminals.len()));
            nonterminals.push(g.nonterminals[i].clone());
        }
    }
    let map_sym = |s: &Symbol| match s {
        Symbol::Terminal(t) => Symbol::Terminal(*t),
        Symbol::Nonterminal(x) => Symbol::Nonterminal(remap[x.0].unwrap()),
    };
    let productions = useful
        .iter()
        .filter(|p| reachable[p.lhs.0])
        .map(|p| Production {
            lhs: remap[p.lhs.0].unwrap(),
            rhs: p.rhs.iter().map(map_sym).collect(),
        })
        .collect();
    Grammar {
        nonterminals,
        alphabet: g.alphabet.clone(),
        productions,
        axiom: remap[g.axiom.0].unwrap(),
    }
}

/// Vector of occurrence counts, one coordinate per terminal in alphabet order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParikhVector(Vec<u64>);

impl ParikhVector {
    pub fn zero(dim: usize) -> Self {
        ParikhVector(vec![0; dim])
    }

    pub fn unit(dim: usize, coord: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[coord] = 1;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Component sum, which equals the length of any word with this image.
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn checked_sub(&self, other: &ParikhVector) -> Option<ParikhVector> {
        assert_eq!(self.dim(), other.dim(), "Parikh vector dimension mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(ParikhVector)
    }

    pub fn scaled(&self, factor: u64) -> ParikhVector {
        ParikhVector(self.0.iter().map(|c| c * factor).collect())
    }

    pub(crate) fn increment(&mut self, coord: usize) {
        self.0[coord] += 1;
    }
}

impl From<Vec<u64>> for ParikhVector {
    fn from(v: Vec<u64>) -> Self {
        ParikhVector(v)
    }
}

impl AddAssign<&ParikhVector> for ParikhVector {
    fn add_assign(&mut self, rhs: &ParikhVector) {
        assert_eq!(self.dim(), rhs.dim(), "Parikh vector dimension mismatch");
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl Add<&ParikhVector> for &ParikhVector {
    type Output = ParikhVector;

    fn add(self, rhs: &ParikhVector) -> ParikhVector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for ParikhVector {
    type Output = ParikhVector;

    fn add(mut self, rhs: ParikhVector) -> ParikhVector {
        self += &rhs;
        self
    }
}

impl fmt::Display for ParikhVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// `{Ψ(w) | w ∈ L(g), |w| ≤ max_len}` computed by a fixpoint over Parikh
/// vectors, without building any derivation tree.
pub fn oracle_parikh_vectors(
    g: &Grammar,
    max_len: usize,
) -> Result<BTreeSet<ParikhVector>, BudgetExceeded> {
    oracle_parikh_vectors_capped(g, max_len, DEFAULT_ORACLE_CAP)
}

/// As [`oracle_parikh_vectors`], failing once the vector sets of all
/// nonterminals together hold more than `cap` entries.
pub fn oracle_parikh_vectors_capped(
    g: &Grammar,
    max_len: usize,
    cap: usize,
) -> Result<BTreeSet<ParikhVector>, BudgetExceeded> {
    let bound = max_len as u64;
    let k = g.dim();
    let mut sets: Vec<BTreeSet<ParikhVector>> = vec![BTreeSet::new(); g.nonterminals.len()];
    let mut held = 0usize;
    let mut changed = true;
    while changed {
        changed = false;
        for p in &g.productions {
            let mut acc: BTreeSet<ParikhVector> = BTreeSet::from([ParikhVector::zero(k)]);
            for s in &p.rhs {
                acc = match s {
                    Symbol::Terminal(t) => acc
                        .into_iter()
                        .filter(|v| v.total() < bound)
                        .map(|mut v| {
                            v.increment(t.0);
                            v
                        })
                        .collect(),
                    Symbol::Nonterminal(x) => {
                        let mut next = BTreeSet::new();
                        for v in &acc {
                            for u in &sets[x.0] {
                                if v.total() + u.total() <= bound {
                                    next.insert(v + u);
                                }
                            }
                        }
                        next
                    }
                };
                if acc.is_empty() {
                    break;
                }
            }
            for v in acc {
                if sets[p.lhs.0].insert(v) {
                    changed = true;
                    held += 1;
                    if held > cap {
                        return Err(BudgetExceeded::new("oracle vector", cap));
                    }
                }
            }
        }
    }
    Ok(std::mem::take(&mut sets[g.axiom.0]))
}
