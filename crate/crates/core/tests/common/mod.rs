//! Shared fixtures and brute-force oracles for the integration tests. Nothing
//! here reuses the enumeration or saturation code paths it is checking.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use parikh::{
    compose, parse_grammar, reduce_grammar, DerivationTree, Grammar, LinearSet, MinimalCatalog,
    Node, NonterminalId, ParikhVector, Symbol, TreePath,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub const G1: &str = "start: S\nS -> a S b | eps\n";
pub const G2: &str = "start: S\nS -> S S | a\n";
pub const G3: &str = "start: S\nS -> a S | b S | eps\n";
pub const G4: &str = "start: S\nS -> a S b S | eps\n";
pub const G5: &str = "start: S\nS -> a | b A c\nA -> a | d A e\n";

/// The five corpus grammars with their names.
pub fn corpus() -> Vec<(&'static str, Grammar)> {
    [("G1", G1), ("G2", G2), ("G3", G3), ("G4", G4), ("G5", G5)]
        .into_iter()
        .map(|(n, t)| (n, parse_grammar(t).unwrap()))
        .collect()
}

/// Corpus plus grammars whose blocks depend on each other, unit cycles and
/// nullable nonterminals, used where a richer shape mix helps.
pub fn extended_corpus() -> Vec<(&'static str, Grammar)> {
    let mut out = corpus();
    for (n, t) in [
        (
            "chain",
            "start: S\nS -> a A | b\nA -> c B | d\nB -> e A | f S | g\n",
        ),
        ("unit-cycle", "start: S\nS -> A | a\nA -> S | b A\n"),
        (
            "nullable",
            "start: S\nS -> A S B | c\nA -> a | eps\nB -> b B | eps\n",
        ),
        ("mixed", "start: S\nS -> S A | a\nA -> b A c | S | eps\n"),
    ] {
        out.push((n, parse_grammar(t).unwrap()));
    }
    out
}

pub fn pv(v: &[u64]) -> ParikhVector {
    ParikhVector::from(v.to_vec())
}

// ---------------------------------------------------------------------------
// Minimal-tree catalog by generate-and-filter.

fn label_repeats_on_a_path(t: &DerivationTree, seen: &mut Vec<NonterminalId>) -> bool {
    if seen.contains(&t.root()) {
        return true;
    }
    seen.push(t.root());
    let hit = t.children().iter().any(|c| match c {
        Node::Internal(s) => label_repeats_on_a_path(s, seen),
        _ => false,
    });
    seen.pop();
    hit
}

fn crown_count(t: &DerivationTree) -> usize {
    t.children()
        .iter()
        .map(|c| match c {
            Node::Crown(_) => 1,
            Node::Internal(s) => crown_count(s),
            _ => 0,
        })
        .sum()
}

fn spine_labels(t: &DerivationTree, out: &mut Vec<NonterminalId>) -> bool {
    out.push(t.root());
    for c in t.children() {
        match c {
            Node::Crown(_) => return true,
            Node::Internal(s) if spine_labels(s, out) => return true,
            _ => {}
        }
    }
    out.pop();
    false
}

struct BruteForce<'g> {
    g: &'g Grammar,
    memo: HashMap<(NonterminalId, usize, Option<NonterminalId>), Rc<Vec<DerivationTree>>>,
}

impl BruteForce<'_> {
    /// All trees rooted at `x` of internal depth ≤ `depth` with at most one
    /// crown labeled `crown`. Crown-free subtrees with a repeated label on a
    /// path and crowned subtrees with a repeated spine label are dropped:
    /// neither can sit inside a minimal tree.
    fn trees(
        &mut self,
        x: NonterminalId,
        depth: usize,
        crown: Option<NonterminalId>,
    ) -> Rc<Vec<DerivationTree>> {
        if let Some(hit) = self.memo.get(&(x, depth, crown)) {
            return hit.clone();
        }
        let mut out = Vec::new();
        if depth > 0 {
            let prods: Vec<_> = self.g.productions_of(x).cloned().collect();
            for p in prods {
                let mut partial: Vec<Vec<Node>> = vec![Vec::new()];
                for s in &p.rhs {
                    let options: Vec<Node> = match *s {
                        Symbol::Terminal(t) => vec![Node::Terminal(t)],
                        Symbol::Nonterminal(y) => {
                            let mut o: Vec<Node> = self
                                .trees(y, depth - 1, crown)
                                .iter()
                                .cloned()
                                .map(Node::Internal)
                                .collect();
                            if Some(y) == crown {
                                o.push(Node::Crown(y));
                            }
                            o
                        }
                    };
                    partial = partial
                        .into_iter()
                        .flat_map(|pre| {
                            options.iter().map(move |o| {
                                let mut v = pre.clone();
                                v.push(o.clone());
                                v
                            })
                        })
                        .collect();
                }
                for children in partial {
                    let children = if children.is_empty() {
                        vec![Node::Epsilon]
                    } else {
                        children
                    };
                    let t = DerivationTree::new(x, children);
                    let crowns = crown_count(&t);
                    let keep = match crowns {
                        0 => !label_repeats_on_a_path(&t, &mut Vec::new()),
                        1 => {
                            let mut spine = Vec::new();
                            spine_labels(&t, &mut spine);
                            let distinct: HashSet<_> = spine.iter().collect();
                            distinct.len() == spine.len()
                        }
                        _ => false,
                    };
                    if keep {
                        out.push(t);
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert((x, depth, crown), out.clone());
        out
    }
}

/// Minimal ground and block trees found by generating every candidate up to
/// depth `2|N| + 2` and filtering with `is_minimal`; sorted by S-expression.
pub fn brute_force_catalog(g: &Grammar) -> (Vec<String>, Vec<String>) {
    let depth = 2 * g.nonterminals().len() + 2;
    let mut bf = BruteForce {
        g,
        memo: HashMap::new(),
    };
    let ground: BTreeSet<String> = bf
        .trees(g.axiom(), depth, None)
        .iter()
        .filter(|t| crown_count(t) == 0 && t.is_minimal())
        .map(|t| t.to_sexpr(g))
        .collect();
    let mut blocks = BTreeSet::new();
    for a in g.nonterminal_ids() {
        for t in bf.trees(a, depth, Some(a)).iter() {
            if crown_count(t) == 1 && t.is_minimal() {
                blocks.insert(t.to_sexpr(g));
            }
        }
    }
    (ground.into_iter().collect(), blocks.into_iter().collect())
}

// ---------------------------------------------------------------------------
// Well-formedness by exhaustive multiset derivation.

/// Whether the multiset can be merged into a single ground tree by repeatedly
/// replacing two trees `T1`, `T2` (a block) by some `T ∈ T1 ∘ T2`, trying
/// every pair, every order and every gluing point.
pub fn brute_force_well_formed(trees: &[DerivationTree]) -> bool {
    let mut start = trees.to_vec();
    start.sort();
    let mut visited = HashSet::new();
    search_merge(start, &mut visited)
}

fn search_merge(state: Vec<DerivationTree>, visited: &mut HashSet<Vec<DerivationTree>>) -> bool {
    if state.len() == 1 {
        return crown_count(&state[0]) == 0;
    }
    if !visited.insert(state.clone()) {
        return false;
    }
    for j in 0..state.len() {
        if crown_count(&state[j]) != 1 {
            continue;
        }
        for i in 0..state.len() {
            if i == j {
                continue;
            }
            for (path, label) in state[i].internal_nodes() {
                if label != state[j].root() {
                    continue;
                }
                let merged = compose(&state[i], &state[j], &path).unwrap();
                let mut next: Vec<DerivationTree> = state
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i && k != j)
                    .map(|(_, t)| t.clone())
                    .collect();
                next.push(merged);
                next.sort();
                if search_merge(next, visited) {
                    return true;
                }
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Linear-set membership by enumerating coefficient vectors.

pub fn brute_force_member(v: &ParikhVector, ls: &LinearSet) -> bool {
    let bound = v.total();
    let periods = ls.periods();
    let mut coeffs = vec![0u64; periods.len()];
    loop {
        let mut sum = ls.offset().clone();
        for (p, &t) in periods.iter().zip(&coeffs) {
            sum += &p.scaled(t);
        }
        if &sum == v {
            return true;
        }
        // next coefficient vector with Σt ≤ bound
        let mut k = 0;
        loop {
            if k == coeffs.len() {
                return false;
            }
            coeffs[k] += 1;
            if coeffs.iter().sum::<u64>() <= bound {
                break;
            }
            coeffs[k] = 0;
            k += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Derivation trees of short words.

/// Every ground tree rooted at `x` with yield length ≤ `max_len` and at most
/// `max_nodes` internal nodes.
pub fn all_trees(
    g: &Grammar,
    x: NonterminalId,
    max_len: usize,
    max_nodes: usize,
) -> Vec<DerivationTree> {
    let mut memo = HashMap::new();
    all_trees_memo(g, x, max_len, max_nodes, &mut memo)
        .iter()
        .map(|(t, _, _)| t.clone())
        .collect()
}

type Sized3 = Rc<Vec<(DerivationTree, usize, usize)>>;

fn all_trees_memo(
    g: &Grammar,
    x: NonterminalId,
    max_len: usize,
    max_nodes: usize,
    memo: &mut HashMap<(NonterminalId, usize, usize), Sized3>,
) -> Sized3 {
    if let Some(hit) = memo.get(&(x, max_len, max_nodes)) {
        return hit.clone();
    }
    let mut out = Vec::new();
    if max_nodes > 0 {
        for p in g.productions_of(x) {
            // (children, yield length, internal nodes below this node)
            let mut partial: Vec<(Vec<Node>, usize, usize)> = vec![(Vec::new(), 0, 0)];
            for s in &p.rhs {
                let mut next = Vec::new();
                for (pre, len, nodes) in partial {
                    match *s {
                        Symbol::Terminal(t) => {
                            if len < max_len {
                                let mut v = pre.clone();
                                v.push(Node::Terminal(t));
                                next.push((v, len + 1, nodes));
                            }
                        }
                        Symbol::Nonterminal(y) => {
                            let subs =
                                all_trees_memo(g, y, max_len - len, max_nodes - 1 - nodes, memo);
                            for (sub, sl, sn) in subs.iter() {
                                let mut v = pre.clone();
                                v.push(Node::Internal(sub.clone()));
                                next.push((v, len + sl, nodes + sn));
                            }
                        }
                    }
                }
                partial = next;
            }
            for (children, len, nodes) in partial {
                let children = if children.is_empty() {
                    vec![Node::Epsilon]
                } else {
                    children
                };
                out.push((DerivationTree::new(x, children), len, nodes + 1));
            }
        }
    }
    let out = Rc::new(out);
    memo.insert((x, max_len, max_nodes), out.clone());
    out
}

// ---------------------------------------------------------------------------
// Random trees and grammars.

/// Least height of a terminating derivation per nonterminal.
fn min_heights(g: &Grammar) -> Vec<usize> {
    let mut h = vec![usize::MAX; g.nonterminals().len()];
    let mut changed = true;
    while changed {
        changed = false;
        for p in g.productions() {
            let child = p
                .rhs
                .iter()
                .map(|s| match s {
                    Symbol::Terminal(_) => 0,
                    Symbol::Nonterminal(x) => h[x.0],
                })
                .max()
                .unwrap_or(0);
            if child != usize::MAX && child + 1 < h[p.lhs.0] {
                h[p.lhs.0] = child + 1;
                changed = true;
            }
        }
    }
    h
}

/// Random ground tree rooted at `x`; beyond `soft_depth` only productions on
/// a shortest terminating route are used. `g` must be reduced.
pub fn random_ground_tree<R: Rng>(
    g: &Grammar,
    x: NonterminalId,
    soft_depth: usize,
    rng: &mut R,
) -> DerivationTree {
    let h = min_heights(g);
    random_expand(g, &h, x, 0, soft_depth, rng)
}

fn random_expand<R: Rng>(
    g: &Grammar,
    h: &[usize],
    x: NonterminalId,
    depth: usize,
    soft_depth: usize,
    rng: &mut R,
) -> DerivationTree {
    let prods: Vec<_> = g.productions_of(x).collect();
    let height = |p: &&parikh::Production| {
        1 + p
            .rhs
            .iter()
            .map(|s| match s {
                Symbol::Terminal(_) => 0,
                Symbol::Nonterminal(y) => h[y.0],
            })
            .max()
            .unwrap_or(0)
    };
    let choices: Vec<_> = if depth >= soft_depth {
        prods.iter().filter(|p| height(p) == h[x.0]).collect()
    } else {
        prods.iter().collect()
    };
    let p = choices.choose(rng).unwrap();
    let children = if p.rhs.is_empty() {
        vec![Node::Epsilon]
    } else {
        p.rhs
            .iter()
            .map(|s| match *s {
                Symbol::Terminal(t) => Node::Terminal(t),
                Symbol::Nonterminal(y) => {
                    Node::Internal(random_expand(g, h, y, depth + 1, soft_depth, rng))
                }
            })
            .collect()
    };
    DerivationTree::new(x, children)
}

/// Random block tree rooted at `root`: a catalog block composed with up to
/// `extra` further catalog blocks at random matching nodes.
pub fn random_block_tree<R: Rng>(
    catalog: &MinimalCatalog,
    root: NonterminalId,
    extra: usize,
    rng: &mut R,
) -> Option<DerivationTree> {
    let rooted: Vec<_> = catalog
        .blocks()
        .iter()
        .filter(|b| b.root() == root)
        .collect();
    let mut t = (*rooted.choose(rng)?).clone();
    for _ in 0..rng.gen_range(0..=extra) {
        let b = catalog.blocks().choose(rng)?;
        let spots: Vec<TreePath> = t
            .internal_nodes()
            .into_iter()
            .filter(|(_, l)| *l == b.root())
            .map(|(p, _)| p)
            .collect();
        if let Some(at) = spots.choose(rng) {
            t = compose(&t, b, at).unwrap();
        }
    }
    Some(t)
}

/// Random grammar text with ≤3 nonterminals, ≤6 productions, right-hand
/// sides of length ≤3 and an alphabet of ≤3 letters.
pub fn random_grammar_text<R: Rng>(rng: &mut R) -> String {
    let nts = ["S", "A", "B"];
    let ts = ["a", "b", "c"];
    let n = rng.gen_range(1..=3);
    let k = rng.gen_range(1..=3);
    let count = rng.gen_range(n..=6);
    let mut prods: BTreeSet<(usize, Vec<&str>)> = BTreeSet::new();
    for i in 0..count {
        let lhs = if i < n { i } else { rng.gen_range(0..n) };
        let len = rng.gen_range(0..=3);
        let rhs: Vec<&str> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    nts[rng.gen_range(0..n)]
                } else {
                    ts[rng.gen_range(0..k)]
                }
            })
            .collect();
        prods.insert((lhs, rhs));
    }
    let mut text = String::from("start: S\n");
    for (lhs, rhs) in prods {
        let rhs = if rhs.is_empty() {
            "eps".to_string()
        } else {
            rhs.join(" ")
        };
        text.push_str(&format!("{} -> {}\n", nts[lhs], rhs));
    }
    text
}

/// Draws random grammars until `count` parse and reduce to a nonempty
/// language; returns the reduced grammars with their source text.
pub fn random_reduced_grammars<R: Rng>(count: usize, rng: &mut R) -> Vec<(String, Grammar)> {
    let mut out = Vec::new();
    while out.len() < count {
        let text = random_grammar_text(rng);
        let Ok(g) = parse_grammar(&text) else {
            continue;
        };
        let r = reduce_grammar(&g);
        if !r.is_empty_language() {
            out.push((text, r));
        }
    }
    out
}
