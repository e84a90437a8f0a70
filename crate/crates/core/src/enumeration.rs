//! Exhaustive enumeration of the minimal trees of a grammar.
//!
//! Minimal ground trees are exactly the trees in which no nonterminal repeats
//! along a root-to-leaf path, so they are produced by depth-first expansion
//! that carries the set of labels on the current path. Minimal block trees
//! consist of a repetition-free *spine* from the root `A` down to the crown
//! `A`; every subtree hanging off the spine is itself a minimal ground tree
//! (rooted at any nonterminal), because a repetition between a spine node and
//! an off-spine node does not delimit a removable block.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::grammar::{Grammar, NonterminalId, Symbol};
use crate::trees::{DerivationTree, Node};
use crate::BudgetExceeded;

/// Default cap on the number of catalog trees.
pub const DEFAULT_MAX_TREES: usize = 10_000;

/// The finite set of minimal trees of a grammar in canonical order
/// (lexicographic by S-expression), ground trees first. A tree's position in
/// this order is its catalog index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalCatalog {
    ground: Vec<DerivationTree>,
    blocks: Vec<DerivationTree>,
    dim: usize,
}

impl MinimalCatalog {
    pub fn ground(&self) -> &[DerivationTree] {
        &self.ground
    }

    pub fn blocks(&self) -> &[DerivationTree] {
        &self.blocks
    }

    /// Number of terminals of the underlying grammar.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of minimal trees.
    pub fn len(&self) -> usize {
        self.ground.len() + self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, index: usize) -> Option<&DerivationTree> {
        if index < self.ground.len() {
            self.ground.get(index)
        } else {
            self.blocks.get(index - self.ground.len())
        }
    }

    pub fn is_ground_index(&self, index: usize) -> bool {
        index < self.ground.len()
    }

    pub fn is_block_index(&self, index: usize) -> bool {
        index >= self.ground.len() && index < self.len()
    }

    pub fn ground_indices(&self) -> std::ops::Range<usize> {
        0..self.ground.len()
    }

    pub fn block_indices(&self) -> std::ops::Range<usize> {
        self.ground.len()..self.len()
    }

    pub fn index_of(&self, tree: &DerivationTree) -> Option<usize> {
        if let Some(i) = self.ground.iter().position(|t| t == tree) {
            return Some(i);
        }
        self.blocks
            .iter()
            .position(|t| t == tree)
            .map(|i| i + self.ground.len())
    }

    pub fn iter(&self) -> impl Iterator<Item = &DerivationTree> {
        self.ground.iter().chain(self.blocks.iter())
    }
}

type PathSet = BTreeSet<NonterminalId>;
type Trees = Rc<Vec<DerivationTree>>;

struct Enumerator<'g> {
    g: &'g Grammar,
    budget: usize,
    ground_memo: HashMap<(NonterminalId, PathSet), Trees>,
    spine_memo: HashMap<(NonterminalId, PathSet, NonterminalId), Trees>,
}

/// Options for one child position while building the children of a node.
enum Slot {
    Leaf(Node),
    Subtrees(Trees),
}

impl<'g> Enumerator<'g> {
    fn new(g: &'g Grammar, budget: usize) -> Self {
        Enumerator {
            g,
            budget,
            ground_memo: HashMap::new(),
            spine_memo: HashMap::new(),
        }
    }

    fn exceeded(&self) -> BudgetExceeded {
        BudgetExceeded::new("minimal tree", self.budget)
    }

    /// Ground trees rooted at `nt` whose paths avoid `above` and repeat no
    /// label. Requires `nt ∉ above`.
    fn ground(&mut self, nt: NonterminalId, above: &PathSet) -> Result<Trees, BudgetExceeded> {
        let key = (nt, above.clone());
        if let Some(hit) = self.ground_memo.get(&key) {
            return Ok(hit.clone());
        }
        let mut path = above.clone();
        path.insert(nt);
        let mut out = Vec::new();
        let productions: Vec<_> = self.g.productions_of(nt).cloned().collect();
        'prod: for p in productions {
            let mut slots = Vec::with_capacity(p.rhs.len());
            for s in &p.rhs {
                match *s {
                    Symbol::Terminal(t) => slots.push(Slot::Leaf(Node::Terminal(t))),
                    Symbol::Nonterminal(x) => {
                        if path.contains(&x) {
                            continue 'prod;
                        }
                        let sub = self.ground(x, &path)?;
                        if sub.is_empty() {
                            continue 'prod;
                        }
                        slots.push(Slot::Subtrees(sub));
                    }
                }
            }
            self.expand(nt, &slots, &mut out)?;
        }
        let out = Rc::new(out);
        self.ground_memo.insert(key, out.clone());
        Ok(out)
    }

    /// Spine subtrees rooted at `nt` leading to the crown `crown`, with
    /// `spine` holding the labels already used on the spine (including the
    /// block root).
    fn spine(
        &mut self,
        nt: NonterminalId,
        spine: &PathSet,
        crown: NonterminalId,
    ) -> Result<Trees, BudgetExceeded> {
        let key = (nt, spine.clone(), crown);
        if let Some(hit) = self.spine_memo.get(&key) {
            return Ok(hit.clone());
        }
        let mut out = Vec::new();
        let productions: Vec<_> = self.g.productions_of(nt).cloned().collect();
        for p in productions {
            'pos: for (i, s) in p.rhs.iter().enumerate() {
                let Symbol::Nonterminal(x) = *s else { continue };
                let spine_slot = if x == crown {
                    Slot::Leaf(Node::Crown(crown))
                } else if spine.contains(&x) {
                    continue;
                } else {
                    let mut next = spine.clone();
                    next.insert(x);
                    let sub = self.spine(x, &next, crown)?;
                    if sub.is_empty() {
                        continue;
                    }
                    Slot::Subtrees(sub)
                };
                let mut slots = Vec::with_capacity(p.rhs.len());
                for (j, s) in p.rhs.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    match *s {
                        Symbol::Terminal(t) => slots.push(Slot::Leaf(Node::Terminal(t))),
                        Symbol::Nonterminal(z) => {
                            let sub = self.ground(z, &PathSet::new())?;
                            if sub.is_empty() {
                                continue 'pos;
                            }
                            slots.push(Slot::Subtrees(sub));
                        }
                    }
                }
                slots.insert(i, spine_slot);
                self.expand(nt, &slots, &mut out)?;
            }
        }
        let out = Rc::new(out);
        self.spine_memo.insert(key, out.clone());
        Ok(out)
    }

    /// Appends the cartesian product of `slots` as children of `nt`.
    fn expand(
        &self,
        nt: NonterminalId,
        slots: &[Slot],
        out: &mut Vec<DerivationTree>,
    ) -> Result<(), BudgetExceeded> {
        if slots.is_empty() {
            out.push(DerivationTree::new(nt, vec![Node::Epsilon]));
            return self.check(out.len());
        }
        let count = slots.iter().try_fold(1usize, |acc, s| match s {
            Slot::Leaf(_) => Some(acc),
            Slot::Subtrees(v) => acc.checked_mul(v.len()),
        });
        match count {
            Some(c) if out.len() + c <= self.budget => {}
            _ => return Err(self.exceeded()),
        }
        let mut idx = vec![0usize; slots.len()];
        loop {
            let children = slots
                .iter()
                .zip(&idx)
                .map(|(s, &i)| match s {
                    Slot::Leaf(n) => n.clone(),
                    Slot::Subtrees(v) => Node::Internal(v[i].clone()),
                })
                .collect();
            out.push(DerivationTree::new(nt, children));
            // odometer step, last slot fastest
            let mut k = slots.len();
            loop {
                if k == 0 {
                    return Ok(());
                }
                k -= 1;
                let width = match &slots[k] {
                    Slot::Leaf(_) => 1,
                    Slot::Subtrees(v) => v.len(),
                };
                idx[k] += 1;
                if idx[k] < width {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn check(&self, n: usize) -> Result<(), BudgetExceeded> {
        if n > self.budget {
            Err(self.exceeded())
        } else {
            Ok(())
        }
    }
}

fn canonical(g: &Grammar, trees: &[DerivationTree]) -> Vec<DerivationTree> {
    let mut keyed: Vec<(String, DerivationTree)> =
        trees.iter().map(|t| (t.to_sexpr(g), t.clone())).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    keyed.into_iter().map(|(_, t)| t).collect()
}

/// All minimal ground trees rooted at the axiom, in canonical order.
pub fn enumerate_minimal_ground(
    g: &Grammar,
    budget: usize,
) -> Result<Vec<DerivationTree>, BudgetExceeded> {
    if g.is_empty_language() {
        return Ok(Vec::new());
    }
    let mut e = Enumerator::new(g, budget);
    let trees = e.ground(g.axiom(), &PathSet::new())?;
    Ok(canonical(g, &trees))
}

/// All minimal block trees over every nonterminal, in canonical order.
pub fn enumerate_minimal_blocks(
    g: &Grammar,
    budget: usize,
) -> Result<Vec<DerivationTree>, BudgetExceeded> {
    let mut e = Enumerator::new(g, budget);
    blocks_with(&mut e, g)
}

fn blocks_with(e: &mut Enumerator<'_>, g: &Grammar) -> Result<Vec<DerivationTree>, BudgetExceeded> {
    let mut all = Vec::new();
    for a in g.nonterminal_ids() {
        let trees = e.spine(a, &PathSet::from([a]), a)?;
        all.extend(trees.iter().cloned());
        e.check(all.len())?;
    }
    Ok(canonical(g, &all))
}

/// The complete catalog of minimal trees; errors rather than truncates when
/// it would exceed `budget` trees.
pub fn build_catalog(g: &Grammar, budget: usize) -> Result<MinimalCatalog, BudgetExceeded> {
    let dim = g.dim();
    if g.is_empty_language() {
        return Ok(MinimalCatalog {
            ground: Vec::new(),
            blocks: Vec::new(),
            dim,
        });
    }
    let mut e = Enumerator::new(g, budget);
    let ground = canonical(g, &e.ground(g.axiom(), &PathSet::new())?);
    let blocks = blocks_with(&mut e, g)?;
    if ground.len() + blocks.len() > budget {
        return Err(BudgetExceeded::new("minimal tree", budget));
    }
    Ok(MinimalCatalog {
        ground,
        blocks,
        dim,
    })
}
