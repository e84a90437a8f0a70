//! Supports, well-formedness, witness assembly and the end-to-end image.
//!
//! A support is one minimal ground tree together with a set of distinct
//! minimal block trees, optionally carrying a multiplicity per tree. Whether
//! a multiset of minimal trees can be glued into a single ground tree depends
//! only on which trees occur, not on how often, so well-formedness is decided
//! on the set alone by saturation: a block can be attached once its root
//! label occurs somewhere in the tree built so far, and attaching it only
//! adds label occurrences.

use std::collections::BTreeSet;

use crate::enumeration::{build_catalog, MinimalCatalog, DEFAULT_MAX_TREES};
use crate::grammar::{reduce_grammar, Grammar, NonterminalId};
use crate::semilinear::{lin_of_support, SemilinearSet};
use crate::trees::{compose, DerivationTree, TreeError};
use crate::BudgetExceeded;

/// Default cap on the number of well-formed supports.
pub const DEFAULT_MAX_SUPPORTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    pub max_trees: usize,
    pub max_supports: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_trees: DEFAULT_MAX_TREES,
            max_supports: DEFAULT_MAX_SUPPORTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("support is not well-formed")]
    NotWellFormed,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// One minimal ground tree plus a duplicate-free set of minimal block trees,
/// all given as catalog indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Support {
    ground: usize,
    blocks: Vec<usize>,
    multiplicity: Option<Vec<u64>>,
}

impl Support {
    pub fn new(ground: usize, blocks: impl IntoIterator<Item = usize>) -> Self {
        let blocks: Vec<usize> = blocks
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Support {
            ground,
            blocks,
            multiplicity: None,
        }
    }

    /// Attaches a multiplicity vector indexed by catalog position.
    pub fn with_multiplicity(mut self, multiplicity: Vec<u64>) -> Self {
        self.multiplicity = Some(multiplicity);
        self
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn multiplicity(&self) -> Option<&[u64]> {
        self.multiplicity.as_deref()
    }

    /// Ground index followed by the block indices.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.ground).chain(self.blocks.iter().copied())
    }

    pub fn contains(&self, index: usize) -> bool {
        index == self.ground || self.blocks.binary_search(&index).is_ok()
    }

    /// Occurrences of catalog tree `index`: taken from the multiplicity
    /// vector if present, otherwise 1 for members and 0 for the rest.
    pub fn multiplicity_of(&self, index: usize) -> u64 {
        match &self.multiplicity {
            Some(m) => m.get(index).copied().unwrap_or(0),
            None => u64::from(self.contains(index)),
        }
    }

    /// The 0-1 vector over catalog indices marking the members.
    pub fn indicator(&self, catalog_len: usize) -> Vec<u8> {
        (0..catalog_len)
            .map(|i| u8::from(self.contains(i)))
            .collect()
    }

    pub fn validate(&self, catalog: &MinimalCatalog) -> Result<(), PipelineError> {
        if !catalog.is_ground_index(self.ground) {
            return Err(PipelineError::InvalidSupport(format!(
                "index {} is not a ground tree",
                self.ground
            )));
        }
        if let Some(&b) = self.blocks.iter().find(|&&b| !catalog.is_block_index(b)) {
            return Err(PipelineError::InvalidSupport(format!(
                "index {b} is not a block tree"
            )));
        }
        if let Some(m) = &self.multiplicity {
            if m.len() != catalog.len() {
                return Err(PipelineError::InvalidSupport(format!(
                    "multiplicity vector has length {}, catalog has {} trees",
                    m.len(),
                    catalog.len()
                )));
            }
            if m[self.ground] != 1 {
                return Err(PipelineError::InvalidSupport(
                    "the ground tree must occur exactly once".to_string(),
                ));
            }
            if let Some(i) = (0..m.len()).find(|&i| (m[i] > 0) != self.contains(i)) {
                return Err(PipelineError::InvalidSupport(format!(
                    "multiplicity of tree {i} disagrees with membership"
                )));
            }
        }
        Ok(())
    }
}

/// Attaches blocks from `blocks` in passes over their order until nothing
/// changes; returns the attachment order.
fn saturate(ground: &DerivationTree, blocks: &[usize], catalog: &MinimalCatalog) -> Vec<usize> {
    let mut labels: BTreeSet<NonterminalId> = ground.internal_labels();
    let mut pending = blocks.to_vec();
    let mut order = Vec::with_capacity(blocks.len());
    loop {
        let before = order.len();
        pending.retain(|&b| {
            let t = catalog.get(b).expect("block index in catalog");
            if labels.contains(&t.root()) {
                labels.extend(t.internal_labels());
                order.push(b);
                false
            } else {
                true
            }
        });
        if pending.is_empty() || order.len() == before {
            return order;
        }
    }
}

/// True iff the support (with any multiplicities) composes into one ground
/// tree. Invalid supports are reported as not well-formed.
pub fn is_well_formed(support: &Support, catalog: &MinimalCatalog) -> bool {
    if support.validate(catalog).is_err() {
        return false;
    }
    let ground = catalog.get(support.ground).expect("validated");
    saturate(ground, &support.blocks, catalog).len() == support.blocks.len()
}

/// Builds a ground tree from the support, attaching every copy of each
/// block, in saturation order, at the first node (preorder) carrying the
/// block's root label.
pub fn assemble_witness(
    support: &Support,
    catalog: &MinimalCatalog,
) -> Result<DerivationTree, PipelineError> {
    support.validate(catalog)?;
    let mut tree = catalog.get(support.ground).expect("validated").clone();
    let order = saturate(&tree, &support.blocks, catalog);
    if order.len() != support.blocks.len() {
        return Err(PipelineError::NotWellFormed);
    }
    for b in order {
        let block = catalog.get(b).expect("validated");
        for _ in 0..support.multiplicity_of(b) {
            let at = tree
                .first_node_labeled(block.root())
                .expect("saturation guarantees an occurrence");
            tree = compose(&tree, block, &at)?;
        }
    }
    Ok(tree)
}

/// Every well-formed support of the catalog in canonical order
/// (by ground index, then by sorted block indices).
pub fn enumerate_well_formed_supports(
    catalog: &MinimalCatalog,
    budget: usize,
) -> Result<Vec<Support>, BudgetExceeded> {
    let all_blocks: Vec<usize> = catalog.block_indices().collect();
    let mut out = Vec::new();
    for g in catalog.ground_indices() {
        let ground = catalog.get(g).expect("ground index");
        // blocks never attachable from this ground tree, even with every
        // other block present, cannot belong to any of its supports
        let mut candidates = saturate(ground, &all_blocks, catalog);
        candidates.sort_unstable();
        let mut search = SupportSearch {
            catalog,
            ground,
            ground_index: g,
            candidates: &candidates,
            budget,
            out: &mut out,
        };
        search.run(0, &mut Vec::new())?;
    }
    out.sort();
    Ok(out)
}

struct SupportSearch<'a> {
    catalog: &'a MinimalCatalog,
    ground: &'a DerivationTree,
    ground_index: usize,
    candidates: &'a [usize],
    budget: usize,
    out: &'a mut Vec<Support>,
}

impl SupportSearch<'_> {
    /// Whether every block of `chosen` can still be attached when all
    /// candidates from `next` on remain available.
    fn feasible(&self, chosen: &[usize], next: usize) -> bool {
        let mut pool = chosen.to_vec();
        pool.extend_from_slice(&self.candidates[next..]);
        let attached = saturate(self.ground, &pool, self.catalog);
        chosen.iter().all(|b| attached.contains(b))
    }

    fn run(&mut self, next: usize, chosen: &mut Vec<usize>) -> Result<(), BudgetExceeded> {
        if next == self.candidates.len() {
            if saturate(self.ground, chosen, self.catalog).len() == chosen.len() {
                self.out
                    .push(Support::new(self.ground_index, chosen.iter().copied()));
                if self.out.len() > self.budget {
                    return Err(BudgetExceeded::new("support", self.budget));
                }
            }
            return Ok(());
        }
        if self.feasible(chosen, next + 1) {
            self.run(next + 1, chosen)?;
        }
        chosen.push(self.candidates[next]);
        if self.feasible(chosen, next + 1) {
            self.run(next + 1, chosen)?;
        }
        chosen.pop();
        Ok(())
    }
}

/// A semilinear representation of the Parikh image of `L(g)`: the union of
/// the linear sets of all well-formed supports of the reduced grammar.
pub fn compute_image(g: &Grammar, budgets: &Budgets) -> Result<SemilinearSet, BudgetExceeded> {
    let reduced = reduce_grammar(g);
    if reduced.is_empty_language() {
        return Ok(SemilinearSet::empty(g.dim()));
    }
    let catalog = build_catalog(&reduced, budgets.max_trees)?;
    let supports = enumerate_well_formed_supports(&catalog, budgets.max_supports)?;
    let components = supports
        .iter()
        .map(|s| lin_of_support(s, &catalog))
        .collect();
    Ok(SemilinearSet::new(g.dim(), components).expect("one dimension throughout"))
}
