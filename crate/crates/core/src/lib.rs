//! Semilinear Parikh images of context-free languages.
//!
//! The image is built from the finite catalog of minimal derivation trees of
//! a grammar: every well-formed support (one minimal ground tree plus a set of
//! minimal block trees) contributes the linear set whose offset is the Parikh
//! image of the support and whose periods are the images of its block trees.
//! The union over all well-formed supports is exactly the Parikh image of the
//! language.
//!
//! ```
//! use parikh::{compute_image, parse_grammar, Budgets, ParikhVector};
//!
//! let g = parse_grammar("start: S\nS -> a S b | eps\n").unwrap();
//! let image = compute_image(&g, &Budgets::default()).unwrap();
//! assert!(image.contains(&ParikhVector::from(vec![3, 3])).unwrap());
//! assert!(!image.contains(&ParikhVector::from(vec![2, 3])).unwrap());
//! ```

pub mod cli;
pub mod enumeration;
pub mod grammar;
pub mod pipeline;
pub mod semilinear;
pub mod trees;

pub use enumeration::{
    build_catalog, enumerate_minimal_blocks, enumerate_minimal_ground, MinimalCatalog,
    DEFAULT_MAX_TREES,
};
pub use grammar::{
    oracle_parikh_vectors, oracle_parikh_vectors_capped, parse_grammar, reduce_grammar, Grammar,
    GrammarError, NonterminalId, ParikhVector, Production, Symbol, TerminalId, DEFAULT_ORACLE_CAP,
};
pub use pipeline::{
    assemble_witness, compute_image, enumerate_well_formed_supports, is_well_formed, Budgets,
    PipelineError, Support, DEFAULT_MAX_SUPPORTS,
};
pub use semilinear::{lin_of_support, DimensionMismatch, LinearSet, SemilinearSet};
pub use trees::{
    compose, decompose_fully, decompose_once, Decomposition, DerivationTree, Node, TreeError,
    TreeKind, TreePath,
};

/// A resource cap was hit. Budgets are never silently truncated since a
/// partial catalog or support list would no longer denote the full image.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{what} budget exceeded (limit {limit})")]
pub struct BudgetExceeded {
    pub what: &'static str,
    pub limit: usize,
}

impl BudgetExceeded {
    pub(crate) fn new(what: &'static str, limit: usize) -> Self {
        BudgetExceeded { what, limit }
    }
}
