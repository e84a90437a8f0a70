//! Derivation trees for words (ground trees) and for sentential forms
//! `A ⇒* uAv` (block trees), with the composition/decomposition algebra.
//!
//! A block tree carries exactly one nonterminal leaf, the *crown*, labeled
//! like its root. Gluing a block tree with root `B` into an internal `B` node
//! of another tree replaces that node by the block and hangs the node's old
//! subtree from the crown. Decomposition is the exact inverse.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use crate::grammar::{Grammar, NonterminalId, ParikhVector, Symbol, TerminalId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Terminal(TerminalId),
    /// Sole child of a node expanded by an ε-production.
    Epsilon,
    /// The distinguished nonterminal leaf of a block tree.
    Crown(NonterminalId),
    Internal(DerivationTree),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivationTree {
    root: NonterminalId,
    children: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeKind {
    Ground,
    Block,
}

/// Child indices from the root down to one internal node. The empty path
/// addresses the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePath(Vec<usize>);

impl TreePath {
    pub fn root() -> Self {
        TreePath(Vec::new())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for TreePath {
    fn from(v: Vec<usize>) -> Self {
        TreePath(v)
    }
}

impl fmt::Display for TreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("no internal node at path {0}")]
    InvalidPath(TreePath),
    #[error("label mismatch at path {at}: expected nonterminal {expected:?}, found {found:?}")]
    LabelMismatch {
        at: TreePath,
        expected: NonterminalId,
        found: NonterminalId,
    },
    #[error("not a block tree")]
    NotABlockTree,
    #[error("node at path {0} does not match any production")]
    UnknownProduction(TreePath),
    #[error("node at path {0} has no children")]
    EmptyNode(TreePath),
    #[error("epsilon leaf must be the only child (path {0})")]
    MisplacedEpsilon(TreePath),
    #[error("a tree needs no crown or exactly one crown labeled like its root")]
    MalformedCrown,
    #[error("s-expression error at token {position}: {message}")]
    Sexpr { position: usize, message: String },
}

/// Result of cutting one block out of a tree: `compose(&outer, &block, &at)`
/// rebuilds the original tree exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub outer: DerivationTree,
    pub block: DerivationTree,
    pub at: TreePath,
}

impl DerivationTree {
    pub fn new(root: NonterminalId, children: Vec<Node>) -> Self {
        DerivationTree { root, children }
    }

    pub fn root(&self) -> NonterminalId {
        self.root
    }

    pub fn children(&self) -> &[Node] {
        &self.children
    }

    pub fn crown_count(&self) -> usize {
        self.children
            .iter()
            .map(|c| match c {
                Node::Crown(_) => 1,
                Node::Internal(t) => t.crown_count(),
                _ => 0,
            })
            .sum()
    }

    fn contains_crown(&self) -> bool {
        self.children.iter().any(|c| match c {
            Node::Crown(_) => true,
            Node::Internal(t) => t.contains_crown(),
            _ => false,
        })
    }

    fn crown_label(&self) -> Option<NonterminalId> {
        self.children.iter().find_map(|c| match c {
            Node::Crown(a) => Some(*a),
            Node::Internal(t) => t.crown_label(),
            _ => None,
        })
    }

    /// Kind by shape. Only meaningful for trees that pass [`validate`].
    ///
    /// [`validate`]: DerivationTree::validate
    pub fn kind(&self) -> TreeKind {
        if self.contains_crown() {
            TreeKind::Block
        } else {
            TreeKind::Ground
        }
    }

    pub fn is_block(&self) -> bool {
        self.crown_count() == 1 && self.crown_label() == Some(self.root)
    }

    /// Checks every internal node against the productions of `g` and the
    /// crown discipline, returning the tree's kind.
    pub fn validate(&self, g: &Grammar) -> Result<TreeKind, TreeError> {
        self.validate_at(g, &mut Vec::new())?;
        match self.crown_count() {
            0 => Ok(TreeKind::Ground),
            1 if self.crown_label() == Some(self.root) => Ok(TreeKind::Block),
            _ => Err(TreeError::MalformedCrown),
        }
    }

    fn validate_at(&self, g: &Grammar, path: &mut Vec<usize>) -> Result<(), TreeError> {
        if self.children.is_empty() {
            return Err(TreeError::EmptyNode(TreePath(path.clone())));
        }
        let mut rhs = Vec::with_capacity(self.children.len());
        for c in &self.children {
            match c {
                Node::Terminal(t) => rhs.push(Symbol::Terminal(*t)),
                Node::Crown(a) => rhs.push(Symbol::Nonterminal(*a)),
                Node::Internal(t) => rhs.push(Symbol::Nonterminal(t.root)),
                Node::Epsilon if self.children.len() == 1 => {}
                Node::Epsilon => return Err(TreeError::MisplacedEpsilon(TreePath(path.clone()))),
            }
        }
        if !g.has_production(self.root, &rhs) {
            return Err(TreeError::UnknownProduction(TreePath(path.clone())));
        }
        for (i, c) in self.children.iter().enumerate() {
            if let Node::Internal(t) = c {
                path.push(i);
                t.validate_at(g, path)?;
                path.pop();
            }
        }
        Ok(())
    }

    /// Left-to-right leaf word. Epsilon leaves contribute nothing; the crown
    /// of a block tree appears as its nonterminal.
    pub fn yield_of(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_yield(&mut out);
        out
    }

    fn collect_yield(&self, out: &mut Vec<Symbol>) {
        for c in &self.children {
            match c {
                Node::Terminal(t) => out.push(Symbol::Terminal(*t)),
                Node::Crown(a) => out.push(Symbol::Nonterminal(*a)),
                Node::Internal(t) => t.collect_yield(out),
                Node::Epsilon => {}
            }
        }
    }

    /// Parikh image of the terminal leaves; the crown counts for nothing.
    pub fn parikh(&self, dim: usize) -> ParikhVector {
        let mut v = ParikhVector::zero(dim);
        self.add_parikh(&mut v);
        v
    }

    fn add_parikh(&self, v: &mut ParikhVector) {
        for c in &self.children {
            match c {
                Node::Terminal(t) => v.increment(t.0),
                Node::Internal(t) => t.add_parikh(v),
                _ => {}
            }
        }
    }

    pub fn internal_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(|c| match c {
                Node::Internal(t) => t.internal_count(),
                _ => 0,
            })
            .sum::<usize>()
    }

    pub fn terminal_leaf_count(&self) -> usize {
        self.children
            .iter()
            .map(|c| match c {
                Node::Terminal(_) => 1,
                Node::Internal(t) => t.terminal_leaf_count(),
                _ => 0,
            })
            .sum()
    }

    /// Labels of all internal nodes.
    pub fn internal_labels(&self) -> BTreeSet<NonterminalId> {
        let mut out = BTreeSet::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut BTreeSet<NonterminalId>) {
        out.insert(self.root);
        for c in &self.children {
            if let Node::Internal(t) = c {
                t.collect_labels(out);
            }
        }
    }

    /// Every internal node in preorder, with its path and label.
    pub fn internal_nodes(&self) -> Vec<(TreePath, NonterminalId)> {
        let mut out = Vec::new();
        self.collect_nodes(&mut Vec::new(), &mut out);
        out
    }

    fn collect_nodes(&self, path: &mut Vec<usize>, out: &mut Vec<(TreePath, NonterminalId)>) {
        out.push((TreePath(path.clone()), self.root));
        for (i, c) in self.children.iter().enumerate() {
            if let Node::Internal(t) = c {
                path.push(i);
                t.collect_nodes(path, out);
                path.pop();
            }
        }
    }

    /// First internal node labeled `nt` in preorder.
    pub fn first_node_labeled(&self, nt: NonterminalId) -> Option<TreePath> {
        if self.root == nt {
            return Some(TreePath::root());
        }
        for (i, c) in self.children.iter().enumerate() {
            if let Node::Internal(t) = c {
                if let Some(TreePath(mut rest)) = t.first_node_labeled(nt) {
                    rest.insert(0, i);
                    return Some(TreePath(rest));
                }
            }
        }
        None
    }

    pub fn subtree(&self, path: &TreePath) -> Option<&DerivationTree> {
        let mut cur = self;
        for &i in &path.0 {
            match cur.children.get(i)? {
                Node::Internal(t) => cur = t,
                _ => return None,
            }
        }
        Some(cur)
    }

    fn subtree_mut(&mut self, path: &[usize]) -> Option<&mut DerivationTree> {
        let mut cur = self;
        for &i in path {
            match cur.children.get_mut(i)? {
                Node::Internal(t) => cur = t,
                _ => return None,
            }
        }
        Some(cur)
    }

    /// Replaces the crown leaf with `node`; false if there is no crown.
    fn replace_crown(&mut self, node: &mut Option<Node>) -> bool {
        for c in self.children.iter_mut() {
            match c {
                Node::Crown(_) => {
                    *c = node.take().expect("crown replaced twice");
                    return true;
                }
                Node::Internal(t) => {
                    if t.replace_crown(node) {
                        return true;
                    }
                }
                _ => {}
            }
        }
        false
    }

    /// True iff the tree contains no block tree as a proper subtree.
    ///
    /// Checked as a path criterion: two internal nodes with the same label,
    /// one above the other, delimit a removable block unless the crown lies
    /// below the upper node but not below the lower one. In particular a
    /// block tree's root/crown pair never counts.
    pub fn is_minimal(&self) -> bool {
        self.find_repetition().is_none()
    }

    /// The repetition `decompose_once` cuts at: the first internal node in
    /// postorder that has an ancestor with the same label on the same side
    /// of the crown spine, paired with its nearest such ancestor.
    fn find_repetition(&self) -> Option<(TreePath, TreePath)> {
        let mut stack = Vec::new();
        let mut path = Vec::new();
        self.search_repetition(self.contains_crown(), &mut stack, &mut path)
    }

    fn search_repetition(
        &self,
        on_spine: bool,
        stack: &mut Vec<(NonterminalId, bool)>,
        path: &mut Vec<usize>,
    ) -> Option<(TreePath, TreePath)> {
        stack.push((self.root, on_spine));
        for (i, c) in self.children.iter().enumerate() {
            if let Node::Internal(t) = c {
                path.push(i);
                let found = t.search_repetition(on_spine && t.contains_crown(), stack, path);
                path.pop();
                if found.is_some() {
                    stack.pop();
                    return found;
                }
            }
        }
        let me = stack.pop().expect("pushed above");
        stack
            .iter()
            .rposition(|&above| above == me)
            .map(|u| (TreePath(path[..u].to_vec()), TreePath(path.clone())))
    }

    /// Canonical S-expression, e.g. `(S a (S eps) b)` or `(S a (crown S) b)`.
    pub fn to_sexpr(&self, g: &Grammar) -> String {
        let mut out = String::new();
        self.write_sexpr(g, &mut out);
        out
    }

    fn write_sexpr(&self, g: &Grammar, out: &mut String) {
        out.push('(');
        out.push_str(g.nonterminal_name(self.root));
        for c in &self.children {
            out.push(' ');
            match c {
                Node::Terminal(t) => out.push_str(g.terminal_name(*t)),
                Node::Epsilon => out.push_str("eps"),
                Node::Crown(a) => {
                    out.push_str("(crown ");
                    out.push_str(g.nonterminal_name(*a));
                    out.push(')');
                }
                Node::Internal(t) => t.write_sexpr(g, out),
            }
        }
        out.push(')');
    }

    /// Parses the S-expression form and validates the tree against `g`.
    pub fn parse_sexpr(text: &str, g: &Grammar) -> Result<DerivationTree, TreeError> {
        let tokens = sexpr_tokens(text);
        let mut pos = 0;
        let tree = parse_sexpr_tree(&tokens, &mut pos, g)?;
        if pos != tokens.len() {
            return Err(sexpr_error(pos, "trailing input"));
        }
        tree.validate(g)?;
        Ok(tree)
    }

    /// Graphviz digraph: internal nodes as ellipses, terminal leaves as
    /// boxes, the crown double-circled.
    pub fn to_dot(&self, g: &Grammar, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n");
        let mut next = 0usize;
        self.write_dot(g, &mut out, &mut next);
        out.push_str("}\n");
        out
    }

    fn write_dot(&self, g: &Grammar, out: &mut String, next: &mut usize) -> usize {
        let id = *next;
        *next += 1;
        let _ = writeln!(
            out,
            "  n{id} [label=\"{}\", shape=ellipse];",
            dot_escape(g.nonterminal_name(self.root))
        );
        for c in &self.children {
            let child = match c {
                Node::Internal(t) => t.write_dot(g, out, next),
                leaf => {
                    let cid = *next;
                    *next += 1;
                    let (label, shape) = match leaf {
                        Node::Terminal(t) => (g.terminal_name(*t), "box"),
                        Node::Crown(a) => (g.nonterminal_name(*a), "doublecircle"),
                        _ => ("ε", "plaintext"),
                    };
                    let _ = writeln!(
                        out,
                        "  n{cid} [label=\"{}\", shape={shape}];",
                        dot_escape(label)
                    );
                    cid
                }
            };
            let _ = writeln!(out, "  n{id} -> n{child};");
        }
        id
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn sexpr_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn sexpr_error(position: usize, message: &str) -> TreeError {
    TreeError::Sexpr {
        position,
        message: message.to_string(),
    }
}

fn parse_sexpr_tree(
    tokens: &[String],
    pos: &mut usize,
    g: &Grammar,
) -> Result<DerivationTree, TreeError> {
    if tokens.get(*pos).map(String::as_str) != Some("(") {
        return Err(sexpr_error(*pos, "expected `(`"));
    }
    *pos += 1;
    let name = tokens
        .get(*pos)
        .ok_or_else(|| sexpr_error(*pos, "unexpected end of input"))?;
    let root = g
        .nonterminal_id(name)
        .ok_or_else(|| sexpr_error(*pos, &format!("`{name}` is not a nonterminal")))?;
    *pos += 1;
    let mut children = Vec::new();
    loop {
        let tok = tokens
            .get(*pos)
            .ok_or_else(|| sexpr_error(*pos, "unexpected end of input"))?;
        match tok.as_str() {
            ")" => {
                *pos += 1;
                break;
            }
            "(" if tokens.get(*pos + 1).map(String::as_str) == Some("crown") => {
                let name = tokens
                    .get(*pos + 2)
                    .ok_or_else(|| sexpr_error(*pos + 2, "unexpected end of input"))?;
                let a = g.nonterminal_id(name).ok_or_else(|| {
                    sexpr_error(*pos + 2, &format!("`{name}` is not a nonterminal"))
                })?;
                if tokens.get(*pos + 3).map(String::as_str) != Some(")") {
                    return Err(sexpr_error(*pos + 3, "expected `)` after crown label"));
                }
                *pos += 4;
                children.push(Node::Crown(a));
            }
            "(" => children.push(Node::Internal(parse_sexpr_tree(tokens, pos, g)?)),
            "eps" | "ε" => {
                *pos += 1;
                children.push(Node::Epsilon);
            }
            atom => {
                let t = g
                    .terminal_id(atom)
                    .ok_or_else(|| sexpr_error(*pos, &format!("`{atom}` is not a terminal")))?;
                *pos += 1;
                children.push(Node::Terminal(t));
            }
        }
    }
    Ok(DerivationTree { root, children })
}

/// Glues block tree `block` into the internal node of `tree` at `at`.
/// The result has the kind of `tree` and Parikh image `Ψ(tree) + Ψ(block)`.
pub fn compose(
    tree: &DerivationTree,
    block: &DerivationTree,
    at: &TreePath,
) -> Result<DerivationTree, TreeError> {
    if !block.is_block() {
        return Err(TreeError::NotABlockTree);
    }
    let target = tree
        .subtree(at)
        .ok_or_else(|| TreeError::InvalidPath(at.clone()))?;
    if target.root != block.root {
        return Err(TreeError::LabelMismatch {
            at: at.clone(),
            expected: block.root,
            found: target.root,
        });
    }
    let mut glued = block.clone();
    glued.replace_crown(&mut Some(Node::Internal(target.clone())));
    let mut out = tree.clone();
    *out.subtree_mut(&at.0).expect("path checked above") = glued;
    Ok(out)
}

/// Cuts one block out of a non-minimal tree; `None` iff the tree is minimal.
pub fn decompose_once(tree: &DerivationTree) -> Option<Decomposition> {
    let (upper, lower) = tree.find_repetition()?;
    let lower_tree = tree.subtree(&lower).expect("repetition path").clone();
    let label = lower_tree.root;

    let mut block = tree.subtree(&upper).expect("repetition path").clone();
    let (last, rel) = lower.0[upper.0.len()..]
        .split_last()
        .expect("lower node strictly below upper");
    let parent = block.subtree_mut(rel).expect("relative path");
    parent.children[*last] = Node::Crown(label);

    let mut outer = tree.clone();
    *outer.subtree_mut(&upper.0).expect("repetition path") = lower_tree;

    Some(Decomposition {
        outer,
        block,
        at: upper,
    })
}

/// Splits a tree into minimal trees by repeated [`decompose_once`]. For a
/// ground tree the result holds one minimal ground tree, listed first,
/// followed by minimal block trees (a multiset; duplicates are kept).
pub fn decompose_fully(tree: &DerivationTree) -> Vec<DerivationTree> {
    let mut parts = Vec::new();
    let mut work = vec![tree.clone()];
    while let Some(t) = work.pop() {
        match decompose_once(&t) {
            Some(d) => {
                work.push(d.block);
                work.push(d.outer);
            }
            None => parts.push(t),
        }
    }
    parts.sort_by_key(|t| t.kind() == TreeKind::Block);
    parts
}
