//! Linear and semilinear subsets of ℕ^k with exact membership.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::enumeration::MinimalCatalog;
use crate::grammar::ParikhVector;
use crate::pipeline::Support;
use crate::BudgetExceeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("dimension mismatch: expected {expected}, found {found}")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub found: usize,
}

fn check_dim(expected: usize, v: &ParikhVector) -> Result<(), DimensionMismatch> {
    if v.dim() == expected {
        Ok(())
    } else {
        Err(DimensionMismatch {
            expected,
            found: v.dim(),
        })
    }
}

/// `{offset + Σ tᵢ·periodᵢ | tᵢ ∈ ℕ}`.
///
/// Periods are kept sorted and duplicate-free with zero vectors removed;
/// none of that changes the denoted set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearSet {
    offset: ParikhVector,
    periods: Vec<ParikhVector>,
}

impl LinearSet {
    pub fn new(
        offset: ParikhVector,
        periods: Vec<ParikhVector>,
    ) -> Result<LinearSet, DimensionMismatch> {
        let k = offset.dim();
        for p in &periods {
            check_dim(k, p)?;
        }
        let mut periods: Vec<ParikhVector> = periods.into_iter().filter(|p| !p.is_zero()).collect();
        periods.sort();
        periods.dedup();
        Ok(LinearSet { offset, periods })
    }

    pub fn offset(&self) -> &ParikhVector {
        &self.offset
    }

    pub fn periods(&self) -> &[ParikhVector] {
        &self.periods
    }

    pub fn dim(&self) -> usize {
        self.offset.dim()
    }

    /// Exact membership by depth-first search over the periods. Every
    /// period is nonzero, so each use strictly shrinks the residual and the
    /// search is finite; failed `(period index, residual)` states are cached.
    pub fn contains(&self, v: &ParikhVector) -> Result<bool, DimensionMismatch> {
        check_dim(self.dim(), v)?;
        let Some(residual) = v.checked_sub(&self.offset) else {
            return Ok(false);
        };
        let mut dead = HashSet::new();
        Ok(reachable(&self.periods, 0, residual, &mut dead))
    }

    /// One line of the text form: `(v0) + t*(v1) + t*(v2)`.
    pub fn to_text(&self) -> String {
        let mut s = self.offset.to_string();
        for p in &self.periods {
            s.push_str(" + t*");
            s.push_str(&p.to_string());
        }
        s
    }
}

fn reachable(
    periods: &[ParikhVector],
    i: usize,
    residual: ParikhVector,
    dead: &mut HashSet<(usize, ParikhVector)>,
) -> bool {
    if residual.is_zero() {
        return true;
    }
    if i == periods.len() || dead.contains(&(i, residual.clone())) {
        return false;
    }
    let mut r = residual.clone();
    loop {
        if reachable(periods, i + 1, r.clone(), dead) {
            return true;
        }
        match r.checked_sub(&periods[i]) {
            Some(next) => r = next,
            None => break,
        }
    }
    dead.insert((i, residual));
    false
}

impl fmt::Display for LinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Finite union of linear sets, components sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemilinearSet {
    dim: usize,
    components: Vec<LinearSet>,
}

/// Wire form of a [`SemilinearSet`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageJson {
    pub alphabet: Vec<String>,
    pub linear_sets: Vec<LinearSetJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSetJson {
    pub offset: Vec<u64>,
    pub periods: Vec<Vec<u64>>,
}

impl SemilinearSet {
    pub fn empty(dim: usize) -> Self {
        SemilinearSet {
            dim,
            components: Vec::new(),
        }
    }

    pub fn new(dim: usize, components: Vec<LinearSet>) -> Result<Self, DimensionMismatch> {
        for c in &components {
            check_dim(dim, c.offset())?;
        }
        let components: Vec<LinearSet> = components
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(SemilinearSet { dim, components })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[LinearSet] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn contains(&self, v: &ParikhVector) -> Result<bool, DimensionMismatch> {
        check_dim(self.dim, v)?;
        for c in &self.components {
            if c.contains(v)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// All members with component sum at most `max_sum`, produced by closing
    /// each offset under its periods and then rechecked by [`contains`].
    /// Fails once more than `cap` vectors would be returned.
    ///
    /// [`contains`]: SemilinearSet::contains
    pub fn enumerate_bounded(
        &self,
        max_sum: u64,
        cap: usize,
    ) -> Result<BTreeSet<ParikhVector>, BudgetExceeded> {
        let mut out = BTreeSet::new();
        for c in &self.components {
            if c.offset.total() > max_sum {
                continue;
            }
            let mut frontier = vec![c.offset.clone()];
            let mut seen = BTreeSet::from([c.offset.clone()]);
            while let Some(v) = frontier.pop() {
                for p in &c.periods {
                    if v.total() + p.total() <= max_sum {
                        let next = &v + p;
                        if seen.insert(next.clone()) {
                            frontier.push(next);
                        }
                    }
                }
            }
            out.extend(seen);
            if out.len() > cap {
                return Err(BudgetExceeded::new("bounded enumeration", cap));
            }
        }
        debug_assert!(out.iter().all(|v| self.contains(v) == Ok(true)));
        Ok(out)
    }

    pub fn to_json(&self, alphabet: &[String]) -> ImageJson {
        ImageJson {
            alphabet: alphabet.to_vec(),
            linear_sets: self
                .components
                .iter()
                .map(|c| LinearSetJson {
                    offset: c.offset.as_slice().to_vec(),
                    periods: c.periods.iter().map(|p| p.as_slice().to_vec()).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &ImageJson) -> Result<Self, DimensionMismatch> {
        let dim = json.alphabet.len();
        let components = json
            .linear_sets
            .iter()
            .map(|c| {
                LinearSet::new(
                    ParikhVector::from(c.offset.clone()),
                    c.periods.iter().cloned().map(ParikhVector::from).collect(),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        SemilinearSet::new(dim, components)
    }

    /// Header line naming the coordinates, then one component per line.
    pub fn to_text(&self, alphabet: &[String]) -> String {
        let mut s = format!("alphabet: {}\n", alphabet.join(" "));
        for c in &self.components {
            s.push_str(&c.to_text());
            s.push('\n');
        }
        s
    }
}

/// The linear set of a support: offset is the Parikh image of the whole
/// multiset (ground tree included, with multiplicities), periods are the
/// images of its distinct block trees.
pub fn lin_of_support(support: &Support, catalog: &MinimalCatalog) -> LinearSet {
    let k = catalog.dim();
    let mut offset = ParikhVector::zero(k);
    let mut periods = Vec::with_capacity(support.blocks().len());
    for i in support.members() {
        let psi = catalog.get(i).expect("support index in catalog").parikh(k);
        offset += &psi.scaled(support.multiplicity_of(i));
        if i != support.ground() {
            periods.push(psi);
        }
    }
    LinearSet::new(offset, periods).expect("catalog trees share one dimension")
}
