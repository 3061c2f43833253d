//! Finite filters, maps between carriers and continuity.
//!
//! Carriers are index ranges `0..n`; atoms are interned by whoever owns the
//! carrier. On a finite carrier an intersection-closed base always has a least
//! element, so every materialized filter is stored as that single core set.
//! A neighbourhood is any superset of the core. The only exception is the
//! intensional [`FilterKind::Hitting`] family used by the antichain objects.

use crate::error::{Error, Result};
use fixedbitset::FixedBitSet;
use std::fmt;

/// A subset of a carrier `0..n`.
pub type Subset = FixedBitSet;

/// Builds a subset of `0..size` from element indices.
pub fn subset(size: usize, elems: impl IntoIterator<Item = usize>) -> Subset {
    let mut s = FixedBitSet::with_capacity(size);
    for e in elems {
        s.insert(e);
    }
    s
}

pub fn full(size: usize) -> Subset {
    let mut s = FixedBitSet::with_capacity(size);
    s.insert_range(..);
    s
}

pub fn elements(s: &Subset) -> Vec<usize> {
    s.ones().collect()
}

/// Intersection closure of a family of subsets, deduplicated and sorted.
pub fn intersection_closure(size: usize, base: &[Subset]) -> Vec<Subset> {
    let mut out: Vec<Subset> = Vec::new();
    for b in base {
        let mut b = b.clone();
        b.grow(size);
        if !out.contains(&b) {
            out.push(b);
        }
    }
    let mut i = 0;
    while i < out.len() {
        let mut j = 0;
        while j < i {
            let mut meet = out[i].clone();
            meet.intersect_with(&out[j]);
            if !out.contains(&meet) {
                out.push(meet);
            }
            j += 1;
        }
        i += 1;
    }
    out.sort_by_key(|s| (s.count_ones(..), elements(s)));
    out
}

/// The ⊆-minimal members of a family.
pub fn minimal_elements(sets: &[Subset]) -> Vec<Subset> {
    let mut out: Vec<Subset> = Vec::new();
    for s in sets {
        if sets.iter().any(|t| t != s && t.is_subset(s)) || out.contains(s) {
            continue;
        }
        out.push(s.clone());
    }
    out
}

/// A total map between carriers `0..source` and `0..target`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetMap {
    source: usize,
    target: usize,
    table: Vec<usize>,
}

impl SetMap {
    pub fn new(source: usize, target: usize, table: Vec<usize>) -> Result<Self> {
        if table.len() != source {
            return Err(Error::domain(format!(
                "map table has {} entries for a source of size {}",
                table.len(),
                source
            )));
        }
        if let Some(&bad) = table.iter().find(|&&t| t >= target) {
            return Err(Error::domain(format!("map value {bad} outside target of size {target}")));
        }
        Ok(SetMap { source, target, table })
    }

    pub fn identity(n: usize) -> Self {
        SetMap { source: n, target: n, table: (0..n).collect() }
    }

    pub fn constant(source: usize, target: usize, value: usize) -> Result<Self> {
        SetMap::new(source, target, vec![value; source])
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &SetMap) -> Result<SetMap> {
        if self.target != then.source {
            return Err(Error::domain(format!(
                "cannot compose: target {} vs source {}",
                self.target, then.source
            )));
        }
        Ok(SetMap {
            source: self.source,
            target: then.target,
            table: self.table.iter().map(|&y| then.table[y]).collect(),
        })
    }

    pub fn image(&self, s: &Subset) -> Subset {
        subset(self.target, s.ones().map(|x| self.table[x]))
    }

    pub fn preimage(&self, s: &Subset) -> Subset {
        subset(self.source, (0..self.source).filter(|&x| s.contains(self.table[x])))
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target];
        self.table.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target];
        for &y in &self.table {
            seen[y] = true;
        }
        seen.into_iter().all(|b| b)
    }
}

#[derive(Clone, Debug)]
pub enum FilterKind {
    /// Neighbourhoods are the supersets of the core.
    Principal(Subset),
    /// `S` is large iff it contains `required` and meets every family.
    /// Upward closed but not intersection closed in general.
    Hitting { required: Subset, families: Vec<Subset> },
}

/// An upward-closed family of subsets of `0..size` containing the full carrier.
#[derive(Clone, Debug)]
pub struct Filter {
    size: usize,
    kind: FilterKind,
}

impl Filter {
    pub fn antidiscrete(size: usize) -> Self {
        Filter { size, kind: FilterKind::Principal(full(size)) }
    }

    /// Every subset is a neighbourhood, including the empty one.
    pub fn discrete(size: usize) -> Self {
        Filter { size, kind: FilterKind::Principal(subset(size, [])) }
    }

    pub fn principal(size: usize, core: Subset) -> Result<Self> {
        if core.ones().any(|x| x >= size) {
            return Err(Error::domain("core contains atoms outside the carrier"));
        }
        let mut core = core;
        core.grow(size);
        Ok(Filter { size, kind: FilterKind::Principal(core) })
    }

    /// The filter generated by `base`; an empty base gives the antidiscrete filter.
    pub fn from_base(size: usize, base: &[Subset]) -> Result<Self> {
        let mut core = full(size);
        for b in base {
            if b.ones().any(|x| x >= size) {
                return Err(Error::domain("base element contains atoms outside the carrier"));
            }
            let mut b = b.clone();
            b.grow(size);
            core.intersect_with(&b);
        }
        Ok(Filter { size, kind: FilterKind::Principal(core) })
    }

    pub fn hitting(size: usize, required: Subset, families: Vec<Subset>) -> Result<Self> {
        let mut required = required;
        required.grow(size);
        let mut fams: Vec<Subset> = Vec::new();
        for mut f in families {
            if f.ones().any(|x| x >= size) || required.ones().any(|x| x >= size) {
                return Err(Error::domain("hitting family outside the carrier"));
            }
            f.grow(size);
            if f.count_ones(..) == 0 {
                return Err(Error::domain("hitting family must be non-empty"));
            }
            if f.intersection(&required).next().is_some() || fams.contains(&f) {
                continue;
            }
            fams.push(f);
        }
        let fams = minimal_elements(&fams);
        if fams.is_empty() {
            return Ok(Filter { size, kind: FilterKind::Principal(required) });
        }
        Ok(Filter { size, kind: FilterKind::Hitting { required, families: fams } })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> &FilterKind {
        &self.kind
    }

    /// The least neighbourhood, when the filter is principal.
    pub fn core(&self) -> Option<&Subset> {
        match &self.kind {
            FilterKind::Principal(c) => Some(c),
            FilterKind::Hitting { .. } => None,
        }
    }

    /// Minimal generating base; `None` for intensional filters.
    pub fn base(&self) -> Option<Vec<Subset>> {
        match &self.kind {
            FilterKind::Principal(c) if c.count_ones(..) == self.size => Some(vec![]),
            FilterKind::Principal(c) => Some(vec![c.clone()]),
            FilterKind::Hitting { .. } => None,
        }
    }

    pub fn is_antidiscrete(&self) -> bool {
        match &self.kind {
            FilterKind::Principal(c) => c.count_ones(..) == self.size,
            FilterKind::Hitting { .. } => false,
        }
    }

    pub fn is_principal(&self) -> bool {
        matches!(self.kind, FilterKind::Principal(_))
    }

    /// The intersection of all neighbourhoods.
    pub fn kernel(&self) -> Subset {
        match &self.kind {
            FilterKind::Principal(c) => c.clone(),
            FilterKind::Hitting { required, families } => {
                let mut k = required.clone();
                for f in families {
                    if f.count_ones(..) == 1 {
                        k.union_with(f);
                    }
                }
                k
            }
        }
    }

    pub fn is_neighborhood(&self, s: &Subset) -> Result<bool> {
        if s.ones().any(|x| x >= self.size) {
            return Err(Error::domain("subset contains atoms outside the carrier"));
        }
        Ok(self.contains(s))
    }

    /// Membership without the carrier check.
    pub fn contains(&self, s: &Subset) -> bool {
        match &self.kind {
            FilterKind::Principal(c) => c.is_subset(s),
            FilterKind::Hitting { required, families } => {
                required.is_subset(s) && families.iter().all(|f| !f.is_disjoint(s))
            }
        }
    }

    /// The ⊆-minimal neighbourhoods.
    pub fn minimal_neighborhoods(&self) -> Vec<Subset> {
        match &self.kind {
            FilterKind::Principal(c) => vec![c.clone()],
            FilterKind::Hitting { required, families } => {
                let mut acc = vec![required.clone()];
                for f in families {
                    let mut next = Vec::new();
                    for s in &acc {
                        if !f.is_disjoint(s) {
                            next.push(s.clone());
                            continue;
                        }
                        for y in f.ones() {
                            let mut t = s.clone();
                            t.insert(y);
                            next.push(t);
                        }
                    }
                    next.sort_by_key(elements);
                    next.dedup();
                    acc = minimal_elements(&next);
                }
                acc.sort_by_key(elements);
                acc
            }
        }
    }

    /// Semantic equality of the neighbourhood families.
    pub fn same_as(&self, other: &Filter) -> bool {
        self.size == other.size && self.minimal_neighborhoods() == other.minimal_neighborhoods()
    }
}

impl PartialEq for Filter {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for Filter {}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FilterKind::Principal(c) => write!(f, "principal{:?}", elements(c)),
            FilterKind::Hitting { required, families } => {
                write!(f, "hitting(required {:?}, {} families)", elements(required), families.len())
            }
        }
    }
}

/// Preimages of neighbourhoods of `fy` are neighbourhoods of `fx`.
pub fn is_continuous(f: &SetMap, fx: &Filter, fy: &Filter) -> Result<bool> {
    if f.source != fx.size || f.target != fy.size {
        return Err(Error::domain(format!(
            "carrier mismatch: map {}→{}, filters on {} and {}",
            f.source, f.target, fx.size, fy.size
        )));
    }
    Ok(continuous_unchecked(f.table(), fx, fy))
}

/// Continuity for a raw table whose sizes are already known to match.
pub fn continuous_unchecked(table: &[usize], fx: &Filter, fy: &Filter) -> bool {
    match (&fx.kind, &fy.kind) {
        (_, FilterKind::Principal(d)) => {
            let pre = subset(fx.size, (0..fx.size).filter(|&x| d.contains(table[x])));
            fx.contains(&pre)
        }
        (FilterKind::Principal(c), FilterKind::Hitting { .. }) => {
            let k = fy.kernel();
            c.ones().all(|x| k.contains(table[x]))
        }
        (FilterKind::Hitting { .. }, FilterKind::Hitting { .. }) => {
            fy.minimal_neighborhoods().iter().all(|t| {
                let pre = subset(fx.size, (0..fx.size).filter(|&x| t.contains(table[x])));
                fx.contains(&pre)
            })
        }
    }
}

/// Coarsest filter on `source` making every listed map continuous.
pub fn coarsest_filter(source: usize, maps: &[(SetMap, Filter)]) -> Result<Filter> {
    let mut core = full(source);
    for (f, fy) in maps {
        if f.source != source || f.target != fy.size {
            return Err(Error::domain("inconsistent carriers in coarsest_filter"));
        }
        core.intersect_with(&f.preimage(&fy.kernel()));
    }
    Ok(Filter { size: source, kind: FilterKind::Principal(core) })
}

/// Finest filter on the target of `f` making `f` continuous from `fx`.
pub fn finest_filter(f: &SetMap, fx: &Filter) -> Result<Filter> {
    if f.source != fx.size {
        return Err(Error::domain("carrier mismatch in finest_filter"));
    }
    match &fx.kind {
        FilterKind::Principal(c) => Filter::principal(f.target, f.image(c)),
        FilterKind::Hitting { required, families } => Filter::hitting(
            f.target,
            f.image(required),
            families.iter().map(|s| f.image(s)).collect(),
        ),
    }
}
