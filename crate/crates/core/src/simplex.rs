//! Truncated simplicial filters ("situses").
//!
//! Level `n` (1-based, `1..=depth`) is a finite carrier of `n`-simplices with a
//! filter. For every weakly increasing 1-based index list `[i1<=..<=in]` with
//! entries at most `m` there is a face map from level `m` to level `n`.
//! Degenerate simplices (repeated coordinates) are ordinary members.

use crate::error::{Error, Result};
use crate::filters::{self, continuous_unchecked, Filter, SetMap, Subset};
use std::collections::HashMap;
use std::fmt;

pub type Tuple = Vec<u32>;

/// All weakly increasing 1-based lists of length `n` with entries in `1..=m`.
pub fn weakly_increasing_lists(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, m: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in start..=m {
            cur.push(v);
            go(n, m, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m > 0 {
        go(n, m, 1, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// Face list composition: applying `outer` after `inner` gives `[inner[outer[k]]]`.
pub fn compose_lists(inner: &[usize], outer: &[usize]) -> Vec<usize> {
    outer.iter().map(|&k| inner[k - 1]).collect()
}

/// All tuples of length `n` over `0..k` in lexicographic order.
pub fn all_tuples(k: usize, n: usize) -> Vec<Tuple> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { out };
    }
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if (cur[i] as usize) < k {
                break;
            }
            cur[i] = 0;
        }
    }
}

#[derive(Clone, Debug)]
pub struct Level {
    simplices: Vec<Tuple>,
    filter: Filter,
}

impl Level {
    pub fn new(simplices: Vec<Tuple>, filter: Filter) -> Result<Self> {
        if filter.size() != simplices.len() {
            return Err(Error::domain(format!(
                "filter on {} atoms for a level of {} simplices",
                filter.size(),
                simplices.len()
            )));
        }
        Ok(Level { simplices, filter })
    }

    pub fn antidiscrete(simplices: Vec<Tuple>) -> Self {
        let n = simplices.len();
        Level { simplices, filter: Filter::antidiscrete(n) }
    }

    pub fn simplices(&self) -> &[Tuple] {
        &self.simplices
    }

    pub fn filter(&self) -> &Filter {
        &self.filter
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }
}

type FaceKey = (usize, Vec<usize>);

/// A simplicial filter truncated at `depth`.
#[derive(Clone, Debug)]
pub struct Situs {
    levels: Vec<Level>,
    faces: HashMap<FaceKey, Vec<usize>>,
    /// `Some(k)` when every simplex is a tuple of vertices `0..k` and faces
    /// are coordinate selections.
    vertices: Option<usize>,
    labels: Vec<String>,
    lookup: Vec<HashMap<Tuple, usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ViolationKind {
    Identity,
    Continuity,
}

/// A failed simplicial identity or a discontinuous face map.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub level: usize,
    pub face: Vec<usize>,
    pub kind: ViolationKind,
    pub witness: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} violation at face {:?} of level {}: {}", self.kind, self.face, self.level, self.witness)
    }
}

impl Situs {
    /// A situs whose simplices are vertex tuples and whose faces are
    /// coordinate selections. Fails if some face leaves the carriers.
    pub fn from_tuples(vertices: usize, labels: Vec<String>, levels: Vec<Level>) -> Result<Self> {
        if labels.len() != vertices {
            return Err(Error::domain("one label per vertex required"));
        }
        let lookup: Vec<HashMap<Tuple, usize>> = levels
            .iter()
            .map(|l| l.simplices.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect())
            .collect();
        for (n, l) in levels.iter().enumerate() {
            if let Some(t) = l.simplices.iter().find(|t| t.len() != n + 1 || t.iter().any(|&v| v as usize >= vertices)) {
                return Err(Error::domain(format!("simplex {t:?} does not belong at level {}", n + 1)));
            }
        }
        let depth = levels.len();
        let mut faces = HashMap::new();
        for m in 1..=depth {
            for n in 1..=depth {
                for list in weakly_increasing_lists(n, m) {
                    let mut table = Vec::with_capacity(levels[m - 1].len());
                    for t in &levels[m - 1].simplices {
                        let img: Tuple = list.iter().map(|&i| t[i - 1]).collect();
                        match lookup[n - 1].get(&img) {
                            Some(&j) => table.push(j),
                            None => {
                                return Err(Error::validation(format!(
                                    "face {list:?} sends {} outside level {n}",
                                    show_tuple(t, &labels)
                                )))
                            }
                        }
                    }
                    faces.insert((m, list), table);
                }
            }
        }
        Ok(Situs { levels, faces, vertices: Some(vertices), labels, lookup })
    }

    /// A situs given by explicit levels and face tables; run [`Situs::validate`].
    pub fn from_parts(levels: Vec<Level>, faces: HashMap<(usize, Vec<usize>), Vec<usize>>, labels: Vec<String>) -> Result<Self> {
        let depth = levels.len();
        for m in 1..=depth {
            for n in 1..=depth {
                for list in weakly_increasing_lists(n, m) {
                    match faces.get(&(m, list.clone())) {
                        Some(t) if t.len() == levels[m - 1].len() && t.iter().all(|&j| j < levels[n - 1].len()) => {}
                        _ => return Err(Error::domain(format!("missing or ill-typed face {list:?} at level {m}"))),
                    }
                }
            }
        }
        let lookup = levels
            .iter()
            .map(|l| l.simplices.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect())
            .collect();
        Ok(Situs { levels, faces, vertices: None, labels, lookup })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Level `n`, 1-based.
    pub fn level(&self, n: usize) -> &Level {
        &self.levels[n - 1]
    }

    pub fn size(&self, n: usize) -> usize {
        self.levels[n - 1].len()
    }

    pub fn filter(&self, n: usize) -> &Filter {
        &self.levels[n - 1].filter
    }

    pub fn simplices(&self, n: usize) -> &[Tuple] {
        &self.levels[n - 1].simplices
    }

    pub fn vertices(&self) -> Option<usize> {
        self.vertices
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, n: usize, t: &[u32]) -> Option<usize> {
        self.lookup[n - 1].get(t).copied()
    }

    /// Face table from level `m` along the 1-based list `list`.
    pub fn face(&self, m: usize, list: &[usize]) -> &[usize] {
        self.faces
            .get(&(m, list.to_vec()))
            .unwrap_or_else(|| panic!("no face {list:?} at level {m}"))
    }

    pub fn face_map(&self, m: usize, list: &[usize]) -> SetMap {
        SetMap::new(self.size(m), self.size(list.len()), self.face(m, list).to_vec()).expect("face table in range")
    }

    pub fn show(&self, n: usize, x: usize) -> String {
        show_tuple(&self.levels[n - 1].simplices[x], &self.labels)
    }

    /// The level-`n` core as tuples, when principal.
    pub fn core_tuples(&self, n: usize) -> Option<Vec<Tuple>> {
        let core = self.filter(n).core()?;
        Some(core.ones().map(|i| self.levels[n - 1].simplices[i].clone()).collect())
    }

    /// Same carriers and faces with new level filters.
    pub fn with_filters(&self, filters: Vec<Filter>) -> Result<Self> {
        if filters.len() != self.depth() {
            return Err(Error::domain("one filter per level required"));
        }
        let mut out = self.clone();
        for (l, f) in out.levels.iter_mut().zip(filters) {
            if f.size() != l.len() {
                return Err(Error::domain("filter size does not match the level"));
            }
            l.filter = f;
        }
        Ok(out)
    }

    /// Fails with the first violation, if any.
    pub fn checked(self) -> Result<Self> {
        match self.validate().into_iter().next() {
            None => Ok(self),
            Some(v) => Err(Error::validation(v)),
        }
    }

    /// Simplicial identities and face continuity.
    pub fn validate(&self) -> Vec<Violation> {
        let depth = self.depth();
        let mut out = Vec::new();
        for m in 1..=depth {
            let ident: Vec<usize> = (1..=m).collect();
            if self.face(m, &ident).iter().enumerate().any(|(i, &j)| i != j) {
                out.push(Violation {
                    level: m,
                    face: ident,
                    kind: ViolationKind::Identity,
                    witness: "identity list is not the identity map".into(),
                });
            }
        }
        for m in 1..=depth {
            for n in 1..=depth {
                for inner in weakly_increasing_lists(n, m) {
                    let f = self.face(m, &inner);
                    for l in 1..=depth {
                        for outer in weakly_increasing_lists(l, n) {
                            let g = self.face(n, &outer);
                            let comp = compose_lists(&inner, &outer);
                            let h = self.face(m, &comp);
                            if let Some(x) = (0..f.len()).find(|&x| g[f[x]] != h[x]) {
                                out.push(Violation {
                                    level: m,
                                    face: comp.clone(),
                                    kind: ViolationKind::Identity,
                                    witness: format!(
                                        "{outer:?} after {inner:?} differs on {}",
                                        self.show(m, x)
                                    ),
                                });
                            }
                        }
                    }
                    if !continuous_unchecked(f, self.filter(m), self.filter(n)) {
                        out.push(Violation {
                            level: m,
                            face: inner.clone(),
                            kind: ViolationKind::Continuity,
                            witness: self.discontinuity_witness(m, &inner),
                        });
                    }
                }
            }
        }
        out
    }

    fn discontinuity_witness(&self, m: usize, list: &[usize]) -> String {
        let n = list.len();
        let f = self.face(m, list);
        match (self.filter(m).core(), self.filter(n).core()) {
            (Some(c), Some(d)) => {
                let bad = c.ones().find(|&x| !d.contains(f[x]));
                let base: Vec<String> = d.ones().map(|y| self.show(n, y)).collect();
                match bad {
                    Some(x) => format!(
                        "preimage of base element {{{}}} misses {}",
                        base.join(","),
                        self.show(m, x)
                    ),
                    None => format!("preimage of base element {{{}}} is small", base.join(",")),
                }
            }
            _ => "preimage of some minimal neighbourhood is small".into(),
        }
    }
}

pub fn show_tuple(t: &[u32], labels: &[String]) -> String {
    let parts: Vec<String> = t
        .iter()
        .map(|&v| labels.get(v as usize).cloned().unwrap_or_else(|| v.to_string()))
        .collect();
    format!("({})", parts.join(","))
}

/// A transitive relation on `0..n`, with labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinPreorder {
    labels: Vec<String>,
    leq: Vec<Vec<bool>>,
}

impl FinPreorder {
    pub fn new(labels: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self> {
        let n = labels.len();
        if leq.len() != n || leq.iter().any(|r| r.len() != n) {
            return Err(Error::domain("relation table must be square over the elements"));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if leq[a][b] && leq[b][c] && !leq[a][c] {
                        return Err(Error::domain(format!(
                            "relation not transitive at {} <= {} <= {}",
                            labels[a], labels[b], labels[c]
                        )));
                    }
                }
            }
        }
        Ok(FinPreorder { labels, leq })
    }

    /// Reflexive-transitive closure of the given pairs.
    pub fn generated(labels: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::domain("pair outside the element set"));
            }
            leq[a][b] = true;
        }
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if leq[a][k] && leq[k][b] {
                        leq[a][b] = true;
                    }
                }
            }
        }
        FinPreorder::new(labels, leq)
    }

    pub fn chain(n: usize) -> Self {
        let labels = (1..=n).map(|i| i.to_string()).collect();
        let leq = (0..n).map(|a| (0..n).map(|b| a <= b).collect()).collect();
        FinPreorder { labels, leq }
    }

    /// The total preorder: every pair related.
    pub fn set(labels: Vec<String>) -> Self {
        let n = labels.len();
        FinPreorder { labels, leq: vec![vec![true; n]; n] }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.len()).all(|a| self.leq[a][a])
    }

    pub fn is_total(&self) -> bool {
        (0..self.len()).all(|a| (0..self.len()).all(|b| self.leq[a][b] || self.leq[b][a]))
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.len()).all(|a| (0..self.len()).all(|b| a == b || !(self.leq[a][b] && self.leq[b][a])))
    }

    pub fn is_linear(&self) -> bool {
        self.is_reflexive() && self.is_total() && self.is_antisymmetric()
    }

    pub fn is_set(&self) -> bool {
        self.leq.iter().all(|r| r.iter().all(|&b| b))
    }

    /// Consecutive coordinates related (hence all `i < j` by transitivity).
    pub fn is_chain_tuple(&self, t: &[u32]) -> bool {
        t.windows(2).all(|w| self.leq[w[0] as usize][w[1] as usize])
    }
}

/// Levels are the monotone tuples of `p`; default filters antidiscrete.
pub fn corepresented_by_preorder(p: &FinPreorder, depth: usize, filters: Option<Vec<Filter>>) -> Result<Situs> {
    if !p.is_reflexive() {
        return Err(Error::domain("corepresented objects need a reflexive relation"));
    }
    let levels: Vec<Level> = (1..=depth)
        .map(|n| {
            Level::antidiscrete(all_tuples(p.len(), n).into_iter().filter(|t| p.is_chain_tuple(t)).collect())
        })
        .collect();
    let x = Situs::from_tuples(p.len(), p.labels.clone(), levels)?;
    match filters {
        None => Ok(x),
        Some(fs) => x.with_filters(fs)?.checked(),
    }
}

/// `|I|_•`: all tuples, antidiscrete.
pub fn set_corepresented(labels: Vec<String>, depth: usize) -> Result<Situs> {
    corepresented_by_preorder(&FinPreorder::set(labels), depth, None)
}

/// Tuple situs over `0..k` whose level `n` keeps the tuples accepted by `keep`,
/// with principal filters whose cores are given by `core`.
pub fn tuple_situs(
    labels: Vec<String>,
    depth: usize,
    keep: impl Fn(&[u32]) -> bool,
    core: impl Fn(&[u32]) -> bool,
) -> Result<Situs> {
    let k = labels.len();
    let mut levels = Vec::with_capacity(depth);
    for n in 1..=depth {
        let simplices: Vec<Tuple> = all_tuples(k, n).into_iter().filter(|t| keep(t)).collect();
        let c = filters::subset(simplices.len(), simplices.iter().enumerate().filter(|(_, t)| core(t)).map(|(i, _)| i));
        let f = Filter::principal(simplices.len(), c)?;
        levels.push(Level::new(simplices, f)?);
    }
    Situs::from_tuples(k, labels, levels)
}

pub fn terminal(depth: usize) -> Situs {
    set_corepresented(vec!["*".into()], depth).expect("terminal object")
}

pub fn initial(depth: usize) -> Situs {
    set_corepresented(vec![], depth).expect("initial object")
}

/// Levels `1..=depth` of `x`.
pub fn truncate(x: &Situs, depth: usize) -> Result<Situs> {
    if depth == 0 || depth > x.depth() {
        return Err(Error::Depth(format!("cannot truncate depth {} to {depth}", x.depth())));
    }
    let mut y = x.clone();
    y.levels.truncate(depth);
    y.lookup.truncate(depth);
    y.faces.retain(|(m, list), _| *m <= depth && list.len() <= depth);
    Ok(y)
}

/// The shift `X∘[+∞]`: level `n` is level `n+1` of `x`, faces fix the last coordinate.
pub fn shift(x: &Situs) -> Result<Situs> {
    let depth = x.depth();
    if depth < 2 {
        return Err(Error::Depth("shift needs depth at least 2".into()));
    }
    let levels: Vec<Level> = x.levels[1..].to_vec();
    let mut faces = HashMap::new();
    for m in 1..depth {
        for n in 1..depth {
            for list in weakly_increasing_lists(n, m) {
                let mut ext = list.clone();
                ext.push(m + 1);
                faces.insert((m, list), x.face(m + 1, &ext).to_vec());
            }
        }
    }
    Situs::from_parts(levels, faces, x.labels.clone())
}

/// The natural map `shift(x) → truncate(x, depth-1)`, given at level `n` by
/// the face `[1..n]` of `x` at level `n+1`.
pub fn shift_nat(x: &Situs) -> Result<(Situs, Situs, Morphism)> {
    let s = shift(x)?;
    let t = truncate(x, x.depth() - 1)?;
    let levels = (1..x.depth())
        .map(|n| x.face(n + 1, &(1..=n).collect::<Vec<_>>()).to_vec())
        .collect();
    Ok((s, t, Morphism::new(levels)))
}

/// Per-level class ids, one per simplex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelEquivalence {
    classes: Vec<Vec<usize>>,
}

impl LevelEquivalence {
    /// Class ids are renumbered in order of first occurrence.
    pub fn new(classes: Vec<Vec<usize>>) -> Self {
        let classes = classes
            .into_iter()
            .map(|ids| {
                let mut seen: HashMap<usize, usize> = HashMap::new();
                ids.into_iter()
                    .map(|c| {
                        let k = seen.len();
                        *seen.entry(c).or_insert(k)
                    })
                    .collect()
            })
            .collect();
        LevelEquivalence { classes }
    }

    /// Classes given by a key function on simplices.
    pub fn by_key<K: std::hash::Hash + Eq>(x: &Situs, key: impl Fn(usize, usize) -> K) -> Self {
        let classes = (1..=x.depth())
            .map(|n| {
                let mut ids: HashMap<K, usize> = HashMap::new();
                (0..x.size(n))
                    .map(|i| {
                        let k = ids.len();
                        *ids.entry(key(n, i)).or_insert(k)
                    })
                    .collect()
            })
            .collect();
        LevelEquivalence { classes }
    }

    pub fn identity(x: &Situs) -> Self {
        LevelEquivalence { classes: (1..=x.depth()).map(|n| (0..x.size(n)).collect()).collect() }
    }

    pub fn total(x: &Situs) -> Self {
        LevelEquivalence { classes: (1..=x.depth()).map(|n| vec![0; x.size(n)]).collect() }
    }

    pub fn class(&self, n: usize, x: usize) -> usize {
        self.classes[n - 1][x]
    }

    pub fn level(&self, n: usize) -> &[usize] {
        &self.classes[n - 1]
    }

    pub fn count(&self, n: usize) -> usize {
        self.classes[n - 1].iter().max().map_or(0, |m| m + 1)
    }
}

/// Quotient by a face-compatible equivalence, with the projection morphism.
pub fn quotient(x: &Situs, e: &LevelEquivalence) -> Result<(Situs, Morphism)> {
    let depth = x.depth();
    if e.classes.len() != depth || (1..=depth).any(|n| e.level(n).len() != x.size(n)) {
        return Err(Error::domain("equivalence does not match the levels"));
    }
    let reps: Vec<Vec<usize>> = (1..=depth)
        .map(|n| {
            let mut r = vec![usize::MAX; e.count(n)];
            for (i, &c) in e.level(n).iter().enumerate() {
                if r[c] == usize::MAX {
                    r[c] = i;
                }
            }
            r
        })
        .collect();
    let mut faces = HashMap::new();
    for m in 1..=depth {
        for n in 1..=depth {
            for list in weakly_increasing_lists(n, m) {
                let f = x.face(m, &list);
                for (i, &c) in e.level(m).iter().enumerate() {
                    let r = reps[m - 1][c];
                    if e.class(n, f[i]) != e.class(n, f[r]) {
                        return Err(Error::validation(format!(
                            "equivalence not compatible with face {list:?}: {} ~ {} but faces differ",
                            x.show(m, r),
                            x.show(m, i)
                        )));
                    }
                }
                let table = reps[m - 1].iter().map(|&r| e.class(n, f[r])).collect();
                faces.insert((m, list), table);
            }
        }
    }
    let mut levels = Vec::with_capacity(depth);
    for n in 1..=depth {
        let proj = SetMap::new(x.size(n), e.count(n), e.level(n).to_vec())?;
        let filter = filters::finest_filter(&proj, x.filter(n))?;
        let simplices = reps[n - 1].iter().map(|&r| x.simplices(n)[r].clone()).collect();
        levels.push(Level::new(simplices, filter)?);
    }
    let q = Situs::from_parts(levels, faces, x.labels.clone())?;
    let proj = Morphism::new(e.classes.clone());
    Ok((q, proj))
}

/// Disjoint union of tuple situses with principal filters.
pub fn coproduct(parts: &[&Situs]) -> Result<Situs> {
    let depth = parts.first().map_or(1, |p| p.depth());
    let mut labels = Vec::new();
    let mut offsets = Vec::new();
    for p in parts {
        if p.depth() != depth {
            return Err(Error::Depth("coproduct summands must share a depth".into()));
        }
        if p.vertices().is_none() {
            return Err(Error::domain("coproduct needs tuple situses"));
        }
        offsets.push(labels.len() as u32);
        labels.extend(p.labels().iter().cloned());
    }
    let mut levels = Vec::with_capacity(depth);
    for n in 1..=depth {
        let mut simplices = Vec::new();
        let mut core = Vec::new();
        for (p, &off) in parts.iter().zip(&offsets) {
            let c = p
                .filter(n)
                .core()
                .ok_or_else(|| Error::domain("coproduct needs principal filters"))?;
            for (i, t) in p.simplices(n).iter().enumerate() {
                if c.contains(i) {
                    core.push(simplices.len());
                }
                simplices.push(t.iter().map(|&v| v + off).collect());
            }
        }
        let size = simplices.len();
        levels.push(Level::new(simplices, Filter::principal(size, filters::subset(size, core))?)?);
    }
    Situs::from_tuples(labels.len(), labels, levels)
}

/// A family of level maps; a morphism when faces commute and levels are continuous.
#[derive(Clone, Debug)]
pub struct Morphism {
    levels: Vec<Vec<usize>>,
}

impl PartialEq for Morphism {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels
    }
}

impl Eq for Morphism {}

impl std::hash::Hash for Morphism {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.levels.hash(state)
    }
}

impl Morphism {
    pub fn new(levels: Vec<Vec<usize>>) -> Self {
        Morphism { levels }
    }

    /// The level maps induced by a vertex map between tuple situses.
    pub fn from_vertex_map(x: &Situs, y: &Situs, vmap: &[usize]) -> Result<Self> {
        if x.vertices() != Some(vmap.len()) || y.vertices().is_none() || x.depth() != y.depth() {
            return Err(Error::domain("vertex maps need tuple situses of equal depth"));
        }
        let mut levels = Vec::with_capacity(x.depth());
        for n in 1..=x.depth() {
            let mut table = Vec::with_capacity(x.size(n));
            for t in x.simplices(n) {
                let img: Tuple = t.iter().map(|&v| vmap[v as usize] as u32).collect();
                match y.index_of(n, &img) {
                    Some(j) => table.push(j),
                    None => return Err(Error::domain(format!("vertex map sends {} outside the target", x.show(n, table.len())))),
                }
            }
            levels.push(table);
        }
        Ok(Morphism { levels })
    }

    pub fn identity(x: &Situs) -> Self {
        Morphism { levels: (1..=x.depth()).map(|n| (0..x.size(n)).collect()).collect() }
    }

    /// The unique map into a situs with singleton levels.
    pub fn to_terminal(x: &Situs) -> Self {
        Morphism { levels: (1..=x.depth()).map(|n| vec![0; x.size(n)]).collect() }
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &[usize] {
        &self.levels[n - 1]
    }

    /// The vertex map read off level 1 when both ends are tuple situses.
    pub fn vertex_map(&self, x: &Situs, y: &Situs) -> Option<Vec<usize>> {
        x.vertices()?;
        y.vertices()?;
        let mut v = vec![0; x.vertices()?];
        for (i, t) in x.simplices(1).iter().enumerate() {
            v[t[0] as usize] = y.simplices(1)[self.levels[0][i]][0] as usize;
        }
        Some(v)
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &Morphism) -> Morphism {
        Morphism {
            levels: self
                .levels
                .iter()
                .zip(&then.levels)
                .map(|(f, g)| f.iter().map(|&y| g[y]).collect())
                .collect(),
        }
    }

    /// Checks typing, face commutation and continuity.
    pub fn check(&self, x: &Situs, y: &Situs) -> Result<()> {
        if self.levels.len() != x.depth() || x.depth() != y.depth() {
            return Err(Error::domain("morphism depth mismatch"));
        }
        for n in 1..=x.depth() {
            let f = self.level(n);
            if f.len() != x.size(n) || f.iter().any(|&j| j >= y.size(n)) {
                return Err(Error::domain(format!("level {n} map is ill-typed")));
            }
        }
        for m in 1..=x.depth() {
            for n in 1..=x.depth() {
                for list in weakly_increasing_lists(n, m) {
                    let fx = x.face(m, &list);
                    let fy = y.face(m, &list);
                    if let Some(i) = (0..x.size(m)).find(|&i| self.level(n)[fx[i]] != fy[self.level(m)[i]]) {
                        return Err(Error::validation(format!(
                            "face {list:?} does not commute at {}",
                            x.show(m, i)
                        )));
                    }
                }
            }
            if !continuous_unchecked(self.level(m), x.filter(m), y.filter(m)) {
                return Err(Error::validation(format!("level {m} map is not continuous")));
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, x: &Situs, y: &Situs) -> bool {
        self.check(x, y).is_ok()
    }

    /// Level maps are continuous (faces not checked).
    pub fn is_continuous(&self, x: &Situs, y: &Situs) -> bool {
        (1..=x.depth()).all(|n| continuous_unchecked(self.level(n), x.filter(n), y.filter(n)))
    }
}

/// The projection of a subset of level simplices, for display.
pub fn show_subset(x: &Situs, n: usize, s: &Subset) -> Vec<String> {
    s.ones().map(|i| x.show(n, i)).collect()
}

/// Every reflexive transitive relation on `0..n`.
pub fn all_preorders(n: usize) -> Vec<FinPreorder> {
    let labels: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let off: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|(a, b)| a != b).collect();
    let mut out = Vec::new();
    for mask in 0u64..1 << off.len() {
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (k, &(a, b)) in off.iter().enumerate() {
            if mask >> k & 1 == 1 {
                leq[a][b] = true;
            }
        }
        if let Ok(p) = FinPreorder::new(labels.clone(), leq) {
            out.push(p);
        }
    }
    out
}
