//! Morphism enumeration and lifting properties between truncated situses.

use crate::error::{Error, Guard, Result};
use crate::filters::{continuous_unchecked, FilterKind};
use crate::simplex::{weakly_increasing_lists, Morphism, Situs, Tuple};
use std::collections::{HashMap, HashSet};
use std::ops::ControlFlow;

/// A morphism together with its endpoints.
#[derive(Clone, Debug)]
pub struct Arrow<'a> {
    pub source: &'a Situs,
    pub target: &'a Situs,
    pub map: Morphism,
}

impl<'a> Arrow<'a> {
    pub fn new(source: &'a Situs, target: &'a Situs, map: Morphism) -> Result<Self> {
        map.check(source, target)?;
        Ok(Arrow { source, target, map })
    }

    pub fn identity(x: &'a Situs) -> Self {
        Arrow { source: x, target: x, map: Morphism::identity(x) }
    }

    pub fn to_terminal(x: &'a Situs, t: &'a Situs) -> Result<Self> {
        Arrow::new(x, t, Morphism::to_terminal(x))
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &Arrow<'a>) -> Result<Arrow<'a>> {
        Arrow::new(self.source, then.target, self.map.then(&then.map))
    }
}

/// `i: A → B` against `p: X → Y`.
#[derive(Clone, Debug)]
pub struct LiftingInstance<'a> {
    pub i: Arrow<'a>,
    pub p: Arrow<'a>,
}

/// A commuting square `p∘f = g∘i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Square {
    pub f: Morphism,
    pub g: Morphism,
}

#[derive(Clone, Debug)]
pub struct LiftOutcome {
    pub holds: bool,
    pub squares: usize,
    pub witness: Option<Square>,
}

fn same_depth(x: &Situs, y: &Situs) -> Result<()> {
    if x.depth() != y.depth() {
        return Err(Error::Depth(format!("depths differ: {} vs {}", x.depth(), y.depth())));
    }
    Ok(())
}

fn guard_search(x: &Situs, y: &Situs, guard: &Guard) -> Result<()> {
    let k = x.size(1) as f64;
    let l = y.size(1).max(1) as f64;
    let est = (k * l.log2()).exp2();
    guard.candidates(if est > 1e18 { usize::MAX } else { est as usize })
}

/// All morphisms `x → y` in deterministic order.
pub fn hom_set(x: &Situs, y: &Situs, guard: &Guard) -> Result<Vec<Morphism>> {
    let mut out = Vec::new();
    visit_homs(x, y, guard, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Visits morphisms until the visitor breaks. Uses the vertex path when `y`
/// is a tuple situs and the level-wise path otherwise.
pub fn visit_homs(
    x: &Situs,
    y: &Situs,
    guard: &Guard,
    visit: impl FnMut(&Morphism) -> ControlFlow<()>,
) -> Result<()> {
    same_depth(x, y)?;
    guard_search(x, y, guard)?;
    if y.vertices().is_some() {
        VertexSearch::new(x, y, None).run(visit);
    } else {
        LevelSearch::new(x, y).run(visit);
    }
    Ok(())
}

/// Morphisms via level-1 maps; `y` must be a tuple situs.
pub fn hom_set_vertex(x: &Situs, y: &Situs) -> Result<Vec<Morphism>> {
    same_depth(x, y)?;
    if y.vertices().is_none() {
        return Err(Error::domain("vertex enumeration needs a tuple target"));
    }
    let mut out = Vec::new();
    VertexSearch::new(x, y, None).run(|m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// Morphisms via level-by-level search, valid for any target.
pub fn hom_set_levelwise(x: &Situs, y: &Situs) -> Result<Vec<Morphism>> {
    same_depth(x, y)?;
    let mut out = Vec::new();
    LevelSearch::new(x, y).run(|m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// A morphism whose level-1 map is onto `y(1)`.
pub fn exists_surjection(x: &Situs, y: &Situs, guard: &Guard) -> Result<Option<Morphism>> {
    same_depth(x, y)?;
    if y.vertices().is_none() {
        return Err(Error::domain("surjection search needs a tuple target"));
    }
    guard_search(x, y, guard)?;
    if y.size(1) > x.size(1) {
        return Ok(None);
    }
    let mut found = None;
    VertexSearch::new(x, y, Some(())).run(|m| {
        found = Some(m.clone());
        ControlFlow::Break(())
    });
    Ok(found)
}

struct VertexSearch<'a> {
    x: &'a Situs,
    y: &'a Situs,
    surjective: bool,
    /// level-2 simplices of x grouped by the larger of their vertex indices
    pairs_at: Vec<Vec<(usize, usize, bool)>>,
    core1_x: Option<Vec<bool>>,
    core1_y: Option<Vec<bool>>,
    core2_y: Option<Vec<bool>>,
    yv: Vec<u32>,
}

impl<'a> VertexSearch<'a> {
    fn new(x: &'a Situs, y: &'a Situs, surjective: Option<()>) -> Self {
        let k = x.size(1);
        let mut pairs_at = vec![Vec::new(); k];
        let core_flags = |s: &Situs, n: usize| -> Option<Vec<bool>> {
            s.filter(n).core().map(|c| (0..s.size(n)).map(|i| c.contains(i)).collect())
        };
        let core2_x = if x.depth() >= 2 { core_flags(x, 2) } else { None };
        if x.depth() >= 2 {
            let f1 = x.face(2, &[1]);
            let f2 = x.face(2, &[2]);
            for s in 0..x.size(2) {
                let (a, b) = (f1[s], f2[s]);
                let in_core = core2_x.as_ref().is_some_and(|c| c[s]);
                pairs_at[a.max(b)].push((a, b, in_core));
            }
        }
        let principal = |s: &Situs, n: usize| matches!(s.filter(n).kind(), FilterKind::Principal(_));
        let both1 = principal(x, 1) && principal(y, 1);
        let both2 = x.depth() >= 2 && principal(x, 2) && principal(y, 2);
        VertexSearch {
            x,
            y,
            surjective: surjective.is_some(),
            pairs_at,
            core1_x: if both1 { core_flags(x, 1) } else { None },
            core1_y: if both1 { core_flags(y, 1) } else { None },
            core2_y: if both2 { core_flags(y, 2) } else { None },
            yv: y.simplices(1).iter().map(|t| t[0]).collect(),
        }
    }

    fn run(&self, mut visit: impl FnMut(&Morphism) -> ControlFlow<()>) {
        let mut assign = vec![usize::MAX; self.x.size(1)];
        let mut hits = vec![0usize; self.y.size(1)];
        let _ = self.dfs(0, &mut assign, &mut hits, 0, &mut visit);
    }

    fn dfs(
        &self,
        j: usize,
        assign: &mut Vec<usize>,
        hits: &mut Vec<usize>,
        hit_count: usize,
        visit: &mut impl FnMut(&Morphism) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let k = assign.len();
        if self.surjective && self.y.size(1) - hit_count > k - j {
            return ControlFlow::Continue(());
        }
        if j == k {
            if let Some(m) = self.complete(assign) {
                return visit(&m);
            }
            return ControlFlow::Continue(());
        }
        for v in 0..self.y.size(1) {
            if let (Some(cx), Some(cy)) = (&self.core1_x, &self.core1_y) {
                if cx[j] && !cy[v] {
                    continue;
                }
            }
            assign[j] = v;
            if self.pairs_ok(j, assign) {
                hits[v] += 1;
                let add = usize::from(hits[v] == 1);
                let r = self.dfs(j + 1, assign, hits, hit_count + add, visit);
                hits[v] -= 1;
                r?;
            }
        }
        assign[j] = usize::MAX;
        ControlFlow::Continue(())
    }

    fn pairs_ok(&self, j: usize, assign: &[usize]) -> bool {
        for &(a, b, in_core) in &self.pairs_at[j] {
            let img = [self.yv[assign[a]], self.yv[assign[b]]];
            match self.y.index_of(2, &img) {
                None => return false,
                Some(t) => {
                    if in_core {
                        if let Some(c) = &self.core2_y {
                            if !c[t] {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    fn complete(&self, assign: &[usize]) -> Option<Morphism> {
        let x = self.x;
        let mut levels = Vec::with_capacity(x.depth());
        levels.push(assign.to_vec());
        for n in 2..=x.depth() {
            let vf: Vec<&[usize]> = (1..=n).map(|k| x.face(n, &[k])).collect();
            let mut table = Vec::with_capacity(x.size(n));
            let mut img: Tuple = vec![0; n];
            for s in 0..x.size(n) {
                for k in 0..n {
                    img[k] = self.yv[assign[vf[k][s]]];
                }
                table.push(self.y.index_of(n, &img)?);
            }
            levels.push(table);
        }
        let m = Morphism::new(levels);
        if (1..=x.depth()).all(|n| continuous_unchecked(m.level(n), x.filter(n), self.y.filter(n))) {
            Some(m)
        } else {
            None
        }
    }
}

struct LevelSearch<'a> {
    x: &'a Situs,
    y: &'a Situs,
}

impl<'a> LevelSearch<'a> {
    fn new(x: &'a Situs, y: &'a Situs) -> Self {
        LevelSearch { x, y }
    }

    fn run(&self, mut visit: impl FnMut(&Morphism) -> ControlFlow<()>) {
        let mut levels: Vec<Vec<usize>> = Vec::new();
        let _ = self.level(1, &mut levels, &mut visit);
    }

    fn level(
        &self,
        n: usize,
        done: &mut Vec<Vec<usize>>,
        visit: &mut impl FnMut(&Morphism) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if n > self.x.depth() {
            return visit(&Morphism::new(done.clone()));
        }
        let (x, y) = (self.x, self.y);
        // candidates for each simplex from faces into lower levels
        let lower: Vec<(usize, Vec<usize>)> = (1..n)
            .flat_map(|l| weakly_increasing_lists(l, n).into_iter().map(move |li| (l, li)))
            .collect();
        let ysig: HashMap<Vec<usize>, Vec<usize>> = {
            let mut h: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
            for t in 0..y.size(n) {
                let sig: Vec<usize> = lower.iter().map(|(_, li)| y.face(n, li)[t]).collect();
                h.entry(sig).or_default().push(t);
            }
            h
        };
        let empty = Vec::new();
        let mut cands: Vec<&Vec<usize>> = Vec::with_capacity(x.size(n));
        for s in 0..x.size(n) {
            let sig: Vec<usize> = lower.iter().map(|(l, li)| done[l - 1][x.face(n, li)[s]]).collect();
            cands.push(ysig.get(&sig).unwrap_or(&empty));
        }
        let same: Vec<Vec<usize>> = weakly_increasing_lists(n, n)
            .into_iter()
            .filter(|li| li.iter().enumerate().any(|(k, &v)| v != k + 1))
            .collect();
        let same_x: Vec<&[usize]> = same.iter().map(|li| x.face(n, li)).collect();
        let same_y: Vec<&[usize]> = same.iter().map(|li| y.face(n, li)).collect();
        let cx = x.filter(n).core().cloned();
        let cy = if cx.is_some() { y.filter(n).core().cloned() } else { None };
        let mut assign = vec![usize::MAX; x.size(n)];
        let ctx = LevelCtx { cands, same_x, same_y, cx, cy };
        self.assign(n, 0, &mut assign, &ctx, done, visit)
    }

    fn assign(
        &self,
        n: usize,
        s: usize,
        assign: &mut Vec<usize>,
        ctx: &LevelCtx<'_>,
        done: &mut Vec<Vec<usize>>,
        visit: &mut impl FnMut(&Morphism) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if s == assign.len() {
            if !continuous_unchecked(assign, self.x.filter(n), self.y.filter(n)) {
                return ControlFlow::Continue(());
            }
            done.push(assign.clone());
            let r = self.level(n + 1, done, visit);
            done.pop();
            return r;
        }
        for &t in ctx.cands[s].iter() {
            if let (Some(cx), Some(cy)) = (&ctx.cx, &ctx.cy) {
                if cx.contains(s) && !cy.contains(t) {
                    continue;
                }
            }
            assign[s] = t;
            let ok = ctx.same_x.iter().zip(&ctx.same_y).all(|(fx, fy)| {
                let a = fx[s];
                (a > s || assign[a] == fy[t])
                    && (0..s).all(|r| fx[r] != s || fy[assign[r]] == t)
            });
            if ok {
                self.assign(n, s + 1, assign, ctx, done, visit)?;
            }
        }
        assign[s] = usize::MAX;
        ControlFlow::Continue(())
    }
}

struct LevelCtx<'a> {
    cands: Vec<&'a Vec<usize>>,
    same_x: Vec<&'a [usize]>,
    same_y: Vec<&'a [usize]>,
    cx: Option<crate::filters::Subset>,
    cy: Option<crate::filters::Subset>,
}

fn check_instance(inst: &LiftingInstance<'_>) -> Result<()> {
    let d = inst.i.source.depth();
    for s in [inst.i.target, inst.p.source, inst.p.target] {
        if s.depth() != d {
            return Err(Error::Depth("lifting instance objects must share a depth".into()));
        }
    }
    Ok(())
}

/// A diagonal `h` with `h∘i = f` and `p∘h = g`, if any.
pub fn has_lift(inst: &LiftingInstance<'_>, f: &Morphism, g: &Morphism, guard: &Guard) -> Result<Option<Morphism>> {
    check_instance(inst)?;
    if f.then(&inst.p.map) != inst.i.map.then(g) {
        return Err(Error::precondition("square does not commute"));
    }
    let mut found = None;
    visit_homs(inst.i.target, inst.p.source, guard, |h| {
        if &inst.i.map.then(h) == f && &h.then(&inst.p.map) == g {
            found = Some(h.clone());
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    Ok(found)
}

/// Every commuting square has a diagonal.
pub fn lifting_property(inst: &LiftingInstance<'_>, guard: &Guard) -> Result<LiftOutcome> {
    lifting_where(inst, guard, |_| true)
}

/// Lifting restricted to bottom arrows `g` accepted by `keep`.
pub fn lifting_where(
    inst: &LiftingInstance<'_>,
    guard: &Guard,
    keep: impl Fn(&Morphism) -> bool,
) -> Result<LiftOutcome> {
    check_instance(inst)?;
    let (a, b, x, y) = (inst.i.source, inst.i.target, inst.p.source, inst.p.target);
    let mut tops: HashMap<Morphism, Vec<Morphism>> = HashMap::new();
    visit_homs(a, x, guard, |f| {
        tops.entry(f.then(&inst.p.map)).or_default().push(f.clone());
        ControlFlow::Continue(())
    })?;
    let lifted = diagonal_pairs(inst, guard)?;
    let mut squares = 0;
    let mut witness = None;
    visit_homs(b, y, guard, |g| {
        if !keep(g) {
            return ControlFlow::Continue(());
        }
        if let Some(fs) = tops.get(&inst.i.map.then(g)) {
            for f in fs {
                squares += 1;
                if !lifted.contains(&(f.clone(), g.clone())) {
                    witness = Some(Square { f: f.clone(), g: g.clone() });
                    return ControlFlow::Break(());
                }
            }
        }
        ControlFlow::Continue(())
    })?;
    Ok(LiftOutcome { holds: witness.is_none(), squares, witness })
}

/// Lifting for squares with a fixed top arrow `f`, which need not be continuous.
pub fn lifts_for_top(inst: &LiftingInstance<'_>, f: &Morphism, guard: &Guard) -> Result<LiftOutcome> {
    check_instance(inst)?;
    let lifted = diagonal_pairs(inst, guard)?;
    let pf = f.then(&inst.p.map);
    let mut squares = 0;
    let mut witness = None;
    visit_homs(inst.i.target, inst.p.target, guard, |g| {
        if inst.i.map.then(g) == pf {
            squares += 1;
            if !lifted.contains(&(f.clone(), g.clone())) {
                witness = Some(Square { f: f.clone(), g: g.clone() });
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    Ok(LiftOutcome { holds: witness.is_none(), squares, witness })
}

fn diagonal_pairs(inst: &LiftingInstance<'_>, guard: &Guard) -> Result<HashSet<(Morphism, Morphism)>> {
    let mut lifted = HashSet::new();
    visit_homs(inst.i.target, inst.p.source, guard, |h| {
        lifted.insert((inst.i.map.then(h), h.then(&inst.p.map)));
        ControlFlow::Continue(())
    })?;
    Ok(lifted)
}

/// `p` lifts against every member of `family` (right Quillen negation).
pub fn right_negation(family: &[Arrow<'_>], p: &Arrow<'_>, guard: &Guard) -> Result<bool> {
    for i in family {
        let inst = LiftingInstance { i: i.clone(), p: p.clone() };
        if !lifting_property(&inst, guard)?.holds {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `i` lifts against every member of `family` (left Quillen negation).
pub fn left_negation(i: &Arrow<'_>, family: &[Arrow<'_>], guard: &Guard) -> Result<bool> {
    for p in family {
        let inst = LiftingInstance { i: i.clone(), p: p.clone() };
        if !lifting_property(&inst, guard)?.holds {
            return Ok(false);
        }
    }
    Ok(true)
}
