//! Dividing lines: each property is checked twice, by a direct combinatorial
//! oracle over finite sequences and by a lifting property between situses.
//! Also Shelah-style representation predicates and situs shape predicates.
//!
//! Every "infinite" in the classical definitions becomes an explicit chain
//! length and a distinct-element target; verdicts describe the given finite
//! structure only.

use crate::error::{Error, Guard, Result};
use crate::filters::{continuous_unchecked, coarsest_filter, SetMap};
use crate::fostruct::{compile, type_orbits, FinStructure, Formula, TypeTable};
use crate::homlift::{lifting_property, lifting_where, lifts_for_top, visit_homs, Arrow, LiftingInstance, Square};
use crate::indisc::{sigma_indiscernible, IndiscKind, Sigma, Tester};
use crate::simplex::{
    all_tuples, coproduct, initial, quotient, terminal, tuple_situs, weakly_increasing_lists, FinPreorder, Morphism,
    Situs,
};
use crate::stone::{
    consistency_space, order_object, orbit_equivalence, shifted_structure, star_omitting, star_order, stone_member,
    stone_quotient, stone_space, tree_objects, FinTree, OrderFilter, OrderFlavor, StoneVariant,
};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashSet};
use std::ops::ControlFlow;

/// Evidence attached to a verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A finite sequence of elements.
    Sequence { elements: Vec<String> },
    /// A commuting square without a diagonal, as the vertex images of its arrows.
    Square { top: Vec<String>, bottom: Vec<String> },
    /// Parameters attached to tree nodes.
    Tree { nodes: Vec<String>, parameters: Vec<String> },
    /// A vertex map.
    Map { assignment: BTreeMap<String, String> },
}

/// Outcome of one property check.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub property: String,
    /// The lifting-property verdict.
    pub holds: bool,
    /// The direct oracle verdict.
    pub oracle_holds: bool,
    /// Lifting counterexample, or the oracle's when only the oracle fails.
    pub witness: Option<Witness>,
    pub oracle_witness: Option<Witness>,
    /// Further recorded verdicts.
    pub extra: BTreeMap<String, bool>,
    pub config: BTreeMap<String, Value>,
}

impl Verdict {
    pub(crate) fn new(
        property: &str,
        lifting: (bool, Option<Witness>),
        oracle: (bool, Option<Witness>),
        config: BTreeMap<String, Value>,
    ) -> Verdict {
        let witness = lifting.1.or_else(|| oracle.1.clone());
        Verdict {
            property: property.to_string(),
            holds: lifting.0,
            oracle_holds: oracle.0,
            witness,
            oracle_witness: oracle.1,
            extra: BTreeMap::new(),
            config,
        }
    }

    pub fn agrees(&self) -> bool {
        self.holds == self.oracle_holds
    }
}

/// Finite stand-ins for an infinite index order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SequenceConfig {
    /// Length of the index chain `I`.
    pub chain: usize,
    /// Distinct-element target `N`.
    pub distinct: usize,
    /// Truncation depth of the situses.
    pub depth: usize,
    /// First rank of the final segment used as the tail.
    pub tail_start: usize,
    /// Quantifier depth of formula cutoffs.
    pub qdepth: usize,
    /// Largest arity in formula cutoffs.
    pub arity: usize,
    pub variant: StoneVariant,
}

impl SequenceConfig {
    /// `|I| = |M|+2`, `N = |M|`, depth 3, tails from rank 1, cutoff depth 1 arity 2.
    pub fn for_structure(m: &FinStructure) -> SequenceConfig {
        SequenceConfig {
            chain: m.size() + 2,
            distinct: m.size(),
            depth: 3,
            tail_start: 1,
            qdepth: 1,
            arity: 2,
            variant: StoneVariant::Extendable,
        }
    }

    fn echo(&self) -> BTreeMap<String, Value> {
        let mut c = BTreeMap::new();
        c.insert("chain".into(), json!(self.chain));
        c.insert("distinct".into(), json!(self.distinct));
        c.insert("depth".into(), json!(self.depth));
        c.insert("variant".into(), json!(self.variant.name()));
        c
    }

    fn echo_tails(&self) -> BTreeMap<String, Value> {
        let mut c = self.echo();
        c.insert("tail_start".into(), json!(self.tail_start));
        c
    }

    fn echo_cutoff(&self) -> BTreeMap<String, Value> {
        let mut c = self.echo_tails();
        c.insert("qdepth".into(), json!(self.qdepth));
        c.insert("arity".into(), json!(self.arity));
        c
    }
}

fn names(m: &FinStructure, seq: &[u32]) -> Vec<String> {
    seq.iter().map(|&v| m.name(v).to_string()).collect()
}

fn level1_images(map: &Morphism, y: &Situs) -> Vec<String> {
    map.level(1).iter().map(|&v| y.show(1, v)).collect()
}

fn square_witness(sq: &Square, p: &Arrow<'_>) -> Witness {
    Witness::Square { top: level1_images(&sq.f, p.source), bottom: level1_images(&sq.g, p.target) }
}

fn distinct_count(seq: &[u32]) -> usize {
    seq.iter().collect::<HashSet<_>>().len()
}

fn identity_map(a: &Situs, b: &Situs) -> Result<Morphism> {
    let n = a.vertices().ok_or_else(|| Error::domain("identity needs a tuple situs"))?;
    Morphism::from_vertex_map(a, b, &(0..n).collect::<Vec<_>>())
}

/// Checks `I_•^≤ → |I|_• ⋔ X → ⊤` for the order objects with the given filter.
fn order_lifting(x: &Situs, chain: usize, filter: OrderFilter, depth: usize, guard: &Guard) -> Result<(bool, Option<Witness>)> {
    let order = FinPreorder::chain(chain);
    let a = order_object(&order, OrderFlavor::Ordered, filter, depth)?;
    let b = order_object(&order, OrderFlavor::SetFlavor, filter, depth)?;
    let t = terminal(depth);
    let i = Arrow::new(&a, &b, identity_map(&a, &b)?)?;
    let p = Arrow::to_terminal(x, &t)?;
    let inst = LiftingInstance { i, p };
    let out = lifting_property(&inst, guard)?;
    let w = out.witness.as_ref().map(|sq| Witness::Sequence { elements: level1_images(&sq.f, x) });
    Ok((out.holds, w))
}

fn check_config(m: &FinStructure, cfg: &SequenceConfig, guard: &Guard) -> Result<()> {
    guard.atoms(m.size())?;
    guard.depth(cfg.depth)?;
    if cfg.depth == 0 {
        return Err(Error::domain("depth must be positive"));
    }
    guard.candidates(m.size().saturating_pow(cfg.chain as u32))
}

/// Every Σ-indiscernible-with-repetitions sequence with ≥ N values is order
/// indiscernible with repetitions, against `I^≤ → |I| ⋔ M^Σ → ⊤`.
pub fn stability(m: &FinStructure, phis: &[Formula], cfg: &SequenceConfig, guard: &Guard) -> Result<Verdict> {
    check_config(m, cfg, guard)?;
    let sigma = Sigma::from_formulas(m, phis)?;
    let x = stone_space(m, &sigma, cfg.variant, cfg.distinct, cfg.depth, guard)?;
    let lifting = order_lifting(&x, cfg.chain, OrderFilter::Antidiscrete, cfg.depth, guard)?;
    let oracle = stability_oracle(m, &sigma, cfg.chain, cfg.distinct);
    let mut c = cfg.echo();
    c.insert("formulas".into(), json!(phis.iter().map(|p| p.to_string()).collect::<Vec<_>>()));
    Ok(Verdict::new("stability", lifting, oracle, c))
}

fn stability_oracle(m: &FinStructure, sigma: &Sigma, len: usize, distinct: usize) -> (bool, Option<Witness>) {
    for s in all_tuples(m.size(), len) {
        if distinct_count(&s) >= distinct
            && sigma_indiscernible(sigma, &s, IndiscKind::WithRepetitions)
            && !sigma_indiscernible(sigma, &s, IndiscKind::OrderWithRepetitions)
        {
            return (false, Some(Witness::Sequence { elements: names(m, &s) }));
        }
    }
    (true, None)
}

/// Stability on the final segment starting at `tail_start`, against the tails objects.
pub fn eventual_stability(m: &FinStructure, phis: &[Formula], cfg: &SequenceConfig, guard: &Guard) -> Result<Verdict> {
    check_config(m, cfg, guard)?;
    if cfg.tail_start >= cfg.chain {
        return Err(Error::domain("tail start must lie inside the chain"));
    }
    let sigma = Sigma::from_formulas(m, phis)?;
    let x = stone_space(m, &sigma, cfg.variant, cfg.distinct, cfg.depth, guard)?;
    let lifting = order_lifting(&x, cfg.chain, OrderFilter::Tails(cfg.tail_start), cfg.depth, guard)?;
    let oracle = stability_oracle(m, &sigma, cfg.chain - cfg.tail_start, cfg.distinct);
    let mut c = cfg.echo_tails();
    c.insert("formulas".into(), json!(phis.iter().map(|p| p.to_string()).collect::<Vec<_>>()));
    Ok(Verdict::new("eventual-stability", lifting, oracle, c))
}

/// Parameter-free and parameter cutoffs used by the NIP checks.
fn nip_sigmas(m: &FinStructure, cfg: &SequenceConfig) -> (Sigma, Sigma) {
    let base = Sigma::cutoff(m, &[], cfg.qdepth, cfg.arity);
    let full = base.clone().union(Sigma::cutoff_over_each(m, cfg.qdepth, cfg.arity));
    (base, full)
}

/// Stone spaces `M^{L(M)} → M` for NIP with the given variant.
fn nip_spaces(m: &FinStructure, cfg: &SequenceConfig, variant: StoneVariant, guard: &Guard) -> Result<(Situs, Situs)> {
    let (base, full) = nip_sigmas(m, cfg);
    Ok((
        stone_space(m, &full, variant, cfg.distinct, cfg.depth, guard)?,
        stone_space(m, &base, variant, cfg.distinct, cfg.depth, guard)?,
    ))
}

/// Outcome of checking one bottom arrow against `M^{L(M)} → M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SquareCheck {
    /// The sequence is not continuous into `M`, so it gives no square.
    NotASquare,
    Lifts,
    NoLift,
}

/// Whether the tails sequence `seq` lifts from `M` to `M^{L(M)}` for the
/// given variant (the diagonal shares its vertex map with the bottom arrow).
pub fn nip_square(m: &FinStructure, seq: &[u32], cfg: &SequenceConfig, variant: StoneVariant, guard: &Guard) -> Result<SquareCheck> {
    check_config(m, cfg, guard)?;
    if seq.len() != cfg.chain || seq.iter().any(|&v| v as usize >= m.size()) {
        return Err(Error::domain("sequence does not match the chain and universe"));
    }
    let tails = order_object(&FinPreorder::chain(cfg.chain), OrderFlavor::Ordered, OrderFilter::Tails(cfg.tail_start), cfg.depth)?;
    let (top, base) = nip_spaces(m, cfg, variant, guard)?;
    let vm: Vec<usize> = seq.iter().map(|&v| v as usize).collect();
    let g = Morphism::from_vertex_map(&tails, &base, &vm)?;
    if !g.is_continuous(&tails, &base) {
        return Ok(SquareCheck::NotASquare);
    }
    let h = Morphism::from_vertex_map(&tails, &top, &vm)?;
    Ok(if h.is_continuous(&tails, &top) { SquareCheck::Lifts } else { SquareCheck::NoLift })
}

/// `⊥ → I^{≤tails} ⋔ M^{L(M)} → M`, optionally restricted to injective bottom arrows.
fn nip_lifting(m: &FinStructure, cfg: &SequenceConfig, variant: StoneVariant, injective: bool, guard: &Guard) -> Result<(bool, Option<Witness>)> {
    let tails = order_object(&FinPreorder::chain(cfg.chain), OrderFlavor::Ordered, OrderFilter::Tails(cfg.tail_start), cfg.depth)?;
    let (top, base) = nip_spaces(m, cfg, variant, guard)?;
    let bot = initial(cfg.depth);
    let i = Arrow::new(&bot, &tails, Morphism::new(vec![vec![]; cfg.depth]))?;
    let p = Arrow::new(&top, &base, identity_map(&top, &base)?)?;
    let inst = LiftingInstance { i, p };
    let out = lifting_where(&inst, guard, |g| {
        !injective || {
            let v = g.level(1);
            v.iter().collect::<HashSet<_>>().len() == v.len()
        }
    })?;
    let w = out.witness.as_ref().map(|sq| Witness::Sequence { elements: level1_images(&sq.g, &base) });
    Ok((out.holds, w))
}

/// The tail of each sequence that is eventually indiscernible over ∅ is
/// eventually indiscernible over every parameter.
fn nip_oracle(m: &FinStructure, cfg: &SequenceConfig, variant: StoneVariant, injective: bool, guard: &Guard) -> Result<(bool, Option<Witness>)> {
    let (base, full) = nip_sigmas(m, cfg);
    for s in all_tuples(m.size(), cfg.chain) {
        if injective && distinct_count(&s) < s.len() {
            continue;
        }
        let tail = &s[cfg.tail_start..];
        if stone_member(&base, m.size(), variant, cfg.distinct, tail, guard)?
            && !stone_member(&full, m.size(), variant, cfg.distinct, tail, guard)?
        {
            return Ok((false, Some(Witness::Sequence { elements: names(m, &s) })));
        }
    }
    Ok((true, None))
}

/// NIP with depth-`qdepth` parameter formulas: the exact lifting uses the
/// consecutive-repetition spaces; the almost-lifting (recorded in `extra`)
/// uses the plain spaces restricted to injective sequences.
pub fn nip(m: &FinStructure, cfg: &SequenceConfig, guard: &Guard) -> Result<Verdict> {
    check_config(m, cfg, guard)?;
    let consecutive = cfg.variant.consecutive();
    let plain = match cfg.variant {
        StoneVariant::Consecutive => StoneVariant::Extendable,
        StoneVariant::ConsecutivePlain => StoneVariant::Plain,
        v => v,
    };
    if cfg.chain <= 2 {
        let mut v = Verdict::new("nip", (true, None), (true, None), cfg.echo_cutoff());
        v.extra.insert("almost_lifting".into(), true);
        v.extra.insert("almost_oracle".into(), true);
        return Ok(v);
    }
    if cfg.tail_start >= cfg.chain {
        return Err(Error::domain("tail start must lie inside the chain"));
    }
    let lifting = nip_lifting(m, cfg, consecutive, false, guard)?;
    let oracle = nip_oracle(m, cfg, consecutive, false, guard)?;
    let almost = nip_lifting(m, cfg, plain, true, guard)?;
    let almost_oracle = nip_oracle(m, cfg, plain, true, guard)?;
    let mut c = cfg.echo_cutoff();
    c.insert("variant".into(), json!(consecutive.name()));
    c.insert("almost_variant".into(), json!(plain.name()));
    let mut v = Verdict::new("nip", lifting, oracle, c);
    v.extra.insert("almost_lifting".into(), almost.0);
    v.extra.insert("almost_oracle".into(), almost_oracle.0);
    Ok(v)
}

/// Order-property search settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderConfig {
    /// Required length of the ordered sequence.
    pub k: usize,
    pub qdepth: usize,
    pub distinct: usize,
    pub depth: usize,
    pub variant: StoneVariant,
}

impl OrderConfig {
    /// Cutoff depth 1, `N = |M|`, depth 3, plain Stone spaces.
    pub fn for_structure(m: &FinStructure, k: usize) -> OrderConfig {
        OrderConfig { k, qdepth: 1, distinct: m.size(), depth: 3, variant: StoneVariant::Plain }
    }

    fn echo(&self) -> BTreeMap<String, Value> {
        let mut c = BTreeMap::new();
        c.insert("k".into(), json!(self.k));
        c.insert("qdepth".into(), json!(self.qdepth));
        c.insert("distinct".into(), json!(self.distinct));
        c.insert("depth".into(), json!(self.depth));
        c.insert("variant".into(), json!(self.variant.name()));
        c
    }
}

fn order_space(m: &FinStructure, cfg: &OrderConfig, guard: &Guard) -> Result<(Sigma, Situs)> {
    guard.atoms(m.size())?;
    if cfg.k == 0 {
        return Err(Error::domain("k must be positive"));
    }
    let sigma = Sigma::cutoff(m, &[], cfg.qdepth, 2);
    let x = stone_space(m, &sigma, cfg.variant, cfg.distinct, cfg.depth, guard)?;
    Ok((sigma, x))
}

fn map_witness(m: &FinStructure, map: &Morphism, y: &Situs) -> Witness {
    let assignment = map.level(1).iter().enumerate().map(|(a, &v)| (m.name(a as u32).to_string(), y.show(1, v))).collect();
    Witness::Map { assignment }
}

/// A morphism `x → y` whose vertex image contains every vertex in `required`.
fn covering_morphism(x: &Situs, y: &Situs, required: &[usize], guard: &Guard) -> Result<Option<Morphism>> {
    let mut found = None;
    visit_homs(x, y, guard, |h| {
        let image: HashSet<usize> = h.level(1).iter().copied().collect();
        if required.iter().all(|r| image.contains(r)) {
            found = Some(h.clone());
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    Ok(found)
}

/// NOP: no morphism `M_• → ({⋆}⊔k)^≤_•` hits every non-`⋆` value, against the
/// direct search for `a_1..a_k` and a cutoff formula with `φ(a_i,a_j) ⇔ i<j`.
/// The boundedness lifting against the copies omitting one value is in `extra`.
pub fn op(m: &FinStructure, cfg: &OrderConfig, guard: &Guard) -> Result<Verdict> {
    let (sigma, x) = order_space(m, cfg, guard)?;
    let star = star_order(cfg.k, cfg.depth)?;
    let required: Vec<usize> = (1..=cfg.k).collect();
    let surj = covering_morphism(&x, &star, &required, guard)?;
    let lifting = (surj.is_none(), surj.as_ref().map(|h| map_witness(m, h, &star)));
    let oracle = op_oracle(m, &sigma, cfg.k, guard)?;
    let bounded = boundedness_lifting(&x, cfg.k, cfg.depth, guard)?;
    let mut v = Verdict::new("nop", lifting, oracle, cfg.echo());
    v.extra.insert("boundedness_lifting".into(), bounded);
    Ok(v)
}

fn op_oracle(m: &FinStructure, sigma: &Sigma, k: usize, guard: &Guard) -> Result<(bool, Option<Witness>)> {
    guard.candidates(m.size().saturating_pow(k as u32))?;
    let pairs = &sigma.testers[1];
    for s in all_tuples(m.size(), k) {
        let mut below = HashSet::new();
        let mut rest = HashSet::new();
        for i in 0..k {
            for j in 0..k {
                let c = pairs.class(&[s[i], s[j]]);
                if i < j {
                    below.insert(c);
                } else {
                    rest.insert(c);
                }
            }
        }
        if below.is_disjoint(&rest) {
            return Ok((false, Some(Witness::Sequence { elements: names(m, &s) })));
        }
    }
    Ok((true, None))
}

/// `⊥ → M_• ⋔ ⊔ (star omitting one value) → ({⋆}⊔k)^≤_•`.
fn boundedness_lifting(x: &Situs, k: usize, depth: usize, guard: &Guard) -> Result<bool> {
    let pieces = star_omitting(k, depth)?;
    let refs: Vec<&Situs> = pieces.iter().map(|(s, _)| s).collect();
    let sum = coproduct(&refs)?;
    let vmap: Vec<usize> = pieces.iter().flat_map(|(_, keep)| keep.iter().copied()).collect();
    let star = star_order(k, depth)?;
    let bot = initial(depth);
    let i = Arrow::new(&bot, x, Morphism::new(vec![vec![]; depth]))?;
    let p = Arrow::new(&sum, &star, Morphism::from_vertex_map(&sum, &star, &vmap)?)?;
    Ok(lifting_property(&LiftingInstance { i, p }, guard)?.holds)
}

/// All linear preorders on `0..n` as rank vectors (equal rank = equivalent).
pub fn linear_preorders(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for ranks in all_tuples(n.max(1), n) {
        let mut used: Vec<u32> = ranks.clone();
        used.sort_unstable();
        used.dedup();
        if used.iter().enumerate().all(|(i, &r)| i as u32 == r) {
            out.push(ranks.into_iter().map(|r| r as usize).collect());
        }
    }
    if n == 0 {
        out = vec![vec![]];
    }
    out
}

/// `M^{⋚}_•` for a rank vector: large sets contain the monotone tuples.
pub fn monotone_object(labels: Vec<String>, ranks: &[usize], depth: usize) -> Result<Situs> {
    tuple_situs(labels, depth, |_| true, |t| {
        let r: Vec<usize> = t.iter().map(|&v| ranks[v as usize]).collect();
        r.windows(2).all(|w| w[0] <= w[1]) || r.windows(2).all(|w| w[0] >= w[1])
    })
}

/// NSOP surrogate: no linear preorder with ≥ k classes makes the identity
/// `M_• → M^{⋚}_•` continuous. The oracle asks for such a preorder defined by
/// a cutoff formula. The surjection form onto a k-chain is in `extra`.
pub fn nsop(m: &FinStructure, cfg: &OrderConfig, guard: &Guard) -> Result<Verdict> {
    let (sigma, x) = order_space(m, cfg, guard)?;
    let pairs = &sigma.testers[1];
    let mut lifting = (true, None);
    let mut oracle = (true, None);
    for ranks in linear_preorders(m.size()) {
        let classes = ranks.iter().max().map_or(0, |r| r + 1);
        if classes < cfg.k {
            continue;
        }
        let show = |ranks: &[usize]| {
            let assignment = ranks.iter().enumerate().map(|(a, r)| (m.name(a as u32).to_string(), r.to_string())).collect();
            Witness::Map { assignment }
        };
        let y = monotone_object(m.names().to_vec(), &ranks, cfg.depth)?;
        if lifting.0 && identity_map(&x, &y)?.is_continuous(&x, &y) {
            lifting = (false, Some(show(&ranks)));
        }
        if oracle.0 && definable_by(pairs, m.size(), &ranks) {
            oracle = (false, Some(show(&ranks)));
        }
    }
    let labels: Vec<String> = (1..=cfg.k).map(|i| i.to_string()).collect();
    let chain = monotone_object(labels, &(0..cfg.k).collect::<Vec<_>>(), cfg.depth)?;
    let onto = covering_morphism(&x, &chain, &(0..cfg.k).collect::<Vec<_>>(), guard)?;
    let mut v = Verdict::new("nsop", lifting, oracle, cfg.echo());
    v.extra.insert("no_surjection".into(), onto.is_none());
    Ok(v)
}

/// The relation `rank(x) ≤ rank(y)` is a union of pair classes.
fn definable_by(pairs: &Tester, n: usize, ranks: &[usize]) -> bool {
    let mut truth: BTreeMap<u32, bool> = BTreeMap::new();
    for t in all_tuples(n, 2) {
        let v = ranks[t[0] as usize] <= ranks[t[1] as usize];
        if *truth.entry(pairs.class(&t)).or_insert(v) != v {
            return false;
        }
    }
    true
}

/// Non-dividing of `tp(a/Ab)` over `A`.
///
/// Oracle: every sequence of length `len` starting with `b` and indiscernible
/// over `A` (with repetitions, types = orbits) is indiscernible over `Aa′` for
/// some `a′` with the type of `a` over `Ab`. Lifting: the square from
/// `{1}_• → I^≤_•` to `M[+∞]_•/A → M_•/A` with top arrow the class of `(b…b,a)`.
pub fn non_dividing(m: &FinStructure, a_set: &[u32], a: u32, b: u32, len: usize, guard: &Guard) -> Result<Verdict> {
    guard.atoms(m.size())?;
    let n = m.size() as u32;
    if a >= n || b >= n || a_set.iter().any(|&x| x >= n) {
        return Err(Error::domain("elements outside the universe"));
    }
    if len == 0 {
        return Err(Error::domain("sequence length must be positive"));
    }
    let depth = len;
    guard.depth(depth + 1)?;
    let oracle = non_dividing_oracle(m, a_set, a, b, len, guard)?;

    let sigma_a = Sigma::orbits(m, a_set, len, guard)?;
    let x = stone_space(m, &sigma_a, StoneVariant::Plain, 0, depth, guard)?;
    let (base, _) = stone_quotient(&x, m, a_set, guard)?;
    let over = Sigma::orbits(m, a_set, len + 1, guard)?;
    let s = shifted_structure(m, &over, IndiscKind::WithRepetitions, depth, guard)?;
    let (top, proj) = quotient(&s, &orbit_equivalence(&s, m, a_set, guard)?)?;
    let x_classes = orbit_equivalence(&x, m, a_set, guard)?;
    let mut levels = Vec::with_capacity(depth);
    for k in 1..=depth {
        let table = top
            .simplices(k)
            .iter()
            .map(|t| {
                let idx = x.index_of(k, &t[..k]).ok_or_else(|| Error::domain("projection leaves the carrier"))?;
                Ok(x_classes.class(k, idx))
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(table);
    }
    let p_map = Morphism::new(levels);
    let point = order_object(&FinPreorder::chain(1), OrderFlavor::Ordered, OrderFilter::Antidiscrete, depth)?;
    let seq = order_object(&FinPreorder::chain(len), OrderFlavor::Ordered, OrderFilter::Antidiscrete, depth)?;
    let i = Arrow::new(&point, &seq, Morphism::from_vertex_map(&point, &seq, &[0])?)?;
    let p = Arrow::new(&top, &base, p_map)?;
    let mut f_levels = Vec::with_capacity(depth);
    for k in 1..=depth {
        let mut t = vec![b; k];
        t.push(a);
        let idx = s.index_of(k, &t).ok_or_else(|| Error::domain("missing shifted tuple"))?;
        f_levels.push(vec![proj.level(k)[idx]]);
    }
    let f = Morphism::new(f_levels);
    let inst = LiftingInstance { i, p };
    let out = lifts_for_top(&inst, &f, guard)?;
    let lifting = (out.holds, out.witness.as_ref().map(|sq| square_witness(sq, &inst.p)));
    let mut c = BTreeMap::new();
    c.insert("chain".into(), json!(len));
    c.insert("depth".into(), json!(depth));
    c.insert("a".into(), json!(m.name(a)));
    c.insert("b".into(), json!(m.name(b)));
    c.insert("over".into(), json!(names(m, a_set)));
    Ok(Verdict::new("non-dividing", lifting, oracle, c))
}

fn non_dividing_oracle(m: &FinStructure, a_set: &[u32], a: u32, b: u32, len: usize, guard: &Guard) -> Result<(bool, Option<Witness>)> {
    let kind = IndiscKind::WithRepetitions;
    let over_a = Sigma::orbits(m, a_set, len, guard)?;
    let mut ab = a_set.to_vec();
    ab.push(b);
    let tp_ab = type_orbits(m, &ab, 1, guard)?;
    let mut over_candidates = Vec::new();
    for c in 0..m.size() as u32 {
        if tp_ab[c as usize] == tp_ab[a as usize] {
            let mut ac = a_set.to_vec();
            ac.push(c);
            over_candidates.push(Sigma::orbits(m, &ac, len, guard)?);
        }
    }
    for rest in all_tuples(m.size(), len - 1) {
        let mut s = vec![b];
        s.extend(rest);
        if !sigma_indiscernible(&over_a, &s, kind) {
            continue;
        }
        if !over_candidates.iter().any(|sg| sigma_indiscernible(sg, &s, kind)) {
            return Ok((false, Some(Witness::Sequence { elements: names(m, &s) })));
        }
    }
    Ok((true, None))
}

/// Tree-property experiment. The oracle searches parameters on the `(b, d)`
/// tree with `k`-inconsistent sibling families and consistent branches; the
/// lifting checks prefix → prefix∪antichain against the consistency space.
/// `holds` and `oracle_holds` mean "no tree property".
pub fn tree_property(m: &FinStructure, phi: &Formula, b: usize, d: usize, k: usize, guard: &Guard) -> Result<Verdict> {
    guard.atoms(m.size())?;
    let tree = tree_shape(phi, b, d, k, guard)?;
    let oracle = tree_oracle(m, phi, &tree, k, guard)?;
    let objs = tree_objects(&tree, (b, d), k, guard)?;
    let cons = consistency_space(m, phi, k, guard)?;
    let t = terminal(k);
    let i = Arrow::new(&objs.prefix, &objs.union, identity_map(&objs.prefix, &objs.union)?)?;
    let p = Arrow::to_terminal(&cons, &t)?;
    let out = lifting_property(&LiftingInstance { i, p }, guard)?;
    let lifting = (
        out.holds,
        out.witness.as_ref().map(|sq| Witness::Tree { nodes: tree.labels(), parameters: level1_images(&sq.f, &cons) }),
    );
    let mut c = BTreeMap::new();
    c.insert("branching".into(), json!(b));
    c.insert("height".into(), json!(d));
    c.insert("k".into(), json!(k));
    c.insert("formula".into(), json!(phi.to_string()));
    let mut v = Verdict::new("ntp", lifting, oracle, c);
    v.extra.insert("agreement".into(), v.agrees());
    Ok(v)
}

fn tree_shape(phi: &Formula, b: usize, d: usize, k: usize, guard: &Guard) -> Result<FinTree> {
    if phi.arity() < 2 {
        return Err(Error::domain("tree property needs φ(x, y…) with a parameter block"));
    }
    if k == 0 || k > b {
        return Err(Error::domain("k must lie in 1..=b"));
    }
    FinTree::new(b, d, guard)
}

/// The direct tree-property search alone; `true` means no tree property.
pub fn tree_property_oracle(m: &FinStructure, phi: &Formula, b: usize, d: usize, k: usize, guard: &Guard) -> Result<(bool, Option<Witness>)> {
    guard.atoms(m.size())?;
    let tree = tree_shape(phi, b, d, k, guard)?;
    tree_oracle(m, phi, &tree, k, guard)
}

fn tree_oracle(m: &FinStructure, phi: &Formula, tree: &FinTree, k: usize, guard: &Guard) -> Result<(bool, Option<Witness>)> {
    let block = phi.arity() - 1;
    let blocks = all_tuples(m.size(), block);
    guard.candidates(blocks.len().saturating_pow(tree.len() as u32))?;
    let c = compile(m, phi)?;
    // sat[b] = witnesses x with φ(x, b)
    let sat: Vec<Vec<bool>> = blocks
        .iter()
        .map(|bl| {
            (0..m.size() as u32)
                .map(|x| {
                    let mut args = vec![x];
                    args.extend_from_slice(bl);
                    c.eval(m, &args)
                })
                .collect()
        })
        .collect();
    let consistent = |set: &[usize]| (0..m.size()).any(|x| set.iter().all(|&b| sat[b][x]));
    let mut assign = vec![usize::MAX; tree.len()];
    let found = tree_search(tree, 0, k, &blocks, &consistent, &mut assign);
    Ok(match found {
        false => (true, None),
        true => {
            let nodes: Vec<String> = tree.labels();
            let parameters = assign.iter().map(|&i| m.show(&blocks[i])).collect();
            (false, Some(Witness::Tree { nodes, parameters }))
        }
    })
}

/// Assigns nodes in index order, parents before children.
fn tree_search(
    tree: &FinTree,
    node: usize,
    k: usize,
    blocks: &[Vec<u32>],
    consistent: &dyn Fn(&[usize]) -> bool,
    assign: &mut Vec<usize>,
) -> bool {
    if node == tree.len() {
        return true;
    }
    for choice in 0..blocks.len() {
        assign[node] = choice;
        let path: Vec<usize> = (0..=node).filter(|&a| tree.is_prefix(a, node)).map(|a| assign[a]).collect();
        if !consistent(&path) {
            continue;
        }
        let parent = (0..node).rev().find(|&a| tree.is_prefix(a, node) && tree.nodes()[a].len() + 1 == tree.nodes()[node].len());
        let siblings: Vec<usize> = parent
            .map(|p| tree.children(p).into_iter().filter(|&s| s <= node).collect())
            .unwrap_or_default();
        let ok = subsets_containing_last(&siblings, k).iter().all(|sub| {
            let ps: Vec<usize> = sub.iter().map(|&s| assign[s]).collect();
            !consistent(&ps)
        });
        if ok && tree_search(tree, node + 1, k, blocks, consistent, assign) {
            return true;
        }
    }
    assign[node] = usize::MAX;
    false
}

/// `k`-subsets of `items` that contain its last element.
fn subsets_containing_last(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let Some((&last, rest)) = items.split_last() else { return vec![] };
    if k == 0 || k > items.len() {
        return vec![];
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(rest: &[usize], start: usize, need: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == need {
            out.push(cur.clone());
            return;
        }
        for i in start..rest.len() {
            cur.push(rest[i]);
            rec(rest, i + 1, need, cur, out);
            cur.pop();
        }
    }
    rec(rest, 0, k - 1, &mut cur, &mut out);
    for s in &mut out {
        s.push(last);
    }
    out
}

/// Representation modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentMode {
    /// Per formula of `M`, some finite set of quantifier-free formulas of `I` suffices.
    Em,
    /// Quantifier-free indiscernible sequences of `I` map to indiscernible sequences of `M`.
    EmInfinity,
    /// Equal quantifier-free types in `I` imply equal types in `M` (identity carrier map).
    Represents,
}

impl RepresentMode {
    pub fn name(self) -> &'static str {
        match self {
            RepresentMode::Em => "em",
            RepresentMode::EmInfinity => "em-infinity",
            RepresentMode::Represents => "represents",
        }
    }

    pub fn parse(s: &str) -> Result<RepresentMode> {
        [RepresentMode::Em, RepresentMode::EmInfinity, RepresentMode::Represents]
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownName(format!("representation mode {s}")))
    }
}

/// Whether `f: |I| → |M|` represents `M` in `I` in the given mode, checked on
/// sequences of distinct elements (or on all tuples for `Represents`) of length `len`.
/// Types in `M` are depth-`mdepth` types, or orbits when `mdepth` is `None`.
pub fn em_represents(
    i: &FinStructure,
    m: &FinStructure,
    f: &SetMap,
    mode: RepresentMode,
    len: usize,
    mdepth: Option<usize>,
    guard: &Guard,
) -> Result<bool> {
    if f.source() != i.size() || f.target() != m.size() {
        return Err(Error::domain("map does not match the carriers"));
    }
    if mode == RepresentMode::Represents && (i.size() != m.size() || f.table().iter().enumerate().any(|(a, &b)| a != b)) {
        return Err(Error::domain("representation needs equal carriers and the identity map"));
    }
    guard.candidates(i.size().saturating_pow(len as u32))?;
    let mut table = TypeTable::new(i);
    let qf: Vec<Tester> = (1..=len).map(|r| Tester::types(i, &mut table, &[], r, 0)).collect();
    let target = match mdepth {
        Some(q) => {
            let mut mt = TypeTable::new(m);
            Sigma { testers: (1..=len).map(|r| Tester::types(m, &mut mt, &[], r, q)).collect() }
        }
        None => Sigma::orbits(m, &[], len, guard)?,
    };
    let image = |s: &[u32]| -> Vec<u32> { s.iter().map(|&v| f.apply(v as usize) as u32).collect() };
    let kind = IndiscKind::Sequence;
    let seqs: Vec<Vec<u32>> =
        all_tuples(i.size(), len).into_iter().filter(|s| s.iter().collect::<HashSet<_>>().len() == s.len()).collect();
    match mode {
        RepresentMode::EmInfinity => {
            let qf = Sigma { testers: qf };
            Ok(seqs.iter().all(|s| !sigma_indiscernible(&qf, s, kind) || sigma_indiscernible(&target, &image(s), kind)))
        }
        RepresentMode::Em => {
            for upsilon in &target.testers {
                let good = |delta: &Sigma| {
                    seqs.iter().all(|s| {
                        !sigma_indiscernible(delta, s, kind)
                            || crate::indisc::tester_indiscernible(upsilon, &image(s), kind)
                    })
                };
                let found = (0u32..1 << qf.len())
                    .map(|mask| Sigma { testers: (0..qf.len()).filter(|b| mask >> b & 1 == 1).map(|b| qf[b].clone()).collect() })
                    .any(|delta| good(&delta));
                if !found {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        RepresentMode::Represents => {
            for (r, tester) in qf.iter().enumerate() {
                let orbits = &target.testers[r];
                let mut seen: BTreeMap<u32, u32> = BTreeMap::new();
                for t in all_tuples(i.size(), r + 1) {
                    let o = orbits.class(&t);
                    if *seen.entry(tester.class(&t)).or_insert(o) != o {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Unary functions closed under composition, named by words (`fg` is `f∘g`),
/// with `id` first.
pub fn function_closure(i: &FinStructure) -> Vec<(String, Vec<u32>)> {
    let n = i.size();
    let gens: Vec<(String, Vec<u32>)> = i
        .signature()
        .functions
        .iter()
        .enumerate()
        .map(|(k, name)| (name.clone(), i.function_table(k).to_vec()))
        .collect();
    let mut out: Vec<(String, Vec<u32>)> = vec![("id".into(), (0..n as u32).collect())];
    let mut frontier = 0;
    while frontier < out.len() {
        let (wname, w) = out[frontier].clone();
        for (gname, g) in &gens {
            let table: Vec<u32> = w.iter().map(|&x| g[x as usize]).collect();
            if out.iter().all(|(_, t)| *t != table) {
                let name = if wname == "id" { gname.clone() } else { format!("{gname}{wname}") };
                out.push((name, table));
            }
        }
        frontier += 1;
    }
    out
}

/// The reduct with `E_w = {(x,y) : w(x)=w(y)}` and `P_w_v = {x : w(x)=v(x)}`
/// for words `w ≠ v` of the composition closure.
pub fn unary_reduct(i: &FinStructure) -> FinStructure {
    let closure = function_closure(i);
    let mut r = FinStructure::new(i.names().to_vec()).expect("names already unique");
    for (name, t) in &closure {
        let tuples: Vec<Vec<u32>> = all_tuples(i.size(), 2).into_iter().filter(|p| t[p[0] as usize] == t[p[1] as usize]).collect();
        r.add_relation(&format!("E_{name}"), 2, &tuples).expect("fresh relation name");
    }
    for a in 0..closure.len() {
        for b in a + 1..closure.len() {
            let (ta, tb) = (&closure[a].1, &closure[b].1);
            let tuples: Vec<Vec<u32>> = (0..i.size() as u32).filter(|&x| ta[x as usize] == tb[x as usize]).map(|x| vec![x]).collect();
            r.add_relation(&format!("P_{}_{}", closure[a].0, closure[b].0), 1, &tuples).expect("fresh relation name");
        }
    }
    r
}

/// Every coordinate permutation of every level is a continuous self-map.
/// Situses without vertex tuples are reported as not symmetric.
pub fn is_symmetric(x: &Situs) -> bool {
    if x.vertices().is_none() {
        return false;
    }
    for n in 1..=x.depth() {
        for perm in permutations(n) {
            let mut table = Vec::with_capacity(x.size(n));
            for t in x.simplices(n) {
                let moved: Vec<u32> = perm.iter().map(|&p| t[p]).collect();
                match x.index_of(n, &moved) {
                    Some(j) => table.push(j),
                    None => return false,
                }
            }
            if !continuous_unchecked(&table, x.filter(n), x.filter(n)) {
                return false;
            }
        }
    }
    true
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    all_tuples(n, n)
        .into_iter()
        .filter(|t| t.iter().collect::<HashSet<_>>().len() == n)
        .map(|t| t.into_iter().map(|v| v as usize).collect())
        .collect()
}

/// Each level `n > 3` carries the coarsest filter making every face into level 3 continuous.
pub fn is_two_dimensional(x: &Situs) -> bool {
    for n in 4..=x.depth() {
        let maps: Vec<(SetMap, crate::filters::Filter)> =
            weakly_increasing_lists(3, n).iter().map(|l| (x.face_map(n, l), x.filter(3).clone())).collect();
        match coarsest_filter(x.size(n), &maps) {
            Ok(f) if f.same_as(x.filter(n)) => {}
            _ => return false,
        }
    }
    true
}
