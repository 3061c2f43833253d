//! Named situses: Stone spaces of structures, order and tails objects,
//! star and monotone-piece orders, consistency spaces, tree objects and
//! shifted structures.

use crate::error::{Error, Guard, Result};
use crate::filters::{self, Filter};
use crate::fostruct::{compile, type_orbits, FinStructure, Formula};
use crate::indisc::{extendable_by, indiscernible_by, sigma_indiscernible, IndiscKind, Sigma};
use crate::simplex::{
    all_tuples, corepresented_by_preorder, quotient, set_corepresented, shift, tuple_situs, FinPreorder,
    LevelEquivalence, Level, Morphism, Situs, Tuple,
};
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StoneVariant {
    /// Tuples extendable to Σ-indiscernible sequences with repetitions and ≥ N values.
    Extendable,
    /// Tuples that are Σ-indiscernible with repetitions.
    Plain,
    /// As `Extendable`, with consecutive repetitions.
    Consecutive,
    /// As `Plain`, with consecutive repetitions.
    ConsecutivePlain,
}

impl StoneVariant {
    pub fn kind(self) -> IndiscKind {
        match self {
            StoneVariant::Extendable | StoneVariant::Plain => IndiscKind::WithRepetitions,
            StoneVariant::Consecutive | StoneVariant::ConsecutivePlain => IndiscKind::ConsecutiveRepetitions,
        }
    }

    pub fn is_extendable(self) -> bool {
        matches!(self, StoneVariant::Extendable | StoneVariant::Consecutive)
    }

    /// The consecutive counterpart.
    pub fn consecutive(self) -> StoneVariant {
        match self {
            StoneVariant::Extendable | StoneVariant::Consecutive => StoneVariant::Consecutive,
            StoneVariant::Plain | StoneVariant::ConsecutivePlain => StoneVariant::ConsecutivePlain,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StoneVariant::Extendable => "extendable",
            StoneVariant::Plain => "plain",
            StoneVariant::Consecutive => "consecutive",
            StoneVariant::ConsecutivePlain => "consecutive-plain",
        }
    }

    pub fn parse(s: &str) -> Result<StoneVariant> {
        [StoneVariant::Extendable, StoneVariant::Plain, StoneVariant::Consecutive, StoneVariant::ConsecutivePlain]
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownName(format!("stone variant {s}")))
    }
}

impl fmt::Display for StoneVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether a tuple lies in the least neighbourhood of the Stone space.
pub fn stone_member(
    sigma: &Sigma,
    universe: usize,
    variant: StoneVariant,
    n_distinct: usize,
    t: &[u32],
    guard: &Guard,
) -> Result<bool> {
    if sigma.is_empty() {
        return Ok(true);
    }
    if variant.is_extendable() {
        extendable_by(sigma, universe, t, n_distinct, variant.kind(), guard)
    } else {
        Ok(sigma_indiscernible(sigma, t, variant.kind()))
    }
}

/// `M_•^Σ`: all tuples of `M`, large sets containing the sufficiently indiscernible ones.
pub fn stone_space(
    m: &FinStructure,
    sigma: &Sigma,
    variant: StoneVariant,
    n_distinct: usize,
    depth: usize,
    guard: &Guard,
) -> Result<Situs> {
    guard.depth(depth)?;
    guard.carrier(m.size().saturating_pow(depth as u32))?;
    let mut cores: HashMap<Tuple, bool> = HashMap::new();
    for n in 1..=depth {
        for t in all_tuples(m.size(), n) {
            let ok = stone_member(sigma, m.size(), variant, n_distinct, &t, guard)?;
            cores.insert(t, ok);
        }
    }
    tuple_situs(m.names().to_vec(), depth, |_| true, |t| cores[t])
}

/// `M_•/A`: the Stone space modulo `Aut(M/A)` orbits.
pub fn stone_quotient(x: &Situs, m: &FinStructure, a: &[u32], guard: &Guard) -> Result<(Situs, Morphism)> {
    let e = orbit_equivalence(x, m, a, guard)?;
    quotient(x, &e)
}

/// Orbit classes of `Aut(M/A)` on the tuples of a tuple situs over `M`
/// (shifted situses use their full `n+1`-tuples).
pub fn orbit_equivalence(x: &Situs, m: &FinStructure, a: &[u32], guard: &Guard) -> Result<LevelEquivalence> {
    let mut classes = Vec::with_capacity(x.depth());
    for n in 1..=x.depth() {
        let width = x.simplices(n).first().map_or(n, |t| t.len());
        let orbits = type_orbits(m, a, width, guard)?;
        classes.push(
            x.simplices(n).iter().map(|t| orbits[crate::fostruct::tuple_code(m.size(), t)]).collect::<Vec<_>>(),
        );
    }
    Ok(LevelEquivalence::new(classes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderFlavor {
    /// `I^≤_•`: weakly increasing tuples.
    Ordered,
    /// `|I|_•`: all tuples.
    SetFlavor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderFilter {
    Antidiscrete,
    /// Final segments starting at the given rank; every tuple inside is large.
    Tails(usize),
}

fn ranks(i: &FinPreorder) -> Result<Vec<usize>> {
    if !i.is_linear() {
        return Err(Error::domain("order objects need a linear order"));
    }
    Ok((0..i.len()).map(|a| (0..i.len()).filter(|&b| b != a && i.leq(b, a)).count()).collect())
}

/// Order objects over a linear order, with the antidiscrete or a tails filter.
pub fn order_object(i: &FinPreorder, flavor: OrderFlavor, filter: OrderFilter, depth: usize) -> Result<Situs> {
    let rank = ranks(i)?;
    let keep = |t: &[u32]| flavor == OrderFlavor::SetFlavor || i.is_chain_tuple(t);
    let core = |t: &[u32]| match filter {
        OrderFilter::Antidiscrete => true,
        OrderFilter::Tails(start) => t.iter().all(|&v| rank[v as usize] >= start),
    };
    tuple_situs(i.labels().to_vec(), depth, keep, core)
}

/// `({⋆}⊔k)^≤_•`: vertex 0 is `⋆`; non-`⋆` entries must be weakly increasing.
pub fn star_order(k: usize, depth: usize) -> Result<Situs> {
    if k == 0 {
        return Err(Error::domain("star order needs k ≥ 1"));
    }
    let labels = std::iter::once("*".to_string()).chain((1..=k).map(|i| i.to_string())).collect();
    tuple_situs(labels, depth, |_| true, |t| {
        let rest: Vec<u32> = t.iter().copied().filter(|&v| v != 0).collect();
        rest.windows(2).all(|w| w[0] <= w[1])
    })
}

/// `k` copies of `star_order` each missing one value, as a list of situses with vertex maps into `star_order(k)`.
pub fn star_omitting(k: usize, depth: usize) -> Result<Vec<(Situs, Vec<usize>)>> {
    let mut out = Vec::new();
    for skip in 1..=k {
        let keep: Vec<usize> = (0..=k).filter(|&v| v != skip).collect();
        let labels = keep.iter().map(|&v| if v == 0 { "*".to_string() } else { v.to_string() }).collect();
        let s = tuple_situs(labels, depth, |_| true, |t| {
            let rest: Vec<usize> = t.iter().map(|&v| keep[v as usize]).filter(|&v| v != 0).collect();
            rest.windows(2).all(|w| w[0] <= w[1])
        })?;
        out.push((s, keep));
    }
    Ok(out)
}

fn is_monotone(v: &[u32]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1]) || v.windows(2).all(|w| w[0] >= w[1])
}

/// Whether `t` splits into at most `pieces` monotone subsequences.
pub fn splits_into_monotone(t: &[u32], pieces: usize) -> bool {
    fn rec(t: &[u32], i: usize, parts: &mut Vec<Vec<u32>>, pieces: usize) -> bool {
        if i == t.len() {
            return true;
        }
        for p in 0..parts.len() {
            parts[p].push(t[i]);
            if is_monotone(&parts[p]) && rec(t, i + 1, parts, pieces) {
                return true;
            }
            parts[p].pop();
        }
        if parts.len() < pieces {
            parts.push(vec![t[i]]);
            if rec(t, i + 1, parts, pieces) {
                return true;
            }
            parts.pop();
        }
        false
    }
    rec(t, 0, &mut Vec::new(), pieces)
}

/// `I^{≤_n}_•`: all tuples; large sets contain those splitting into ≤ n monotone pieces.
pub fn monotone_pieces_order(i: &FinPreorder, pieces: usize, depth: usize) -> Result<Situs> {
    if pieces == 0 {
        return Err(Error::domain("need at least one monotone piece"));
    }
    let rank = ranks(i)?;
    tuple_situs(i.labels().to_vec(), depth, |_| true, |t| {
        let r: Vec<u32> = t.iter().map(|&v| rank[v as usize] as u32).collect();
        splits_into_monotone(&r, pieces)
    })
}

/// `α^>_•`: a chain of length `alpha`; large sets contain the weakly decreasing tuples.
pub fn decreasing_order(alpha: usize, depth: usize) -> Result<Situs> {
    let labels = (0..alpha).map(|i| i.to_string()).collect();
    tuple_situs(labels, depth, |_| true, |t| t.windows(2).all(|w| w[0] >= w[1]))
}

/// `M_•^{∃xφ(x,−)}`: tuples of parameter blocks with a common witness.
///
/// The first free variable of `phi` is the object variable; the rest form the block.
pub fn consistency_space(m: &FinStructure, phi: &Formula, depth: usize, guard: &Guard) -> Result<Situs> {
    if phi.arity() < 2 {
        return Err(Error::domain("consistency space needs φ(x, y…) with at least one parameter variable"));
    }
    let block = phi.arity() - 1;
    let blocks = all_tuples(m.size(), block);
    guard.carrier(blocks.len().saturating_pow(depth as u32))?;
    let c = compile(m, phi)?;
    // sat[x][b] = M ⊨ φ(x, b)
    let sat: Vec<Vec<bool>> = (0..m.size() as u32)
        .map(|x| {
            blocks
                .iter()
                .map(|b| {
                    let mut args = vec![x];
                    args.extend_from_slice(b);
                    c.eval(m, &args)
                })
                .collect()
        })
        .collect();
    let labels = blocks.iter().map(|b| if block == 1 { m.name(b[0]).to_string() } else { m.show(b) }).collect();
    tuple_situs(labels, depth, |_| true, |t| sat.iter().any(|row| t.iter().all(|&b| row[b as usize])))
}

/// The full tree of sequences over `1..=b` of length ≤ `d`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinTree {
    pub branching: usize,
    pub depth: usize,
    nodes: Vec<Vec<u32>>,
}

impl FinTree {
    pub fn new(branching: usize, depth: usize, guard: &Guard) -> Result<Self> {
        if branching == 0 {
            return Err(Error::domain("branching must be positive"));
        }
        let count: usize = (0..=depth).map(|l| branching.saturating_pow(l as u32)).fold(0, usize::saturating_add);
        guard.carrier(count)?;
        let mut nodes = Vec::with_capacity(count);
        fn rec(cur: &mut Vec<u32>, b: usize, d: usize, out: &mut Vec<Vec<u32>>) {
            out.push(cur.clone());
            if cur.len() < d {
                for i in 1..=b as u32 {
                    cur.push(i);
                    rec(cur, b, d, out);
                    cur.pop();
                }
            }
        }
        rec(&mut Vec::new(), branching, depth, &mut nodes);
        Ok(FinTree { branching, depth, nodes })
    }

    pub fn nodes(&self) -> &[Vec<u32>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index(&self, s: &[u32]) -> Option<usize> {
        self.nodes.iter().position(|n| n == s)
    }

    pub fn is_prefix(&self, a: usize, b: usize) -> bool {
        self.nodes[b].starts_with(&self.nodes[a])
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.is_prefix(a, b) || self.is_prefix(b, a)
    }

    pub fn children(&self, a: usize) -> Vec<usize> {
        (1..=self.branching as u32)
            .filter_map(|i| {
                let mut c = self.nodes[a].clone();
                c.push(i);
                self.index(&c)
            })
            .collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.nodes
            .iter()
            .map(|s| if s.is_empty() { "ε".into() } else { s.iter().map(|i| i.to_string()).collect() })
            .collect()
    }

    pub fn prefix_order(&self) -> FinPreorder {
        let n = self.len();
        let leq = (0..n).map(|a| (0..n).map(|b| self.is_prefix(a, b)).collect()).collect();
        FinPreorder::new(self.labels(), leq).expect("prefix order is transitive")
    }

    /// Lexicographic order coincides with node index order.
    pub fn lex_order(&self) -> FinPreorder {
        let n = self.len();
        let leq = (0..n).map(|a| (0..n).map(|b| a <= b).collect()).collect();
        FinPreorder::new(self.labels(), leq).expect("lex order is transitive")
    }

    /// Lex weakly increasing tuples whose distinct entries are pairwise incomparable.
    pub fn is_antichain_tuple(&self, t: &[u32]) -> bool {
        t.windows(2).all(|w| w[0] <= w[1])
            && (0..t.len()).all(|a| (a + 1..t.len()).all(|b| t[a] == t[b] || !self.comparable(t[a] as usize, t[b] as usize)))
    }

    /// Strong embeddings of the full `(b, d)` tree: children go to pairwise
    /// incomparable extensions in distinct child branches, in lex order.
    pub fn embeddings(&self, b: usize, d: usize, guard: &Guard) -> Result<Vec<Vec<usize>>> {
        let pattern = FinTree::new(b, d, guard)?;
        let mut out = Vec::new();
        for root in 0..self.len() {
            let mut img = vec![usize::MAX; pattern.len()];
            img[0] = root;
            self.embed_rec(&pattern, &mut img, 0, &mut out, guard)?;
        }
        Ok(out)
    }

    fn embed_rec(&self, pattern: &FinTree, img: &mut Vec<usize>, next: usize, out: &mut Vec<Vec<usize>>, guard: &Guard) -> Result<()> {
        // pattern nodes in index order: parents and earlier siblings come first
        let p = next + 1;
        if p == pattern.len() {
            out.push(img.clone());
            guard.candidates(out.len())?;
            return Ok(());
        }
        let mut parent_pat = pattern.nodes[p].clone();
        let last = parent_pat.pop().expect("non-root");
        let parent = pattern.index(&parent_pat).expect("parent present");
        let host_parent = img[parent];
        let depth_parent = self.nodes[host_parent].len();
        for cand in 0..self.len() {
            let c = &self.nodes[cand];
            if c.len() <= depth_parent || !c.starts_with(&self.nodes[host_parent]) {
                continue;
            }
            // distinct child branch from earlier siblings, placed after them
            let branch = c[depth_parent];
            let ok = (1..last).all(|sib| {
                let mut s = parent_pat.clone();
                s.push(sib);
                let hs = &self.nodes[img[pattern.index(&s).expect("sibling")]];
                hs[depth_parent] < branch
            });
            if ok {
                img[p] = cand;
                self.embed_rec(pattern, img, p, out, guard)?;
                img[p] = usize::MAX;
            }
        }
        Ok(())
    }
}

/// Prefix, lex and prefix∪antichain situses over a tree.
pub struct TreeObjects {
    pub tree: FinTree,
    pub prefix: Situs,
    pub lex: Situs,
    pub antichain: Situs,
    /// Prefix chains together with antichain tuples, as one carrier per level.
    pub union: Situs,
}

/// Tree objects; the antichain and union filters ask every embedded copy of
/// the full `(b, d)` pattern to contribute a tuple of distinct siblings of the copy.
pub fn tree_objects(tree: &FinTree, pattern: (usize, usize), depth: usize, guard: &Guard) -> Result<TreeObjects> {
    let prefix = corepresented_by_preorder(&tree.prefix_order(), depth, None)?;
    let lex = corepresented_by_preorder(&tree.lex_order(), depth, None)?;
    let copies = tree.embeddings(pattern.0, pattern.1, guard)?;
    let pat = FinTree::new(pattern.0, pattern.1, guard)?;
    let po = tree.prefix_order();
    let build = |with_chains: bool| -> Result<Situs> {
        let mut levels = Vec::with_capacity(depth);
        for n in 1..=depth {
            let simplices: Vec<Tuple> = all_tuples(tree.len(), n)
                .into_iter()
                .filter(|t| tree.is_antichain_tuple(t) || (with_chains && po.is_chain_tuple(t)))
                .collect();
            let required = if with_chains {
                filters::subset(simplices.len(), (0..simplices.len()).filter(|&i| po.is_chain_tuple(&simplices[i])))
            } else {
                filters::subset(simplices.len(), [])
            };
            let mut families = Vec::new();
            for copy in &copies {
                let sibling_sets: Vec<Vec<usize>> =
                    (0..pat.len()).map(|p| pat.children(p).iter().map(|&c| copy[c]).collect()).collect();
                let family = filters::subset(
                    simplices.len(),
                    (0..simplices.len()).filter(|&i| {
                        let t = &simplices[i];
                        tree.is_antichain_tuple(t)
                            && t.windows(2).all(|w| w[0] != w[1])
                            && sibling_sets.iter().any(|sib| t.iter().all(|v| sib.contains(&(*v as usize))))
                    }),
                );
                if family.count_ones(..) > 0 {
                    families.push(family);
                }
            }
            let f = Filter::hitting(simplices.len(), required, families)?;
            levels.push(Level::new(simplices, f)?);
        }
        Situs::from_tuples(tree.len(), tree.labels(), levels)
    };
    Ok(TreeObjects { tree: tree.clone(), prefix, lex, antichain: build(false)?, union: build(true)? })
}

/// `M[+∞]_•`: level `n` holds `(x_1..x_n, p)`; large sets contain the tuples
/// whose first `n` entries are Σ-indiscernible over the last one.
///
/// Testers of arity `r+1` read their last coordinate as the parameter slot.
pub fn shifted_structure(
    m: &FinStructure,
    sigma_over_param: &Sigma,
    kind: IndiscKind,
    depth: usize,
    guard: &Guard,
) -> Result<Situs> {
    guard.depth(depth + 1)?;
    let base = set_corepresented(m.names().to_vec(), depth + 1)?;
    let s = shift(&base)?;
    let mut fs = Vec::with_capacity(depth);
    for n in 1..=depth {
        let simplices = s.simplices(n);
        let core = filters::subset(
            simplices.len(),
            (0..simplices.len()).filter(|&i| {
                let t = &simplices[i];
                let (seq, p) = t.split_at(n);
                sigma_over_param.testers.iter().all(|tester| {
                    tester.arity < 2
                        || indiscernible_by(
                            |y: &[u32]| {
                                let mut a = y.to_vec();
                                a.push(p[0]);
                                tester.class(&a)
                            },
                            tester.arity - 1,
                            seq,
                            kind,
                        )
                })
            }),
        );
        fs.push(Filter::principal(simplices.len(), core)?);
    }
    s.with_filters(fs)
}

/// The projection `M[+∞]_• → M_•` dropping the parameter slot, level by level.
pub fn drop_last(shifted: &Situs, target: &Situs) -> Result<Morphism> {
    let mut levels = Vec::with_capacity(shifted.depth());
    for n in 1..=shifted.depth() {
        let table = shifted
            .simplices(n)
            .iter()
            .map(|t| {
                target
                    .index_of(n, &t[..n])
                    .ok_or_else(|| Error::domain("projection leaves the target carrier"))
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(table);
    }
    Ok(Morphism::new(levels))
}
