//! Finite metric and topological spaces as situses: ε-neighbourhoods of the
//! diagonal, covering filters, uniformity axioms, and the completeness and
//! compactness lifting checks.

use crate::dividing_lines::{Verdict, Witness};
use crate::error::{Error, Guard, Result};
use crate::filters::{coarsest_filter, elements, full, subset, Filter, SetMap, Subset};
use crate::homlift::{exists_surjection, lifting_property, Arrow, LiftingInstance};
use crate::simplex::{
    all_tuples, coproduct, initial, shift_nat, tuple_situs, FinPreorder, Level, Morphism, Situs, Tuple,
};
use crate::stone::{decreasing_order, order_object, OrderFilter, OrderFlavor};
use num_rational::Rational64;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;

/// A finite pseudometric with rational distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinMetric {
    labels: Vec<String>,
    dist: Vec<Vec<Rational64>>,
}

impl FinMetric {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rational64>>) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::domain("distance table must be square over the points"));
        }
        let zero = Rational64::from_integer(0);
        for x in 0..n {
            if dist[x][x] != zero {
                return Err(Error::domain(format!("dist({0},{0}) is not 0", labels[x])));
            }
            for y in 0..n {
                if dist[x][y] < zero || dist[x][y] != dist[y][x] {
                    return Err(Error::domain(format!("dist({},{}) is negative or asymmetric", labels[x], labels[y])));
                }
                for z in 0..n {
                    if dist[x][z] > dist[x][y] + dist[y][z] {
                        return Err(Error::domain(format!(
                            "triangle inequality fails at {}, {}, {}",
                            labels[x], labels[y], labels[z]
                        )));
                    }
                }
            }
        }
        Ok(FinMetric { labels, dist })
    }

    /// Integer distances given as an upper-triangular list of rows.
    pub fn from_integers(labels: Vec<String>, dist: &[Vec<i64>]) -> Result<Self> {
        let table = dist.iter().map(|r| r.iter().map(|&d| Rational64::from_integer(d)).collect()).collect();
        FinMetric::new(labels, table)
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

    pub fn dist(&self, x: usize, y: usize) -> Rational64 {
        self.dist[x][y]
    }

    /// Largest distance between two points of `t`.
    pub fn diameter_of(&self, t: &[u32]) -> Rational64 {
        let mut d = Rational64::from_integer(0);
        for &a in t {
            for &b in t {
                d = d.max(self.dist[a as usize][b as usize]);
            }
        }
        d
    }

    /// The realized positive distances in increasing order, then one value above the diameter.
    pub fn thresholds(&self) -> Vec<Rational64> {
        let mut ds: Vec<Rational64> =
            self.dist.iter().flatten().copied().filter(|d| *d > Rational64::from_integer(0)).collect();
        ds.sort();
        ds.dedup();
        let top = ds.last().copied().unwrap_or_default() + Rational64::from_integer(1);
        ds.push(top);
        ds
    }
}

/// Every metric on `n` points named `a, b, …` whose off-diagonal distances lie in `values`.
pub fn all_metrics(n: usize, values: &[i64]) -> Vec<FinMetric> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let labels: Vec<String> = (0..n).map(crate::fostruct::default_name).collect();
    let mut out = Vec::new();
    for choice in all_tuples(values.len(), pairs.len()) {
        let mut table = vec![vec![0i64; n]; n];
        for (&(a, b), &c) in pairs.iter().zip(&choice) {
            table[a][b] = values[c as usize];
            table[b][a] = values[c as usize];
        }
        if let Ok(m) = FinMetric::from_integers(labels.clone(), &table) {
            out.push(m);
        }
    }
    out
}

/// The tuples of level `n` (in `all_tuples` order) of diameter below each threshold.
pub fn metric_base(m: &FinMetric, n: usize) -> Vec<Subset> {
    let tuples = all_tuples(m.len(), n);
    m.thresholds()
        .into_iter()
        .map(|eps| subset(tuples.len(), (0..tuples.len()).filter(|&i| m.diameter_of(&tuples[i]) < eps)))
        .collect()
}

/// `M_•`: all tuples; large sets contain every tuple of diameter below some threshold.
pub fn metric_situs(m: &FinMetric, depth: usize, guard: &Guard) -> Result<Situs> {
    guard.depth(depth)?;
    guard.carrier(m.len().saturating_pow(depth as u32))?;
    let zero = Rational64::from_integer(0);
    tuple_situs(m.labels.clone(), depth, |_| true, |t| m.diameter_of(t) == zero)
}

/// The discrete diagonal: large sets contain the constant tuples.
pub fn diagonal_situs(labels: Vec<String>, depth: usize) -> Result<Situs> {
    tuple_situs(labels, depth, |_| true, |t| t.windows(2).all(|w| w[0] == w[1]))
}

/// Uniformity axioms of a filter on `X × X`, pairs indexed as `x * |X| + y`.
#[derive(Clone, Debug, Serialize)]
pub struct UniformityReport {
    /// Every neighbourhood contains the diagonal.
    pub reflexive: bool,
    /// The inverse of a neighbourhood is a neighbourhood.
    pub symmetric: bool,
    /// Each neighbourhood `V` contains `W∘W` for some neighbourhood `W`.
    pub composable: bool,
    /// Minimal large sets of the coarsest filter on `X³` making both consecutive pair maps continuous.
    pub level3: Vec<Vec<Vec<u32>>>,
}

impl UniformityReport {
    pub fn holds(&self) -> bool {
        self.reflexive && self.symmetric && self.composable
    }
}

/// Checks the uniformity axioms on the minimal neighbourhoods of `u`.
pub fn uniformity_axioms(points: usize, u: &Filter) -> Result<UniformityReport> {
    if u.size() != points * points {
        return Err(Error::domain(format!("filter carrier {} is not the square of {points}", u.size())));
    }
    let minimal = u.minimal_neighborhoods();
    let idx = |x: usize, y: usize| x * points + y;
    let reflexive = minimal.iter().all(|v| (0..points).all(|x| v.contains(idx(x, x))));
    let symmetric = minimal.iter().all(|v| {
        let inv = subset(points * points, v.ones().map(|p| idx(p % points, p / points)));
        u.contains(&inv)
    });
    let compose = |w: &Subset| -> Subset {
        let mut out = subset(points * points, []);
        for p in w.ones() {
            for q in w.ones() {
                if p % points == q / points {
                    out.insert(idx(p / points, q % points));
                }
            }
        }
        out
    };
    let composable = minimal.iter().all(|v| minimal.iter().any(|w| compose(w).is_subset(v)));
    let triples = all_tuples(points, 3);
    let maps: Vec<(SetMap, Filter)> = [(0usize, 1usize), (1, 2)]
        .into_iter()
        .map(|(i, j)| {
            let table = triples.iter().map(|t| idx(t[i] as usize, t[j] as usize)).collect();
            Ok((SetMap::new(triples.len(), points * points, table)?, u.clone()))
        })
        .collect::<Result<_>>()?;
    let level3 = coarsest_filter(triples.len(), &maps)?
        .minimal_neighborhoods()
        .iter()
        .map(|s| elements(s).into_iter().map(|i| triples[i].clone()).collect())
        .collect();
    Ok(UniformityReport { reflexive, symmetric, composable, level3 })
}

/// A finite topology given by its open sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinTopology {
    labels: Vec<String>,
    opens: Vec<Subset>,
}

impl FinTopology {
    /// Fails unless `opens` contains ∅ and the whole set and is closed under ∪ and ∩.
    pub fn new(labels: Vec<String>, opens: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if opens.iter().flatten().any(|&x| x >= n) {
            return Err(Error::domain("open set contains a point outside the space"));
        }
        let mut sets: Vec<Subset> = opens.into_iter().map(|o| subset(n, o)).collect();
        sets.sort_by_key(elements);
        sets.dedup();
        if !sets.contains(&subset(n, [])) || !sets.contains(&full(n)) {
            return Err(Error::domain("opens must contain the empty set and the whole space"));
        }
        for a in &sets {
            for b in &sets {
                let mut u = a.clone();
                u.union_with(b);
                let mut i = a.clone();
                i.intersect_with(b);
                if !sets.contains(&u) || !sets.contains(&i) {
                    return Err(Error::domain(format!(
                        "opens {:?} and {:?} are not closed under union and intersection",
                        elements(a),
                        elements(b)
                    )));
                }
            }
        }
        Ok(FinTopology { labels, opens: sets })
    }

    pub fn discrete(labels: Vec<String>) -> Self {
        let n = labels.len();
        let opens = (0u64..1 << n).map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect()).collect();
        FinTopology::new(labels, opens).expect("power set is a topology")
    }

    pub fn antidiscrete(labels: Vec<String>) -> Self {
        let n = labels.len();
        FinTopology::new(labels, vec![vec![], (0..n).collect()]).expect("trivial topology")
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

    pub fn opens(&self) -> &[Subset] {
        &self.opens
    }

    /// The least open set containing `x`.
    pub fn minimal_open(&self, x: usize) -> Subset {
        let mut m = full(self.len());
        for o in self.opens.iter().filter(|o| o.contains(x)) {
            m.intersect_with(o);
        }
        m
    }

    /// No open set other than ∅ and the whole space is also closed.
    pub fn is_connected(&self) -> bool {
        let n = self.len();
        self.opens.iter().all(|o| {
            let c = o.count_ones(..);
            if c == 0 || c == n {
                return true;
            }
            let mut comp = full(n);
            comp.difference_with(o);
            !self.opens.contains(&comp)
        })
    }

    /// Preimages of open sets of `target` are open.
    pub fn is_continuous_map(&self, f: &SetMap, target: &FinTopology) -> Result<bool> {
        if f.source() != self.len() || f.target() != target.len() {
            return Err(Error::domain("map does not match the spaces"));
        }
        Ok(target.opens.iter().all(|o| self.opens.contains(&f.preimage(o))))
    }
}

/// Every topology on `n` points named `a, b, …`.
pub fn all_topologies(n: usize) -> Vec<FinTopology> {
    let labels: Vec<String> = (0..n).map(crate::fostruct::default_name).collect();
    let subsets: Vec<Vec<usize>> = (0u64..1 << n).map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect()).collect();
    let middle: Vec<&Vec<usize>> = subsets.iter().filter(|s| !s.is_empty() && s.len() < n).collect();
    let mut out = Vec::new();
    for mask in 0u64..1 << middle.len() {
        let mut opens: Vec<Vec<usize>> = vec![vec![], (0..n).collect()];
        opens.extend((0..middle.len()).filter(|&i| mask >> i & 1 == 1).map(|i| middle[i].clone()));
        if let Ok(t) = FinTopology::new(labels.clone(), opens) {
            out.push(t);
        }
    }
    out
}

/// The covering situs: level 1 antidiscrete; level 2 generated by the sets
/// `⋃ₓ {x}×Uₓ` with `Uₓ` a neighbourhood of `x`; higher levels carry the
/// coarsest filter making every consecutive pair map continuous.
pub fn covering_situs(t: &FinTopology, depth: usize, guard: &Guard) -> Result<Situs> {
    guard.depth(depth)?;
    guard.carrier(t.len().saturating_pow(depth as u32))?;
    let n = t.len();
    let pairs = all_tuples(n, 2);
    let minimal: Vec<Subset> = (0..n).map(|x| t.minimal_open(x)).collect();
    let pair_filter =
        Filter::principal(pairs.len(), subset(pairs.len(), (0..pairs.len()).filter(|&i| minimal[pairs[i][0] as usize].contains(pairs[i][1] as usize))))?;
    let mut levels = Vec::with_capacity(depth);
    for k in 1..=depth {
        let tuples: Vec<Tuple> = all_tuples(n, k);
        let filter = match k {
            1 => Filter::antidiscrete(tuples.len()),
            2 => pair_filter.clone(),
            _ => {
                let maps: Vec<(SetMap, Filter)> = (0..k - 1)
                    .map(|i| {
                        let table = tuples.iter().map(|s| s[i] as usize * n + s[i + 1] as usize).collect();
                        Ok((SetMap::new(tuples.len(), pairs.len(), table)?, pair_filter.clone()))
                    })
                    .collect::<Result<_>>()?;
                coarsest_filter(tuples.len(), &maps)?
            }
        };
        levels.push(Level::new(tuples, filter)?);
    }
    Situs::from_tuples(n, t.labels.clone(), levels)
}

/// The level-2 base computed literally: intersect `⋃ₓ {x}×Uₓ` over every
/// assignment of an open neighbourhood `Uₓ ∋ x` to each point.
pub fn covering_base_exhaustive(t: &FinTopology, guard: &Guard) -> Result<Subset> {
    let n = t.len();
    guard.check("points", n, 4)?;
    let nbhds: Vec<Vec<&Subset>> = (0..n).map(|x| t.opens.iter().filter(|o| o.contains(x)).collect()).collect();
    let mut core = full(n * n);
    let counts: Vec<usize> = nbhds.iter().map(|v| v.len()).collect();
    let mut choice = vec![0usize; n];
    loop {
        let cover = subset(n * n, (0..n).flat_map(|x| nbhds[x][choice[x]].ones().map(move |y| x * n + y)).collect::<Vec<_>>());
        core.intersect_with(&cover);
        let mut i = 0;
        loop {
            if i == n {
                return Ok(core);
            }
            choice[i] += 1;
            if choice[i] < counts[i] {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Whether every level map induced by `f` between the metric situses is continuous.
pub fn is_morphism_uniform(f: &SetMap, m1: &FinMetric, m2: &FinMetric, depth: usize, guard: &Guard) -> Result<bool> {
    if f.source() != m1.len() || f.target() != m2.len() {
        return Err(Error::domain("map does not match the metric spaces"));
    }
    let x = metric_situs(m1, depth, guard)?;
    let y = metric_situs(m2, depth, guard)?;
    Ok(Morphism::from_vertex_map(&x, &y, f.table())?.is_continuous(&x, &y))
}

/// Whether the level maps induced by `f` between covering situses are continuous.
pub fn is_morphism_covering(f: &SetMap, t1: &FinTopology, t2: &FinTopology, depth: usize, guard: &Guard) -> Result<bool> {
    if f.source() != t1.len() || f.target() != t2.len() {
        return Err(Error::domain("map does not match the spaces"));
    }
    let x = covering_situs(t1, depth, guard)?;
    let y = covering_situs(t2, depth, guard)?;
    Ok(Morphism::from_vertex_map(&x, &y, f.table())?.is_continuous(&x, &y))
}

fn chain_with_top(len: usize) -> Result<FinPreorder> {
    let labels = (1..=len).map(|i| i.to_string()).chain(std::iter::once("+inf".to_string())).collect();
    let leq = (0..=len).map(|a| (0..=len).map(|b| a <= b).collect()).collect();
    FinPreorder::new(labels, leq)
}

/// Completeness of a finite metric against an index chain of length `chain`
/// whose tails start at rank `tail_start`. `holds` is the shift lifting
/// `⊥ → I^{tails} ⋔ M∘[+∞] → M`; the oracle asks every sequence that is
/// Cauchy on the tail for a limit; `extra["tail_extension"]` is the lifting
/// `I^{≤tails} → (I⊔{+∞})^{≤tails⊔{+∞}} ⋔ M → ⊤`.
pub fn is_complete_lp(m: &FinMetric, chain: usize, tail_start: usize, depth: usize, guard: &Guard) -> Result<Verdict> {
    guard.depth(depth + 1)?;
    guard.candidates(m.len().saturating_pow(chain as u32))?;
    let order = FinPreorder::chain(chain);
    let tails = order_object(&order, OrderFlavor::SetFlavor, OrderFilter::Tails(tail_start), depth)?;
    let x = metric_situs(m, depth + 1, guard)?;
    let (shifted, base, nat) = shift_nat(&x)?;
    let bot = initial(depth);
    let i = Arrow::new(&bot, &tails, Morphism::new(vec![vec![]; depth]))?;
    let p = Arrow::new(&shifted, &base, nat)?;
    let out = lifting_property(&LiftingInstance { i, p }, guard)?;
    let lifting_witness = out.witness.as_ref().map(|sq| Witness::Sequence {
        elements: sq.g.level(1).iter().map(|&v| base.show(1, v)).collect(),
    });

    let ordered = order_object(&order, OrderFlavor::Ordered, OrderFilter::Tails(tail_start), depth)?;
    let topped = order_object(&chain_with_top(chain)?, OrderFlavor::Ordered, OrderFilter::Tails(tail_start), depth)?;
    let t = crate::simplex::terminal(depth);
    let y = metric_situs(m, depth, guard)?;
    let i2 = Arrow::new(&ordered, &topped, Morphism::from_vertex_map(&ordered, &topped, &(0..chain).collect::<Vec<_>>())?)?;
    let p2 = Arrow::to_terminal(&y, &t)?;
    let extension = lifting_property(&LiftingInstance { i: i2, p: p2 }, guard)?.holds;

    let zero = Rational64::from_integer(0);
    let mut oracle = (true, None);
    for s in all_tuples(m.len(), chain) {
        let tail: Vec<usize> = s.iter().skip(tail_start).map(|&v| v as usize).collect();
        let cauchy = tail.iter().all(|&a| tail.iter().all(|&b| m.dist(a, b) == zero));
        let limit = (0..m.len()).any(|l| tail.iter().all(|&a| m.dist(a, l) == zero));
        if cauchy && !limit {
            oracle = (false, Some(Witness::Sequence { elements: s.iter().map(|&v| m.labels[v as usize].clone()).collect() }));
            break;
        }
    }
    let mut c = BTreeMap::new();
    c.insert("chain".into(), json!(chain));
    c.insert("tail_start".into(), json!(tail_start));
    c.insert("depth".into(), json!(depth));
    let mut v = Verdict::new("complete", (out.holds, lifting_witness), oracle, c);
    v.extra.insert("tail_extension".into(), extension);
    Ok(v)
}

/// Compactness of a connected finite space against the chain `alpha^>`.
/// A finite `alpha` stands for an initial segment of a limit ordinal, so the
/// factoring intervals are `β^>` for `1 ≤ β ≤ alpha`. The oracle looks for a
/// strictly increasing chain of proper open sets covering the space;
/// `extra["no_surjection"]` records whether no morphism `X_• → alpha^>_•` is onto.
pub fn compactness_lp(t: &FinTopology, alpha: usize, depth: usize, guard: &Guard) -> Result<Verdict> {
    if !t.is_connected() {
        return Err(Error::precondition("compactness check needs a connected space"));
    }
    if alpha == 0 {
        return Err(Error::domain("alpha must be at least 1"));
    }
    let x = covering_situs(t, depth, guard)?;
    let target = decreasing_order(alpha, depth)?;
    let pieces: Vec<Situs> = (1..=alpha).map(|b| decreasing_order(b, depth)).collect::<Result<_>>()?;
    let refs: Vec<&Situs> = pieces.iter().collect();
    let sum = coproduct(&refs)?;
    let vmap: Vec<usize> = (1..=alpha).flat_map(|b| 0..b).collect();
    let bot = initial(depth);
    let i = Arrow::new(&bot, &x, Morphism::new(vec![vec![]; depth]))?;
    let p = Arrow::new(&sum, &target, Morphism::from_vertex_map(&sum, &target, &vmap)?)?;
    let out = lifting_property(&LiftingInstance { i, p }, guard)?;
    let witness = out.witness.as_ref().map(|sq| {
        let assignment = sq.g.level(1).iter().enumerate().map(|(a, &v)| (t.labels[a].clone(), target.show(1, v))).collect();
        Witness::Map { assignment }
    });
    let no_surjection = exists_surjection(&x, &target, guard)?.is_none();

    let proper: Vec<&Subset> = t.opens.iter().filter(|o| o.count_ones(..) < t.len()).collect();
    let whole = full(t.len());
    let mut oracle = (true, None);
    // a strictly increasing chain has the union of its largest member
    for top in &proper {
        let below: Vec<&&Subset> = proper.iter().filter(|o| o.is_subset(top)).collect();
        let mut union = subset(t.len(), []);
        for o in &below {
            union.union_with(o);
        }
        if union == whole {
            oracle = (false, Some(Witness::Sequence { elements: elements(top).iter().map(|&i| t.labels[i].clone()).collect() }));
            break;
        }
    }
    let mut c = BTreeMap::new();
    c.insert("alpha".into(), json!(alpha));
    c.insert("depth".into(), json!(depth));
    let mut v = Verdict::new("compact", (out.holds, witness), oracle, c);
    v.extra.insert("no_surjection".into(), no_surjection);
    Ok(v)
}
