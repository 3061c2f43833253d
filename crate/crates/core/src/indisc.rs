//! Indiscernibility predicates, EM formulas and extendability.

use crate::error::{Error, Guard, Result};
use crate::fostruct::{compile, tuple_code, type_orbits, Expr, FinStructure, Formula, Term, TypeTable};
use crate::simplex::all_tuples;
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndiscKind {
    /// Increasing index tuples with pairwise-distinct values agree.
    Sequence,
    /// Any index order, pairwise-distinct values.
    OrderIndiscernible,
    /// Every subsequence of pairwise-distinct values is indiscernible.
    WithRepetitions,
    OrderWithRepetitions,
    /// Every subsequence whose consecutive values differ is indiscernible.
    ConsecutiveRepetitions,
    OrderConsecutiveRepetitions,
}

impl IndiscKind {
    pub const ALL: [IndiscKind; 6] = [
        IndiscKind::Sequence,
        IndiscKind::OrderIndiscernible,
        IndiscKind::WithRepetitions,
        IndiscKind::OrderWithRepetitions,
        IndiscKind::ConsecutiveRepetitions,
        IndiscKind::OrderConsecutiveRepetitions,
    ];

    pub fn is_consecutive(self) -> bool {
        matches!(self, IndiscKind::ConsecutiveRepetitions | IndiscKind::OrderConsecutiveRepetitions)
    }

    pub fn is_order(self) -> bool {
        matches!(
            self,
            IndiscKind::OrderIndiscernible | IndiscKind::OrderWithRepetitions | IndiscKind::OrderConsecutiveRepetitions
        )
    }

    /// The consecutive counterpart of a repetition kind.
    pub fn consecutive(self) -> IndiscKind {
        match self {
            IndiscKind::WithRepetitions | IndiscKind::Sequence => IndiscKind::ConsecutiveRepetitions,
            IndiscKind::OrderWithRepetitions | IndiscKind::OrderIndiscernible => IndiscKind::OrderConsecutiveRepetitions,
            k => k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IndiscKind::Sequence => "sequence",
            IndiscKind::OrderIndiscernible => "order",
            IndiscKind::WithRepetitions => "with-repetitions",
            IndiscKind::OrderWithRepetitions => "order-with-repetitions",
            IndiscKind::ConsecutiveRepetitions => "consecutive-repetitions",
            IndiscKind::OrderConsecutiveRepetitions => "order-consecutive-repetitions",
        }
    }

    pub fn parse(s: &str) -> Result<IndiscKind> {
        IndiscKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownName(format!("indiscernibility kind {s}")))
    }
}

impl fmt::Display for IndiscKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A partition of `universe^arity` into classes; a formula gives two classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tester {
    pub arity: usize,
    pub universe: usize,
    pub classes: Vec<u32>,
    pub label: String,
    /// Parameter element; consecutive kinds ignore positions holding it.
    pub parameter: Option<u32>,
}

impl Tester {
    pub fn from_formula(m: &FinStructure, phi: &Formula) -> Result<Tester> {
        let c = compile(m, phi)?;
        let r = phi.arity();
        let classes = all_tuples(m.size(), r).iter().map(|t| u32::from(c.eval(m, t))).collect();
        Ok(Tester { arity: r, universe: m.size(), classes, label: phi.to_string(), parameter: None })
    }

    /// Depth-`q` types of `r`-tuples over the parameter tuple.
    pub fn types(m: &FinStructure, table: &mut TypeTable<'_>, params: &[u32], r: usize, q: usize) -> Tester {
        let classes = all_tuples(m.size(), r)
            .into_iter()
            .map(|mut t| {
                t.extend_from_slice(params);
                table.type_of(q, &t)
            })
            .collect();
        Tester {
            arity: r,
            universe: m.size(),
            classes,
            label: format!("depth-{q} types of {r}-tuples over {}", m.show(params)),
            parameter: None,
        }
    }

    /// `Aut(M/A)` orbits of `r`-tuples.
    pub fn orbits(m: &FinStructure, params: &[u32], r: usize, guard: &Guard) -> Result<Tester> {
        let classes = type_orbits(m, params, r, guard)?.into_iter().map(|c| c as u32).collect();
        Ok(Tester {
            arity: r,
            universe: m.size(),
            classes,
            label: format!("orbits of {r}-tuples over {}", m.show(params)),
            parameter: None,
        })
    }

    pub fn class(&self, t: &[u32]) -> u32 {
        self.classes[tuple_code(self.universe, t)]
    }

    /// Number of distinct classes used.
    pub fn class_count(&self) -> usize {
        let mut c = self.classes.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }
}

/// A finite set of formulas or type partitions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sigma {
    pub testers: Vec<Tester>,
}

impl Sigma {
    pub fn from_formulas(m: &FinStructure, phis: &[Formula]) -> Result<Sigma> {
        Ok(Sigma { testers: phis.iter().map(|p| Tester::from_formula(m, p)).collect::<Result<_>>()? })
    }

    /// All formulas of quantifier depth ≤ `q` with ≤ `max_arity` free variables over `params`.
    pub fn cutoff(m: &FinStructure, params: &[u32], q: usize, max_arity: usize) -> Sigma {
        let mut table = TypeTable::new(m);
        Sigma { testers: (1..=max_arity).map(|r| Tester::types(m, &mut table, params, r, q)).collect() }
    }

    /// Orbit testers of arities `1..=max_arity` over `params`.
    pub fn orbits(m: &FinStructure, params: &[u32], max_arity: usize, guard: &Guard) -> Result<Sigma> {
        Ok(Sigma { testers: (1..=max_arity).map(|r| Tester::orbits(m, params, r, guard)).collect::<Result<_>>()? })
    }

    /// Union over single-element parameter sets; each tester records its parameter.
    pub fn cutoff_over_each(m: &FinStructure, q: usize, max_arity: usize) -> Sigma {
        let mut table = TypeTable::new(m);
        let mut testers = Vec::new();
        for b in 0..m.size() as u32 {
            for r in 1..=max_arity {
                let mut t = Tester::types(m, &mut table, &[b], r, q);
                t.parameter = Some(b);
                testers.push(t);
            }
        }
        Sigma { testers }
    }

    pub fn union(mut self, other: Sigma) -> Sigma {
        self.testers.extend(other.testers);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.testers.is_empty()
    }

    pub fn len(&self) -> usize {
        self.testers.len()
    }
}

fn increasing_lists(k: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, k: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, r, cur, out);
            cur.pop();
        }
    }
    rec(0, k, r, &mut cur, &mut out);
    out
}

fn injective_lists(k: usize, r: usize) -> Vec<Vec<usize>> {
    all_tuples(k, r)
        .into_iter()
        .filter(|t| (0..t.len()).all(|a| (a + 1..t.len()).all(|b| t[a] != t[b])))
        .map(|t| t.into_iter().map(|v| v as usize).collect())
        .collect()
}

fn values_distinct(seq: &[u32], idx: &[usize]) -> bool {
    (0..idx.len()).all(|a| (a + 1..idx.len()).all(|b| seq[idx[a]] != seq[idx[b]]))
}

/// Some subsequence containing `idx` has pairwise-different consecutive values.
fn consecutive_extendable(seq: &[u32], idx: &[usize]) -> bool {
    let mut u = idx.to_vec();
    u.sort_unstable();
    u.dedup();
    u.windows(2).all(|w| seq[w[0]] != seq[w[1]] || (w[0] + 1..w[1]).any(|t| seq[t] != seq[w[0]]))
}

/// Whether a pair of index lists must agree, given the kind.
fn guarded(seq: &[u32], i: &[usize], j: &[usize], kind: IndiscKind) -> bool {
    let union = || {
        let mut u: Vec<usize> = i.iter().chain(j).copied().collect();
        u.sort_unstable();
        u.dedup();
        u
    };
    match kind {
        IndiscKind::Sequence | IndiscKind::OrderIndiscernible => values_distinct(seq, i) && values_distinct(seq, j),
        IndiscKind::WithRepetitions | IndiscKind::OrderWithRepetitions => values_distinct(seq, &union()),
        IndiscKind::ConsecutiveRepetitions | IndiscKind::OrderConsecutiveRepetitions => {
            consecutive_extendable(seq, &union())
        }
    }
}

/// Indiscernibility of `seq` against a class assignment on `r`-tuples.
pub fn indiscernible_by(class: impl Fn(&[u32]) -> u32, r: usize, seq: &[u32], kind: IndiscKind) -> bool {
    indiscernible_avoiding(class, r, seq, kind, None)
}

/// As `indiscernible_by`, ignoring index lists that hit a position holding `avoid`.
pub fn indiscernible_avoiding(
    class: impl Fn(&[u32]) -> u32,
    r: usize,
    seq: &[u32],
    kind: IndiscKind,
    avoid: Option<u32>,
) -> bool {
    if r == 0 || r > seq.len() {
        return true;
    }
    let mut lists = if kind.is_order() { injective_lists(seq.len(), r) } else { increasing_lists(seq.len(), r) };
    if let Some(b) = avoid {
        lists.retain(|l| l.iter().all(|&p| seq[p] != b));
    }
    let vals: Vec<Vec<u32>> = lists.iter().map(|l| l.iter().map(|&p| seq[p]).collect()).collect();
    let cls: Vec<u32> = vals.iter().map(|v| class(v)).collect();
    for a in 0..lists.len() {
        for b in a + 1..lists.len() {
            if cls[a] != cls[b] && guarded(seq, &lists[a], &lists[b], kind) {
                return false;
            }
        }
    }
    true
}

pub fn is_indiscernible(m: &FinStructure, phi: &Formula, seq: &[u32], kind: IndiscKind) -> Result<bool> {
    check_seq(m, seq)?;
    if phi.arity() == 0 {
        return Err(Error::domain("formula has no free variables"));
    }
    let c = compile(m, phi)?;
    Ok(indiscernible_by(|t| u32::from(c.eval(m, t)), phi.arity(), seq, kind))
}

pub fn tester_indiscernible(t: &Tester, seq: &[u32], kind: IndiscKind) -> bool {
    let avoid = if kind.is_consecutive() { t.parameter } else { None };
    indiscernible_avoiding(|x| t.class(x), t.arity, seq, kind, avoid)
}

pub fn sigma_indiscernible(sigma: &Sigma, seq: &[u32], kind: IndiscKind) -> bool {
    sigma.testers.iter().all(|t| tester_indiscernible(t, seq, kind))
}

fn check_seq(m: &FinStructure, seq: &[u32]) -> Result<()> {
    match seq.iter().find(|&&v| v as usize >= m.size()) {
        Some(v) => Err(Error::domain(format!("element {v} outside the universe"))),
        None => Ok(()),
    }
}

fn distinct_count(seq: &[u32]) -> usize {
    let mut v = seq.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Some insertion of new pairwise-distinct values makes `seq` indiscernible with ≥ `n` values.
///
/// Insertions go anywhere in the sequence so that faces of extendable tuples stay extendable.
pub fn extendable_by(sigma: &Sigma, universe: usize, seq: &[u32], n: usize, kind: IndiscKind, guard: &Guard) -> Result<bool> {
    let have = distinct_count(seq);
    if have >= n {
        return Ok(sigma_indiscernible(sigma, seq, kind));
    }
    if n > universe {
        return Ok(false);
    }
    let need = n - have;
    let fresh: Vec<u32> = (0..universe as u32).filter(|v| !seq.contains(v)).collect();
    guard.candidates(fresh.len().pow(need as u32).saturating_mul(binomial(seq.len() + need, need)))?;
    let mut chosen = Vec::with_capacity(need);
    Ok(extend_rec(sigma, seq, &fresh, need, kind, &mut chosen))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn extend_rec(sigma: &Sigma, seq: &[u32], fresh: &[u32], need: usize, kind: IndiscKind, chosen: &mut Vec<u32>) -> bool {
    if chosen.len() == need {
        return interleavings(seq, chosen).into_iter().any(|s| sigma_indiscernible(sigma, &s, kind));
    }
    for &v in fresh {
        if chosen.contains(&v) {
            continue;
        }
        chosen.push(v);
        let ok = extend_rec(sigma, seq, fresh, need, kind, chosen);
        chosen.pop();
        if ok {
            return true;
        }
    }
    false
}

fn interleavings(a: &[u32], b: &[u32]) -> Vec<Vec<u32>> {
    if a.is_empty() {
        return vec![b.to_vec()];
    }
    if b.is_empty() {
        return vec![a.to_vec()];
    }
    let mut out = Vec::new();
    for mut rest in interleavings(&a[1..], b) {
        rest.insert(0, a[0]);
        out.push(rest);
    }
    for mut rest in interleavings(a, &b[1..]) {
        rest.insert(0, b[0]);
        out.push(rest);
    }
    out
}

pub fn is_extendable(
    m: &FinStructure,
    sigma: &[Formula],
    seq: &[u32],
    n: usize,
    kind: IndiscKind,
    guard: &Guard,
) -> Result<bool> {
    check_seq(m, seq)?;
    let s = Sigma::from_formulas(m, sigma)?;
    extendable_by(&s, m.size(), seq, n, kind, guard)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EmVariant {
    /// Guards: all values in the two index lists pairwise distinct.
    Em,
    /// Guards: the merged index list can be completed to one with distinct neighbours.
    EmPrime,
    /// As `EmPrime` with one extra parameter slot.
    EmOnePrime,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EmFormulaSpec {
    pub phi: Formula,
    pub width: usize,
    pub variant: EmVariant,
}

fn var(i: usize) -> Term {
    Term::Var(format!("x_{}", i + 1))
}

fn neq(a: usize, b: usize) -> Expr {
    Expr::not(Expr::Eq(var(a), var(b)))
}

/// The guarded conjunction of biconditionals expressing indiscernibility.
pub fn em_formula(spec: &EmFormulaSpec) -> Result<Formula> {
    let n = spec.width;
    if n == 0 {
        return Err(Error::domain("EM width must be at least 1"));
    }
    let total = spec.phi.arity();
    let r = match spec.variant {
        EmVariant::EmOnePrime if total < 2 => {
            return Err(Error::domain("EM1' needs a formula with a parameter variable and at least one more"))
        }
        EmVariant::EmOnePrime => total - 1,
        _ => total,
    };
    if r == 0 {
        return Err(Error::domain("formula has no free variables"));
    }
    let param = Term::Var("p".into());
    let instance = |list: &[usize]| {
        let mut map = HashMap::new();
        for (k, &i) in list.iter().enumerate() {
            map.insert(spec.phi.vars[k].clone(), var(i));
        }
        if spec.variant == EmVariant::EmOnePrime {
            map.insert(spec.phi.vars[r].clone(), param.clone());
        }
        spec.phi.expr.substitute(&map)
    };
    let lists = increasing_lists(n, r);
    let mut parts = Vec::new();
    for a in 0..lists.len() {
        for b in a..lists.len() {
            let (i, j) = (&lists[a], &lists[b]);
            let mut u: Vec<usize> = i.iter().chain(j).copied().collect();
            u.sort_unstable();
            u.dedup();
            let guard = match spec.variant {
                EmVariant::Em => {
                    Expr::conj((0..u.len()).flat_map(|s| (s + 1..u.len()).map(move |t| (s, t))).map(|(s, t)| neq(u[s], u[t])))
                }
                _ => Expr::conj(u.windows(2).map(|w| {
                    Expr::disj(std::iter::once(neq(w[0], w[1])).chain((w[0] + 1..w[1]).map(|t| neq(t, w[0]))))
                })),
            };
            parts.push(Expr::implies(guard, Expr::iff(instance(i), instance(j))));
        }
    }
    let mut vars: Vec<String> = (0..n).map(|i| format!("x_{}", i + 1)).collect();
    if spec.variant == EmVariant::EmOnePrime {
        vars.push("p".into());
    }
    Formula::with_vars(Expr::conj(parts), vars)
}
