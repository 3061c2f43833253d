//! Finite first-order structures, formulas, automorphisms and types.

use crate::error::{Error, Guard, Result};
use crate::simplex::all_tuples;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub relations: Vec<(String, usize)>,
    pub functions: Vec<String>,
    pub constants: Vec<String>,
}

impl Signature {
    pub fn relation(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|(n, _)| n == name)
    }

    pub fn function(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|n| n == name)
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|n| n == name)
    }

    fn taken(&self, name: &str) -> bool {
        self.relation(name).is_some() || self.function(name).is_some() || self.constant(name).is_some()
    }
}

/// A finite structure with relations, unary functions and constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinStructure {
    sig: Signature,
    names: Vec<String>,
    /// dense truth tables indexed by tuple code
    rels: Vec<Vec<bool>>,
    funs: Vec<Vec<u32>>,
    consts: Vec<u32>,
}

/// Base-`k` code of a tuple, most significant coordinate first.
pub fn tuple_code(k: usize, t: &[u32]) -> usize {
    t.iter().fold(0, |acc, &v| acc * k + v as usize)
}

pub fn decode_tuple(k: usize, r: usize, mut code: usize) -> Vec<u32> {
    let mut t = vec![0u32; r];
    for i in (0..r).rev() {
        t[i] = (code % k) as u32;
        code /= k;
    }
    t
}

impl FinStructure {
    /// A structure with the given elements and an empty signature.
    pub fn new(names: Vec<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        if let Some(d) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::domain(format!("duplicate element {d}")));
        }
        Ok(FinStructure { sig: Signature::default(), names, rels: vec![], funs: vec![], consts: vec![] })
    }

    pub fn with_size(n: usize) -> Self {
        FinStructure::new((0..n).map(default_name).collect()).expect("distinct names")
    }

    /// `n` elements named `1..=n` with `<=` the usual order.
    pub fn chain(n: usize) -> Self {
        let mut m = FinStructure::new((1..=n).map(|i| i.to_string()).collect()).expect("names");
        let tuples: Vec<Vec<u32>> = (0..n as u32).flat_map(|a| (a..n as u32).map(move |b| vec![a, b])).collect();
        m.add_relation("<=", 2, &tuples).expect("fresh relation");
        m
    }

    pub fn add_relation(&mut self, name: &str, arity: usize, tuples: &[Vec<u32>]) -> Result<()> {
        if arity == 0 {
            return Err(Error::domain("relation arity must be positive"));
        }
        if self.sig.taken(name) {
            return Err(Error::domain(format!("symbol {name} declared twice")));
        }
        let k = self.size();
        let mut table = vec![false; k.pow(arity as u32)];
        for t in tuples {
            if t.len() != arity || t.iter().any(|&v| v as usize >= k) {
                return Err(Error::domain(format!("tuple {t:?} does not fit {name}/{arity}")));
            }
            table[tuple_code(k, t)] = true;
        }
        self.sig.relations.push((name.to_string(), arity));
        self.rels.push(table);
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, table: Vec<u32>) -> Result<()> {
        if self.sig.taken(name) {
            return Err(Error::domain(format!("symbol {name} declared twice")));
        }
        if table.len() != self.size() || table.iter().any(|&v| v as usize >= self.size()) {
            return Err(Error::domain(format!("function {name} is not total on the universe")));
        }
        self.sig.functions.push(name.to_string());
        self.funs.push(table);
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str, value: u32) -> Result<()> {
        if self.sig.taken(name) {
            return Err(Error::domain(format!("symbol {name} declared twice")));
        }
        if value as usize >= self.size() {
            return Err(Error::domain(format!("constant {name} outside the universe")));
        }
        self.sig.constants.push(name.to_string());
        self.consts.push(value);
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, e: u32) -> &str {
        &self.names[e as usize]
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn element(&self, name: &str) -> Result<u32> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as u32)
            .ok_or_else(|| Error::UnknownName(format!("element {name}")))
    }

    pub fn holds(&self, rel: usize, t: &[u32]) -> bool {
        self.rels[rel][tuple_code(self.size(), t)]
    }

    pub fn relation_tuples(&self, rel: usize) -> Vec<Vec<u32>> {
        let (k, r) = (self.size(), self.sig.relations[rel].1);
        (0..self.rels[rel].len()).filter(|&c| self.rels[rel][c]).map(|c| decode_tuple(k, r, c)).collect()
    }

    pub fn function_table(&self, f: usize) -> &[u32] {
        &self.funs[f]
    }

    pub fn constant_value(&self, c: usize) -> u32 {
        self.consts[c]
    }

    /// The element names joined for display.
    pub fn show(&self, t: &[u32]) -> String {
        let parts: Vec<&str> = t.iter().map(|&e| self.name(e)).collect();
        format!("({})", parts.join(","))
    }
}

pub fn default_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("e{i}")
    }
}

/// Every structure on `n` elements with one binary relation `R`.
pub fn binary_structures(n: usize) -> Vec<FinStructure> {
    let pairs = all_tuples(n, 2);
    (0u64..1 << pairs.len())
        .map(|mask| {
            let mut m = FinStructure::with_size(n);
            let tuples: Vec<Vec<u32>> =
                pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, t)| t.clone()).collect();
            m.add_relation("R", 2, &tuples).expect("fresh");
            m
        })
        .collect()
}

/// Every structure on `n` elements with one unary function `f`.
pub fn unary_function_structures(n: usize) -> Vec<FinStructure> {
    all_tuples(n, n)
        .into_iter()
        .map(|table| {
            let mut m = FinStructure::with_size(n);
            m.add_function("f", table).expect("fresh");
            m
        })
        .collect()
}

/// One equivalence relation `E` with the given class sizes.
pub fn equivalence_structure(classes: &[usize]) -> FinStructure {
    let n: usize = classes.iter().sum();
    let mut of = Vec::with_capacity(n);
    for (c, &k) in classes.iter().enumerate() {
        of.extend(std::iter::repeat_n(c, k));
    }
    let mut m = FinStructure::with_size(n);
    let tuples: Vec<Vec<u32>> = all_tuples(n, 2).into_iter().filter(|t| of[t[0] as usize] == of[t[1] as usize]).collect();
    m.add_relation("E", 2, &tuples).expect("fresh");
    m
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// A named universe element used as a parameter.
    Param(String),
    Const(String),
    App(String, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    True,
    False,
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    Forall(String, Box<Expr>),
    Exists(String, Box<Expr>),
}

impl Expr {
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Expr, b: Expr) -> Expr {
        Expr::Iff(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    pub fn conj(parts: impl IntoIterator<Item = Expr>) -> Expr {
        parts.into_iter().reduce(Expr::and).unwrap_or(Expr::True)
    }

    pub fn disj(parts: impl IntoIterator<Item = Expr>) -> Expr {
        parts.into_iter().reduce(Expr::or).unwrap_or(Expr::False)
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let term = |t: &Term, bound: &Vec<String>, out: &mut Vec<String>| {
            let mut t = t;
            while let Term::App(_, inner) = t {
                t = inner;
            }
            if let Term::Var(v) = t {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        };
        match self {
            Expr::True | Expr::False => {}
            Expr::Eq(a, b) => {
                term(a, bound, out);
                term(b, bound, out);
            }
            Expr::Rel(_, ts) => ts.iter().for_each(|t| term(t, bound, out)),
            Expr::Not(e) => e.collect_free(bound, out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Expr::Forall(v, e) | Expr::Exists(v, e) => {
                bound.push(v.clone());
                e.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Replaces free variables by terms (bound variables must not clash).
    pub fn substitute(&self, map: &HashMap<String, Term>) -> Expr {
        let sub = |t: &Term| subst_term(t, map);
        match self {
            Expr::True => Expr::True,
            Expr::False => Expr::False,
            Expr::Eq(a, b) => Expr::Eq(sub(a), sub(b)),
            Expr::Rel(r, ts) => Expr::Rel(r.clone(), ts.iter().map(sub).collect()),
            Expr::Not(e) => Expr::not(e.substitute(map)),
            Expr::And(a, b) => Expr::and(a.substitute(map), b.substitute(map)),
            Expr::Or(a, b) => Expr::or(a.substitute(map), b.substitute(map)),
            Expr::Implies(a, b) => Expr::implies(a.substitute(map), b.substitute(map)),
            Expr::Iff(a, b) => Expr::iff(a.substitute(map), b.substitute(map)),
            Expr::Forall(v, e) | Expr::Exists(v, e) => {
                let mut inner = map.clone();
                inner.remove(v);
                let body = Box::new(e.substitute(&inner));
                if matches!(self, Expr::Forall(..)) {
                    Expr::Forall(v.clone(), body)
                } else {
                    Expr::Exists(v.clone(), body)
                }
            }
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Expr::True | Expr::False | Expr::Eq(..) | Expr::Rel(..) => 0,
            Expr::Not(e) => e.quantifier_depth(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Expr::Forall(_, e) | Expr::Exists(_, e) => 1 + e.quantifier_depth(),
        }
    }
}

fn subst_term(t: &Term, map: &HashMap<String, Term>) -> Term {
    match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(f, inner) => Term::App(f.clone(), Box::new(subst_term(inner, map))),
        _ => t.clone(),
    }
}

/// A formula with an ordered list of free variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Formula {
    pub expr: Expr,
    pub vars: Vec<String>,
}

impl Formula {
    /// Free variables default to order of first occurrence.
    pub fn new(expr: Expr) -> Self {
        let vars = expr.free_vars();
        Formula { expr, vars }
    }

    pub fn with_vars(expr: Expr, vars: Vec<String>) -> Result<Self> {
        if let Some(v) = expr.free_vars().iter().find(|v| !vars.contains(v)) {
            return Err(Error::domain(format!("free variable {v} missing from the variable list")));
        }
        Ok(Formula { expr, vars })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Formula::new(parse_expr(text, None)?))
    }

    /// Parses with constant names resolved against `sig`.
    pub fn parse_in(text: &str, sig: &Signature) -> Result<Self> {
        Ok(Formula::new(parse_expr(text, Some(sig))?))
    }

    /// `x R y` for a binary relation symbol.
    pub fn binary(rel: &str) -> Self {
        Formula::new(Expr::Rel(rel.into(), vec![Term::Var("x".into()), Term::Var("y".into())]))
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => write!(f, "{v}"),
            Term::Param(p) => write!(f, "@{p}"),
            Term::App(g, t) => write!(f, "{g}({t})"),
        }
    }
}

fn is_ident(s: &str) -> bool {
    s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::True => write!(f, "true"),
            Expr::False => write!(f, "false"),
            Expr::Eq(a, b) => write!(f, "{a} = {b}"),
            Expr::Rel(r, ts) if ts.len() == 2 && !is_ident(r) => write!(f, "{} {r} {}", ts[0], ts[1]),
            Expr::Rel(r, ts) => {
                let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "{r}({})", parts.join(","))
            }
            Expr::Not(e) => match &**e {
                Expr::Rel(r, _) if is_ident(r) => write!(f, "~{e}"),
                Expr::Not(_) | Expr::True | Expr::False => write!(f, "~{e}"),
                _ => write!(f, "~({e})"),
            },
            Expr::And(a, b) => write!(f, "({a} & {b})"),
            Expr::Or(a, b) => write!(f, "({a} | {b})"),
            Expr::Implies(a, b) => write!(f, "({a} -> {b})"),
            Expr::Iff(a, b) => write!(f, "({a} <-> {b})"),
            Expr::Forall(v, e) => write!(f, "(forall {v}. {e})"),
            Expr::Exists(v, e) => write!(f, "(exists {v}. {e})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Param(String),
    Op(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Imp,
    Iff,
    Eq,
    Neq,
}

const OP_CHARS: &str = "<>=!+*/^%#≤≥≠⊆";

fn tokenize(text: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: &str| Error::Parse { line, col, msg: msg.to_string() };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut i, &mut col);
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let tok = if rest.starts_with("<->") {
            adv(3, &mut i, &mut col);
            Tok::Iff
        } else if rest.starts_with("->") {
            adv(2, &mut i, &mut col);
            Tok::Imp
        } else if rest.starts_with("!=") {
            adv(2, &mut i, &mut col);
            Tok::Neq
        } else {
            match c {
                '(' => {
                    adv(1, &mut i, &mut col);
                    Tok::LParen
                }
                ')' => {
                    adv(1, &mut i, &mut col);
                    Tok::RParen
                }
                ',' => {
                    adv(1, &mut i, &mut col);
                    Tok::Comma
                }
                '.' => {
                    adv(1, &mut i, &mut col);
                    Tok::Dot
                }
                '~' | '¬' => {
                    adv(1, &mut i, &mut col);
                    Tok::Not
                }
                '&' | '∧' => {
                    adv(1, &mut i, &mut col);
                    Tok::And
                }
                '|' | '∨' => {
                    adv(1, &mut i, &mut col);
                    Tok::Or
                }
                '@' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                        j += 1;
                    }
                    if j == start {
                        return Err(err(l0, c0, "expected an element name after @"));
                    }
                    let name: String = chars[start..j].iter().collect();
                    adv(j - i, &mut i, &mut col);
                    Tok::Param(name)
                }
                c if c.is_alphanumeric() || c == '_' => {
                    let mut j = i;
                    while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                        j += 1;
                    }
                    let name: String = chars[i..j].iter().collect();
                    adv(j - i, &mut i, &mut col);
                    Tok::Ident(name)
                }
                c if OP_CHARS.contains(c) => {
                    let mut j = i;
                    while j < chars.len() && OP_CHARS.contains(chars[j]) {
                        j += 1;
                    }
                    let op: String = chars[i..j].iter().collect();
                    adv(j - i, &mut i, &mut col);
                    if op == "=" {
                        Tok::Eq
                    } else {
                        Tok::Op(op)
                    }
                }
                _ => return Err(err(l0, c0, &format!("unexpected character {c:?}"))),
            }
        };
        out.push((tok, l0, c0));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    sig: Option<&'a Signature>,
    end: (usize, usize),
}

fn parse_expr(text: &str, sig: Option<&Signature>) -> Result<Expr> {
    let toks = tokenize(text)?;
    let end = (text.lines().count().max(1), text.lines().last().map_or(1, |l| l.chars().count() + 1));
    let mut p = Parser { toks, pos: 0, sig, end };
    let e = p.formula()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn error(&self, msg: &str) -> Error {
        let (line, col) = self.toks.get(self.pos).map_or(self.end, |t| (t.1, t.2));
        Error::Parse { line, col, msg: msg.to_string() }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> Result<Expr> {
        let mut lhs = self.implication()?;
        while self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.implication()?;
            lhs = Expr::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Expr> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Imp) {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Expr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Expr> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.conjunction()?;
            lhs = Expr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Expr::not(self.unary()?))
            }
            Some(Tok::Ident(k)) if k == "forall" || k == "exists" => {
                let universal = k == "forall";
                self.pos += 1;
                let mut vars = Vec::new();
                loop {
                    match self.peek() {
                        Some(Tok::Ident(v)) => {
                            vars.push(v.clone());
                            self.pos += 1;
                        }
                        _ => return Err(self.error("expected a bound variable")),
                    }
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                self.expect(Tok::Dot, "'.' after the bound variables")?;
                let mut body = self.formula()?;
                for v in vars.into_iter().rev() {
                    body = if universal { Expr::Forall(v, Box::new(body)) } else { Expr::Exists(v, Box::new(body)) };
                }
                Ok(body)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        if let Some(Tok::Ident(k)) = self.peek() {
            if k == "true" || k == "false" {
                let e = if k == "true" { Expr::True } else { Expr::False };
                self.pos += 1;
                return Ok(e);
            }
        }
        // prefix relation R(t1,..,tk), unless it is a function term followed by an infix symbol
        if let (Some(Tok::Ident(name)), Some(Tok::LParen)) = (self.peek().cloned(), self.peek_at(1)) {
            let save = self.pos;
            self.pos += 2;
            let mut args = vec![self.term()?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "')'")?;
            if !self.infix_follows() {
                return Ok(Expr::Rel(name, args));
            }
            self.pos = save;
        }
        let lhs = self.term()?;
        match self.peek().cloned() {
            Some(Tok::Eq) => {
                self.pos += 1;
                Ok(Expr::Eq(lhs, self.term()?))
            }
            Some(Tok::Neq) => {
                self.pos += 1;
                Ok(Expr::not(Expr::Eq(lhs, self.term()?)))
            }
            Some(Tok::Op(op)) => {
                self.pos += 1;
                Ok(Expr::Rel(op, vec![lhs, self.term()?]))
            }
            Some(Tok::Ident(r)) if r != "forall" && r != "exists" => {
                self.pos += 1;
                Ok(Expr::Rel(r, vec![lhs, self.term()?]))
            }
            _ => Err(self.error("expected '=', a relation symbol, or an infix relation")),
        }
    }

    fn infix_follows(&self) -> bool {
        match self.peek() {
            Some(Tok::Eq) | Some(Tok::Neq) | Some(Tok::Op(_)) => true,
            Some(Tok::Ident(r)) => r != "forall" && r != "exists",
            _ => false,
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().cloned() {
            Some(Tok::Param(p)) => {
                self.pos += 1;
                Ok(Term::Param(p))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let inner = self.term()?;
                    self.expect(Tok::RParen, "')' after a function argument")?;
                    return Ok(Term::App(name, Box::new(inner)));
                }
                if self.sig.is_some_and(|s| s.constant(&name).is_some()) {
                    Ok(Term::Const(name))
                } else {
                    Ok(Term::Var(name))
                }
            }
            _ => Err(self.error("expected a term")),
        }
    }
}

#[derive(Clone, Debug)]
enum CTerm {
    Slot(usize),
    Elem(u32),
    App(usize, Box<CTerm>),
}

#[derive(Clone, Debug)]
enum CExpr {
    Const(bool),
    Eq(CTerm, CTerm),
    Rel(usize, Vec<CTerm>),
    Not(Box<CExpr>),
    And(Box<CExpr>, Box<CExpr>),
    Or(Box<CExpr>, Box<CExpr>),
    Implies(Box<CExpr>, Box<CExpr>),
    Iff(Box<CExpr>, Box<CExpr>),
    Forall(usize, Box<CExpr>),
    Exists(usize, Box<CExpr>),
}

/// A formula resolved against a structure; evaluation allocates nothing.
#[derive(Clone, Debug)]
pub struct Compiled {
    expr: CExpr,
    arity: usize,
    slots: usize,
}

pub fn compile(m: &FinStructure, phi: &Formula) -> Result<Compiled> {
    let mut scope: Vec<String> = phi.vars.clone();
    let mut slots = scope.len();
    let expr = compile_expr(m, &phi.expr, &mut scope, &mut slots)?;
    Ok(Compiled { expr, arity: phi.vars.len(), slots })
}

fn compile_term(m: &FinStructure, t: &Term, scope: &[String]) -> Result<CTerm> {
    Ok(match t {
        Term::Var(v) => match scope.iter().rposition(|s| s == v) {
            Some(i) => CTerm::Slot(i),
            None => match m.sig.constant(v) {
                Some(c) => CTerm::Elem(m.consts[c]),
                None => return Err(Error::UnknownName(format!("variable {v} is not bound"))),
            },
        },
        Term::Param(p) => CTerm::Elem(m.element(p)?),
        Term::Const(c) => CTerm::Elem(
            m.consts[m.sig.constant(c).ok_or_else(|| Error::UnknownName(format!("constant {c}")))?],
        ),
        Term::App(f, inner) => CTerm::App(
            m.sig.function(f).ok_or_else(|| Error::UnknownName(format!("function {f}")))?,
            Box::new(compile_term(m, inner, scope)?),
        ),
    })
}

fn compile_expr(m: &FinStructure, e: &Expr, scope: &mut Vec<String>, slots: &mut usize) -> Result<CExpr> {
    let bin = |a: &Expr, b: &Expr, scope: &mut Vec<String>, slots: &mut usize| -> Result<(Box<CExpr>, Box<CExpr>)> {
        Ok((Box::new(compile_expr(m, a, scope, slots)?), Box::new(compile_expr(m, b, scope, slots)?)))
    };
    Ok(match e {
        Expr::True => CExpr::Const(true),
        Expr::False => CExpr::Const(false),
        Expr::Eq(a, b) => CExpr::Eq(compile_term(m, a, scope)?, compile_term(m, b, scope)?),
        Expr::Rel(r, ts) => {
            let i = m.sig.relation(r).ok_or_else(|| Error::UnknownName(format!("relation {r}")))?;
            if m.sig.relations[i].1 != ts.len() {
                return Err(Error::domain(format!(
                    "relation {r} has arity {}, used with {} arguments",
                    m.sig.relations[i].1,
                    ts.len()
                )));
            }
            CExpr::Rel(i, ts.iter().map(|t| compile_term(m, t, scope)).collect::<Result<_>>()?)
        }
        Expr::Not(a) => CExpr::Not(Box::new(compile_expr(m, a, scope, slots)?)),
        Expr::And(a, b) => {
            let (a, b) = bin(a, b, scope, slots)?;
            CExpr::And(a, b)
        }
        Expr::Or(a, b) => {
            let (a, b) = bin(a, b, scope, slots)?;
            CExpr::Or(a, b)
        }
        Expr::Implies(a, b) => {
            let (a, b) = bin(a, b, scope, slots)?;
            CExpr::Implies(a, b)
        }
        Expr::Iff(a, b) => {
            let (a, b) = bin(a, b, scope, slots)?;
            CExpr::Iff(a, b)
        }
        Expr::Forall(v, body) | Expr::Exists(v, body) => {
            scope.push(v.clone());
            let slot = scope.len() - 1;
            *slots = (*slots).max(scope.len());
            let b = Box::new(compile_expr(m, body, scope, slots)?);
            scope.pop();
            if matches!(e, Expr::Forall(..)) {
                CExpr::Forall(slot, b)
            } else {
                CExpr::Exists(slot, b)
            }
        }
    })
}

impl Compiled {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, m: &FinStructure, args: &[u32]) -> bool {
        let mut env = vec![0u32; self.slots.max(args.len())];
        env[..args.len()].copy_from_slice(args);
        eval_c(m, &self.expr, &mut env)
    }
}

fn term_value(m: &FinStructure, t: &CTerm, env: &[u32]) -> u32 {
    match t {
        CTerm::Slot(i) => env[*i],
        CTerm::Elem(e) => *e,
        CTerm::App(f, inner) => m.funs[*f][term_value(m, inner, env) as usize],
    }
}

fn eval_c(m: &FinStructure, e: &CExpr, env: &mut Vec<u32>) -> bool {
    match e {
        CExpr::Const(b) => *b,
        CExpr::Eq(a, b) => term_value(m, a, env) == term_value(m, b, env),
        CExpr::Rel(r, ts) => {
            let k = m.size();
            let code = ts.iter().fold(0, |acc, t| acc * k + term_value(m, t, env) as usize);
            m.rels[*r][code]
        }
        CExpr::Not(a) => !eval_c(m, a, env),
        CExpr::And(a, b) => eval_c(m, a, env) && eval_c(m, b, env),
        CExpr::Or(a, b) => eval_c(m, a, env) || eval_c(m, b, env),
        CExpr::Implies(a, b) => !eval_c(m, a, env) || eval_c(m, b, env),
        CExpr::Iff(a, b) => eval_c(m, a, env) == eval_c(m, b, env),
        CExpr::Forall(slot, body) | CExpr::Exists(slot, body) => {
            let universal = matches!(e, CExpr::Forall(..));
            let saved = env[*slot];
            let mut result = universal;
            for v in 0..m.size() as u32 {
                env[*slot] = v;
                if eval_c(m, body, env) != universal {
                    result = !universal;
                    break;
                }
            }
            env[*slot] = saved;
            result
        }
    }
}

/// `M ⊨ φ[assignment]`.
pub fn eval(m: &FinStructure, phi: &Formula, assignment: &[u32]) -> Result<bool> {
    if assignment.len() != phi.vars.len() {
        return Err(Error::domain(format!(
            "formula has {} free variables, assignment has {} values",
            phi.vars.len(),
            assignment.len()
        )));
    }
    if let Some(&bad) = assignment.iter().find(|&&v| v as usize >= m.size()) {
        return Err(Error::domain(format!("assignment value {bad} outside the universe")));
    }
    Ok(compile(m, phi)?.eval(m, assignment))
}

/// Universe permutations fixing `fixed` pointwise and preserving all symbols.
pub fn automorphisms_fixing(m: &FinStructure, fixed: &[u32], guard: &Guard) -> Result<Vec<Vec<u32>>> {
    guard.atoms(m.size())?;
    let n = m.size();
    let mut out = Vec::new();
    let mut img = vec![u32::MAX; n];
    let mut used = vec![false; n];
    for &a in fixed {
        img[a as usize] = a;
        used[a as usize] = true;
    }
    for &c in &m.consts {
        if img[c as usize] != u32::MAX && img[c as usize] != c {
            return Ok(out);
        }
        img[c as usize] = c;
        used[c as usize] = true;
    }
    auto_dfs(m, 0, &mut img, &mut used, &mut out);
    Ok(out)
}

pub fn automorphisms(m: &FinStructure, guard: &Guard) -> Result<Vec<Vec<u32>>> {
    automorphisms_fixing(m, &[], guard)
}

fn auto_dfs(m: &FinStructure, i: usize, img: &mut Vec<u32>, used: &mut Vec<bool>, out: &mut Vec<Vec<u32>>) {
    let n = m.size();
    if i == n {
        if partial_ok(m, img) {
            out.push(img.clone());
        }
        return;
    }
    if img[i] != u32::MAX {
        if partial_ok(m, img) {
            auto_dfs(m, i + 1, img, used, out);
        }
        return;
    }
    for v in 0..n {
        if used[v] {
            continue;
        }
        img[i] = v as u32;
        used[v] = true;
        if partial_ok(m, img) {
            auto_dfs(m, i + 1, img, used, out);
        }
        used[v] = false;
    }
    img[i] = u32::MAX;
}

/// Every fully assigned tuple keeps its truth value and functions commute where defined.
fn partial_ok(m: &FinStructure, img: &[u32]) -> bool {
    let n = m.size();
    for (f, table) in m.funs.iter().enumerate() {
        let _ = f;
        for x in 0..n {
            let fx = table[x] as usize;
            if img[x] != u32::MAX && img[fx] != u32::MAX && table[img[x] as usize] != img[fx] {
                return false;
            }
        }
    }
    for (r, table) in m.rels.iter().enumerate() {
        let ar = m.sig.relations[r].1;
        for code in 0..table.len() {
            let t = decode_tuple(n, ar, code);
            if t.iter().any(|&v| img[v as usize] == u32::MAX) {
                continue;
            }
            let s: Vec<u32> = t.iter().map(|&v| img[v as usize]).collect();
            if table[tuple_code(n, &s)] != table[code] {
                return false;
            }
        }
    }
    true
}

/// Orbit ids of `universe^n` (lexicographic tuple order) under `Aut(M/A)`.
pub fn type_orbits(m: &FinStructure, a: &[u32], n: usize, guard: &Guard) -> Result<Vec<usize>> {
    let group = automorphisms_fixing(m, a, guard)?;
    Ok(orbits_under(m.size(), n, &group))
}

pub fn orbits_under(k: usize, n: usize, group: &[Vec<u32>]) -> Vec<usize> {
    let total = k.pow(n as u32);
    let mut class = vec![usize::MAX; total];
    let mut next = 0;
    for code in 0..total {
        if class[code] != usize::MAX {
            continue;
        }
        let t = decode_tuple(k, n, code);
        for g in group {
            let s: Vec<u32> = t.iter().map(|&v| g[v as usize]).collect();
            class[tuple_code(k, &s)] = next;
        }
        class[code] = next;
        next += 1;
    }
    class
}

/// Depth-`q` types of tuples, interned to small ids.
pub struct TypeTable<'a> {
    m: &'a FinStructure,
    intern: HashMap<(usize, Vec<u32>), u32>,
    memo: HashMap<(usize, Vec<u32>), u32>,
}

impl<'a> TypeTable<'a> {
    pub fn new(m: &'a FinStructure) -> Self {
        TypeTable { m, intern: HashMap::new(), memo: HashMap::new() }
    }

    fn intern(&mut self, q: usize, key: Vec<u32>) -> u32 {
        let next = self.intern.len() as u32;
        *self.intern.entry((q, key)).or_insert(next)
    }

    /// Isomorphism type of the substructure generated by the tuple and the constants.
    fn qf_key(&self, t: &[u32]) -> Vec<u32> {
        let m = self.m;
        let mut order: Vec<u32> = Vec::new();
        let mut pos: HashMap<u32, u32> = HashMap::new();
        let mut key = Vec::new();
        let idx = |e: u32, order: &mut Vec<u32>, pos: &mut HashMap<u32, u32>| -> u32 {
            *pos.entry(e).or_insert_with(|| {
                order.push(e);
                order.len() as u32 - 1
            })
        };
        for &e in t {
            key.push(idx(e, &mut order, &mut pos));
        }
        for &c in &m.consts {
            key.push(idx(c, &mut order, &mut pos));
        }
        let mut i = 0;
        while i < order.len() {
            let e = order[i];
            for f in &m.funs {
                key.push(idx(f[e as usize], &mut order, &mut pos));
            }
            i += 1;
        }
        let d = order.len();
        key.push(u32::MAX);
        for (r, table) in m.rels.iter().enumerate() {
            let ar = m.sig.relations[r].1;
            for code in 0..d.pow(ar as u32) {
                let local = decode_tuple(d, ar, code);
                let global: Vec<u32> = local.iter().map(|&j| order[j as usize]).collect();
                key.push(u32::from(table[tuple_code(m.size(), &global)]));
            }
        }
        key
    }

    /// The depth-`q` type id of `t`.
    pub fn type_of(&mut self, q: usize, t: &[u32]) -> u32 {
        if let Some(&id) = self.memo.get(&(q, t.to_vec())) {
            return id;
        }
        let qf = self.qf_key(t);
        let id = if q == 0 {
            self.intern(0, qf)
        } else {
            let qf_id = self.intern(0, qf);
            let mut children = BTreeSet::new();
            let mut ext = t.to_vec();
            ext.push(0);
            for a in 0..self.m.size() as u32 {
                *ext.last_mut().unwrap() = a;
                children.insert(self.type_of(q - 1, &ext));
            }
            let mut key = vec![qf_id];
            key.extend(children);
            self.intern(q, key)
        };
        self.memo.insert((q, t.to_vec()), id);
        id
    }
}
