//! Text formats, command dispatch and JSON reports for the `situskit` binary.

use crate::dividing_lines::{self as dl, OrderConfig, RepresentMode, SequenceConfig, Verdict};
use crate::error::{Error, Guard, Result};
use crate::filters::{elements, SetMap};
use crate::fostruct::{self, FinStructure, Formula};
use crate::geometry::{self, FinMetric, FinTopology};
use crate::homlift::{exists_surjection, hom_set, lifting_property, Arrow, LiftingInstance};
use crate::indisc::Sigma;
use crate::ramsey;
use crate::simplex::{all_tuples, corepresented_by_preorder, terminal, FinPreorder, Morphism, Situs};
use crate::stone::{self, StoneVariant};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

// ---------------------------------------------------------------- scanning

fn perr(line: usize, col: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse { line, col, msg: msg.to_string() }
}

/// Non-blank lines with comments removed, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        (!l.trim().is_empty()).then_some((i + 1, l))
    })
}

fn col_of(line: &str, offset: usize) -> usize {
    line[..offset].chars().count() + 1
}

/// Whitespace-separated words of `line[from..]` with their 1-based columns.
fn words(line: &str, from: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line[from..].char_indices().map(|(i, c)| (i + from, c)).chain([(line.len(), ' ')]) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((col_of(line, s), &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    out
}

const RESERVED: [char; 6] = ['(', ')', ',', ':', '=', '#'];

fn check_name(line: usize, col: usize, name: &str) -> Result<()> {
    if name.is_empty() || name.contains(RESERVED) || name.contains("->") {
        return Err(perr(line, col, format!("invalid name {name:?}")));
    }
    Ok(())
}

/// Symbol names may contain `=` and `/`, as in `<=/2`.
fn check_symbol(line: usize, col: usize, name: &str) -> Result<()> {
    if name.is_empty() || name.contains(['(', ')', ',', ':', '#']) || name.contains(char::is_whitespace) {
        return Err(perr(line, col, format!("invalid symbol {name:?}")));
    }
    Ok(())
}

fn universe_line(line: usize, text: &str, keyword: &str) -> Result<Vec<String>> {
    let ws = words(text, 0);
    if ws[0].1 != keyword {
        return Err(perr(line, ws[0].0, format!("expected `{keyword}` first, found {:?}", ws[0].1)));
    }
    let mut names = Vec::new();
    for &(col, w) in &ws[1..] {
        check_name(line, col, w)?;
        if names.iter().any(|n| n == w) {
            return Err(perr(line, col, format!("duplicate element {w}")));
        }
        names.push(w.to_string());
    }
    Ok(names)
}

fn lookup(names: &[String], line: usize, col: usize, name: &str) -> Result<usize> {
    names.iter().position(|n| n == name).ok_or_else(|| perr(line, col, format!("unknown element {name}")))
}

/// Parenthesised tuples `(a,b) (c,d)` in `line[from..]`.
fn tuples(line: &str, from: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    let mut rest = from;
    loop {
        let skip = line[rest..].len() - line[rest..].trim_start().len();
        rest += skip;
        if rest >= line.len() {
            return Ok(out);
        }
        if !line[rest..].starts_with('(') {
            return Err(Error::Parse { line: 0, col: col_of(line, rest), msg: "expected `(`".into() });
        }
        let close = line[rest..]
            .find(')')
            .ok_or_else(|| Error::Parse { line: 0, col: col_of(line, rest), msg: "unclosed `(`".into() })?;
        let inner = &line[rest + 1..rest + close];
        out.push((col_of(line, rest), inner.split(',').map(|s| s.trim().to_string()).collect()));
        rest += close + 1;
    }
}

fn at_line(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { line: 0, col, msg } => Error::Parse { line, col, msg },
        e => e,
    }
}

// ---------------------------------------------------------------- structures

/// Parses `universe`, `rel R/k: (..)`, `fun f: a->b`, `const c = a` lines.
pub fn parse_structure(text: &str) -> Result<FinStructure> {
    let mut lines = content_lines(text);
    let (first, l0) = lines.next().ok_or_else(|| perr(1, 1, "empty structure file"))?;
    let names = universe_line(first, l0, "universe")?;
    let mut m = FinStructure::new(names.clone())?;
    for (no, line) in lines {
        let ws = words(line, 0);
        let (kcol, kw) = ws[0];
        let after = line.find(kw).unwrap() + kw.len();
        match kw {
            "rel" | "fun" => {
                let colon = line[after..].find(':').map(|c| c + after).ok_or_else(|| perr(no, kcol, "missing `:`"))?;
                let head = line[after..colon].trim();
                let hcol = col_of(line, after + line[after..].len() - line[after..].trim_start().len());
                if kw == "rel" {
                    let (name, arity) = head.rsplit_once('/').ok_or_else(|| perr(no, hcol, "expected NAME/ARITY"))?;
                    check_symbol(no, hcol, name)?;
                    let arity: usize = arity.trim().parse().map_err(|_| perr(no, hcol, format!("bad arity {arity:?}")))?;
                    let mut ts = Vec::new();
                    for (col, t) in tuples(line, colon + 1).map_err(|e| at_line(e, no))? {
                        if t.len() != arity {
                            return Err(perr(no, col, format!("tuple of length {} in {name}/{arity}", t.len())));
                        }
                        ts.push(t.iter().map(|v| lookup(&names, no, col, v).map(|i| i as u32)).collect::<Result<Vec<u32>>>()?);
                    }
                    m.add_relation(name, arity, &ts).map_err(|e| perr(no, hcol, e))?;
                } else {
                    check_symbol(no, hcol, head)?;
                    let mut table: Vec<Option<u32>> = vec![None; names.len()];
                    for (col, w) in words(line, colon + 1) {
                        let (a, b) = w.split_once("->").ok_or_else(|| perr(no, col, format!("expected a->b, found {w:?}")))?;
                        let a = lookup(&names, no, col, a)?;
                        let b = lookup(&names, no, col, b)? as u32;
                        if table[a].replace(b).is_some_and(|old| old != b) {
                            return Err(perr(no, col, format!("{} mapped twice", names[a])));
                        }
                    }
                    let total: Option<Vec<u32>> = table.iter().copied().collect();
                    let total = total.ok_or_else(|| perr(no, hcol, format!("function {head} is not total")))?;
                    m.add_function(head, total).map_err(|e| perr(no, hcol, e))?;
                }
            }
            "const" => {
                let ws = words(line, after);
                match ws.as_slice() {
                    [(ncol, name), (_, "="), (vcol, value)] => {
                        check_symbol(no, *ncol, name)?;
                        let v = lookup(&names, no, *vcol, value)? as u32;
                        m.add_constant(name, v).map_err(|e| perr(no, *ncol, e))?;
                    }
                    _ => return Err(perr(no, kcol, "expected `const NAME = ELEMENT`")),
                }
            }
            "universe" => return Err(perr(no, kcol, "universe declared twice")),
            _ => return Err(perr(no, kcol, format!("unknown keyword {kw:?}"))),
        }
    }
    Ok(m)
}

/// Canonical text of a structure.
pub fn write_structure(m: &FinStructure) -> String {
    let mut out = format!("universe {}\n", m.names().join(" "));
    let sig = m.signature();
    for (r, (name, arity)) in sig.relations.iter().enumerate() {
        out += &format!("rel {name}/{arity}:");
        for t in m.relation_tuples(r) {
            out += &format!(" ({})", t.iter().map(|&v| m.name(v)).collect::<Vec<_>>().join(","));
        }
        out.push('\n');
    }
    for (f, name) in sig.functions.iter().enumerate() {
        out += &format!("fun {name}:");
        for (a, &b) in m.function_table(f).iter().enumerate() {
            out += &format!(" {}->{}", m.name(a as u32), m.name(b));
        }
        out.push('\n');
    }
    for (c, name) in sig.constants.iter().enumerate() {
        out += &format!("const {name} = {}\n", m.name(m.constant_value(c)));
    }
    out
}

// ---------------------------------------------------------------- orders

/// Parses `universe a b` followed by `le a b` lines; the relation is their reflexive-transitive closure.
pub fn parse_order(text: &str) -> Result<FinPreorder> {
    let mut lines = content_lines(text);
    let (first, l0) = lines.next().ok_or_else(|| perr(1, 1, "empty order file"))?;
    let names = universe_line(first, l0, "universe")?;
    let mut pairs = Vec::new();
    for (no, line) in lines {
        match words(line, 0).as_slice() {
            [(_, "le"), (ac, a), (bc, b)] => pairs.push((lookup(&names, no, *ac, a)?, lookup(&names, no, *bc, b)?)),
            [(c, _), ..] => return Err(perr(no, *c, "expected `le A B`")),
            [] => unreachable!(),
        }
    }
    FinPreorder::generated(names, &pairs)
}

pub fn write_order(p: &FinPreorder) -> String {
    let mut out = format!("universe {}\n", p.labels().join(" "));
    for a in 0..p.len() {
        for b in 0..p.len() {
            if a != b && p.leq(a, b) {
                out += &format!("le {} {}\n", p.labels()[a], p.labels()[b]);
            }
        }
    }
    out
}

// ---------------------------------------------------------------- metrics and topologies

/// Parses `points a b c` followed by one `dist a b r` line per unordered pair.
pub fn parse_metric(text: &str) -> Result<FinMetric> {
    let mut lines = content_lines(text);
    let (first, l0) = lines.next().ok_or_else(|| perr(1, 1, "empty metric file"))?;
    let names = universe_line(first, l0, "points")?;
    let n = names.len();
    let zero = Rational64::from_integer(0);
    let mut dist: Vec<Vec<Option<Rational64>>> = (0..n).map(|i| (0..n).map(|j| (i == j).then_some(zero)).collect()).collect();
    let mut last = first;
    for (no, line) in lines {
        last = no;
        match words(line, 0).as_slice() {
            [(_, "dist"), (ac, a), (bc, b), (rc, r)] => {
                let (a, b) = (lookup(&names, no, *ac, a)?, lookup(&names, no, *bc, b)?);
                let r: Rational64 = r.parse().map_err(|_| perr(no, *rc, format!("bad distance {r:?}")))?;
                if a == b && r != zero {
                    return Err(perr(no, *rc, "distance from a point to itself must be 0"));
                }
                for (x, y) in [(a, b), (b, a)] {
                    if dist[x][y].replace(r).is_some_and(|old| old != r) {
                        return Err(perr(no, *rc, "distance given twice"));
                    }
                }
            }
            [(c, _), ..] => return Err(perr(no, *c, "expected `dist A B R`")),
            [] => unreachable!(),
        }
    }
    let mut table = Vec::with_capacity(n);
    for (i, row) in dist.into_iter().enumerate() {
        let row: Option<Vec<Rational64>> = row.into_iter().collect();
        table.push(row.ok_or_else(|| perr(last, 1, format!("missing distances from {}", names[i])))?);
    }
    FinMetric::new(names, table)
}

pub fn write_metric(m: &FinMetric) -> String {
    let mut out = format!("points {}\n", m.labels().join(" "));
    for a in 0..m.len() {
        for b in a + 1..m.len() {
            out += &format!("dist {} {} {}\n", m.labels()[a], m.labels()[b], m.dist(a, b));
        }
    }
    out
}

/// Parses `points a b` followed by `open a b` lines; the empty set and the whole space are implied.
pub fn parse_topology(text: &str) -> Result<FinTopology> {
    let mut lines = content_lines(text);
    let (first, l0) = lines.next().ok_or_else(|| perr(1, 1, "empty topology file"))?;
    let names = universe_line(first, l0, "points")?;
    let mut opens = vec![vec![], (0..names.len()).collect()];
    for (no, line) in lines {
        let ws = words(line, 0);
        if ws[0].1 != "open" {
            return Err(perr(no, ws[0].0, "expected `open ELEMENTS`"));
        }
        let mut o: Vec<usize> = ws[1..].iter().map(|&(c, w)| lookup(&names, no, c, w)).collect::<Result<_>>()?;
        o.sort_unstable();
        o.dedup();
        opens.push(o);
    }
    FinTopology::new(names, opens)
}

pub fn write_topology(t: &FinTopology) -> String {
    let mut out = format!("points {}\n", t.labels().join(" "));
    for o in t.opens() {
        let e = elements(o);
        if !e.is_empty() && e.len() < t.len() {
            out += &format!("open {}\n", e.iter().map(|&i| t.labels()[i].as_str()).collect::<Vec<_>>().join(" "));
        }
    }
    out
}

// ---------------------------------------------------------------- workspace

/// A loaded input file.
#[derive(Clone, Debug)]
pub enum Object {
    Structure(FinStructure),
    Order(FinPreorder),
    Metric(FinMetric),
    Topology(FinTopology),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Structure(_) => "structure",
            Object::Order(_) => "order",
            Object::Metric(_) => "metric",
            Object::Topology(_) => "topology",
        }
    }

    /// Parses by extension: `.struct`, `.order`, `.metric`, `.topo`.
    pub fn parse(path: &Path, text: &str) -> Result<Object> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("struct") => parse_structure(text).map(Object::Structure),
            Some("order") => parse_order(text).map(Object::Order),
            Some("metric") => parse_metric(text).map(Object::Metric),
            Some("topo") => parse_topology(text).map(Object::Topology),
            _ => Err(Error::domain(format!("{}: unknown file kind (use .struct, .order, .metric or .topo)", path.display()))),
        }
    }

    pub fn write(&self) -> String {
        match self {
            Object::Structure(m) => write_structure(m),
            Object::Order(p) => write_order(p),
            Object::Metric(m) => write_metric(m),
            Object::Topology(t) => write_topology(t),
        }
    }
}

/// Named objects loaded from files; names are file stems.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    objects: BTreeMap<String, Object>,
}

impl Workspace {
    pub fn load(paths: &[&Path]) -> Result<Workspace> {
        let mut ws = Workspace::default();
        for path in paths {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let obj = Object::parse(path, &text).map_err(|e| match e {
                Error::Parse { line, col, msg } => Error::Parse { line, col, msg: format!("{}: {msg}", path.display()) },
                e => e,
            })?;
            ws.insert(&stem(path), obj)?;
        }
        Ok(ws)
    }

    pub fn insert(&mut self, name: &str, obj: Object) -> Result<()> {
        if self.objects.contains_key(name) {
            return Err(Error::domain(format!("two inputs named {name}")));
        }
        self.objects.insert(name.to_string(), obj);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Object> {
        self.objects.get(name).ok_or_else(|| Error::UnknownName(format!("input {name}")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(|k| k.as_str())
    }

    pub fn structure(&self, name: &str) -> Result<&FinStructure> {
        match self.get(name)? {
            Object::Structure(m) => Ok(m),
            o => Err(Error::domain(format!("{name} is a {}, expected a structure", o.kind()))),
        }
    }

    pub fn metric(&self, name: &str) -> Result<&FinMetric> {
        match self.get(name)? {
            Object::Metric(m) => Ok(m),
            o => Err(Error::domain(format!("{name} is a {}, expected a metric", o.kind()))),
        }
    }

    pub fn topology(&self, name: &str) -> Result<&FinTopology> {
        match self.get(name)? {
            Object::Topology(t) => Ok(t),
            o => Err(Error::domain(format!("{name} is a {}, expected a topology", o.kind()))),
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

// ---------------------------------------------------------------- command line

#[derive(Parser, Debug)]
#[command(name = "situskit", version, about = "Simplicial filters, Stone spaces of finite structures and lifting checks")]
pub struct Cli {
    /// Lift the resource guards on enumeration sizes.
    #[arg(long, global = true)]
    pub guard_override: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Oracle and lifting verdicts for one property.
    Check(CheckArgs),
    /// All morphisms between two objects.
    Hom(PairArgs),
    /// Whether `i: A → B` lifts against `p: C → D`.
    Lift(LiftArgs),
    /// A morphism surjective on every level, if one exists.
    Surject(PairArgs),
    /// Simplicial identities and continuity of a constructed object.
    Validate(ValidateArgs),
    /// Exhaustive search for edge colorings without a homogeneous clique.
    Ramsey(RamseyArgs),
    /// Whether a map represents one structure in another.
    Represent(RepresentArgs),
    /// The unary-function reduct of a structure.
    Reduct(ReductArgs),
    /// Automorphism orbits on tuples.
    Orbits(OrbitArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Property {
    Stability,
    EventualStability,
    Nip,
    Op,
    Nsop,
    NonDividing,
    Ntp,
    Complete,
    Compact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Extendable,
    Plain,
    Consecutive,
    ConsecutivePlain,
}

impl VariantArg {
    fn variant(self) -> StoneVariant {
        match self {
            VariantArg::Extendable => StoneVariant::Extendable,
            VariantArg::Plain => StoneVariant::Plain,
            VariantArg::Consecutive => StoneVariant::Consecutive,
            VariantArg::ConsecutivePlain => StoneVariant::ConsecutivePlain,
        }
    }
}

/// Settings shared by the object builders.
#[derive(Args, Debug, Clone, Default)]
pub struct SpaceArgs {
    /// Truncation depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Distinct-element target `N` of Stone spaces.
    #[arg(long)]
    pub distinct: Option<usize>,
    /// Quantifier depth of formula cutoffs.
    #[arg(long)]
    pub qdepth: Option<usize>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Formulas defining Σ for Stone spaces (repeatable).
    #[arg(long)]
    pub sigma: Vec<String>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub property: Property,
    #[arg(long)]
    pub model: PathBuf,
    /// Formula under test (repeatable).
    #[arg(long)]
    pub formula: Vec<String>,
    /// Length of the index chain.
    #[arg(long)]
    pub chain: Option<usize>,
    #[arg(long)]
    pub tail_start: Option<usize>,
    /// Sequence length for the order property, inconsistency width for trees.
    #[arg(long)]
    pub k: Option<usize>,
    /// Parameter set `A` as comma-separated elements.
    #[arg(long, value_delimiter = ',')]
    pub a_set: Vec<String>,
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    /// Length of the indiscernible sequences for non-dividing.
    #[arg(long)]
    pub len: Option<usize>,
    #[arg(long)]
    pub branching: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Length of the increasing chain of opens for compactness.
    #[arg(long)]
    pub alpha: Option<usize>,
    #[command(flatten)]
    pub space: SpaceArgs,
}

#[derive(Args, Debug)]
pub struct PairArgs {
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long)]
    pub to: PathBuf,
    #[command(flatten)]
    pub space: SpaceArgs,
}

#[derive(Args, Debug)]
pub struct LiftArgs {
    #[arg(long)]
    pub left_source: PathBuf,
    #[arg(long)]
    pub left_target: PathBuf,
    /// Vertex map `a:x,b:y`; defaults to matching labels.
    #[arg(long)]
    pub left_map: Option<String>,
    #[arg(long)]
    pub right_source: PathBuf,
    /// Defaults to the terminal object.
    #[arg(long)]
    pub right_target: Option<PathBuf>,
    #[arg(long)]
    pub right_map: Option<String>,
    #[command(flatten)]
    pub space: SpaceArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectKind {
    Stone,
    Quotient,
    Consistency,
    Order,
    Metric,
    Covering,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub object: ObjectKind,
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub space: SpaceArgs,
}

#[derive(Args, Debug)]
pub struct RamseyArgs {
    #[arg(long, default_value_t = 6)]
    pub atoms: usize,
    #[arg(long, default_value_t = 2)]
    pub colors: usize,
    #[arg(long, default_value_t = 3)]
    pub clique: usize,
}

#[derive(Args, Debug)]
pub struct RepresentArgs {
    /// The structure `I` carrying the sequences.
    #[arg(long)]
    pub model: PathBuf,
    /// The represented structure `M`.
    #[arg(long)]
    pub target: PathBuf,
    /// Carrier map `a:x,b:y`; defaults to matching labels.
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long, default_value = "em-infinity")]
    pub mode: String,
    #[arg(long, default_value_t = 3)]
    pub len: usize,
    /// Quantifier depth of types in the target; orbits when omitted.
    #[arg(long)]
    pub mdepth: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ReductArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Also write the reduct as a structure file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub arity: usize,
    /// Elements fixed pointwise, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub fix: Vec<String>,
}

/// A report and the process exit code: 0 ran, 1 property fails, 2 error.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub exit: i32,
}

impl Outcome {
    fn verdict(v: bool, report: Value) -> Outcome {
        Outcome { report, exit: if v { 0 } else { 1 } }
    }
}

/// Sorted-key JSON text.
pub fn render(report: &Value) -> String {
    serde_json::to_string_pretty(report).expect("values serialize")
}

/// Captured output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses arguments, runs the command and renders the report.
pub fn main_with<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Output { stdout: text, stderr: String::new(), code }
            } else {
                Output { stdout: String::new(), stderr: text, code }
            }
        }
        Ok(cli) => match run(&cli) {
            Ok(o) => Output { stdout: render(&o.report) + "\n", stderr: String::new(), code: o.exit },
            Err(e) => Output { stdout: String::new(), stderr: render(&error_report(&e)) + "\n", code: 2 },
        },
    }
}

pub fn error_report(e: &Error) -> Value {
    let kind = match e {
        Error::Domain(_) => "domain",
        Error::Validation(_) => "validation",
        Error::Depth(_) => "depth",
        Error::Resource { .. } => "resource",
        Error::Precondition(_) => "precondition",
        Error::Parse { .. } => "parse",
        Error::UnknownName(_) => "unknown_name",
        Error::Io(_) => "io",
    };
    let mut v = json!({ "error": kind, "message": e.to_string() });
    match e {
        Error::Parse { line, col, .. } => {
            v["line"] = json!(line);
            v["column"] = json!(col);
        }
        Error::Resource { what, value, bound } => {
            v["bound"] = json!({ "what": what, "value": value, "limit": bound });
        }
        _ => {}
    }
    v
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("values serialize")
}

fn parse_formulas(texts: &[String], m: &FinStructure) -> Result<Vec<Formula>> {
    texts.iter().map(|t| Formula::parse_in(t, m.signature())).collect()
}

/// Signature binary relations read as `x R y`.
fn default_formulas(m: &FinStructure) -> Vec<Formula> {
    m.signature().relations.iter().filter(|(_, a)| *a == 2).map(|(n, _)| Formula::binary(n)).collect()
}

fn element(m: &FinStructure, name: &str) -> Result<u32> {
    m.element(name).map_err(|_| Error::UnknownName(format!("element {name}")))
}

fn load_one(path: &Path) -> Result<(Workspace, String)> {
    Ok((Workspace::load(&[path])?, stem(path)))
}

/// Runs one command.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let guard = if cli.guard_override { Guard::overridden() } else { Guard::default() };
    match &cli.command {
        Command::Check(a) => check(a, &guard),
        Command::Hom(a) => hom(a, &guard),
        Command::Lift(a) => lift(a, &guard),
        Command::Surject(a) => surject(a, &guard),
        Command::Validate(a) => validate(a, &guard),
        Command::Ramsey(a) => {
            let r = ramsey::ramsey_sweep(a.atoms, a.colors, a.clique, &guard)?;
            Ok(Outcome::verdict(r.always_homogeneous, to_value(&r)))
        }
        Command::Represent(a) => represent(a, &guard),
        Command::Reduct(a) => reduct(a),
        Command::Orbits(a) => orbits(a, &guard),
    }
}

fn verdict_report(mut v: Verdict, model: &Path, formulas: &[String]) -> Outcome {
    v.config.insert("model".into(), json!(model.display().to_string()));
    if !formulas.is_empty() {
        v.config.insert("formulas".into(), json!(formulas));
    }
    let holds = v.holds;
    Outcome::verdict(holds, to_value(&v))
}

fn check(a: &CheckArgs, guard: &Guard) -> Result<Outcome> {
    let (ws, name) = load_one(&a.model)?;
    let s = &a.space;
    let v = match a.property {
        Property::Complete => {
            let m = ws.metric(&name)?;
            let chain = a.chain.unwrap_or(m.len() + 2);
            geometry::is_complete_lp(m, chain, a.tail_start.unwrap_or(1), s.depth.unwrap_or(2), guard)?
        }
        Property::Compact => {
            let t = ws.topology(&name)?;
            geometry::compactness_lp(t, a.alpha.unwrap_or(2), s.depth.unwrap_or(3), guard)?
        }
        prop => {
            let m = ws.structure(&name)?;
            let formulas = parse_formulas(&a.formula, m)?;
            let seq = || {
                let d = SequenceConfig::for_structure(m);
                SequenceConfig {
                    chain: a.chain.unwrap_or(d.chain),
                    distinct: s.distinct.unwrap_or(d.distinct),
                    depth: s.depth.unwrap_or(d.depth),
                    tail_start: a.tail_start.unwrap_or(d.tail_start),
                    qdepth: s.qdepth.unwrap_or(d.qdepth),
                    arity: d.arity,
                    variant: s.variant.map_or(d.variant, VariantArg::variant),
                }
            };
            let ord = || {
                let d = OrderConfig::for_structure(m, a.k.unwrap_or(2));
                OrderConfig {
                    qdepth: s.qdepth.unwrap_or(d.qdepth),
                    distinct: s.distinct.unwrap_or(d.distinct),
                    depth: s.depth.unwrap_or(d.depth),
                    variant: s.variant.map_or(d.variant, VariantArg::variant),
                    ..d
                }
            };
            let phis = if formulas.is_empty() { default_formulas(m) } else { formulas };
            match prop {
                Property::Stability => dl::stability(m, &phis, &seq(), guard)?,
                Property::EventualStability => dl::eventual_stability(m, &phis, &seq(), guard)?,
                Property::Nip => dl::nip(m, &seq(), guard)?,
                Property::Op => dl::op(m, &ord(), guard)?,
                Property::Nsop => dl::nsop(m, &ord(), guard)?,
                Property::NonDividing => {
                    let need = |flag: &str| Error::precondition(format!("non-dividing needs --{flag}"));
                    let a_set = a.a_set.iter().map(|e| element(m, e)).collect::<Result<Vec<_>>>()?;
                    let x = element(m, a.a.as_deref().ok_or_else(|| need("a"))?)?;
                    let y = element(m, a.b.as_deref().ok_or_else(|| need("b"))?)?;
                    dl::non_dividing(m, &a_set, x, y, a.len.unwrap_or(2), guard)?
                }
                Property::Ntp => {
                    let phi = phis.first().ok_or_else(|| Error::precondition("ntp needs --formula"))?;
                    dl::tree_property(m, phi, a.branching.unwrap_or(2), a.height.unwrap_or(2), a.k.unwrap_or(2), guard)?
                }
                Property::Complete | Property::Compact => unreachable!(),
            }
        }
    };
    Ok(verdict_report(v, &a.model, &a.formula))
}

/// The situs an input file stands for.
fn situs_of(obj: &Object, s: &SpaceArgs, guard: &Guard) -> Result<Situs> {
    let depth = s.depth.unwrap_or(3);
    match obj {
        Object::Order(p) => corepresented_by_preorder(p, depth, None),
        Object::Metric(m) => geometry::metric_situs(m, depth, guard),
        Object::Topology(t) => geometry::covering_situs(t, depth, guard),
        Object::Structure(m) => {
            let sigma = sigma_of(m, s)?;
            let variant = s.variant.map_or(StoneVariant::Extendable, VariantArg::variant);
            stone::stone_space(m, &sigma, variant, s.distinct.unwrap_or(m.size()), depth, guard)
        }
    }
}

fn sigma_of(m: &FinStructure, s: &SpaceArgs) -> Result<Sigma> {
    if s.sigma.is_empty() {
        Ok(Sigma::cutoff(m, &[], s.qdepth.unwrap_or(1), 2))
    } else {
        Sigma::from_formulas(m, &parse_formulas(&s.sigma, m)?)
    }
}

/// Effective builder settings; `universe` fills the default `N`.
fn space_config(s: &SpaceArgs, universe: Option<usize>) -> Value {
    json!({
        "depth": s.depth.unwrap_or(3),
        "distinct": s.distinct.or(universe),
        "qdepth": s.qdepth.unwrap_or(1),
        "sigma": s.sigma,
        "variant": s.variant.map_or(StoneVariant::Extendable, VariantArg::variant).name(),
    })
}

fn universe_of(obj: &Object) -> Option<usize> {
    match obj {
        Object::Structure(m) => Some(m.size()),
        _ => None,
    }
}

fn vertex_assignment(map: &Morphism, x: &Situs, y: &Situs) -> Value {
    let mut out = serde_json::Map::new();
    for (a, &b) in map.level(1).iter().enumerate() {
        out.insert(x.show(1, a), json!(y.show(1, b)));
    }
    Value::Object(out)
}

/// The situs of one input file and its builder config.
fn load_situs(path: &Path, s: &SpaceArgs, guard: &Guard) -> Result<(Situs, Value)> {
    let (ws, name) = load_one(path)?;
    let obj = ws.get(&name)?;
    let mut c = space_config(s, universe_of(obj));
    c["file"] = json!(path.display().to_string());
    c["kind"] = json!(obj.kind());
    Ok((situs_of(obj, s, guard)?, c))
}

fn load_pair(from: &Path, to: &Path, s: &SpaceArgs, guard: &Guard) -> Result<(Situs, Situs, Value)> {
    let (x, cx) = load_situs(from, s, guard)?;
    let (y, cy) = load_situs(to, s, guard)?;
    Ok((x, y, json!({ "from": cx, "to": cy })))
}

fn hom(a: &PairArgs, guard: &Guard) -> Result<Outcome> {
    let (x, y, config) = load_pair(&a.from, &a.to, &a.space, guard)?;
    let homs = hom_set(&x, &y, guard)?;
    let maps: Vec<Value> = homs.iter().map(|h| vertex_assignment(h, &x, &y)).collect();
    Ok(Outcome::verdict(true, json!({ "count": homs.len(), "morphisms": maps, "config": config })))
}

fn surject(a: &PairArgs, guard: &Guard) -> Result<Outcome> {
    let (x, y, config) = load_pair(&a.from, &a.to, &a.space, guard)?;
    let found = exists_surjection(&x, &y, guard)?;
    let map = found.as_ref().map(|h| vertex_assignment(h, &x, &y));
    Ok(Outcome::verdict(
        found.is_some(),
        json!({ "exists": found.is_some(), "morphism": map, "config": config }),
    ))
}

/// Vertex map from `a:x,b:y` text, or by matching labels.
fn vertex_map(x: &Situs, y: &Situs, text: Option<&str>) -> Result<Vec<usize>> {
    let find = |labels: &[String], name: &str| {
        labels.iter().position(|l| l == name).ok_or_else(|| Error::UnknownName(format!("vertex {name}")))
    };
    match text {
        None => x.labels().iter().map(|l| find(y.labels(), l)).collect(),
        Some(t) => {
            let mut map = vec![None; x.labels().len()];
            for pair in t.split(',').filter(|p| !p.trim().is_empty()) {
                let (a, b) = pair.split_once(':').ok_or_else(|| Error::domain(format!("expected a:x, found {pair:?}")))?;
                map[find(x.labels(), a.trim())?] = Some(find(y.labels(), b.trim())?);
            }
            map.into_iter()
                .enumerate()
                .map(|(i, v)| v.ok_or_else(|| Error::domain(format!("vertex {} is not mapped", x.labels()[i]))))
                .collect()
        }
    }
}

fn lift(a: &LiftArgs, guard: &Guard) -> Result<Outcome> {
    let s = &a.space;
    let (src, csrc) = load_situs(&a.left_source, s, guard)?;
    let (tgt, ctgt) = load_situs(&a.left_target, s, guard)?;
    let (rsrc, crsrc) = load_situs(&a.right_source, s, guard)?;
    let (rtgt, crtgt) = match &a.right_target {
        Some(p) => load_situs(p, s, guard)?,
        None => (terminal(s.depth.unwrap_or(3)), json!("terminal")),
    };
    let i = Arrow::new(&src, &tgt, Morphism::from_vertex_map(&src, &tgt, &vertex_map(&src, &tgt, a.left_map.as_deref())?)?)?;
    let p = match &a.right_target {
        None => Arrow::to_terminal(&rsrc, &rtgt)?,
        Some(_) => {
            let m = vertex_map(&rsrc, &rtgt, a.right_map.as_deref())?;
            Arrow::new(&rsrc, &rtgt, Morphism::from_vertex_map(&rsrc, &rtgt, &m)?)?
        }
    };
    let out = lifting_property(&LiftingInstance { i, p }, guard)?;
    let witness = out.witness.as_ref().map(|sq| json!({ "top": vertex_assignment(&sq.f, &src, &rsrc), "bottom": vertex_assignment(&sq.g, &tgt, &rtgt) }));
    let config = json!({ "left_source": csrc, "left_target": ctgt, "right_source": crsrc, "right_target": crtgt });
    Ok(Outcome::verdict(out.holds, json!({ "holds": out.holds, "squares": out.squares, "witness": witness, "config": config })))
}

fn validate(a: &ValidateArgs, guard: &Guard) -> Result<Outcome> {
    let (ws, name) = load_one(&a.model)?;
    let s = &a.space;
    let depth = s.depth.unwrap_or(3);
    let x = match a.object {
        ObjectKind::Stone => situs_of(&Object::Structure(ws.structure(&name)?.clone()), s, guard)?,
        ObjectKind::Quotient => {
            let m = ws.structure(&name)?;
            let x = situs_of(&Object::Structure(m.clone()), s, guard)?;
            stone::stone_quotient(&x, m, &[], guard)?.0
        }
        ObjectKind::Consistency => {
            let m = ws.structure(&name)?;
            let phi = parse_formulas(&s.sigma, m)?
                .into_iter()
                .next()
                .ok_or_else(|| Error::precondition("consistency space needs --sigma"))?;
            stone::consistency_space(m, &phi, depth, guard)?
        }
        ObjectKind::Order => match ws.get(&name)? {
            o @ Object::Order(_) => situs_of(o, s, guard)?,
            o => return Err(Error::domain(format!("{name} is a {}, expected an order", o.kind()))),
        },
        ObjectKind::Metric => geometry::metric_situs(ws.metric(&name)?, depth, guard)?,
        ObjectKind::Covering => geometry::covering_situs(ws.topology(&name)?, depth, guard)?,
    };
    let violations = x.validate();
    let mut config = space_config(s, universe_of(ws.get(&name)?));
    config["model"] = json!(a.model.display().to_string());
    let object = a.object.to_possible_value().expect("named").get_name().to_string();
    let report = json!({
        "object": object,
        "status": if violations.is_empty() { "ok" } else { "invalid" },
        "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "sizes": (1..=x.depth()).map(|n| x.size(n)).collect::<Vec<_>>(),
        "config": config,
    });
    Ok(Outcome::verdict(violations.is_empty(), report))
}

fn represent(a: &RepresentArgs, guard: &Guard) -> Result<Outcome> {
    let ws = Workspace::load(&[&a.model, &a.target])?;
    let i = ws.structure(&stem(&a.model))?;
    let m = ws.structure(&stem(&a.target))?;
    let find = |s: &FinStructure, n: &str| element(s, n).map(|v| v as usize);
    let table: Vec<usize> = match &a.map {
        None => i.names().iter().map(|n| find(m, n)).collect::<Result<_>>()?,
        Some(t) => {
            let mut table = vec![None; i.size()];
            for pair in t.split(',').filter(|p| !p.trim().is_empty()) {
                let (x, y) = pair.split_once(':').ok_or_else(|| Error::domain(format!("expected a:x, found {pair:?}")))?;
                table[find(i, x.trim())?] = Some(find(m, y.trim())?);
            }
            table
                .into_iter()
                .enumerate()
                .map(|(k, v)| v.ok_or_else(|| Error::domain(format!("element {} is not mapped", i.name(k as u32)))))
                .collect::<Result<_>>()?
        }
    };
    let f = SetMap::new(i.size(), m.size(), table)?;
    let mode = RepresentMode::parse(&a.mode)?;
    let ok = dl::em_represents(i, m, &f, mode, a.len, a.mdepth, guard)?;
    let config = json!({
        "model": a.model.display().to_string(),
        "target": a.target.display().to_string(),
        "mode": mode.name(),
        "len": a.len,
        "mdepth": a.mdepth,
        "map": f.table().iter().enumerate().map(|(x, &y)| (i.name(x as u32).to_string(), json!(m.name(y as u32)))).collect::<serde_json::Map<_, _>>(),
    });
    Ok(Outcome::verdict(ok, json!({ "represents": ok, "config": config })))
}

fn reduct(a: &ReductArgs) -> Result<Outcome> {
    let (ws, name) = load_one(&a.model)?;
    let m = ws.structure(&name)?;
    let words: Vec<String> = dl::function_closure(m).into_iter().map(|(w, _)| w).collect();
    let r = dl::unary_reduct(m);
    let text = write_structure(&r);
    if let Some(out) = &a.out {
        std::fs::write(out, &text).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    }
    Ok(Outcome::verdict(
        true,
        json!({ "functions": words, "relations": r.signature().relations.len(), "structure": text, "config": { "model": a.model.display().to_string() } }),
    ))
}

fn orbits(a: &OrbitArgs, guard: &Guard) -> Result<Outcome> {
    let (ws, name) = load_one(&a.model)?;
    let m = ws.structure(&name)?;
    let fixed = a.fix.iter().map(|e| element(m, e)).collect::<Result<Vec<_>>>()?;
    guard.carrier(m.size().saturating_pow(a.arity as u32))?;
    let ids = fostruct::type_orbits(m, &fixed, a.arity, guard)?;
    let mut groups: Vec<Vec<String>> = Vec::new();
    for (t, &o) in all_tuples(m.size(), a.arity).iter().zip(&ids) {
        if groups.len() <= o {
            groups.resize(o + 1, Vec::new());
        }
        groups[o].push(m.show(t));
    }
    Ok(Outcome::verdict(
        true,
        json!({ "count": groups.len(), "orbits": groups, "config": { "model": a.model.display().to_string(), "arity": a.arity, "fix": a.fix } }),
    ))
}
