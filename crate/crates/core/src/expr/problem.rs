//! Problem documents.
//!
//! A document is line-oriented: `[mapping <name>]`, `[anchor]`,
//! `[schedule]` and `[task <id>]` sections hold `key = value` pairs, `#`
//! starts a comment outside quotes, and a top-level `use = "ex-…"` preloads
//! a catalog example whose sections the rest of the document may extend or
//! override.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::parse_expr;
use crate::convexity::{MaxAffineFn, MaxAffineMap};
use crate::error::{Error, Result};
use crate::linalg::{parse_numbers, Matrix};
use crate::mappings::{Compose, Fan, FanHull, LinearOp, Mapping, PHMapping, SetValuedMap, SingleMap};
use crate::rates::SamplingSchedule;
use crate::spaces::{Norm, NormKind};

/// Seed for the homogeneity check of declared p.h. mappings.
const PH_CHECK_SEED: u64 = 7;

/// Outcome a task is declared to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Pass,
    Fail,
    /// Reported only; never affects the exit code.
    Any,
}

impl FromStr for Expect {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pass" => Ok(Expect::Pass),
            "fail" => Ok(Expect::Fail),
            "any" => Ok(Expect::Any),
            _ => Err(format!("expect must be pass, fail or any, got `{s}`")),
        }
    }
}

/// Operations a task may request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Op {
    CertifySms,
    IsolatedCalmness,
    SharpMin,
    DescentRate,
    DisplacementRate,
    Calmness,
    Injectivity,
    Banach,
    Composition,
    Perturbation,
    EpsApprox,
    Prederivative,
    SmoothKernel,
    ConvexScalarization,
    FrechetScalarization,
    SharpMinConvex,
    Intrad,
    GeneqIsolatedCalmness,
    GeneqSingleValuedField,
    GeneqScalarized,
}

/// Keys every task accepts besides its op-specific ones.
const COMMON_KEYS: [&str; 5] = ["op", "expect", "xbar", "ybar", "tau"];

impl Op {
    pub const ALL: [Op; 20] = [
        Op::CertifySms,
        Op::IsolatedCalmness,
        Op::SharpMin,
        Op::DescentRate,
        Op::DisplacementRate,
        Op::Calmness,
        Op::Injectivity,
        Op::Banach,
        Op::Composition,
        Op::Perturbation,
        Op::EpsApprox,
        Op::Prederivative,
        Op::SmoothKernel,
        Op::ConvexScalarization,
        Op::FrechetScalarization,
        Op::SharpMinConvex,
        Op::Intrad,
        Op::GeneqIsolatedCalmness,
        Op::GeneqSingleValuedField,
        Op::GeneqScalarized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Op::CertifySms => "certify-sms",
            Op::IsolatedCalmness => "isolated-calmness",
            Op::SharpMin => "sharp-min",
            Op::DescentRate => "descent-rate",
            Op::DisplacementRate => "displacement-rate",
            Op::Calmness => "calmness",
            Op::Injectivity => "injectivity",
            Op::Banach => "banach",
            Op::Composition => "composition",
            Op::Perturbation => "perturbation",
            Op::EpsApprox => "eps-approx",
            Op::Prederivative => "prederivative",
            Op::SmoothKernel => "smooth-kernel",
            Op::ConvexScalarization => "convex-scalarization",
            Op::FrechetScalarization => "frechet-scalarization",
            Op::SharpMinConvex => "sharp-min-convex",
            Op::Intrad => "intrad",
            Op::GeneqIsolatedCalmness => "geneq-isolated-calmness",
            Op::GeneqSingleValuedField => "geneq-single-valued-field",
            Op::GeneqScalarized => "geneq-scalarized",
        }
    }

    /// Keys naming declared mappings, required first, then optional.
    pub fn mapping_keys(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Op::Composition => (&["inner", "outer"], &[]),
            Op::Perturbation => (&["map", "perturbation"], &[]),
            Op::EpsApprox => (&["map", "approx"], &[]),
            Op::Prederivative => (&["map", "fan"], &[]),
            Op::GeneqIsolatedCalmness | Op::GeneqSingleValuedField => (&["base"], &["fan"]),
            Op::GeneqScalarized => (&["base", "convex"], &["fan"]),
            _ => (&["map"], &[]),
        }
    }

    /// Op-specific scalar keys.
    fn extra_keys(self) -> &'static [&'static str] {
        match self {
            Op::Injectivity => &["samples"],
            Op::Prederivative => &["delta"],
            Op::SmoothKernel => &["fd_step"],
            Op::ConvexScalarization => &["cone"],
            Op::FrechetScalarization => &["directions"],
            Op::Intrad => &["cone", "directions"],
            Op::GeneqIsolatedCalmness | Op::GeneqSingleValuedField | Op::GeneqScalarized => {
                &["field", "lo", "hi", "cone", "delta", "zeta"]
            }
            _ => &[],
        }
    }

    fn is_geneq(self) -> bool {
        matches!(self, Op::GeneqIsolatedCalmness | Op::GeneqSingleValuedField | Op::GeneqScalarized)
    }

    /// Anchor-free ops evaluate at the origin unless `xbar` is given.
    fn needs_anchor(self) -> bool {
        !matches!(self, Op::Injectivity | Op::Banach)
    }

    fn allows(self, key: &str) -> bool {
        let (req, opt) = self.mapping_keys();
        COMMON_KEYS.contains(&key) || req.contains(&key) || opt.contains(&key) || self.extra_keys().contains(&key)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Op {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Op::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::UnknownOperation(s.to_string()))
    }
}

/// A declared mapping, resolved to its concrete type.
#[derive(Debug, Clone)]
pub enum MappingDecl {
    Expr(SingleMap),
    Linear(LinearOp),
    Ph(PHMapping),
    Fan(Fan),
    SetValued(SetValuedMap),
    MaxAffine(MaxAffineMap),
    /// `outer ∘ inner` over two other declarations.
    Composed { outer: String, inner: String, map: Mapping },
}

impl MappingDecl {
    pub fn handle(&self) -> Mapping {
        match self {
            MappingDecl::Expr(m) => Arc::new(m.clone()),
            MappingDecl::Linear(m) => Arc::new(m.clone()),
            MappingDecl::Ph(m) => Arc::new(m.clone()),
            MappingDecl::Fan(m) => Arc::new(m.clone()),
            MappingDecl::SetValued(m) => Arc::new(m.clone()),
            MappingDecl::MaxAffine(m) => Arc::new(m.clone()),
            MappingDecl::Composed { map, .. } => Arc::clone(map),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MappingDecl::Expr(_) => "expr",
            MappingDecl::Linear(_) => "linear",
            MappingDecl::Ph(_) => "ph",
            MappingDecl::Fan(_) => "fan",
            MappingDecl::SetValued(_) => "setvalued",
            MappingDecl::MaxAffine(_) => "maxaffine",
            MappingDecl::Composed { .. } => "compose",
        }
    }

    pub fn dim_in(&self) -> usize {
        self.handle().dim_in()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Anchor {
    pub xbar: Option<Vec<f64>>,
    pub ybar: Option<Vec<f64>>,
    pub pbar: Option<Vec<f64>>,
}

/// One requested operation. `keys` holds every key of the section except
/// `op` and `expect`, already checked against the op.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: String,
    pub op: Op,
    pub expect: Expect,
    pub keys: BTreeMap<String, String>,
    pub line: usize,
}

impl TaskSpec {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.keys.get(key).map(String::as_str)
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| Error::Document {
                    line: self.line,
                    message: format!("task {}: `{key}` must be a number, got `{v}`", self.id),
                })
            })
            .transpose()
    }

    pub fn vector(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| numbers(v, self.line)).transpose()
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    /// Catalog example preloaded with `use`.
    pub example: Option<String>,
    pub mappings: BTreeMap<String, MappingDecl>,
    pub anchor: Anchor,
    pub schedule: SamplingSchedule,
    pub tasks: Vec<TaskSpec>,
    /// Compositions awaiting their factors: `(name, outer, inner, line)`.
    pending: Vec<(String, String, String, usize)>,
}

impl ProblemSpec {
    pub fn mapping(&self, name: &str) -> Result<&MappingDecl> {
        self.mappings.get(name).ok_or_else(|| Error::UnknownMapping(name.to_string()))
    }

    /// `x̄` of a task: its own `xbar`, else the anchor's.
    pub fn xbar(&self, t: &TaskSpec) -> Result<Option<Vec<f64>>> {
        Ok(t.vector("xbar")?.or_else(|| self.anchor.xbar.clone()))
    }

    pub fn ybar(&self, t: &TaskSpec) -> Result<Option<Vec<f64>>> {
        Ok(t.vector("ybar")?.or_else(|| self.anchor.ybar.clone()))
    }
}

fn doc_err(line: usize, message: impl Into<String>) -> Error {
    Error::Document {
        line,
        message: message.into(),
    }
}

fn numbers(v: &str, line: usize) -> Result<Vec<f64>> {
    let out = parse_numbers(v).map_err(|e| doc_err(line, e.to_string()))?;
    if out.is_empty() {
        return Err(doc_err(line, "expected at least one number"));
    }
    Ok(out)
}

/// Rows separated by `;`, entries by `,` or whitespace.
fn matrix(v: &str, line: usize) -> Result<Matrix> {
    let rows = v
        .split(';')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| numbers(r, line))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(&rows).map_err(|e| doc_err(line, e.to_string()))
}

fn norm(v: &str, line: usize) -> Result<Norm> {
    match v {
        "l1" => Ok(Norm::new(NormKind::L1)),
        "l2" => Ok(Norm::new(NormKind::L2)),
        "linf" => Ok(Norm::new(NormKind::Linf)),
        _ => Err(doc_err(line, format!("norm must be l1, l2 or linf, got `{v}`"))),
    }
}

/// Strips a trailing comment, ignoring `#` inside double quotes.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(v: &str, line: usize) -> Result<String> {
    let v = v.trim();
    match v.strip_prefix('"') {
        Some(rest) => rest
            .strip_suffix('"')
            .map(str::to_string)
            .ok_or_else(|| doc_err(line, "unterminated string")),
        None => Ok(v.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Header {
    Mapping(String),
    Anchor,
    Schedule,
    Task(String),
}

impl Header {
    fn parse(text: &str, line: usize) -> Result<Self> {
        let mut words = text.split_whitespace();
        let kind = words.next().ok_or_else(|| doc_err(line, "empty section header"))?;
        let name = words.next().map(str::to_string);
        if words.next().is_some() {
            return Err(doc_err(line, format!("malformed section header `[{text}]`")));
        }
        let named = |what: &str, name: Option<String>| {
            name.filter(|n| n.chars().all(|c| c.is_alphanumeric() || "-_.".contains(c)))
                .ok_or_else(|| doc_err(line, format!("[{what}] needs a name made of letters, digits, `-`, `_` or `.`")))
        };
        match (kind, name.is_some()) {
            ("mapping", _) => Ok(Header::Mapping(named("mapping", name)?)),
            ("task", _) => Ok(Header::Task(named("task", name)?)),
            ("anchor", false) => Ok(Header::Anchor),
            ("schedule", false) => Ok(Header::Schedule),
            ("anchor" | "schedule", true) => Err(doc_err(line, format!("[{kind}] takes no name"))),
            _ => Err(doc_err(line, format!("unknown section `[{text}]`"))),
        }
    }
}

struct Section {
    header: Header,
    line: usize,
    keys: Vec<(String, String, usize)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.keys.iter().rev().find(|(k, _, _)| k == key).map(|(_, v, l)| (v.as_str(), *l))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _, l) in &self.keys {
            if !allowed.contains(&k.as_str()) {
                return Err(doc_err(*l, format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }
}

/// Splits a document into its top-level `use` value and sections.
fn sections(doc: &str) -> Result<(Option<(String, usize)>, Vec<Section>)> {
    let mut uses = None;
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in doc.lines().enumerate() {
        let line = i + 1;
        let text = strip_comment(raw).trim();
        if text.is_empty() {
            continue;
        }
        if let Some(h) = text.strip_prefix('[') {
            let h = h.strip_suffix(']').ok_or_else(|| doc_err(line, "section header lacks `]`"))?;
            let header = Header::parse(h.trim(), line)?;
            if out.iter().any(|s| s.header == header) {
                return Err(doc_err(line, format!("duplicate section `[{}]`", h.trim())));
            }
            out.push(Section {
                header,
                line,
                keys: Vec::new(),
            });
            continue;
        }
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| doc_err(line, format!("expected `key = value`, got `{text}`")))?;
        let (k, v) = (k.trim(), unquote(v, line)?);
        if k.is_empty() {
            return Err(doc_err(line, "empty key"));
        }
        match out.last_mut() {
            Some(s) => {
                if s.keys.iter().any(|(key, _, _)| key == k) {
                    return Err(doc_err(line, format!("duplicate key `{k}`")));
                }
                s.keys.push((k.to_string(), v, line));
            }
            None if k == "use" => {
                if uses.is_some() {
                    return Err(doc_err(line, "only one `use` is allowed"));
                }
                uses = Some((v, line));
            }
            None => return Err(doc_err(line, format!("key `{k}` outside any section"))),
        }
    }
    Ok((uses, out))
}

fn mapping_decl(sec: &Section) -> Result<MappingDecl> {
    let line = sec.line;
    let (kind, _) = sec.get("kind").ok_or_else(|| doc_err(line, "mapping needs `kind`"))?;
    let req = |key: &str| {
        sec.get(key)
            .ok_or_else(|| doc_err(line, format!("a `{kind}` mapping needs `{key}`")))
    };
    let wrap = |l: usize| move |e: Error| doc_err(l, e.to_string());
    let norm_in = sec.get("norm_in").map(|(v, l)| norm(v, l)).transpose()?.unwrap_or_else(Norm::l2);
    let norm_out = sec.get("norm_out").map(|(v, l)| norm(v, l)).transpose()?.unwrap_or_else(Norm::l2);
    let dim_in = sec
        .get("dim_in")
        .map(|(v, l)| v.parse::<usize>().map_err(|_| doc_err(l, format!("dim_in must be a count, got `{v}`"))))
        .transpose()?
        .unwrap_or(1);
    let common = ["kind", "norm_in", "norm_out"];
    let with = |extra: &[&'static str]| -> Vec<&'static str> { common.iter().chain(extra).copied().collect() };
    let decl = match kind {
        "expr" => {
            sec.check_keys(&with(&["expr", "dim_in"]))?;
            let (e, l) = req("expr")?;
            let m = SingleMap::new(parse_expr(e)?, dim_in).map_err(wrap(l))?;
            MappingDecl::Expr(m.with_norms(norm_in, norm_out))
        }
        "linear" => {
            sec.check_keys(&with(&["matrix"]))?;
            let (v, l) = req("matrix")?;
            MappingDecl::Linear(LinearOp::new(matrix(v, l)?).with_norms(norm_in, norm_out))
        }
        "ph" => {
            sec.check_keys(&with(&["expr", "dim_in"]))?;
            let (e, l) = req("expr")?;
            let m = SingleMap::new(parse_expr(e)?, dim_in).map_err(wrap(l))?;
            MappingDecl::Ph(PHMapping::new(m.with_norms(norm_in, norm_out), PH_CHECK_SEED).map_err(wrap(l))?)
        }
        "fan" => {
            sec.check_keys(&with(&["matrices", "hull"]))?;
            let (v, l) = req("matrices")?;
            let gens = v.split('|').map(|m| matrix(m, l)).collect::<Result<Vec<_>>>()?;
            let hull = match sec.get("hull") {
                None | Some(("finite", _)) => FanHull::Finite,
                Some(("convex", _)) => FanHull::Convex,
                Some((h, l)) => return Err(doc_err(l, format!("hull must be finite or convex, got `{h}`"))),
            };
            MappingDecl::Fan(Fan::new(gens, hull).map_err(wrap(l))?.with_norms(norm_in, norm_out))
        }
        "setvalued" => {
            sec.check_keys(&with(&["expr"]))?;
            let (e, l) = req("expr")?;
            MappingDecl::SetValued(SetValuedMap::parse(e).map_err(wrap(l))?.with_norms(norm_in, norm_out))
        }
        "maxaffine" => {
            sec.check_keys(&with(&["pieces"]))?;
            let (v, l) = req("pieces")?;
            let comps = v.split('|').map(MaxAffineFn::parse).collect::<Result<Vec<_>>>().map_err(wrap(l))?;
            MappingDecl::MaxAffine(MaxAffineMap::new(comps).map_err(wrap(l))?.with_norms(norm_in, norm_out))
        }
        "catalog" => {
            sec.check_keys(&["kind", "entry"])?;
            let (name, l) = req("entry")?;
            let (k, text) = crate::cli::catalog::mapping(name).ok_or_else(|| doc_err(l, format!("no catalog mapping `{name}`")))?;
            let m = match k {
                "setvalued" => MappingDecl::SetValued(SetValuedMap::parse(text)?),
                _ => MappingDecl::Expr(SingleMap::parse(text)?),
            };
            return Ok(m);
        }
        other => {
            return Err(doc_err(
                line,
                format!("kind must be expr, linear, ph, fan, setvalued, maxaffine, compose or catalog, got `{other}`"),
            ))
        }
    };
    Ok(decl)
}

fn anchor_into(sec: &Section, a: &mut Anchor) -> Result<()> {
    sec.check_keys(&["xbar", "ybar", "pbar"])?;
    if let Some((v, l)) = sec.get("xbar") {
        a.xbar = Some(numbers(v, l)?);
    }
    if let Some((v, l)) = sec.get("ybar") {
        a.ybar = Some(numbers(v, l)?);
    }
    if let Some((v, l)) = sec.get("pbar") {
        a.pbar = Some(numbers(v, l)?);
    }
    Ok(())
}

fn schedule_into(sec: &Section, s: &mut SamplingSchedule) -> Result<()> {
    sec.check_keys(&["r0", "decay", "shells", "points", "seed"])?;
    fn num<T: FromStr>(sec: &Section, key: &str) -> Result<Option<T>> {
        sec.get(key)
            .map(|(v, l)| v.parse::<T>().map_err(|_| doc_err(l, format!("malformed `{key}` value `{v}`"))))
            .transpose()
    }
    if let Some(v) = num(sec, "r0")? {
        s.r0 = v;
    }
    if let Some(v) = num(sec, "decay")? {
        s.decay = v;
    }
    if let Some(v) = num(sec, "shells")? {
        s.shells = v;
    }
    if let Some(v) = num(sec, "points")? {
        s.points = v;
    }
    if let Some(v) = num(sec, "seed")? {
        s.seed = v;
    }
    s.validate().map_err(|e| doc_err(sec.line, e.to_string()))
}

fn task(sec: &Section, id: &str) -> Result<TaskSpec> {
    let (op, l) = sec.get("op").ok_or_else(|| doc_err(sec.line, format!("task {id} needs `op`")))?;
    let op: Op = op.parse().map_err(|e: Error| doc_err(l, e.to_string()))?;
    let expect = match sec.get("expect") {
        None => Expect::Pass,
        Some((v, l)) => v.parse().map_err(|e: String| doc_err(l, e))?,
    };
    for (k, _, l) in &sec.keys {
        if !op.allows(k) {
            return Err(doc_err(*l, format!("task {id}: `{op}` takes no key `{k}`")));
        }
    }
    for k in op.mapping_keys().0 {
        if sec.get(k).is_none() {
            return Err(doc_err(sec.line, format!("task {id}: `{op}` needs `{k}`")));
        }
    }
    let keys = sec
        .keys
        .iter()
        .filter(|(k, _, _)| k != "op" && k != "expect")
        .map(|(k, v, _)| (k.clone(), v.clone()))
        .collect();
    Ok(TaskSpec {
        id: id.to_string(),
        op,
        expect,
        keys,
        line: sec.line,
    })
}

/// Merges `doc` into `spec`; later declarations replace earlier ones.
fn merge(doc: &str, spec: &mut ProblemSpec, allow_use: bool) -> Result<()> {
    let (uses, secs) = sections(doc)?;
    if let Some((id, line)) = uses {
        if !allow_use {
            return Err(doc_err(line, "catalog documents cannot `use` other examples"));
        }
        let text = crate::cli::catalog::document(&id)?;
        merge(&text, spec, false)?;
        spec.example = Some(id);
    }
    for sec in &secs {
        match &sec.header {
            Header::Mapping(name) if sec.get("kind").map(|k| k.0) == Some("compose") => {
                sec.check_keys(&["kind", "outer", "inner"])?;
                let part = |k: &str| {
                    sec.get(k)
                        .map(|(v, _)| v.to_string())
                        .ok_or_else(|| doc_err(sec.line, format!("a `compose` mapping needs `{k}`")))
                };
                let (outer, inner) = (part("outer")?, part("inner")?);
                spec.mappings.remove(name);
                spec.pending.retain(|p| p.0 != *name);
                spec.pending.push((name.clone(), outer, inner, sec.line));
            }
            Header::Mapping(name) => {
                let decl = mapping_decl(sec)?;
                spec.pending.retain(|p| p.0 != *name);
                spec.mappings.insert(name.clone(), decl);
            }
            Header::Anchor => anchor_into(sec, &mut spec.anchor)?,
            Header::Schedule => schedule_into(sec, &mut spec.schedule)?,
            Header::Task(id) => {
                let t = task(sec, id)?;
                match spec.tasks.iter_mut().find(|x| x.id == *id) {
                    Some(slot) => *slot = t,
                    None => spec.tasks.push(t),
                }
            }
        }
    }
    Ok(())
}

/// Resolves `compose` declarations, which may refer to each other.
fn resolve_compositions(spec: &mut ProblemSpec) -> Result<()> {
    while !spec.pending.is_empty() {
        let ready = spec
            .pending
            .iter()
            .position(|(_, o, i, _)| spec.mappings.contains_key(o) && spec.mappings.contains_key(i));
        let Some(k) = ready else {
            let (_, o, i, _) = &spec.pending[0];
            let missing = if spec.mappings.contains_key(o) || spec.pending.iter().any(|p| p.0 == *o) { i } else { o };
            return Err(Error::UnknownMapping(missing.clone()));
        };
        let (name, outer, inner, line) = spec.pending.remove(k);
        let map = Compose::new(spec.mappings[&outer].handle(), spec.mappings[&inner].handle())
            .map_err(|e| doc_err(line, e.to_string()))?;
        spec.mappings.insert(
            name,
            MappingDecl::Composed {
                outer,
                inner,
                map: Arc::new(map),
            },
        );
    }
    Ok(())
}

/// Mapping kinds a task key accepts, when restricted.
fn accepted_kinds(op: Op, key: &str) -> Option<&'static [&'static str]> {
    match (op, key) {
        (Op::EpsApprox, "approx") => Some(&["ph"]),
        (_, "fan") => Some(&["fan"]),
        (_, "convex") => Some(&["maxaffine"]),
        (Op::Injectivity, "map") => Some(&["linear", "ph", "fan"]),
        (Op::Banach, "map") => Some(&["linear"]),
        (Op::ConvexScalarization | Op::Intrad | Op::SharpMinConvex, "map") => Some(&["maxaffine"]),
        (_, "base") => Some(&["expr"]),
        _ => None,
    }
}

/// Checks cross-references and anchor dimensions.
fn validate(spec: &ProblemSpec) -> Result<()> {
    if spec.tasks.is_empty() {
        return Err(Error::MissingSection("task".into()));
    }
    for t in &spec.tasks {
        let (req, opt) = t.op.mapping_keys();
        for k in req.iter().chain(opt) {
            if let Some(name) = t.get(k) {
                let kind = spec.mapping(name)?.kind();
                if let Some(ok) = accepted_kinds(t.op, k) {
                    if !ok.contains(&kind) {
                        return Err(doc_err(
                            t.line,
                            format!("task {}: `{k}` must name a {} mapping, `{name}` is {kind}", t.id, ok.join(" or ")),
                        ));
                    }
                }
            }
        }
        if let Some(f) = t.get("field").filter(|f| !["zero", "nonneg", "box"].contains(f)) {
            spec.mapping(f)?;
        }
        let xbar = spec.xbar(t)?;
        if t.op.needs_anchor() && xbar.is_none() {
            return Err(Error::MissingSection("anchor".into()));
        }
        if t.op.is_geneq() && spec.anchor.pbar.is_none() {
            return Err(Error::MissingSection("anchor".into()));
        }
        let primary = if t.op == Op::Composition { "inner" } else if t.op.is_geneq() { "" } else { "map" };
        if let (Some(x), Some(name)) = (&xbar, t.get(primary)) {
            let n = spec.mapping(name)?.dim_in();
            if n != x.len() {
                return Err(Error::dim(&format!("anchor of task {}", t.id), n, x.len()));
            }
        }
    }
    Ok(())
}

/// Parses and resolves a problem document.
pub fn parse_problem(doc: &str) -> Result<ProblemSpec> {
    let mut spec = ProblemSpec {
        example: None,
        mappings: BTreeMap::new(),
        anchor: Anchor::default(),
        schedule: SamplingSchedule::default(),
        tasks: Vec::new(),
        pending: Vec::new(),
    };
    merge(doc, &mut spec, true)?;
    resolve_compositions(&mut spec)?;
    validate(&spec)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[mapping f]
kind = expr
expr = \"abs(x1)\"

[anchor]
xbar = 0
ybar = 0

[task t1]
op = certify-sms
map = f
";

    #[test]
    fn minimal_document() {
        let p = parse_problem(MINIMAL).unwrap();
        assert_eq!(p.mappings.len(), 1);
        assert_eq!(p.tasks.len(), 1);
        assert_eq!(p.tasks[0].op, Op::CertifySms);
        assert_eq!(p.tasks[0].expect, Expect::Pass);
        assert_eq!(p.anchor.xbar, Some(vec![0.0]));
    }

    #[test]
    fn dangling_mapping_reference() {
        let doc = MINIMAL.replace("map = f", "map = g");
        let e = parse_problem(&doc).unwrap_err();
        assert_eq!(e, Error::UnknownMapping("g".into()));
        assert_eq!(e.to_string(), "unknown mapping g");
    }

    #[test]
    fn catalog_preload() {
        let p = parse_problem("use = \"ex-F1\"\n").unwrap();
        assert_eq!(p.example.as_deref(), Some("ex-F1"));
        let f = p.mappings.values().next().unwrap();
        assert_eq!(f.kind(), "setvalued");
        let img = f.handle().image(&[0.0]).unwrap();
        assert_eq!(img.dist(&[0.0], &Norm::l2()).unwrap(), 0.0);
        assert_eq!(f.handle().image(&[0.3]).unwrap().dist(&[0.0], &Norm::l2()).unwrap(), 1.0);
    }

    #[test]
    fn comments_and_quoted_hashes() {
        let doc = MINIMAL.replace("xbar = 0", "xbar = 0 # the origin");
        assert!(parse_problem(&doc).is_ok());
        assert_eq!(strip_comment("expr = \"a#b\" # c"), "expr = \"a#b\" ");
    }

    #[test]
    fn missing_sections() {
        assert_eq!(
            parse_problem("[mapping f]\nkind = expr\nexpr = \"x1\"\n").unwrap_err(),
            Error::MissingSection("task".into())
        );
        let doc = MINIMAL.replace("[anchor]\nxbar = 0\nybar = 0\n", "");
        assert_eq!(parse_problem(&doc).unwrap_err(), Error::MissingSection("anchor".into()));
    }

    #[test]
    fn anchor_dimension_mismatch() {
        let doc = MINIMAL.replace("xbar = 0", "xbar = 0, 0");
        assert!(matches!(parse_problem(&doc), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn malformed_lines_report_position() {
        let doc = MINIMAL.replace("op = certify-sms", "op certify-sms");
        assert_eq!(
            parse_problem(&doc).unwrap_err(),
            doc_err(10, "expected `key = value`, got `op certify-sms`")
        );
        let doc = MINIMAL.replace("op = certify-sms", "op = levitate");
        assert!(matches!(parse_problem(&doc), Err(Error::Document { line: 10, .. })));
        let doc = MINIMAL.replace("[anchor]", "[anchor x]");
        assert!(matches!(parse_problem(&doc), Err(Error::Document { line: 5, .. })));
        let doc = MINIMAL.replace("kind = expr", "kind = expr\nsize = 3");
        assert!(matches!(parse_problem(&doc), Err(Error::Document { line: 3, .. })));
    }

    #[test]
    fn expression_errors_surface_unchanged() {
        let doc = MINIMAL.replace("abs(x1)", "min(");
        assert!(matches!(parse_problem(&doc), Err(Error::Syntax { .. })));
    }

    #[test]
    fn every_mapping_kind() {
        let doc = "\
[mapping a]
kind = linear
matrix = \"1, 0; 0, 1\"
norm_in = l1
norm_out = linf
[mapping b]
kind = ph
expr = \"[abs(x1), x2]\"
[mapping c]
kind = fan
matrices = \"1,0;0,1 | -1,0;0,1\"
[mapping d]
kind = setvalued
expr = \"interval(x1, inf)\"
[mapping e]
kind = maxaffine
pieces = \"(1,0,0);(-1,0,0) | (0,0,0)\"
[mapping g]
kind = catalog
entry = F2
[anchor]
xbar = 0, 0
[task t]
op = injectivity
map = a
";
        let p = parse_problem(doc).unwrap();
        let kinds: Vec<&str> = p.mappings.values().map(MappingDecl::kind).collect();
        assert_eq!(kinds, ["linear", "ph", "fan", "setvalued", "maxaffine", "setvalued"]);
        assert_eq!(p.mappings["a"].handle().norm_in(), &Norm::l1());
        assert_eq!(p.mappings["e"].handle().dim_out(), 2);
    }

    #[test]
    fn later_sections_override_catalog() {
        let doc = "use = \"ex-F2\"\n[schedule]\nshells = 6\n[task extra]\nop = descent-rate\nmap = F2\nexpect = any\n";
        let p = parse_problem(doc);
        let p = p.unwrap();
        assert_eq!(p.schedule.shells, 6);
        assert_eq!(p.tasks.last().unwrap().id, "extra");
    }
}
