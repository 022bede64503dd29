//! The sectioned spec-file format.
//!
//! ```text
//! # polar coordinates on the punctured plane
//! [manifold radial]
//! coords = [u]
//! domain = [[0.2, 3.0]]
//! metric = [[1]]
//!
//! [manifold angle]
//! coords = [a]
//! domain = [[0.1, 6.0]]
//! metric = [[1]]
//!
//! [warp]
//! base = radial
//! fiber = angle
//! f = u
//!
//! [suite lemma-curvature]
//! p = 2
//! ```
//!
//! A value whose brackets are unbalanced continues on the following lines.
//! Structures and maps may name the assembled product chart as `warped`.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::MetallicParams;
use crate::expr::{eval, parse, Env, Expr};
use crate::geometry::{ChartManifold, LinearOperatorField};
use crate::structures::CoordinateMap;
use crate::warped::{build_warped_chart, WarpedProductSpec};

use super::suites::SUITES;

/// Name under which the assembled product chart can be referenced.
pub const WARPED_CHART: &str = "warped";

/// Where in a spec file something went wrong.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
    pub section: Option<String>,
    pub key: Option<String>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)?;
        if let Some(s) = &self.section {
            write!(f, " [{s}]")?;
        }
        if let Some(k) = &self.key {
            write!(f, " {k}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecErrorKind {
    Io(String),
    Syntax(String),
    Expression(String),
    DanglingReference(String),
    Domain(String),
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub origin: String,
    pub location: Option<Location>,
    pub kind: SpecErrorKind,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.origin)?;
        if let Some(l) = &self.location {
            write!(f, ":{l}")?;
        }
        match &self.kind {
            SpecErrorKind::Io(m) => write!(f, ": cannot read: {m}"),
            SpecErrorKind::Syntax(m) => write!(f, ": syntax error: {m}"),
            SpecErrorKind::Expression(m) => write!(f, ": bad expression: {m}"),
            SpecErrorKind::DanglingReference(m) => write!(f, ": dangling reference: {m}"),
            SpecErrorKind::Domain(m) => write!(f, ": bad domain: {m}"),
            SpecErrorKind::Invalid(m) => write!(f, ": {m}"),
        }
    }
}

impl std::error::Error for SpecError {}

/// A structure declared on a named chart, with its own `(p, q)`.
#[derive(Debug, Clone)]
pub struct StructureDef {
    pub chart: String,
    pub params: MetallicParams,
    pub field: LinearOperatorField,
}

/// A coordinate map between named charts.
#[derive(Debug, Clone)]
pub struct MapDef {
    pub source: String,
    pub target: String,
    pub map: CoordinateMap,
}

/// A parsed and cross-referenced spec file.
#[derive(Debug, Clone)]
pub struct SpecFile {
    pub origin: String,
    pub manifolds: BTreeMap<String, ChartManifold>,
    pub warp: Option<WarpedProductSpec>,
    pub structures: BTreeMap<String, StructureDef>,
    pub maps: BTreeMap<String, MapDef>,
    /// Suites in file order with their parameters.
    pub suites: Vec<(String, BTreeMap<String, String>)>,
}

impl SpecFile {
    /// A chart by name, including the assembled product chart.
    pub fn chart(&self, name: &str) -> Option<ChartManifold> {
        if name == WARPED_CHART {
            let warp = self.warp.as_ref()?;
            return build_warped_chart(warp, &MetallicParams::golden()).ok();
        }
        self.manifolds.get(name).cloned()
    }

    pub fn suite_params(&self, suite: &str) -> BTreeMap<String, String> {
        self.suites
            .iter()
            .find(|(s, _)| s == suite)
            .map(|(_, p)| p.clone())
            .unwrap_or_default()
    }
}

pub fn load_spec(path: &std::path::Path) -> Result<SpecFile, SpecError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| SpecError {
        origin: origin.clone(),
        location: None,
        kind: SpecErrorKind::Io(e.to_string()),
    })?;
    parse_spec(&text, &origin)
}

/// A raw value with the position of its first character.
#[derive(Debug, Clone)]
struct Value {
    text: String,
    line: usize,
    column: usize,
}

impl Value {
    /// Line and column of byte `offset` within the value.
    fn position(&self, offset: usize) -> (usize, usize) {
        let before = &self.text[..offset.min(self.text.len())];
        match before.rfind('\n') {
            Some(nl) => (self.line + before.matches('\n').count(), before[nl + 1..].chars().count() + 1),
            None => (self.line, self.column + before.chars().count()),
        }
    }
}

#[derive(Debug, Clone)]
struct Section {
    kind: String,
    name: Option<String>,
    line: usize,
    entries: Vec<(String, Value)>,
}

impl Section {
    fn label(&self) -> String {
        match &self.name {
            Some(n) => format!("{} {n}", self.kind),
            None => self.kind.clone(),
        }
    }
}

struct Ctx<'a> {
    origin: &'a str,
}

impl Ctx<'_> {
    fn err(&self, line: usize, column: usize, section: Option<&Section>, key: Option<&str>, kind: SpecErrorKind) -> SpecError {
        SpecError {
            origin: self.origin.to_string(),
            location: Some(Location {
                line,
                column,
                section: section.map(Section::label),
                key: key.map(str::to_string),
            }),
            kind,
        }
    }

    fn at(&self, s: &Section, key: &str, v: &Value, offset: usize, kind: SpecErrorKind) -> SpecError {
        let (line, column) = v.position(offset);
        self.err(line, column, Some(s), Some(key), kind)
    }
}

fn bracket_depth(text: &str) -> i64 {
    text.chars().fold(0, |d, c| match c {
        '[' => d + 1,
        ']' => d - 1,
        _ => d,
    })
}

fn split_sections(text: &str, ctx: &Ctx) -> Result<Vec<Section>, SpecError> {
    let mut sections: Vec<Section> = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    while let Some((lineno, raw)) = lines.next() {
        let raw = strip_comment(raw);
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(ctx.err(lineno, indent + 1, None, None, SpecErrorKind::Syntax("unterminated section header".into())));
            }
            let inner: Vec<&str> = line[1..line.len() - 1].split_whitespace().collect();
            let (kind, name) = match inner.as_slice() {
                [kind] => (kind.to_string(), None),
                [kind, name] => (kind.to_string(), Some(name.to_string())),
                _ => {
                    return Err(ctx.err(lineno, indent + 1, None, None, SpecErrorKind::Syntax(format!("malformed section header `{line}`"))))
                }
            };
            sections.push(Section { kind, name, line: lineno, entries: Vec::new() });
            continue;
        }
        let Some(section) = sections.last_mut() else {
            return Err(ctx.err(lineno, indent + 1, None, None, SpecErrorKind::Syntax("entry outside any section".into())));
        };
        let Some(eq) = line.find('=') else {
            return Err(ctx.err(lineno, indent + 1, Some(section), None, SpecErrorKind::Syntax("expected `key = value`".into())));
        };
        let key = line[..eq].trim().to_string();
        if key.is_empty() {
            return Err(ctx.err(lineno, indent + 1, Some(section), None, SpecErrorKind::Syntax("empty key".into())));
        }
        let after = &line[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let mut value = Value {
            text: after.trim().to_string(),
            line: lineno,
            column: indent + eq + 2 + lead,
        };
        while bracket_depth(&value.text) > 0 {
            match lines.peek() {
                Some((_, next)) if !is_header(next) => {
                    let (_, next) = lines.next().unwrap();
                    value.text.push('\n');
                    value.text.push_str(strip_comment(next));
                }
                _ => break,
            }
        }
        if section.entries.iter().any(|(k, _)| *k == key) {
            return Err(ctx.err(lineno, indent + 1, Some(section), Some(&key), SpecErrorKind::Syntax("duplicate key".into())));
        }
        section.entries.push((key, value));
    }
    Ok(sections)
}

/// Neither `#` nor `;` can appear in an expression, so both end a line.
fn strip_comment(line: &str) -> &str {
    line.find(['#', ';']).map_or(line, |i| &line[..i])
}

/// A section header is a single bracket pair around words.
fn is_header(line: &str) -> bool {
    let t = line.trim();
    t.len() >= 2
        && t.starts_with('[')
        && t.ends_with(']')
        && !t[1..t.len() - 1].contains(['[', ']', ','])
}

/// A bracketed list element with its byte offset in the value.
#[derive(Debug, Clone)]
enum Item {
    Leaf(String, usize),
    List(Vec<Item>, usize),
}

fn parse_list(text: &str) -> Result<Item, (usize, String)> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    skip_ws(bytes, &mut pos);
    let item = parse_item(text, &mut pos)?;
    skip_ws(bytes, &mut pos);
    if pos < bytes.len() {
        return Err((pos, format!("unexpected `{}` after list", text[pos..].trim_end())));
    }
    Ok(item)
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_item(text: &str, pos: &mut usize) -> Result<Item, (usize, String)> {
    let bytes = text.as_bytes();
    skip_ws(bytes, pos);
    if *pos < bytes.len() && bytes[*pos] == b'[' {
        let start = *pos;
        *pos += 1;
        let mut items = Vec::new();
        skip_ws(bytes, pos);
        if *pos < bytes.len() && bytes[*pos] == b']' {
            *pos += 1;
            return Ok(Item::List(items, start));
        }
        loop {
            items.push(parse_item(text, pos)?);
            skip_ws(bytes, pos);
            match bytes.get(*pos) {
                Some(b',') => *pos += 1,
                Some(b']') => {
                    *pos += 1;
                    return Ok(Item::List(items, start));
                }
                Some(_) => return Err((*pos, format!("expected `,` or `]`, found `{}`", &text[*pos..*pos + 1]))),
                None => return Err((*pos, "unbalanced brackets: missing `]`".into())),
            }
        }
    }
    let start = *pos;
    let mut depth = 0i32;
    while *pos < bytes.len() {
        match bytes[*pos] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b',' | b']' if depth <= 0 => break,
            b'[' => return Err((*pos, "unexpected `[` inside an element".into())),
            _ => {}
        }
        *pos += 1;
    }
    let raw = &text[start..*pos];
    let trimmed = raw.trim_end();
    if trimmed.is_empty() {
        return Err((start, "empty list element".into()));
    }
    Ok(Item::Leaf(trimmed.to_string(), start))
}

struct Reader<'a> {
    ctx: &'a Ctx<'a>,
    section: &'a Section,
}

impl<'a> Reader<'a> {
    fn check_keys(&self, allowed: &[&str]) -> Result<(), SpecError> {
        for (k, v) in &self.section.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(self.ctx.at(self.section, k, v, 0, SpecErrorKind::Syntax(format!("unknown key `{k}`"))));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.section.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn require(&self, key: &str) -> Result<&'a Value, SpecError> {
        self.get(key).ok_or_else(|| {
            self.ctx.err(self.section.line, 1, Some(self.section), Some(key), SpecErrorKind::Syntax(format!("missing key `{key}`")))
        })
    }

    fn fail(&self, key: &str, v: &Value, offset: usize, kind: SpecErrorKind) -> SpecError {
        self.ctx.at(self.section, key, v, offset, kind)
    }

    fn list(&self, key: &str) -> Result<(Vec<Item>, &'a Value), SpecError> {
        let v = self.require(key)?;
        match parse_list(&v.text).map_err(|(o, m)| self.fail(key, v, o, SpecErrorKind::Syntax(m)))? {
            Item::List(items, _) => Ok((items, v)),
            Item::Leaf(_, o) => Err(self.fail(key, v, o, SpecErrorKind::Syntax("expected a bracketed list".into()))),
        }
    }

    fn leaves(&self, key: &str, items: &[Item], v: &Value) -> Result<Vec<(String, usize)>, SpecError> {
        items
            .iter()
            .map(|it| match it {
                Item::Leaf(s, o) => Ok((s.clone(), *o)),
                Item::List(_, o) => Err(self.fail(key, v, *o, SpecErrorKind::Syntax("expected a plain element".into()))),
            })
            .collect()
    }

    fn rows(&self, key: &str) -> Result<(Vec<Vec<(String, usize)>>, &'a Value), SpecError> {
        let (items, v) = self.list(key)?;
        let rows = items
            .iter()
            .map(|it| match it {
                Item::List(inner, _) => self.leaves(key, inner, v),
                Item::Leaf(_, o) => Err(self.fail(key, v, *o, SpecErrorKind::Syntax("expected a bracketed row".into()))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((rows, v))
    }

    fn expr(&self, key: &str, v: &Value, text: &str, offset: usize, coords: &[String]) -> Result<Expr, SpecError> {
        let e = parse(text).map_err(|e| self.fail(key, v, offset + e.offset, SpecErrorKind::Expression(e.to_string())))?;
        if let Some(var) = e.free_vars().into_iter().find(|x| !coords.contains(x)) {
            return Err(self.fail(
                key,
                v,
                offset,
                SpecErrorKind::Expression(format!("`{var}` is not a coordinate of this chart ({})", coords.join(", "))),
            ));
        }
        Ok(e)
    }

    fn number(&self, key: &str, v: &Value, text: &str, offset: usize) -> Result<f64, SpecError> {
        let e = self.expr(key, v, text, offset, &[])?;
        let x = eval(&e, &Env::default(), &MetallicParams::golden())
            .map_err(|e| self.fail(key, v, offset, SpecErrorKind::Expression(e.to_string())))?;
        if !x.is_finite() {
            return Err(self.fail(key, v, offset, SpecErrorKind::Expression(format!("`{text}` is not finite"))));
        }
        Ok(x)
    }

    fn word(&self, key: &str) -> Result<(&'a str, &'a Value), SpecError> {
        let v = self.require(key)?;
        if v.text.is_empty() || v.text.contains(char::is_whitespace) {
            return Err(self.fail(key, v, 0, SpecErrorKind::Syntax("expected a single name".into())));
        }
        Ok((v.text.as_str(), v))
    }

    fn count(&self, key: &str) -> Result<u32, SpecError> {
        let v = self.require(key)?;
        v.text
            .parse::<u32>()
            .ok()
            .filter(|&x| x >= 1)
            .ok_or_else(|| self.fail(key, v, 0, SpecErrorKind::Invalid(format!("`{}` is not a positive integer", v.text))))
    }
}

fn name_of<'s>(ctx: &Ctx, s: &'s Section) -> Result<&'s str, SpecError> {
    s.name
        .as_deref()
        .ok_or_else(|| ctx.err(s.line, 1, Some(s), None, SpecErrorKind::Syntax(format!("[{}] needs a name", s.kind))))
}

fn read_manifold(ctx: &Ctx, s: &Section) -> Result<ChartManifold, SpecError> {
    let name = name_of(ctx, s)?;
    if name == WARPED_CHART {
        return Err(ctx.err(s.line, 1, Some(s), None, SpecErrorKind::Invalid(format!("`{WARPED_CHART}` is reserved"))));
    }
    let r = Reader { ctx, section: s };
    r.check_keys(&["coords", "domain", "metric", "dim"])?;
    let (items, cv) = r.list("coords")?;
    let coords = r.leaves("coords", &items, cv)?;
    for (i, (c, o)) in coords.iter().enumerate() {
        let ok = c.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic())
            && c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
        if !ok || parse(c).ok() != Some(Expr::var(c.clone())) {
            return Err(r.fail("coords", cv, *o, SpecErrorKind::Syntax(format!("`{c}` is not a valid coordinate name"))));
        }
        if coords[..i].iter().any(|(d, _)| d == c) {
            return Err(r.fail("coords", cv, *o, SpecErrorKind::Invalid(format!("coordinate `{c}` repeated"))));
        }
    }
    let names: Vec<String> = coords.iter().map(|(c, _)| c.clone()).collect();
    let d = names.len();
    if d == 0 {
        return Err(r.fail("coords", cv, 0, SpecErrorKind::Invalid("no coordinates".into())));
    }
    if let Some(dv) = r.get("dim") {
        if dv.text.parse::<usize>().ok() != Some(d) {
            return Err(r.fail("dim", dv, 0, SpecErrorKind::Invalid(format!("dim = {} but {d} coordinates", dv.text))));
        }
    }

    let (rows, dv) = r.rows("domain")?;
    if rows.len() != d {
        return Err(r.fail("domain", dv, 0, SpecErrorKind::Invalid(format!("{} intervals for {d} coordinates", rows.len()))));
    }
    let mut domain = Vec::with_capacity(d);
    for (row, coord) in rows.iter().zip(&names) {
        let [(lo, lo_at), (hi, hi_at)] = row.as_slice() else {
            let at = row.first().map_or(0, |x| x.1);
            return Err(r.fail("domain", dv, at, SpecErrorKind::Syntax("an interval is written [min, max]".into())));
        };
        let (a, b) = (r.number("domain", dv, lo, *lo_at)?, r.number("domain", dv, hi, *hi_at)?);
        if a >= b {
            return Err(r.fail("domain", dv, *lo_at, SpecErrorKind::Domain(format!("`{coord}`: min {a} is not below max {b}"))));
        }
        domain.push((a, b));
    }

    let (rows, mv) = r.rows("metric")?;
    if rows.len() != d || rows.iter().any(|row| row.len() != d) {
        return Err(r.fail("metric", mv, 0, SpecErrorKind::Invalid(format!("metric must be {d} x {d}"))));
    }
    let metric = rows
        .iter()
        .map(|row| row.iter().map(|(t, o)| r.expr("metric", mv, t, *o, &names)).collect())
        .collect::<Result<Vec<Vec<Expr>>, _>>()?;
    ChartManifold::new(name, names, domain, metric).map_err(|e| r.fail("metric", mv, 0, SpecErrorKind::Invalid(e.to_string())))
}

fn resolve_chart(
    r: &Reader,
    key: &str,
    manifolds: &BTreeMap<String, ChartManifold>,
    warped: Option<&ChartManifold>,
) -> Result<(String, ChartManifold), SpecError> {
    let (name, v) = r.word(key)?;
    let chart = if name == WARPED_CHART {
        warped.cloned()
    } else {
        manifolds.get(name).cloned()
    };
    chart
        .map(|c| (name.to_string(), c))
        .ok_or_else(|| r.fail(key, v, 0, SpecErrorKind::DanglingReference(format!("no chart named `{name}`"))))
}

/// Parses spec text; `origin` names the source in error messages.
pub fn parse_spec(text: &str, origin: &str) -> Result<SpecFile, SpecError> {
    let ctx = Ctx { origin };
    let sections = split_sections(text, &ctx)?;
    let mut manifolds = BTreeMap::new();
    for s in sections.iter().filter(|s| s.kind == "manifold") {
        let m = read_manifold(&ctx, s)?;
        if manifolds.insert(m.name().to_string(), m).is_some() {
            return Err(ctx.err(s.line, 1, Some(s), None, SpecErrorKind::Invalid("manifold declared twice".into())));
        }
    }

    let mut warp = None;
    for s in sections.iter().filter(|s| s.kind == "warp") {
        if warp.is_some() {
            return Err(ctx.err(s.line, 1, Some(s), None, SpecErrorKind::Invalid("only one [warp] section is allowed".into())));
        }
        if s.name.is_some() {
            return Err(ctx.err(s.line, 1, Some(s), None, SpecErrorKind::Syntax("[warp] takes no name".into())));
        }
        let r = Reader { ctx: &ctx, section: s };
        r.check_keys(&["base", "fiber", "f"])?;
        let (_, base) = resolve_chart(&r, "base", &manifolds, None)?;
        let (_, fiber) = resolve_chart(&r, "fiber", &manifolds, None)?;
        let fv = r.require("f")?;
        let f = r.expr("f", fv, &fv.text, 0, base.coords())?;
        let spec = WarpedProductSpec::new(base, fiber, f).map_err(|e| r.fail("fiber", r.require("fiber").unwrap(), 0, SpecErrorKind::Invalid(e.to_string())))?;
        spec.check_warp(&MetallicParams::golden())
            .map_err(|e| r.fail("f", fv, 0, SpecErrorKind::Invalid(e.to_string())))?;
        warp = Some(spec);
    }
    let warped_chart = match &warp {
        Some(w) => Some(build_warped_chart(w, &MetallicParams::golden()).map_err(|e| SpecError {
            origin: origin.to_string(),
            location: None,
            kind: SpecErrorKind::Invalid(e.to_string()),
        })?),
        None => None,
    };

    let mut structures = BTreeMap::new();
    for s in sections.iter().filter(|s| s.kind == "structure") {
        let name = name_of(&ctx, s)?;
        let r = Reader { ctx: &ctx, section: s };
        r.check_keys(&["chart", "p", "q", "matrix"])?;
        let (chart_name, chart) = resolve_chart(&r, "chart", &manifolds, warped_chart.as_ref())?;
        let (p, q) = (r.count("p")?, r.count("q")?);
        let params = MetallicParams::new(p, q).map_err(|e| r.fail("p", r.require("p").unwrap(), 0, SpecErrorKind::Invalid(e.to_string())))?;
        let (rows, mv) = r.rows("matrix")?;
        let d = chart.dim();
        if rows.len() != d || rows.iter().any(|row| row.len() != d) {
            return Err(r.fail("matrix", mv, 0, SpecErrorKind::Invalid(format!("matrix must be {d} x {d} on chart `{chart_name}`"))));
        }
        let entries = rows
            .iter()
            .map(|row| row.iter().map(|(t, o)| r.expr("matrix", mv, t, *o, chart.coords())).collect())
            .collect::<Result<Vec<Vec<Expr>>, _>>()?;
        let field = LinearOperatorField::new(&chart, entries).map_err(|e| r.fail("matrix", mv, 0, SpecErrorKind::Invalid(e.to_string())))?;
        if structures.insert(name.to_string(), StructureDef { chart: chart_name, params, field }).is_some() {
            return Err(ctx.err(s.line, 1, Some(s), None, SpecErrorKind::Invalid("structure declared twice".into())));
        }
    }

    let mut maps = BTreeMap::new();
    for s in sections.iter().filter(|s| s.kind == "map") {
        let name = name_of(&ctx, s)?;
        let r = Reader { ctx: &ctx, section: s };
        r.check_keys(&["source", "target", "components"])?;
        let (source, src) = resolve_chart(&r, "source", &manifolds, warped_chart.as_ref())?;
        let (target, tgt) = resolve_chart(&r, "target", &manifolds, warped_chart.as_ref())?;
        let (items, cv) = r.list("components")?;
        let comps = r
            .leaves("components", &items, cv)?
            .iter()
            .map(|(t, o)| r.expr("components", cv, t, *o, src.coords()))
            .collect::<Result<Vec<_>, _>>()?;
        let map = CoordinateMap::new(src, tgt, comps).map_err(|e| r.fail("components", cv, 0, SpecErrorKind::Invalid(e.to_string())))?;
        if maps.insert(name.to_string(), MapDef { source, target, map }).is_some() {
            return Err(ctx.err(s.line, 1, Some(s), None, SpecErrorKind::Invalid("map declared twice".into())));
        }
    }

    let mut suites: Vec<(String, BTreeMap<String, String>)> = Vec::new();
    for s in sections.iter().filter(|s| s.kind == "suite") {
        let name = name_of(&ctx, s)?;
        if !SUITES.iter().any(|(n, _)| *n == name) {
            return Err(ctx.err(s.line, 1, Some(s), None, SpecErrorKind::Invalid(format!("unknown suite `{name}`"))));
        }
        if suites.iter().any(|(n, _)| n == name) {
            return Err(ctx.err(s.line, 1, Some(s), None, SpecErrorKind::Invalid("suite listed twice".into())));
        }
        suites.push((name.to_string(), s.entries.iter().map(|(k, v)| (k.clone(), v.text.clone())).collect()));
    }

    if let Some(s) = sections
        .iter()
        .find(|s| !["manifold", "warp", "structure", "map", "suite"].contains(&s.kind.as_str()))
    {
        return Err(ctx.err(s.line, 1, Some(s), None, SpecErrorKind::Syntax(format!("unknown section kind `{}`", s.kind))));
    }

    Ok(SpecFile {
        origin: origin.to_string(),
        manifolds,
        warp,
        structures,
        maps,
        suites,
    })
}
