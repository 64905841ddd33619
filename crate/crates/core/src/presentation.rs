//! Presentation language for countable directed graphs with finitely many
//! generators.
//!
//! A presentation is a finite core multigraph whose arcs carry a multiplicity
//! in ℕ∪{ω}, plus four kinds of infinite attachments anchored at core
//! vertices: `instar` (infinitely many fresh sources feeding the anchor),
//! `outstar` (infinitely many fresh targets), `backray` (an infinite backward
//! chain …→r(−2)→r(−1)→anchor), and `fwdray` (an infinite forward chain).
//! Vertices belonging to an attachment are *derived*: they are addressed
//! symbolically as `tag(index)` and never materialized, so every semantic
//! query answers directly from the finite data.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

pub type VertexId = String;
pub type ArcId = String;
pub type Tag = String;

/// ℕ ∪ {ω} with absorbing arithmetic. Used for multiplicities, degrees and
/// path counts alike.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtNat {
    Fin(u64),
    Omega,
}

impl ExtNat {
    pub fn add(self, other: ExtNat) -> ExtNat {
        match (self, other) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => ExtNat::Fin(a.saturating_add(b)),
            _ => ExtNat::Omega,
        }
    }

    pub fn is_omega(self) -> bool {
        matches!(self, ExtNat::Omega)
    }

    pub fn is_zero(self) -> bool {
        self == ExtNat::Fin(0)
    }

    /// True when the value is ω or a finite number ≥ `k`.
    pub fn at_least(self, k: u64) -> bool {
        match self {
            ExtNat::Fin(n) => n >= k,
            ExtNat::Omega => true,
        }
    }
}

impl PartialOrd for ExtNat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtNat {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => a.cmp(b),
            (ExtNat::Fin(_), ExtNat::Omega) => std::cmp::Ordering::Less,
            (ExtNat::Omega, ExtNat::Fin(_)) => std::cmp::Ordering::Greater,
            (ExtNat::Omega, ExtNat::Omega) => std::cmp::Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Omega => write!(f, "omega"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreArc {
    pub id: ArcId,
    pub source: VertexId,
    pub target: VertexId,
    /// ≥ 1; ω means infinitely many parallel copies, addressed `id[0]`, `id[1]`, …
    pub mult: ExtNat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimitiveKind {
    InStar,
    OutStar,
    BackRay,
    FwdRay,
}

impl PrimitiveKind {
    pub fn keyword(self) -> &'static str {
        match self {
            PrimitiveKind::InStar => "instar",
            PrimitiveKind::OutStar => "outstar",
            PrimitiveKind::BackRay => "backray",
            PrimitiveKind::FwdRay => "fwdray",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfinitePrimitive {
    pub kind: PrimitiveKind,
    pub tag: Tag,
    pub anchor: VertexId,
}

/// Reference to a vertex: a declared core vertex, or a derived member of an
/// infinite attachment. Star members and fwdray vertices have index ≥ 1,
/// backray vertices index ≤ −1; index 0 always means the anchor itself and is
/// normalized away.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VertexRef {
    Core(VertexId),
    Derived { tag: Tag, index: i64 },
}

impl VertexRef {
    pub fn core(v: impl Into<String>) -> Self {
        VertexRef::Core(v.into())
    }

    pub fn derived(tag: impl Into<String>, index: i64) -> Self {
        VertexRef::Derived { tag: tag.into(), index }
    }

    fn sort_key(&self) -> (&str, i64) {
        match self {
            VertexRef::Core(v) => (v, i64::MIN),
            VertexRef::Derived { tag, index } => (tag, *index),
        }
    }
}

impl PartialOrd for VertexRef {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VertexRef {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexRef::Core(v) => write!(f, "{v}"),
            VertexRef::Derived { tag, index } => write!(f, "{tag}({index})"),
        }
    }
}

/// Reference to a single edge: one copy of a core arc, or one member edge of
/// an infinite attachment. Family indices follow the derived-vertex scheme:
/// `t[i]` for an instar is the edge t(i)→anchor, for an outstar anchor→t(i),
/// for a backray the edge t(i)→t(i+1) (with t(0) = anchor, i ≤ −1), for a
/// fwdray the edge t(i−1)→t(i) (i ≥ 1).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EdgeRef {
    Core { arc: ArcId, copy: u64 },
    Family { tag: Tag, index: i64 },
}

impl EdgeRef {
    pub fn core(arc: impl Into<String>, copy: u64) -> Self {
        EdgeRef::Core { arc: arc.into(), copy }
    }

    pub fn family(tag: impl Into<String>, index: i64) -> Self {
        EdgeRef::Family { tag: tag.into(), index }
    }

    fn sort_key(&self) -> (&str, i64) {
        match self {
            EdgeRef::Core { arc, copy } => (arc, *copy as i64),
            EdgeRef::Family { tag, index } => (tag, *index),
        }
    }
}

impl PartialOrd for EdgeRef {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EdgeRef {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeRef::Core { arc, copy: 0 } => write!(f, "{arc}"),
            EdgeRef::Core { arc, copy } => write!(f, "{arc}[{copy}]"),
            EdgeRef::Family { tag, index } => write!(f, "{tag}[{index}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: undeclared vertex `{name}`")]
    UndeclaredVertex { line: usize, name: String },
    #[error("line {line}: duplicate id `{name}`")]
    DuplicateId { line: usize, name: String },
    #[error("line {line}: multiplicity must be at least 1 (use omega for an infinite family)")]
    ZeroMultiplicity { line: usize },
}

/// Errors from semantic queries against a presentation.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("`{0}` is not a valid reference (index outside the family's domain)")]
    BadIndex(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphPresentation {
    pub vertices: Vec<VertexId>,
    pub arcs: Vec<CoreArc>,
    pub primitives: Vec<InfinitePrimitive>,
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Cursor over one declaration line.
struct LineScanner<'a> {
    line: &'a str,
    lineno: usize,
    pos: usize,
}

impl<'a> LineScanner<'a> {
    fn new(line: &'a str, lineno: usize) -> Self {
        LineScanner { line, lineno, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.line[self.pos..].starts_with([' ', '\t']) {
            self.pos += 1;
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.lineno, col: self.pos + 1, msg: msg.into() }
    }

    fn token(&mut self, what: &str) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.line.len()
            && self.line.as_bytes()[self.pos].is_ascii_alphanumeric()
            || self.pos < self.line.len() && self.line.as_bytes()[self.pos] == b'_'
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(format!("expected {what}")));
        }
        Ok(self.line[start..self.pos].to_string())
    }

    fn expect(&mut self, lit: &str) -> Result<(), ParseError> {
        self.skip_ws();
        if self.line[self.pos..].starts_with(lit) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.err(format!("expected `{lit}`")))
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.line.len()
    }

    fn end(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

impl GraphPresentation {
    /// Parse the line-oriented presentation grammar:
    ///
    /// ```text
    /// vertex <id>
    /// edge <id>: <src> -> <dst> [mult=<n|omega>]     # mult defaults to 1
    /// instar <tag>: <vertex>                         # likewise outstar, backray, fwdray
    /// ```
    ///
    /// `#` starts a comment; blank lines are ignored. All ids (vertices,
    /// arcs, primitive tags) share one namespace and must be unique.
    pub fn parse(text: &str) -> Result<GraphPresentation, ParseError> {
        let mut g = GraphPresentation::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        // (line, vertex name) pairs to resolve after all declarations are read.
        let mut pending: Vec<(usize, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(cut) => &raw[..cut],
                None => raw,
            };
            if line.trim().is_empty() {
                continue;
            }
            let mut sc = LineScanner::new(line, lineno);
            let kw = sc.token("a declaration keyword")?;
            let mut declare = |name: &str, sc: &LineScanner| -> Result<(), ParseError> {
                if !is_token(name) {
                    return Err(sc.err(format!("invalid id `{name}`")));
                }
                if seen.insert(name.to_string(), lineno).is_some() {
                    return Err(ParseError::DuplicateId { line: lineno, name: name.to_string() });
                }
                Ok(())
            };
            match kw.as_str() {
                "vertex" => {
                    let id = sc.token("a vertex id")?;
                    sc.end()?;
                    declare(&id, &sc)?;
                    g.vertices.push(id);
                }
                "edge" => {
                    let id = sc.token("an edge id")?;
                    sc.expect(":")?;
                    let src = sc.token("a source vertex")?;
                    sc.expect("->")?;
                    let dst = sc.token("a target vertex")?;
                    let mult = if sc.at_end() {
                        ExtNat::Fin(1)
                    } else {
                        sc.expect("[")?;
                        sc.expect("mult")?;
                        sc.expect("=")?;
                        let val = sc.token("a multiplicity")?;
                        sc.expect("]")?;
                        sc.end()?;
                        if val == "omega" {
                            ExtNat::Omega
                        } else {
                            let n: u64 = val
                                .parse()
                                .map_err(|_| sc.err(format!("bad multiplicity `{val}`")))?;
                            if n == 0 {
                                return Err(ParseError::ZeroMultiplicity { line: lineno });
                            }
                            ExtNat::Fin(n)
                        }
                    };
                    declare(&id, &sc)?;
                    pending.push((lineno, src.clone()));
                    pending.push((lineno, dst.clone()));
                    g.arcs.push(CoreArc { id, source: src, target: dst, mult });
                }
                "instar" | "outstar" | "backray" | "fwdray" => {
                    let kind = match kw.as_str() {
                        "instar" => PrimitiveKind::InStar,
                        "outstar" => PrimitiveKind::OutStar,
                        "backray" => PrimitiveKind::BackRay,
                        _ => PrimitiveKind::FwdRay,
                    };
                    let tag = sc.token("a tag")?;
                    sc.expect(":")?;
                    let anchor = sc.token("an anchor vertex")?;
                    sc.end()?;
                    declare(&tag, &sc)?;
                    pending.push((lineno, anchor.clone()));
                    g.primitives.push(InfinitePrimitive { kind, tag, anchor });
                }
                other => {
                    return Err(ParseError::Syntax {
                        line: lineno,
                        col: 1,
                        msg: format!("unknown declaration `{other}`"),
                    });
                }
            }
        }

        let declared: BTreeSet<&str> = g.vertices.iter().map(|v| v.as_str()).collect();
        for (line, name) in pending {
            if !declared.contains(name.as_str()) {
                return Err(ParseError::UndeclaredVertex { line, name });
            }
        }
        Ok(g)
    }

    /// Emit the presentation back in the declaration grammar, vertices first,
    /// then arcs, then primitives, each group in input order. `parse`
    /// composed with `serialize` is the identity on presentation values.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("vertex {v}\n"));
        }
        for a in &self.arcs {
            out.push_str(&format!("edge {}: {} -> {}", a.id, a.source, a.target));
            match a.mult {
                ExtNat::Fin(1) => {}
                m => out.push_str(&format!(" [mult={m}]")),
            }
            out.push('\n');
        }
        for p in &self.primitives {
            out.push_str(&format!("{} {}: {}\n", p.kind.keyword(), p.tag, p.anchor));
        }
        out
    }

    /// Re-run the parser's semantic checks on a programmatically built value.
    pub fn validate(&self) -> Result<(), ParseError> {
        let mut seen = BTreeSet::new();
        let mut check = |name: &str| -> Result<(), ParseError> {
            if !is_token(name) {
                return Err(ParseError::Syntax {
                    line: 0,
                    col: 0,
                    msg: format!("invalid id `{name}`"),
                });
            }
            if !seen.insert(name.to_string()) {
                return Err(ParseError::DuplicateId { line: 0, name: name.to_string() });
            }
            Ok(())
        };
        for v in &self.vertices {
            check(v)?;
        }
        for a in &self.arcs {
            check(&a.id)?;
            if a.mult == ExtNat::Fin(0) {
                return Err(ParseError::ZeroMultiplicity { line: 0 });
            }
        }
        for p in &self.primitives {
            check(&p.tag)?;
        }
        let declared: BTreeSet<&str> = self.vertices.iter().map(|v| v.as_str()).collect();
        let mut refs = self.arcs.iter().flat_map(|a| [&a.source, &a.target]);
        if let Some(bad) = refs.find(|v| !declared.contains(v.as_str())) {
            return Err(ParseError::UndeclaredVertex { line: 0, name: bad.clone() });
        }
        if let Some(bad) = self.primitives.iter().find(|p| !declared.contains(p.anchor.as_str())) {
            return Err(ParseError::UndeclaredVertex { line: 0, name: bad.anchor.clone() });
        }
        Ok(())
    }

    pub fn vertex_exists(&self, v: &str) -> bool {
        self.vertices.iter().any(|w| w == v)
    }

    pub fn arc(&self, id: &str) -> Option<&CoreArc> {
        self.arcs.iter().find(|a| a.id == id)
    }

    pub fn primitive(&self, tag: &str) -> Option<&InfinitePrimitive> {
        self.primitives.iter().find(|p| p.tag == tag)
    }

    pub fn arcs_from<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a CoreArc> {
        self.arcs.iter().filter(move |a| a.source == v)
    }

    pub fn arcs_into<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a CoreArc> {
        self.arcs.iter().filter(move |a| a.target == v)
    }

    pub fn primitives_at<'a>(
        &'a self,
        v: &'a str,
        kind: PrimitiveKind,
    ) -> impl Iterator<Item = &'a InfinitePrimitive> {
        self.primitives.iter().filter(move |p| p.anchor == v && p.kind == kind)
    }

    fn check_ref(&self, r: &VertexRef) -> Result<(), QueryError> {
        match r {
            VertexRef::Core(v) => {
                if self.vertex_exists(v) {
                    Ok(())
                } else {
                    Err(QueryError::UnknownVertex(v.clone()))
                }
            }
            VertexRef::Derived { tag, index } => {
                let p = self
                    .primitive(tag)
                    .ok_or_else(|| QueryError::UnknownVertex(r.to_string()))?;
                let ok = match p.kind {
                    PrimitiveKind::BackRay => *index <= -1,
                    _ => *index >= 1,
                };
                if ok {
                    Ok(())
                } else {
                    Err(QueryError::BadIndex(r.to_string()))
                }
            }
        }
    }

    /// Total out-degree in ℕ∪{ω}: core arcs by multiplicity, an outstar
    /// contributes ω, a fwdray contributes 1. Derived vertices: star sources
    /// emit 1, star targets 0, ray vertices 1.
    pub fn out_degree(&self, r: &VertexRef) -> Result<ExtNat, QueryError> {
        self.check_ref(r)?;
        match r {
            VertexRef::Core(v) => {
                let mut d = ExtNat::Fin(0);
                for a in self.arcs_from(v) {
                    d = d.add(a.mult);
                }
                for p in self.primitives.iter().filter(|p| &p.anchor == v) {
                    match p.kind {
                        PrimitiveKind::OutStar => d = d.add(ExtNat::Omega),
                        PrimitiveKind::FwdRay => d = d.add(ExtNat::Fin(1)),
                        _ => {}
                    }
                }
                Ok(d)
            }
            VertexRef::Derived { tag, .. } => {
                let kind = self.primitive(tag).expect("checked").kind;
                Ok(match kind {
                    PrimitiveKind::OutStar => ExtNat::Fin(0),
                    _ => ExtNat::Fin(1),
                })
            }
        }
    }

    /// Total in-degree: core arcs by multiplicity, an instar contributes ω, a
    /// backray contributes 1 (its last edge lands on the anchor). Derived
    /// vertices: star sources receive 0, star targets 1, ray vertices 1.
    pub fn in_degree(&self, r: &VertexRef) -> Result<ExtNat, QueryError> {
        self.check_ref(r)?;
        match r {
            VertexRef::Core(v) => {
                let mut d = ExtNat::Fin(0);
                for a in self.arcs_into(v) {
                    d = d.add(a.mult);
                }
                for p in self.primitives.iter().filter(|p| &p.anchor == v) {
                    match p.kind {
                        PrimitiveKind::InStar => d = d.add(ExtNat::Omega),
                        PrimitiveKind::BackRay => d = d.add(ExtNat::Fin(1)),
                        _ => {}
                    }
                }
                Ok(d)
            }
            VertexRef::Derived { tag, .. } => {
                let kind = self.primitive(tag).expect("checked").kind;
                Ok(match kind {
                    PrimitiveKind::InStar => ExtNat::Fin(0),
                    _ => ExtNat::Fin(1),
                })
            }
        }
    }

    /// Source and target of a single edge, validating that the copy or index
    /// lies in the family's domain.
    pub fn edge_endpoints(&self, e: &EdgeRef) -> Result<(VertexRef, VertexRef), QueryError> {
        match e {
            EdgeRef::Core { arc, copy } => {
                let a = self.arc(arc).ok_or_else(|| QueryError::UnknownEdge(e.to_string()))?;
                if let ExtNat::Fin(m) = a.mult {
                    if *copy >= m {
                        return Err(QueryError::BadIndex(e.to_string()));
                    }
                }
                Ok((VertexRef::Core(a.source.clone()), VertexRef::Core(a.target.clone())))
            }
            EdgeRef::Family { tag, index } => {
                let p = self.primitive(tag).ok_or_else(|| QueryError::UnknownEdge(e.to_string()))?;
                let i = *index;
                let anchor = VertexRef::Core(p.anchor.clone());
                let member = |k: i64| VertexRef::Derived { tag: tag.clone(), index: k };
                match p.kind {
                    PrimitiveKind::InStar if i >= 1 => Ok((member(i), anchor)),
                    PrimitiveKind::OutStar if i >= 1 => Ok((anchor, member(i))),
                    PrimitiveKind::BackRay if i <= -1 => {
                        let to = if i == -1 { anchor } else { member(i + 1) };
                        Ok((member(i), to))
                    }
                    PrimitiveKind::FwdRay if i >= 1 => {
                        let from = if i == 1 { anchor } else { member(i - 1) };
                        Ok((from, member(i)))
                    }
                    _ => Err(QueryError::BadIndex(e.to_string())),
                }
            }
        }
    }

    pub fn edge_source(&self, e: &EdgeRef) -> Result<VertexRef, QueryError> {
        Ok(self.edge_endpoints(e)?.0)
    }

    pub fn edge_target(&self, e: &EdgeRef) -> Result<VertexRef, QueryError> {
        Ok(self.edge_endpoints(e)?.1)
    }

    /// Out-edges of a vertex in canonical order. Finite-multiplicity arcs
    /// contribute every copy; ω families (ω arcs, outstars) are sampled up to
    /// `family_bound` members. A fwdray contributes its single next edge.
    pub fn out_edges_bounded(
        &self,
        r: &VertexRef,
        family_bound: u64,
    ) -> Result<Vec<EdgeRef>, QueryError> {
        self.check_ref(r)?;
        let mut out = Vec::new();
        match r {
            VertexRef::Core(v) => {
                for a in self.arcs_from(v) {
                    let copies = match a.mult {
                        ExtNat::Fin(m) => m,
                        ExtNat::Omega => family_bound,
                    };
                    for c in 0..copies {
                        out.push(EdgeRef::Core { arc: a.id.clone(), copy: c });
                    }
                }
                for p in self.primitives.iter().filter(|p| &p.anchor == v) {
                    match p.kind {
                        PrimitiveKind::OutStar => {
                            for i in 1..=family_bound as i64 {
                                out.push(EdgeRef::Family { tag: p.tag.clone(), index: i });
                            }
                        }
                        PrimitiveKind::FwdRay => {
                            out.push(EdgeRef::Family { tag: p.tag.clone(), index: 1 });
                        }
                        _ => {}
                    }
                }
            }
            VertexRef::Derived { tag, index } => {
                let kind = self.primitive(tag).expect("checked").kind;
                match kind {
                    PrimitiveKind::InStar => {
                        out.push(EdgeRef::Family { tag: tag.clone(), index: *index })
                    }
                    PrimitiveKind::OutStar => {}
                    PrimitiveKind::BackRay => {
                        out.push(EdgeRef::Family { tag: tag.clone(), index: *index })
                    }
                    PrimitiveKind::FwdRay => {
                        out.push(EdgeRef::Family { tag: tag.clone(), index: *index + 1 })
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// In-edges of a vertex in canonical order, ω families sampled up to
    /// `family_bound`. A backray contributes its single landing edge.
    pub fn in_edges_bounded(
        &self,
        r: &VertexRef,
        family_bound: u64,
    ) -> Result<Vec<EdgeRef>, QueryError> {
        self.check_ref(r)?;
        let mut out = Vec::new();
        match r {
            VertexRef::Core(v) => {
                for a in self.arcs_into(v) {
                    let copies = match a.mult {
                        ExtNat::Fin(m) => m,
                        ExtNat::Omega => family_bound,
                    };
                    for c in 0..copies {
                        out.push(EdgeRef::Core { arc: a.id.clone(), copy: c });
                    }
                }
                for p in self.primitives.iter().filter(|p| &p.anchor == v) {
                    match p.kind {
                        PrimitiveKind::InStar => {
                            for i in 1..=family_bound as i64 {
                                out.push(EdgeRef::Family { tag: p.tag.clone(), index: i });
                            }
                        }
                        PrimitiveKind::BackRay => {
                            out.push(EdgeRef::Family { tag: p.tag.clone(), index: -1 });
                        }
                        _ => {}
                    }
                }
            }
            VertexRef::Derived { tag, index } => {
                let kind = self.primitive(tag).expect("checked").kind;
                match kind {
                    PrimitiveKind::InStar => {}
                    PrimitiveKind::OutStar => {
                        out.push(EdgeRef::Family { tag: tag.clone(), index: *index })
                    }
                    PrimitiveKind::BackRay => {
                        out.push(EdgeRef::Family { tag: tag.clone(), index: *index - 1 })
                    }
                    PrimitiveKind::FwdRay => {
                        out.push(EdgeRef::Family { tag: tag.clone(), index: *index })
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Weakly connected components, in order of first vertex declaration.
    /// Infinite attachments travel with their anchor, so every derived vertex
    /// lands in its anchor's component. Declaration order is preserved inside
    /// each component.
    pub fn components(&self) -> Vec<GraphPresentation> {
        let index: BTreeMap<&str, usize> =
            self.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for a in &self.arcs {
            let (s, t) = (index[a.source.as_str()], index[a.target.as_str()]);
            let (rs, rt) = (find(&mut parent, s), find(&mut parent, t));
            if rs != rt {
                parent[rs.max(rt)] = rs.min(rt);
            }
        }
        let mut roots: Vec<usize> = Vec::new();
        let mut root_of: Vec<usize> = vec![0; self.vertices.len()];
        for i in 0..self.vertices.len() {
            let r = find(&mut parent, i);
            root_of[i] = r;
            if r == i {
                roots.push(i);
            }
        }
        roots
            .into_iter()
            .map(|r| GraphPresentation {
                vertices: self
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| root_of[*i] == r)
                    .map(|(_, v)| v.clone())
                    .collect(),
                arcs: self
                    .arcs
                    .iter()
                    .filter(|a| root_of[index[a.source.as_str()]] == r)
                    .cloned()
                    .collect(),
                primitives: self
                    .primitives
                    .iter()
                    .filter(|p| root_of[index[p.anchor.as_str()]] == r)
                    .cloned()
                    .collect(),
            })
            .collect()
    }

    /// Core vertices reachable from `v` along core arcs (any multiplicity,
    /// treated as a single adjacency). Includes `v` itself.
    pub fn core_reachable(&self, v: &str) -> Result<BTreeSet<VertexId>, QueryError> {
        if !self.vertex_exists(v) {
            return Err(QueryError::UnknownVertex(v.to_string()));
        }
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut queue = VecDeque::from([v.to_string()]);
        seen.insert(v.to_string());
        while let Some(cur) = queue.pop_front() {
            for a in self.arcs_from(&cur) {
                if seen.insert(a.target.clone()) {
                    queue.push_back(a.target.clone());
                }
            }
        }
        Ok(seen)
    }

    /// Core vertices from which `v` is reachable. Includes `v` itself.
    pub fn core_coreachable(&self, v: &str) -> Result<BTreeSet<VertexId>, QueryError> {
        if !self.vertex_exists(v) {
            return Err(QueryError::UnknownVertex(v.to_string()));
        }
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut queue = VecDeque::from([v.to_string()]);
        seen.insert(v.to_string());
        while let Some(cur) = queue.pop_front() {
            for a in self.arcs_into(&cur) {
                if seen.insert(a.source.clone()) {
                    queue.push_back(a.source.clone());
                }
            }
        }
        Ok(seen)
    }

    /// Sorted copies of the core vertex list; handy for canonical scans.
    pub fn sorted_vertices(&self) -> Vec<VertexId> {
        let mut vs = self.vertices.clone();
        vs.sort();
        vs
    }
}
