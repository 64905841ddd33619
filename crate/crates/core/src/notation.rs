//! Parsers for the textual notation the reports print: vertex and edge
//! references, edge paths, boundary points, and cylinder sets. Each parser
//! inverts the corresponding `Display` implementation, so anything a report
//! shows can be fed back on the command line; reasonable variants (any
//! cycle rotation, explicit `@0`) are accepted too.
//!
//! Names are resolved against the presentation: the global id namespace
//! guarantees a name is a vertex, an arc, or a primitive tag — never two of
//! those — so no sigils are needed.

use crate::boundary::BoundaryPoint;
use crate::conditions::Cycle;
use crate::presentation::{EdgeRef, GraphPresentation, PrimitiveKind, VertexRef};
use crate::boundary::CylinderSet;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NotationError {
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("`{name}` is not {expected}")]
    WrongKind { name: String, expected: &'static str },
    #[error("malformed {what}: {detail}")]
    Malformed { what: &'static str, detail: String },
}

fn malformed(what: &'static str, detail: impl Into<String>) -> NotationError {
    NotationError::Malformed {
        what,
        detail: detail.into(),
    }
}

fn parse_int(what: &'static str, s: &str) -> Result<i64, NotationError> {
    s.parse::<i64>()
        .map_err(|_| malformed(what, format!("`{s}` is not an integer")))
}

/// `v` for a core vertex, `tag(i)` for a derived one.
pub fn parse_vertex(g: &GraphPresentation, s: &str) -> Result<VertexRef, NotationError> {
    let s = s.trim();
    if let Some(open) = s.find('(') {
        let Some(inner) = s[open + 1..].strip_suffix(')') else {
            return Err(malformed("vertex", format!("`{s}` lacks a closing `)`")));
        };
        let tag = &s[..open];
        let index = parse_int("vertex index", inner)?;
        let Some(p) = g.primitive(tag) else {
            return Err(if g.vertex_exists(tag) || g.arc(tag).is_some() {
                NotationError::WrongKind {
                    name: tag.into(),
                    expected: "a primitive tag",
                }
            } else {
                NotationError::UnknownName(tag.into())
            });
        };
        let ok = match p.kind {
            PrimitiveKind::BackRay => index <= -1,
            _ => index >= 1,
        };
        if !ok {
            return Err(malformed(
                "vertex",
                format!("index {index} is out of range for {} `{tag}`", p.kind.keyword()),
            ));
        }
        return Ok(VertexRef::derived(tag.to_string(), index));
    }
    if g.vertex_exists(s) {
        Ok(VertexRef::core(s.to_string()))
    } else if g.arc(s).is_some() || g.primitive(s).is_some() {
        Err(NotationError::WrongKind {
            name: s.into(),
            expected: "a vertex",
        })
    } else {
        Err(NotationError::UnknownName(s.into()))
    }
}

/// `e` for copy 0 of an arc, `e[k]` for copy k, `tag[i]` for a family edge.
pub fn parse_edge(g: &GraphPresentation, s: &str) -> Result<EdgeRef, NotationError> {
    let s = s.trim();
    let (name, index) = match s.find('[') {
        Some(open) => {
            let Some(inner) = s[open + 1..].strip_suffix(']') else {
                return Err(malformed("edge", format!("`{s}` lacks a closing `]`")));
            };
            (&s[..open], Some(parse_int("edge index", inner)?))
        }
        None => (s, None),
    };
    let e = if g.arc(name).is_some() {
        let copy = index.unwrap_or(0);
        if copy < 0 {
            return Err(malformed("edge", format!("negative copy index in `{s}`")));
        }
        EdgeRef::core(name.to_string(), copy as u64)
    } else if g.primitive(name).is_some() {
        let Some(index) = index else {
            return Err(malformed(
                "edge",
                format!("family edge `{name}` needs an index, like `{name}[1]`"),
            ));
        };
        EdgeRef::family(name.to_string(), index)
    } else if g.vertex_exists(name) {
        return Err(NotationError::WrongKind {
            name: name.into(),
            expected: "an edge",
        });
    } else {
        return Err(NotationError::UnknownName(name.into()));
    };
    // Delegate range checks (copy < multiplicity, family index sign).
    g.edge_source(&e)
        .map_err(|err| malformed("edge", err.to_string()))?;
    Ok(e)
}

/// Dot-separated edges; the empty string is the empty path.
pub fn parse_path(g: &GraphPresentation, s: &str) -> Result<Vec<EdgeRef>, NotationError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split('.').map(|seg| parse_edge(g, seg)).collect()
}

fn parse_cycle_group(
    g: &GraphPresentation,
    cyc: &str,
    phase: usize,
) -> Result<(Cycle, usize), NotationError> {
    let edges = parse_path(g, cyc)?;
    if edges.is_empty() {
        return Err(malformed("cycle", "a cycle needs at least one edge"));
    }
    let mut vertices = Vec::with_capacity(edges.len());
    for e in &edges {
        match g.edge_source(e).map_err(|err| malformed("cycle", err.to_string()))? {
            VertexRef::Core(v) => vertices.push(v),
            r @ VertexRef::Derived { .. } => {
                return Err(malformed(
                    "cycle",
                    format!("cycle edge starts at derived vertex {r}"),
                ));
            }
        }
    }
    if phase >= edges.len() {
        return Err(malformed(
            "point",
            format!("phase {phase} exceeds cycle length {}", edges.len()),
        ));
    }
    // Accept any rotation: remember the phase vertex, rotate canonically,
    // and re-locate it (cycle vertices are pairwise distinct).
    let phase_vertex = vertices[phase].clone();
    let cycle = Cycle { edges, vertices }.rotate_to_min();
    let new_phase = cycle
        .vertices
        .iter()
        .position(|v| *v == phase_vertex)
        .expect("rotation preserves vertices");
    Ok((cycle, new_phase))
}

/// A boundary point in report notation: a dot-path of edges or a bare
/// vertex (finite path), `stem.(c1.c2)^inf@p` (lasso), or `stem.tag^ray@d`
/// (ray tail). The result is canonical but not yet validated against the
/// graph; callers that accept untrusted input should follow with
/// `BoundaryPoint::validate`.
pub fn parse_point(g: &GraphPresentation, s: &str) -> Result<BoundaryPoint, NotationError> {
    let s = s.trim();
    if let Some(inf) = s.find("^inf") {
        let head = &s[..inf];
        let tail = &s[inf + 4..];
        let phase = match tail.strip_prefix('@') {
            Some(p) => parse_int("point", p)? as usize,
            None if tail.is_empty() => 0,
            None => {
                return Err(malformed("point", format!("unexpected trailer `{tail}`")));
            }
        };
        // `(c1.c2)^inf` groups the cycle; a paren-free `e^inf` means the
        // final segment is a one-edge cycle.
        let (stem_part, cyc) = match head.find('(') {
            Some(open) => {
                let Some(cyc) = head[open + 1..].strip_suffix(')') else {
                    return Err(malformed("point", "unclosed cycle group"));
                };
                (&head[..open], cyc)
            }
            None => match head.rfind('.') {
                Some(dot) => (&head[..dot + 1], &head[dot + 1..]),
                None => ("", head),
            },
        };
        let stem = match stem_part.strip_suffix('.') {
            Some(prefix) => parse_path(g, prefix)?,
            None if stem_part.is_empty() => Vec::new(),
            None => {
                return Err(malformed(
                    "point",
                    "stem and cycle must be separated by `.`",
                ));
            }
        };
        let (cycle, phase) = parse_cycle_group(g, cyc, phase)?;
        return Ok(BoundaryPoint::lasso(stem, cycle, phase));
    }
    if let Some(ray) = s.find("^ray") {
        let head = &s[..ray];
        let tail = &s[ray + 4..];
        let depth = match tail.strip_prefix('@') {
            Some(d) => {
                let d = parse_int("point", d)?;
                if d < 0 {
                    return Err(malformed("point", "ray depth must be non-negative"));
                }
                d as u64
            }
            None if tail.is_empty() => 0,
            None => {
                return Err(malformed("point", format!("unexpected trailer `{tail}`")));
            }
        };
        let (stem_part, tag) = match head.rfind('.') {
            Some(dot) => (&head[..dot], &head[dot + 1..]),
            None => ("", head),
        };
        match g.primitive(tag) {
            Some(p) if p.kind == PrimitiveKind::FwdRay => {}
            Some(p) => {
                return Err(malformed(
                    "point",
                    format!("`{tag}` is a {}, not a fwdray", p.kind.keyword()),
                ));
            }
            None => return Err(NotationError::UnknownName(tag.into())),
        }
        let stem = parse_path(g, stem_part)?;
        return Ok(BoundaryPoint::ray_tail(stem, tag.to_string(), depth));
    }
    // Finite path: a bare vertex, or a dot-path of edges.
    if !s.contains('.') {
        if let Ok(v) = parse_vertex(g, s) {
            return Ok(BoundaryPoint::FinitePath {
                edges: Vec::new(),
                terminal: v,
            });
        }
    }
    let edges = parse_path(g, s)?;
    let Some(last) = edges.last() else {
        return Err(malformed("point", "empty point literal"));
    };
    let terminal = g
        .edge_target(last)
        .map_err(|err| malformed("point", err.to_string()))?;
    Ok(BoundaryPoint::FinitePath { edges, terminal })
}

/// A cylinder in report notation: `Z(v)`, `Z(e1.e2)`, or with exclusions
/// `Z(e1 \ {f,g[2]})`.
pub fn parse_cylinder(g: &GraphPresentation, s: &str) -> Result<CylinderSet, NotationError> {
    let s = s.trim();
    let Some(inner) = s.strip_prefix("Z(").and_then(|r| r.strip_suffix(')')) else {
        return Err(malformed("cylinder", "expected `Z(...)`"));
    };
    let (core, excluded_part) = match inner.find('\\') {
        Some(pos) => (inner[..pos].trim_end(), Some(inner[pos + 1..].trim_start())),
        None => (inner.trim(), None),
    };
    let excluded = match excluded_part {
        None => Vec::new(),
        Some(part) => {
            let Some(list) = part.strip_prefix('{').and_then(|r| r.strip_suffix('}')) else {
                return Err(malformed("cylinder", "exclusions must be braced, `{e,f}`"));
            };
            list.split(',')
                .map(|seg| parse_edge(g, seg))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    if !core.contains('.') {
        if let Ok(v) = parse_vertex(g, core) {
            return Ok(CylinderSet {
                start: v,
                base: Vec::new(),
                excluded,
            });
        }
    }
    let base = parse_path(g, core)?;
    let Some(first) = base.first() else {
        return Err(malformed("cylinder", "empty cylinder base"));
    };
    let start = g
        .edge_source(first)
        .map_err(|err| malformed("cylinder", err.to_string()))?;
    Ok(CylinderSet {
        start,
        base,
        excluded,
    })
}
