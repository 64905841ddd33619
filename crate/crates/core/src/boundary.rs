//! Symbolic model of the boundary path space: finite paths ending at
//! singular vertices, eventually periodic paths (lassos), and paths escaping
//! along a forward ray. Points are never materialized as infinite sequences;
//! every operation works on canonical finite representations.
//!
//! Not every infinite path of a presentation is representable — e.g. an
//! aperiodic braid through two parallel loop copies. Enumeration operations
//! are therefore explicitly bounded ("up to stem depth") and documented as
//! such; the decision pipeline itself only ever needs representable points.

use std::collections::BTreeSet;
use std::fmt;

use crate::conditions::{enumerate_cycles, Cycle};
use crate::presentation::{
    EdgeRef, ExtNat, GraphPresentation, PrimitiveKind, Tag, VertexId, VertexRef,
};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BoundaryError {
    #[error("cannot shift a length-{len} path by {n}")]
    ShiftTooFar { len: usize, n: usize },
    #[error("malformed boundary point: {0}")]
    MalformedPoint(String),
    #[error("malformed cylinder: {0}")]
    MalformedCylinder(String),
}

/// A point of the boundary path space, in canonical form.
///
/// * `FinitePath` — a finite path whose terminal vertex is singular (emits
///   no edges or infinitely many).
/// * `Lasso` — stem then a simple cycle repeated forever, entered at
///   `cycle.vertices[phase]`. Canonical: the stem never ends with the cycle
///   edge that precedes the phase (such an edge belongs to the rotation).
/// * `RayTail` — a path that enters a fwdray and follows it forever. The
///   infinite tail is `tag[depth+1], tag[depth+2], …`. Canonical: the stem
///   contains no edge of the ray, so either the stem is empty (the point
///   starts at `tag(depth)`, with `tag(0)` meaning the anchor) or it is
///   nonempty, ends at the anchor, and `depth = 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundaryPoint {
    FinitePath {
        edges: Vec<EdgeRef>,
        terminal: VertexRef,
    },
    Lasso {
        stem: Vec<EdgeRef>,
        cycle: Cycle,
        phase: usize,
    },
    RayTail {
        stem: Vec<EdgeRef>,
        tag: Tag,
        depth: u64,
    },
}

impl BoundaryPoint {
    /// Canonical lasso: rolls stem edges that merely rewind the cycle into
    /// the phase, and rotates the cycle to start at its smallest vertex.
    pub fn lasso(stem: Vec<EdgeRef>, cycle: Cycle, phase: usize) -> BoundaryPoint {
        let cycle = cycle.rotate_to_min();
        let n = cycle.edges.len();
        let mut stem = stem;
        let mut phase = phase % n;
        while let Some(last) = stem.last() {
            let prev = (phase + n - 1) % n;
            if *last == cycle.edges[prev] {
                stem.pop();
                phase = prev;
            } else {
                break;
            }
        }
        BoundaryPoint::Lasso { stem, cycle, phase }
    }

    /// Canonical ray tail: absorbs trailing ray edges of the stem into the
    /// depth.
    pub fn ray_tail(stem: Vec<EdgeRef>, tag: Tag, depth: u64) -> BoundaryPoint {
        let mut stem = stem;
        let mut depth = depth;
        while let Some(EdgeRef::Family { tag: t, index }) = stem.last() {
            if *t == tag && *index == depth as i64 && depth >= 1 {
                stem.pop();
                depth -= 1;
            } else {
                break;
            }
        }
        BoundaryPoint::RayTail { stem, tag, depth }
    }

    pub fn len(&self) -> ExtNat {
        match self {
            BoundaryPoint::FinitePath { edges, .. } => ExtNat::Fin(edges.len() as u64),
            _ => ExtNat::Omega,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == ExtNat::Fin(0)
    }

    pub fn start_vertex(&self, g: &GraphPresentation) -> Result<VertexRef, BoundaryError> {
        let first = match self {
            BoundaryPoint::FinitePath { edges, terminal } => {
                if edges.is_empty() {
                    return Ok(terminal.clone());
                }
                edges[0].clone()
            }
            BoundaryPoint::Lasso { stem, cycle, phase } => {
                if stem.is_empty() {
                    return Ok(VertexRef::Core(cycle.vertices[*phase].clone()));
                }
                stem[0].clone()
            }
            BoundaryPoint::RayTail { stem, tag, depth } => {
                if stem.is_empty() {
                    let p = g
                        .primitive(tag)
                        .ok_or_else(|| BoundaryError::MalformedPoint(format!("no ray `{tag}`")))?;
                    return Ok(if *depth == 0 {
                        VertexRef::Core(p.anchor.clone())
                    } else {
                        VertexRef::derived(tag.clone(), *depth as i64)
                    });
                }
                stem[0].clone()
            }
        };
        g.edge_source(&first)
            .map_err(|e| BoundaryError::MalformedPoint(e.to_string()))
    }

    /// The edge at 0-based position `i`, if the point is that long.
    pub fn edge_at(&self, i: usize) -> Option<EdgeRef> {
        match self {
            BoundaryPoint::FinitePath { edges, .. } => edges.get(i).cloned(),
            BoundaryPoint::Lasso { stem, cycle, phase } => {
                if i < stem.len() {
                    stem.get(i).cloned()
                } else {
                    let n = cycle.edges.len();
                    Some(cycle.edges[(phase + (i - stem.len())) % n].clone())
                }
            }
            BoundaryPoint::RayTail { stem, tag, depth } => {
                if i < stem.len() {
                    stem.get(i).cloned()
                } else {
                    let k = depth + 1 + (i - stem.len()) as u64;
                    Some(EdgeRef::family(tag.clone(), k as i64))
                }
            }
        }
    }

    /// First `k` edges, for unrolling-based comparisons.
    pub fn unroll(&self, k: usize) -> Vec<EdgeRef> {
        (0..k).map_while(|i| self.edge_at(i)).collect()
    }

    /// Remove the first `n` edges.
    pub fn shift(&self, n: usize) -> Result<BoundaryPoint, BoundaryError> {
        match self {
            BoundaryPoint::FinitePath { edges, terminal } => {
                if n > edges.len() {
                    return Err(BoundaryError::ShiftTooFar { len: edges.len(), n });
                }
                Ok(BoundaryPoint::FinitePath {
                    edges: edges[n..].to_vec(),
                    terminal: terminal.clone(),
                })
            }
            BoundaryPoint::Lasso { stem, cycle, phase } => {
                if n <= stem.len() {
                    Ok(BoundaryPoint::Lasso {
                        stem: stem[n..].to_vec(),
                        cycle: cycle.clone(),
                        phase: *phase,
                    })
                } else {
                    let k = n - stem.len();
                    Ok(BoundaryPoint::Lasso {
                        stem: Vec::new(),
                        cycle: cycle.clone(),
                        phase: (phase + k) % cycle.edges.len(),
                    })
                }
            }
            BoundaryPoint::RayTail { stem, tag, depth } => {
                if n <= stem.len() {
                    Ok(BoundaryPoint::RayTail {
                        stem: stem[n..].to_vec(),
                        tag: tag.clone(),
                        depth: *depth,
                    })
                } else {
                    Ok(BoundaryPoint::RayTail {
                        stem: Vec::new(),
                        tag: tag.clone(),
                        depth: depth + (n - stem.len()) as u64,
                    })
                }
            }
        }
    }

    /// Prefix the point with a path ending at its start vertex, returning
    /// the canonical form of the longer point.
    pub fn prepend(&self, edges: &[EdgeRef]) -> BoundaryPoint {
        let mut prefixed = edges.to_vec();
        match self {
            BoundaryPoint::FinitePath { edges: e, terminal } => {
                prefixed.extend(e.iter().cloned());
                BoundaryPoint::FinitePath {
                    edges: prefixed,
                    terminal: terminal.clone(),
                }
            }
            BoundaryPoint::Lasso { stem, cycle, phase } => {
                prefixed.extend(stem.iter().cloned());
                BoundaryPoint::lasso(prefixed, cycle.clone(), *phase)
            }
            BoundaryPoint::RayTail { stem, tag, depth } => {
                prefixed.extend(stem.iter().cloned());
                BoundaryPoint::ray_tail(prefixed, tag.clone(), *depth)
            }
        }
    }

    /// Check composition, terminal singularity and canonicality against a
    /// presentation.
    pub fn validate(&self, g: &GraphPresentation) -> Result<(), BoundaryError> {
        let bad = |msg: String| Err(BoundaryError::MalformedPoint(msg));
        let check_path = |edges: &[EdgeRef], end: Option<&VertexRef>| -> Result<(), BoundaryError> {
            for pair in edges.windows(2) {
                let (_, dst) = g
                    .edge_endpoints(&pair[0])
                    .map_err(|e| BoundaryError::MalformedPoint(e.to_string()))?;
                let (src, _) = g
                    .edge_endpoints(&pair[1])
                    .map_err(|e| BoundaryError::MalformedPoint(e.to_string()))?;
                if dst != src {
                    return Err(BoundaryError::MalformedPoint(format!(
                        "{} does not continue {}",
                        pair[1], pair[0]
                    )));
                }
            }
            if let (Some(last), Some(end)) = (edges.last(), end) {
                let (_, dst) = g
                    .edge_endpoints(last)
                    .map_err(|e| BoundaryError::MalformedPoint(e.to_string()))?;
                if &dst != end {
                    return Err(BoundaryError::MalformedPoint(format!(
                        "path ends at {dst}, expected {end}"
                    )));
                }
            }
            Ok(())
        };
        match self {
            BoundaryPoint::FinitePath { edges, terminal } => {
                check_path(edges, Some(terminal))?;
                let d = g
                    .out_degree(terminal)
                    .map_err(|e| BoundaryError::MalformedPoint(e.to_string()))?;
                if !(d.is_zero() || d.is_omega()) {
                    return bad(format!("terminal {terminal} is regular (out-degree {d})"));
                }
                Ok(())
            }
            BoundaryPoint::Lasso { stem, cycle, phase } => {
                cycle
                    .validate(g)
                    .map_err(BoundaryError::MalformedPoint)?;
                if *phase >= cycle.edges.len() {
                    return bad(format!("phase {phase} outside cycle of length {}", cycle.len()));
                }
                let entry = VertexRef::Core(cycle.vertices[*phase].clone());
                check_path(stem, Some(&entry))?;
                let canonical = BoundaryPoint::lasso(stem.clone(), cycle.clone(), *phase);
                if &canonical != self {
                    return bad("lasso not in canonical form".into());
                }
                Ok(())
            }
            BoundaryPoint::RayTail { stem, tag, depth } => {
                let p = match g.primitive(tag) {
                    Some(p) if p.kind == PrimitiveKind::FwdRay => p,
                    _ => return bad(format!("`{tag}` is not a fwdray")),
                };
                if stem
                    .iter()
                    .any(|e| matches!(e, EdgeRef::Family { tag: t, .. } if t == tag))
                {
                    return bad("ray-tail stem contains edges of its own ray".into());
                }
                if stem.is_empty() {
                    Ok(())
                } else if *depth != 0 {
                    bad("nonempty ray-tail stem must enter at the anchor".into())
                } else {
                    check_path(stem, Some(&VertexRef::Core(p.anchor.clone())))
                }
            }
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |edges: &[EdgeRef]| -> String {
            edges
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(".")
        };
        match self {
            BoundaryPoint::FinitePath { edges, terminal } => {
                if edges.is_empty() {
                    write!(f, "{terminal}")
                } else {
                    write!(f, "{}", join(edges))
                }
            }
            BoundaryPoint::Lasso { stem, cycle, phase } => {
                if !stem.is_empty() {
                    write!(f, "{}.", join(stem))?;
                }
                write!(f, "({})^inf", join(&cycle.edges))?;
                if *phase != 0 {
                    write!(f, "@{phase}")?;
                }
                Ok(())
            }
            BoundaryPoint::RayTail { stem, tag, depth } => {
                if !stem.is_empty() {
                    write!(f, "{}.", join(stem))?;
                }
                write!(f, "{tag}^ray")?;
                if *depth != 0 {
                    write!(f, "@{depth}")?;
                }
                Ok(())
            }
        }
    }
}

/// The singular vertices: finitely many core ones, plus entire outstar
/// families whose every member is a fresh sink.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SingularSet {
    pub core: Vec<VertexId>,
    pub outstar_families: Vec<Tag>,
}

impl SingularSet {
    pub fn contains(&self, r: &VertexRef) -> bool {
        match r {
            VertexRef::Core(v) => self.core.iter().any(|w| w == v),
            VertexRef::Derived { tag, .. } => {
                self.outstar_families.iter().any(|t| t == tag)
            }
        }
    }
}

/// Vertices whose out-degree is 0 or ω. Core vertices are listed; outstar
/// targets are summarized by their family tag (every member is singular).
/// Instar sources and ray vertices emit exactly one edge, so they never
/// appear.
pub fn singular_vertices(g: &GraphPresentation) -> SingularSet {
    let core = g
        .sorted_vertices()
        .into_iter()
        .filter(|v| {
            let d = g.out_degree(&VertexRef::Core(v.clone())).expect("validated");
            d.is_zero() || d.is_omega()
        })
        .collect();
    let mut tags: Vec<Tag> = g
        .primitives
        .iter()
        .filter(|p| p.kind == PrimitiveKind::OutStar)
        .map(|p| p.tag.clone())
        .collect();
    tags.sort();
    SingularSet {
        core,
        outstar_families: tags,
    }
}

/// A basic open set Z(μ\F): boundary points extending the base path μ whose
/// next edge avoids the finite excluded set F.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CylinderSet {
    /// Start vertex; determines the set when `base` is empty.
    pub start: VertexRef,
    pub base: Vec<EdgeRef>,
    /// Sorted, duplicate-free; every edge leaves the end of the base path.
    pub excluded: Vec<EdgeRef>,
}

impl CylinderSet {
    pub fn new(
        g: &GraphPresentation,
        start: VertexRef,
        base: Vec<EdgeRef>,
        mut excluded: Vec<EdgeRef>,
    ) -> Result<CylinderSet, BoundaryError> {
        excluded.sort();
        excluded.dedup();
        let z = CylinderSet {
            start,
            base,
            excluded,
        };
        z.validate(g)?;
        Ok(z)
    }

    /// Z(v): every boundary point starting at the vertex.
    pub fn at_vertex(v: VertexRef) -> CylinderSet {
        CylinderSet {
            start: v,
            base: Vec::new(),
            excluded: Vec::new(),
        }
    }

    /// r(μ): where continuations attach.
    pub fn end_vertex(&self, g: &GraphPresentation) -> Result<VertexRef, BoundaryError> {
        match self.base.last() {
            None => Ok(self.start.clone()),
            Some(e) => g
                .edge_target(e)
                .map_err(|err| BoundaryError::MalformedCylinder(err.to_string())),
        }
    }

    pub fn validate(&self, g: &GraphPresentation) -> Result<(), BoundaryError> {
        let bad = |msg: String| Err(BoundaryError::MalformedCylinder(msg));
        let mut cur = self.start.clone();
        if let VertexRef::Core(v) = &cur {
            if !g.vertex_exists(v) {
                return bad(format!("unknown start vertex {v}"));
            }
        }
        for e in &self.base {
            let (src, dst) = g
                .edge_endpoints(e)
                .map_err(|err| BoundaryError::MalformedCylinder(err.to_string()))?;
            if src != cur {
                return bad(format!("base edge {e} does not leave {cur}"));
            }
            cur = dst;
        }
        for pair in self.excluded.windows(2) {
            if pair[0] >= pair[1] {
                return bad("excluded set not sorted and duplicate-free".into());
            }
        }
        for e in &self.excluded {
            let (src, _) = g
                .edge_endpoints(e)
                .map_err(|err| BoundaryError::MalformedCylinder(err.to_string()))?;
            if src != cur {
                return bad(format!("excluded edge {e} does not leave {cur}"));
            }
        }
        Ok(())
    }

    /// Decide x ∈ Z(μ\F): x starts with μ, and its next edge (if any) is
    /// outside F. A point of exactly length |μ| qualifies vacuously.
    pub fn contains(
        &self,
        g: &GraphPresentation,
        x: &BoundaryPoint,
    ) -> Result<bool, BoundaryError> {
        if x.start_vertex(g)? != self.start {
            return Ok(false);
        }
        for (i, e) in self.base.iter().enumerate() {
            if x.edge_at(i).as_ref() != Some(e) {
                return Ok(false);
            }
        }
        match x.edge_at(self.base.len()) {
            None => Ok(true),
            Some(next) => Ok(!self.excluded.contains(&next)),
        }
    }
}

impl fmt::Display for CylinderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z(")?;
        if self.base.is_empty() {
            write!(f, "{}", self.start)?;
        } else {
            let parts: Vec<String> = self.base.iter().map(|e| e.to_string()).collect();
            write!(f, "{}", parts.join("."))?;
        }
        if !self.excluded.is_empty() {
            let parts: Vec<String> = self.excluded.iter().map(|e| e.to_string()).collect();
            write!(f, " \\ {{{}}}", parts.join(","))?;
        }
        write!(f, ")")
    }
}

/// Greedy completion: starting at `v`, repeatedly follow the smallest
/// out-edge until reaching a singular vertex (finite path), revisiting a core
/// vertex (lasso), or stepping into a fwdray (ray tail). Total because the
/// core is finite and derived detours are monotone.
pub fn complete_from(g: &GraphPresentation, v: &VertexRef) -> Result<BoundaryPoint, BoundaryError> {
    let mut edges: Vec<EdgeRef> = Vec::new();
    let mut visited: Vec<VertexRef> = vec![v.clone()];
    let mut cur = v.clone();
    loop {
        let d = g
            .out_degree(&cur)
            .map_err(|e| BoundaryError::MalformedPoint(e.to_string()))?;
        if d.is_zero() || d.is_omega() {
            return Ok(BoundaryPoint::FinitePath {
                edges,
                terminal: cur,
            });
        }
        let e = g
            .out_edges_bounded(&cur, 1)
            .map_err(|err| BoundaryError::MalformedPoint(err.to_string()))?
            .into_iter()
            .next()
            .expect("regular vertex has an out-edge");
        if let EdgeRef::Family { tag, index } = &e {
            if g.primitive(tag).expect("valid edge").kind == PrimitiveKind::FwdRay {
                // Edge tag[i] continues from tag(i-1); i = 1 at the anchor.
                return Ok(BoundaryPoint::ray_tail(edges, tag.clone(), (*index - 1) as u64));
            }
        }
        let next = g
            .edge_target(&e)
            .map_err(|err| BoundaryError::MalformedPoint(err.to_string()))?;
        if let Some(pos) = visited.iter().position(|w| *w == next) {
            // First revisit closes a simple cycle through visited[pos..].
            let cycle_vertices: Vec<VertexId> = visited[pos..]
                .iter()
                .map(|r| match r {
                    VertexRef::Core(v) => v.clone(),
                    VertexRef::Derived { .. } => unreachable!("derived vertices never repeat"),
                })
                .collect();
            let mut cycle_edges = edges[pos..].to_vec();
            cycle_edges.push(e);
            let cycle = Cycle {
                edges: cycle_edges,
                vertices: cycle_vertices,
            };
            // The walk enters the cycle at its own position 0; rotation to
            // the minimal form moves that entry to (len - offset) mod len.
            let rotated = cycle.clone().rotate_to_min();
            let offset = cycle
                .vertices
                .iter()
                .position(|w| *w == rotated.vertices[0])
                .expect("rotation keeps vertices");
            let phase = (cycle.vertices.len() - offset) % cycle.vertices.len();
            return Ok(BoundaryPoint::lasso(edges[..pos].to_vec(), rotated, phase));
        }
        edges.push(e);
        visited.push(next.clone());
        cur = next;
    }
}

/// Emptiness of Z(μ\F), with a member on the nonempty side. The set is empty
/// exactly when the end of μ is regular and F exhausts its out-edges;
/// otherwise a member extends μ through the smallest allowed edge (or stops
/// at μ itself when the end is singular).
pub fn cylinder_nonempty(
    g: &GraphPresentation,
    z: &CylinderSet,
) -> Result<Option<BoundaryPoint>, BoundaryError> {
    z.validate(g)?;
    let end = z.end_vertex(g)?;
    let d = g
        .out_degree(&end)
        .map_err(|e| BoundaryError::MalformedCylinder(e.to_string()))?;
    if d.is_zero() || d.is_omega() {
        return Ok(Some(BoundaryPoint::FinitePath {
            edges: z.base.clone(),
            terminal: end,
        }));
    }
    // Regular end: finitely many out-edges, all enumerable.
    let next = g
        .out_edges_bounded(&end, 1)
        .map_err(|e| BoundaryError::MalformedCylinder(e.to_string()))?
        .into_iter()
        .find(|e| !z.excluded.contains(e));
    let Some(nu) = next else {
        return Ok(None);
    };
    let after = g
        .edge_target(&nu)
        .map_err(|e| BoundaryError::MalformedCylinder(e.to_string()))?;
    let rest = complete_from(g, &after)?;
    let mut prefix = z.base.clone();
    prefix.push(nu);
    Ok(Some(rest.prepend(&prefix)))
}

/// All representable boundary points starting at `start` whose stem (entire
/// path, for finite points) has length ≤ `depth`, with members of ω-sized
/// edge families sampled up to `family_bound`. Sorted and duplicate-free.
pub fn enumerate_points(
    g: &GraphPresentation,
    start: &VertexRef,
    depth: usize,
    family_bound: u64,
) -> Result<Vec<BoundaryPoint>, BoundaryError> {
    let cycles = enumerate_cycles(g);
    let mut out: BTreeSet<BoundaryPoint> = BTreeSet::new();
    // DFS over finite paths from start, collecting a point per opportunity.
    let mut stack: Vec<(VertexRef, Vec<EdgeRef>)> = vec![(start.clone(), Vec::new())];
    while let Some((cur, path)) = stack.pop() {
        let d = g
            .out_degree(&cur)
            .map_err(|e| BoundaryError::MalformedPoint(e.to_string()))?;
        if d.is_zero() || d.is_omega() {
            out.insert(BoundaryPoint::FinitePath {
                edges: path.clone(),
                terminal: cur.clone(),
            });
        }
        match &cur {
            VertexRef::Core(v) => {
                for c in &cycles {
                    if let Some(phase) = c.vertices.iter().position(|w| w == v) {
                        let candidate = BoundaryPoint::lasso(path.clone(), c.clone(), phase);
                        // Keep only stems that do not rewind the cycle, so
                        // each point appears once.
                        if matches!(&candidate, BoundaryPoint::Lasso { stem, .. } if stem == &path)
                        {
                            out.insert(candidate);
                        }
                    }
                }
                // The walk never steps into a fwdray; the escape along one
                // is recorded here instead. The path holds no ray edges, so
                // the candidate is already canonical.
                for p in g.primitives_at(v, PrimitiveKind::FwdRay) {
                    out.insert(BoundaryPoint::RayTail {
                        stem: path.clone(),
                        tag: p.tag.clone(),
                        depth: 0,
                    });
                }
            }
            VertexRef::Derived { tag, index } => {
                if g.primitive(tag).map(|p| p.kind) == Some(PrimitiveKind::FwdRay) {
                    out.insert(BoundaryPoint::RayTail {
                        stem: path.clone(),
                        tag: tag.clone(),
                        depth: *index as u64,
                    });
                }
            }
        }
        if path.len() >= depth {
            continue;
        }
        for e in g
            .out_edges_bounded(&cur, family_bound)
            .map_err(|err| BoundaryError::MalformedPoint(err.to_string()))?
        {
            if let EdgeRef::Family { tag, .. } = &e {
                if g.primitive(tag).expect("valid edge").kind == PrimitiveKind::FwdRay {
                    continue;
                }
            }
            let next = g
                .edge_target(&e)
                .map_err(|err| BoundaryError::MalformedPoint(err.to_string()))?;
            let mut longer = path.clone();
            longer.push(e);
            stack.push((next, longer));
        }
    }
    Ok(out.into_iter().collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalHomeoReport {
    pub base: Vec<EdgeRef>,
    pub depth: usize,
    pub source_count: usize,
    pub target_count: usize,
    pub bijective: bool,
    pub violation: Option<String>,
}

/// Check that shifting by |μ| maps the bounded enumeration of Z(μ)
/// bijectively onto the bounded enumeration of Z(r(μ)). This exercises
/// prefixing, shifting and enumeration against each other; it is a bounded
/// verification, not a proof about the full (uncountable) sets.
pub fn local_homeo_check(
    g: &GraphPresentation,
    start: &VertexRef,
    base: &[EdgeRef],
    depth: usize,
    family_bound: u64,
) -> Result<LocalHomeoReport, BoundaryError> {
    let z = CylinderSet::new(g, start.clone(), base.to_vec(), Vec::new())?;
    let n = base.len();
    let end = z.end_vertex(g)?;
    let mut sources = Vec::new();
    for x in enumerate_points(g, start, n + depth, family_bound)? {
        if z.contains(g, &x)? {
            sources.push(x);
        }
    }
    let targets: BTreeSet<BoundaryPoint> = enumerate_points(g, &end, depth, family_bound)?
        .into_iter()
        .collect();
    let mut shifted: BTreeSet<BoundaryPoint> = BTreeSet::new();
    let mut violation = None;
    for x in &sources {
        let y = x.shift(n)?;
        if !targets.contains(&y) {
            violation = Some(format!("shift of {x} gives {y}, not an enumerated target"));
        }
        if !shifted.insert(y.clone()) {
            violation = Some(format!("shift is not injective at {x}"));
        }
    }
    if violation.is_none() && shifted.len() != targets.len() {
        let missing = targets.difference(&shifted).next();
        violation = missing.map(|y| format!("target {y} has no enumerated preimage"));
    }
    let bijective = violation.is_none();
    Ok(LocalHomeoReport {
        base: base.to_vec(),
        depth,
        source_count: sources.len(),
        target_count: targets.len(),
        bijective,
        violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn loop_cycle(g: &GraphPresentation) -> Cycle {
        enumerate_cycles(g).into_iter().next().expect("a cycle")
    }

    #[test]
    fn singular_sets_match_degree_rules() {
        let g = fixtures::receiver();
        let s = singular_vertices(&g);
        assert_eq!(s.core, vec!["v5", "v6", "v7"]);
        assert_eq!(s.outstar_families, vec!["out0"]);
        assert!(s.contains(&VertexRef::core("v6")));
        assert!(s.contains(&VertexRef::derived("out0", 7)));
        assert!(!s.contains(&VertexRef::core("v")));

        assert_eq!(singular_vertices(&fixtures::single_loop()), SingularSet::default());
        let s = singular_vertices(&fixtures::sink());
        assert_eq!(s.core, vec!["v"]);
    }

    #[test]
    fn shift_on_lassos_advances_phase() {
        let g = fixtures::single_loop();
        let c = loop_cycle(&g);
        let x = BoundaryPoint::lasso(Vec::new(), c, 0);
        assert_eq!(x.shift(1).unwrap(), x);

        // Two-cycle with a stem: shifting past the stem advances the phase.
        let g = GraphPresentation::parse(
            "vertex a\nvertex b\nvertex s\nedge e1: a -> b\nedge e2: b -> a\nedge f: s -> a\n",
        )
        .unwrap();
        let c = loop_cycle(&g);
        let x = BoundaryPoint::lasso(vec![EdgeRef::core("f", 0)], c.clone(), 0);
        let y = x.shift(2).unwrap();
        assert_eq!(
            y,
            BoundaryPoint::Lasso {
                stem: Vec::new(),
                cycle: c,
                phase: 1
            }
        );
        assert_eq!(y.to_string(), "(e1.e2)^inf@1");
    }

    #[test]
    fn shift_of_single_edge_is_its_range() {
        let g = GraphPresentation::parse("vertex u\nvertex v\nedge e: u -> v\n").unwrap();
        let x = BoundaryPoint::FinitePath {
            edges: vec![EdgeRef::core("e", 0)],
            terminal: VertexRef::core("v"),
        };
        x.validate(&g).unwrap();
        assert_eq!(
            x.shift(1).unwrap(),
            BoundaryPoint::FinitePath {
                edges: Vec::new(),
                terminal: VertexRef::core("v")
            }
        );
        assert_eq!(
            x.shift(2),
            Err(BoundaryError::ShiftTooFar { len: 1, n: 2 })
        );
    }

    #[test]
    fn shift_composes() {
        let g = fixtures::stranded();
        let x = BoundaryPoint::ray_tail(
            vec![EdgeRef::core("a1", 0), EdgeRef::core("a2", 0)],
            "fw0".into(),
            0,
        );
        x.validate(&g).unwrap();
        for (m, n) in [(0, 1), (1, 1), (2, 3), (1, 4)] {
            assert_eq!(
                x.shift(m).unwrap().shift(n).unwrap(),
                x.shift(m + n).unwrap()
            );
        }
        assert_eq!(x.shift(4).unwrap().to_string(), "fw0^ray@2");
    }

    #[test]
    fn lasso_canonicalization_rolls_stem() {
        let g = GraphPresentation::parse(
            "vertex a\nvertex b\nedge e1: a -> b\nedge e2: b -> a\n",
        )
        .unwrap();
        let c = loop_cycle(&g);
        // Stem (e1 e2) entering at phase 0 is two full rewinds.
        let x = BoundaryPoint::lasso(
            vec![EdgeRef::core("e1", 0), EdgeRef::core("e2", 0)],
            c.clone(),
            0,
        );
        assert_eq!(
            x,
            BoundaryPoint::Lasso {
                stem: Vec::new(),
                cycle: c.clone(),
                phase: 0
            }
        );
        // Stem ending elsewhere stays.
        let y = BoundaryPoint::lasso(vec![EdgeRef::core("e1", 0)], c.clone(), 1);
        assert_eq!(
            y,
            BoundaryPoint::Lasso {
                stem: Vec::new(),
                cycle: c.clone(),
                phase: 0
            }
        );
        let z = BoundaryPoint::lasso(Vec::new(), c.clone(), 1);
        z.validate(&g).unwrap();
        assert_eq!(z.to_string(), "(e1.e2)^inf@1");
    }

    #[test]
    fn canonical_equality_matches_unrolling() {
        let g = GraphPresentation::parse(
            "vertex a\nvertex b\nvertex s\nedge e1: a -> b\nedge e2: b -> a\nedge f: s -> b\n",
        )
        .unwrap();
        let c = loop_cycle(&g);
        // f enters at b (phase 1); f.e2 enters at a (phase 0). Same point
        // after canonicalization? No: f.e2.(e1 e2 …) vs f.(e2 e1 …) — the
        // second rolls e2 into the phase, giving the first. Unroll both.
        let p = BoundaryPoint::lasso(
            vec![EdgeRef::core("f", 0), EdgeRef::core("e2", 0)],
            c.clone(),
            0,
        );
        let q = BoundaryPoint::lasso(vec![EdgeRef::core("f", 0)], c.clone(), 1);
        assert_eq!(p, q);
        assert_eq!(p.unroll(9), q.unroll(9));
        p.validate(&g).unwrap();

        let r = BoundaryPoint::lasso(Vec::new(), c.clone(), 0);
        assert_ne!(p, r);
        assert_ne!(p.unroll(9), r.unroll(9));
    }

    #[test]
    fn ray_tail_canonicalization_absorbs_ray_edges() {
        let g = fixtures::stranded();
        let x = BoundaryPoint::ray_tail(
            vec![EdgeRef::family("fw0", 1), EdgeRef::family("fw0", 2)],
            "fw0".into(),
            2,
        );
        assert_eq!(
            x,
            BoundaryPoint::RayTail {
                stem: Vec::new(),
                tag: "fw0".into(),
                depth: 0
            }
        );
        x.validate(&g).unwrap();
        assert_eq!(x.to_string(), "fw0^ray");
        assert_eq!(x.edge_at(0), Some(EdgeRef::family("fw0", 1)));
        assert_eq!(x.edge_at(3), Some(EdgeRef::family("fw0", 4)));
    }

    #[test]
    fn cylinder_membership_basic() {
        let g = fixtures::single_loop();
        let c = loop_cycle(&g);
        let x = BoundaryPoint::lasso(Vec::new(), c, 0);
        let z = CylinderSet::at_vertex(VertexRef::core("v"));
        assert!(z.contains(&g, &x).unwrap());
        let z_excl = CylinderSet::new(
            &g,
            VertexRef::core("v"),
            Vec::new(),
            vec![EdgeRef::core("e", 0)],
        )
        .unwrap();
        assert!(!z_excl.contains(&g, &x).unwrap());
    }

    #[test]
    fn finite_point_membership_is_vacuous_past_its_end() {
        let g = fixtures::omega_in();
        // u emits omega edges; v is a sink. The empty path at u is a
        // boundary point and belongs to Z(u \ F) for any finite F.
        let x = BoundaryPoint::FinitePath {
            edges: Vec::new(),
            terminal: VertexRef::core("u"),
        };
        x.validate(&g).unwrap();
        let z = CylinderSet::new(
            &g,
            VertexRef::core("u"),
            Vec::new(),
            vec![EdgeRef::core("e", 0), EdgeRef::core("e", 5)],
        )
        .unwrap();
        assert!(z.contains(&g, &x).unwrap());
    }

    #[test]
    fn cylinder_emptiness_exactly_when_regular_end_exhausted() {
        let g = fixtures::single_loop();
        let z = CylinderSet::new(
            &g,
            VertexRef::core("v"),
            Vec::new(),
            vec![EdgeRef::core("e", 0)],
        )
        .unwrap();
        assert_eq!(cylinder_nonempty(&g, &z).unwrap(), None);

        let z = CylinderSet::at_vertex(VertexRef::core("v"));
        let member = cylinder_nonempty(&g, &z).unwrap().expect("nonempty");
        assert!(z.contains(&g, &member).unwrap());

        let g = fixtures::sink();
        let z = CylinderSet::at_vertex(VertexRef::core("v"));
        let member = cylinder_nonempty(&g, &z).unwrap().expect("nonempty");
        assert_eq!(
            member,
            BoundaryPoint::FinitePath {
                edges: Vec::new(),
                terminal: VertexRef::core("v")
            }
        );
    }

    #[test]
    fn receiver_fixture_z_v_minus_b1_is_empty() {
        // v emits exactly one edge b1; excluding it leaves nothing.
        let g = fixtures::receiver();
        let z = CylinderSet::new(
            &g,
            VertexRef::core("v"),
            Vec::new(),
            vec![EdgeRef::core("b1", 0)],
        )
        .unwrap();
        assert_eq!(cylinder_nonempty(&g, &z).unwrap(), None);
    }

    #[test]
    fn members_are_members() {
        // Spot-check the returned member across fixture cylinders.
        for (g, start) in [
            (fixtures::receiver(), "v1"),
            (fixtures::cycle_exit(), "v"),
            (fixtures::backward_chain(), "v"),
            (fixtures::stranded(), "v"),
            (fixtures::diamond(), "x"),
        ] {
            let z = CylinderSet::at_vertex(VertexRef::core(start));
            let member = cylinder_nonempty(&g, &z).unwrap().expect("nonempty");
            member.validate(&g).expect("member validates");
            assert!(z.contains(&g, &member).unwrap(), "{member} not in {z}");
        }
    }

    #[test]
    fn completion_enters_rays_and_cycles() {
        let g = fixtures::stranded();
        let x = complete_from(&g, &VertexRef::core("v")).unwrap();
        assert_eq!(x.to_string(), "a1.a2.fw0^ray");

        let g = fixtures::cycle_exit();
        let x = complete_from(&g, &VertexRef::core("v")).unwrap();
        // Smallest out-edge of v is c1, then around the 4-cycle back to v.
        assert_eq!(x.to_string(), "(c1.c2.c3.c4)^inf");

        let g = fixtures::backward_chain();
        // Descends to v, then continues to v4, stopping at the ω-emitter.
        let x = complete_from(&g, &VertexRef::derived("bk0", -2)).unwrap();
        assert_eq!(x.to_string(), "bk0[-2].bk0[-1].a1");
        match x {
            BoundaryPoint::FinitePath { ref terminal, .. } => {
                assert_eq!(terminal, &VertexRef::core("v4"))
            }
            ref other => panic!("unexpected completion {other:?}"),
        }
    }

    #[test]
    fn completion_entering_a_cycle_off_its_minimum_keeps_the_phase() {
        // u enters the b/c cycle at c, but canonical rotation starts at b.
        let g = GraphPresentation::parse(
            "vertex u\nvertex b\nvertex c\nedge s: u -> c\nedge e: c -> b\nedge f: b -> c\n",
        )
        .unwrap();
        let x = complete_from(&g, &VertexRef::core("u")).unwrap();
        assert_eq!(x.to_string(), "s.(f.e)^inf@1");
        x.validate(&g).expect("completion validates");
        match x {
            BoundaryPoint::Lasso { ref cycle, phase, .. } => {
                assert_eq!(cycle.vertices, vec!["b".to_string(), "c".to_string()]);
                assert_eq!(phase, 1);
            }
            ref other => panic!("unexpected completion {other:?}"),
        }
    }

    #[test]
    fn enumeration_counts_loop_and_sink() {
        let g = fixtures::single_loop();
        let pts = enumerate_points(&g, &VertexRef::core("v"), 3, 2).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].to_string(), "(e)^inf");

        let g = fixtures::sink();
        let pts = enumerate_points(&g, &VertexRef::core("v"), 3, 2).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].to_string(), "v");
    }

    #[test]
    fn enumeration_is_canonical_and_valid() {
        for (g, start) in [
            (fixtures::cycle_exit(), VertexRef::core("v")),
            (fixtures::receiver(), VertexRef::core("v1")),
            (fixtures::stranded(), VertexRef::core("v")),
            (fixtures::stranded(), VertexRef::derived("fw0", 2)),
        ] {
            let pts = enumerate_points(&g, &start, 4, 2).unwrap();
            assert!(!pts.is_empty());
            for p in &pts {
                p.validate(&g).expect("enumerated point validates");
                assert_eq!(p.start_vertex(&g).unwrap(), start);
            }
        }
    }

    #[test]
    fn local_homeo_on_loop_and_cycle_exit() {
        let g = fixtures::single_loop();
        let r = local_homeo_check(&g, &VertexRef::core("v"), &[EdgeRef::core("e", 0)], 3, 2)
            .unwrap();
        assert!(r.bijective, "{:?}", r.violation);
        assert_eq!(r.source_count, 1);
        assert_eq!(r.target_count, 1);

        let g = fixtures::cycle_exit();
        let r = local_homeo_check(&g, &VertexRef::core("v"), &[EdgeRef::core("d1", 0)], 4, 2)
            .unwrap();
        assert!(r.bijective, "{:?}", r.violation);
        assert_eq!(r.source_count, r.target_count);
        assert!(r.source_count > 1);

        let g = fixtures::sink();
        let r = local_homeo_check(&g, &VertexRef::core("v"), &[], 2, 2).unwrap();
        assert!(r.bijective);
        assert_eq!(r.source_count, 1);
    }

    #[test]
    fn validation_rejects_malformed_points() {
        let g = fixtures::single_loop();
        // Terminal of a finite path must be singular; the loop vertex is not.
        let x = BoundaryPoint::FinitePath {
            edges: Vec::new(),
            terminal: VertexRef::core("v"),
        };
        assert!(x.validate(&g).is_err());
        // Non-canonical lasso.
        let c = loop_cycle(&g);
        let y = BoundaryPoint::Lasso {
            stem: vec![EdgeRef::core("e", 0)],
            cycle: c,
            phase: 0,
        };
        assert!(y.validate(&g).is_err());
        // Ray tail naming a non-ray.
        let g = fixtures::backward_chain();
        let z = BoundaryPoint::RayTail {
            stem: Vec::new(),
            tag: "bk0".into(),
            depth: 0,
        };
        assert!(z.validate(&g).is_err());
    }
}
