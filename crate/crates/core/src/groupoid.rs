//! The shift groupoid over boundary path space, symbolically.
//!
//! An element pairs two boundary points with a shift offset: (x, k, y) means
//! σ^m(x) = σ^n(y) for some recorded evidence (m, n) with k = m − n. Units,
//! composition and inversion stay inside canonical forms, so equality is
//! plain structural equality.
//!
//! On top of the elements sit the quantities the density argument needs:
//! isotropy groups (trivial, or infinite cyclic for a lasso), the effective
//! count of backward continuations into a vertex (`path_count_into`), orbit
//! finiteness with machine-checkable certificates for the infinite side, a
//! König-style backward chain extractor, and the headline
//! `periodic_density_check`, which decides whether periodic points are dense
//! in the boundary by sweeping every small cylinder.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::boundary::{
    complete_from, cylinder_nonempty, BoundaryError, BoundaryPoint, CylinderSet,
};
use crate::conditions::{
    decide_rfd, on_cycle_vertices, shortest_cycle_through, smallest_arc_between, ChainGen,
    ConditionReport, Cycle, Witness,
};
use crate::presentation::{
    ArcId, EdgeRef, ExtNat, GraphPresentation, InfinitePrimitive, PrimitiveKind, QueryError, Tag,
    VertexId, VertexRef,
};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GroupoidError {
    #[error("elements do not compose: left ends at `{left}`, right starts at `{right}`")]
    NotComposable { left: String, right: String },
    #[error("evidence ({m},{n}) does not pair the two points")]
    BadEvidence { m: usize, n: usize },
    #[error("orbit has more than {cap} members; raise the cap to enumerate it")]
    CapExceeded { cap: usize },
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// (x, k, y): the two points agree after shifting — σ^m(x) = σ^n(y) with
/// k = m − n. The evidence pair is carried along so every element stays
/// re-checkable without search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupoidElement {
    pub x: BoundaryPoint,
    pub k: i64,
    pub y: BoundaryPoint,
    pub evidence: (usize, usize),
}

impl GroupoidElement {
    pub fn unit(x: BoundaryPoint) -> GroupoidElement {
        GroupoidElement {
            y: x.clone(),
            x,
            k: 0,
            evidence: (0, 0),
        }
    }

    /// Build an element, checking the evidence actually exhibits the pairing.
    pub fn new(
        x: BoundaryPoint,
        k: i64,
        y: BoundaryPoint,
        evidence: (usize, usize),
    ) -> Result<GroupoidElement, GroupoidError> {
        let (m, n) = evidence;
        if m as i64 - n as i64 != k {
            return Err(GroupoidError::BadEvidence { m, n });
        }
        if x.shift(m)? != y.shift(n)? {
            return Err(GroupoidError::BadEvidence { m, n });
        }
        Ok(GroupoidElement { x, k, y, evidence })
    }

    pub fn is_unit(&self) -> bool {
        self.k == 0 && self.x == self.y
    }

    /// (x,k,y)·(y,l,z) = (x,k+l,z). The merged evidence aligns both pairs on
    /// the middle point: with t = max(n₁, m₂), shifting y by t is reachable
    /// from both sides, giving (m₁ + t − n₁, n₂ + t − m₂).
    pub fn compose(&self, other: &GroupoidElement) -> Result<GroupoidElement, GroupoidError> {
        if self.y != other.x {
            return Err(GroupoidError::NotComposable {
                left: self.y.to_string(),
                right: other.x.to_string(),
            });
        }
        let (m1, n1) = self.evidence;
        let (m2, n2) = other.evidence;
        let t = n1.max(m2);
        GroupoidElement::new(
            self.x.clone(),
            self.k + other.k,
            other.y.clone(),
            (m1 + t - n1, n2 + t - m2),
        )
    }

    pub fn invert(&self) -> GroupoidElement {
        GroupoidElement {
            x: self.y.clone(),
            k: -self.k,
            y: self.x.clone(),
            evidence: (self.evidence.1, self.evidence.0),
        }
    }

    /// Both points are valid and the evidence still pairs them.
    pub fn validate(&self, g: &GraphPresentation) -> Result<(), GroupoidError> {
        self.x.validate(g)?;
        self.y.validate(g)?;
        let (m, n) = self.evidence;
        if m as i64 - n as i64 != self.k || self.x.shift(m)? != self.y.shift(n)? {
            return Err(GroupoidError::BadEvidence { m, n });
        }
        Ok(())
    }
}

impl fmt::Display for GroupoidElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:+}, {})", self.x, self.k, self.y)
    }
}

/// Isotropy at a boundary point: trivial for finite paths and ray tails,
/// infinite cyclic for lassos, generated by shifting one minimal period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsotropyGroup {
    Trivial,
    InfiniteCyclic { period: u64 },
}

impl fmt::Display for IsotropyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsotropyGroup::Trivial => write!(f, "trivial"),
            IsotropyGroup::InfiniteCyclic { period } => {
                write!(f, "infinite cyclic (period {period})")
            }
        }
    }
}

/// Smallest d dividing the word length such that the word is a repetition of
/// its first d letters.
fn primitive_period(word: &[EdgeRef]) -> u64 {
    let n = word.len();
    for d in 1..=n {
        if n % d == 0 && (0..n).all(|i| word[i] == word[(i + d) % n]) {
            return d as u64;
        }
    }
    n as u64
}

pub fn isotropy(x: &BoundaryPoint) -> IsotropyGroup {
    match x {
        BoundaryPoint::Lasso { cycle, .. } => IsotropyGroup::InfiniteCyclic {
            period: primitive_period(&cycle.edges),
        },
        _ => IsotropyGroup::Trivial,
    }
}

/// The generator (x, period, x) when the isotropy is infinite cyclic.
pub fn isotropy_generator(x: &BoundaryPoint) -> Option<GroupoidElement> {
    match isotropy(x) {
        IsotropyGroup::Trivial => None,
        IsotropyGroup::InfiniteCyclic { period } => {
            let stem = match x {
                BoundaryPoint::Lasso { stem, .. } => stem.len(),
                _ => unreachable!("only lassos have isotropy"),
            };
            Some(GroupoidElement {
                x: x.clone(),
                k: period as i64,
                y: x.clone(),
                evidence: (stem + period as usize, stem),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Effective backward path counts.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    Exact,
    Bound,
}

/// Why infinitely many distinct backward continuations enter a vertex. The
/// carrier always lies inside the coreach of the counted vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum OmegaReason {
    /// An ω-multiplicity arc lands in the coreach.
    OmegaArc { arc: ArcId },
    /// An instar is anchored in the coreach.
    InStar { tag: Tag },
    /// A backray is anchored in the coreach.
    BackRayAnchor { tag: Tag },
    /// The counted vertex itself sits on a backray.
    BackRayVertex { tag: Tag },
    /// A cycle inside the coreach has an exit that stays inside it: winding
    /// then leaving produces pairwise-distinct continuations.
    CycleExit { cycle: Cycle, exit: EdgeRef },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum CountClass {
    Finite { exact: u64, bound: u64 },
    Infinite(OmegaReason),
}

fn restrict(g: &GraphPresentation, keep: &BTreeSet<VertexId>) -> GraphPresentation {
    GraphPresentation {
        vertices: g.vertices.iter().filter(|v| keep.contains(*v)).cloned().collect(),
        arcs: g
            .arcs
            .iter()
            .filter(|a| keep.contains(&a.source) && keep.contains(&a.target))
            .cloned()
            .collect(),
        primitives: Vec::new(),
    }
}

/// Total number of paths (length ≥ 0) into `w` in an acyclic finite-mult
/// presentation, saturating at u64::MAX. Each path is counted at its start.
fn total_paths_into(g: &GraphPresentation, w: &str) -> u64 {
    fn from(g: &GraphPresentation, v: &str, w: &str, memo: &mut BTreeMap<VertexId, u64>) -> u64 {
        if let Some(&n) = memo.get(v) {
            return n;
        }
        let mut n: u64 = u64::from(v == w);
        for a in g.arcs_from(v) {
            let ExtNat::Fin(m) = a.mult else {
                unreachable!("ω arcs are classified before counting")
            };
            n = n.saturating_add(m.saturating_mul(from(g, &a.target, w, memo)));
        }
        memo.insert(v.to_string(), n);
        n
    }
    let mut memo = BTreeMap::new();
    g.vertices
        .iter()
        .fold(0u64, |acc, v| acc.saturating_add(from(g, v, w, &mut memo)))
}

/// Closed-form bound Σ_{i=0}^{N} Mⁱ over the part coreaching `w`, where
/// N + 1 counts its vertices and M is the largest in-degree inside it. Sound
/// because an acyclic path into `w` has length ≤ N and at most Mⁱ paths of
/// length i end at `w`.
fn geometric_bound(g: &GraphPresentation, w: &str) -> u64 {
    let coreach = g.core_coreachable(w).expect("vertex exists");
    let m: u64 = coreach
        .iter()
        .map(|v| {
            g.arcs_into(v)
                .filter(|a| coreach.contains(&a.source))
                .fold(0u64, |acc, a| {
                    let ExtNat::Fin(k) = a.mult else { return u64::MAX };
                    acc.saturating_add(k)
                })
        })
        .max()
        .unwrap_or(0);
    let mut acc: u64 = 0;
    let mut term: u64 = 1;
    for _ in 0..coreach.len() {
        acc = acc.saturating_add(term);
        term = term.saturating_mul(m);
    }
    acc
}

/// Count backward continuations into a core vertex. Winding a no-exit cycle
/// fixes the continued point, so such windings are counted once around: the
/// cycle case contributes its length plus, per cycle vertex, the paths that
/// enter it from outside the cycle.
fn classify_core(g: &GraphPresentation, w: &str) -> Result<CountClass, QueryError> {
    let coreach = g.core_coreachable(w)?;
    // Infinite generators, in fixed priority order for reproducible reasons.
    if let Some(a) = g
        .arcs
        .iter()
        .filter(|a| a.mult.is_omega() && coreach.contains(&a.target))
        .min_by(|x, y| x.id.cmp(&y.id))
    {
        return Ok(CountClass::Infinite(OmegaReason::OmegaArc { arc: a.id.clone() }));
    }
    for kind in [PrimitiveKind::InStar, PrimitiveKind::BackRay] {
        if let Some(p) = g
            .primitives
            .iter()
            .filter(|p| p.kind == kind && coreach.contains(&p.anchor))
            .min_by(|x, y| x.tag.cmp(&y.tag))
        {
            return Ok(CountClass::Infinite(match kind {
                PrimitiveKind::InStar => OmegaReason::InStar { tag: p.tag.clone() },
                _ => OmegaReason::BackRayAnchor { tag: p.tag.clone() },
            }));
        }
    }
    let sub = GraphPresentation {
        vertices: g.vertices.iter().filter(|v| coreach.contains(*v)).cloned().collect(),
        arcs: g.arcs.iter().filter(|a| coreach.contains(&a.target)).cloned().collect(),
        primitives: Vec::new(),
    };
    let cyclic = on_cycle_vertices(&sub);
    if cyclic.is_empty() {
        return Ok(CountClass::Finite {
            exact: total_paths_into(&sub, w),
            bound: geometric_bound(&sub, w),
        });
    }
    // A cycle with an exit that stays in the coreach makes the count ω.
    for v in &cyclic {
        let out: u64 = sub.arcs_from(v).fold(0u64, |acc, a| {
            let ExtNat::Fin(k) = a.mult else { return u64::MAX };
            acc.saturating_add(k)
        });
        if out >= 2 {
            let cycle = shortest_cycle_through(&sub, v);
            let pos = cycle
                .vertices
                .iter()
                .position(|u| u == v)
                .expect("cycle passes through v");
            let exit = sub
                .out_edges_bounded(&VertexRef::core(v.clone()), 2)?
                .into_iter()
                .find(|e| *e != cycle.edges[pos])
                .expect("out-degree at least two leaves an exit");
            return Ok(CountClass::Infinite(OmegaReason::CycleExit { cycle, exit }));
        }
    }
    // No exits anywhere: every cycle in the coreach is forced to run through
    // w itself (a vertex off such a cycle could not reach w), and two such
    // cycles would exit each other, so exactly one remains.
    debug_assert!(cyclic.contains(w));
    let cycle = shortest_cycle_through(&sub, w);
    let cycle_arcs: BTreeSet<ArcId> = cycle
        .edges
        .iter()
        .map(|e| match e {
            EdgeRef::Core { arc, .. } => arc.clone(),
            EdgeRef::Family { .. } => unreachable!("core cycle"),
        })
        .collect();
    let h = GraphPresentation {
        vertices: sub.vertices.clone(),
        arcs: sub.arcs.iter().filter(|a| !cycle_arcs.contains(&a.id)).cloned().collect(),
        primitives: Vec::new(),
    };
    let n = cycle.len() as u64;
    let mut exact = n;
    let mut bound = n;
    for v in &cycle.vertices {
        let keep = h.core_coreachable(v)?;
        let h_v = restrict(&h, &keep);
        exact = exact.saturating_add(total_paths_into(&h_v, v));
        bound = bound.saturating_add(geometric_bound(&h_v, v));
    }
    Ok(CountClass::Finite { exact, bound })
}

fn add_finite(class: CountClass, k: u64) -> CountClass {
    match class {
        CountClass::Finite { exact, bound } => CountClass::Finite {
            exact: exact.saturating_add(k),
            bound: bound.saturating_add(k),
        },
        inf => inf,
    }
}

pub(crate) fn classify(g: &GraphPresentation, w: &VertexRef) -> Result<CountClass, QueryError> {
    g.in_degree(w)?; // validates the reference
    match w {
        VertexRef::Core(v) => classify_core(g, v),
        VertexRef::Derived { tag, index } => {
            let p = g.primitive(tag).expect("validated");
            match p.kind {
                PrimitiveKind::InStar => Ok(CountClass::Finite { exact: 1, bound: 1 }),
                PrimitiveKind::OutStar => Ok(add_finite(classify_core(g, &p.anchor)?, 1)),
                PrimitiveKind::BackRay => {
                    Ok(CountClass::Infinite(OmegaReason::BackRayVertex { tag: tag.clone() }))
                }
                PrimitiveKind::FwdRay => {
                    Ok(add_finite(classify_core(g, &p.anchor)?, *index as u64))
                }
            }
        }
    }
}

/// The number of essentially distinct backward continuations into `w`:
/// finite paths ending at `w`, except that windings of a no-exit cycle are
/// identified (prepending a full lap to a point already riding the cycle
/// fixes it). `Bound` replaces the acyclic totals by the closed-form
/// geometric sum, so exact ≤ bound always holds.
pub fn path_count_into(
    g: &GraphPresentation,
    w: &VertexRef,
    mode: CountMode,
) -> Result<ExtNat, QueryError> {
    Ok(match classify(g, w)? {
        CountClass::Finite { exact, bound } => ExtNat::Fin(match mode {
            CountMode::Exact => exact,
            CountMode::Bound => bound,
        }),
        CountClass::Infinite(_) => ExtNat::Omega,
    })
}

// ---------------------------------------------------------------------------
// Orbits.

/// Certificate that an orbit is infinite, carrying three pairwise-distinct
/// members that demonstrate the generating mechanism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitCertificate {
    /// Prepending ever more in-edges at `at` — three distinct single edges
    /// into an infinite receiver, or three nested backray segments.
    PrependBackward {
        at: VertexRef,
        prepend_edges: Vec<EdgeRef>,
        samples: Vec<BoundaryPoint>,
    },
    /// Winding the cycle k times before taking the exit yields a distinct
    /// member for every k.
    PrependCycleExit {
        cycle: Cycle,
        exit: EdgeRef,
        samples: Vec<BoundaryPoint>,
    },
    /// The point rides a forward ray: its shifts leave every finite region
    /// and never recur.
    ShiftEscape {
        at: VertexRef,
        samples: Vec<BoundaryPoint>,
    },
}

/// Two canonical points lie in one orbit exactly when some pair of shifts
/// agrees. Decidable shape by shape: shifts preserve the tail kind, and each
/// kind has finitely many distinct shifts to compare (ray tails of one ray
/// are always related).
pub fn shift_related(a: &BoundaryPoint, b: &BoundaryPoint) -> bool {
    fn horizon(p: &BoundaryPoint) -> usize {
        match p {
            BoundaryPoint::FinitePath { edges, .. } => edges.len(),
            BoundaryPoint::Lasso { stem, cycle, .. } => stem.len() + cycle.len(),
            BoundaryPoint::RayTail { stem, .. } => stem.len(),
        }
    }
    match (a, b) {
        (BoundaryPoint::RayTail { tag: ta, .. }, BoundaryPoint::RayTail { tag: tb, .. }) => {
            ta == tb
        }
        (BoundaryPoint::FinitePath { .. }, BoundaryPoint::FinitePath { .. })
        | (BoundaryPoint::Lasso { .. }, BoundaryPoint::Lasso { .. }) => {
            for m in 0..=horizon(a) {
                let sa = a.shift(m).expect("within horizon");
                for n in 0..=horizon(b) {
                    if sa == b.shift(n).expect("within horizon") {
                        return true;
                    }
                }
            }
            false
        }
        _ => false,
    }
}

impl OrbitCertificate {
    pub fn samples(&self) -> &[BoundaryPoint] {
        match self {
            OrbitCertificate::PrependBackward { samples, .. }
            | OrbitCertificate::PrependCycleExit { samples, .. }
            | OrbitCertificate::ShiftEscape { samples, .. } => samples,
        }
    }

    /// Re-check the certificate: the samples are valid, pairwise distinct,
    /// pairwise in one orbit (and in `base`'s orbit when given), and the
    /// named mechanism really is present in the presentation.
    pub fn validate(
        &self,
        g: &GraphPresentation,
        base: Option<&BoundaryPoint>,
    ) -> Result<(), String> {
        let samples = self.samples();
        if samples.len() != 3 {
            return Err(format!("expected 3 samples, got {}", samples.len()));
        }
        for s in samples {
            s.validate(g).map_err(|e| e.to_string())?;
        }
        for i in 0..samples.len() {
            for j in i + 1..samples.len() {
                if samples[i] == samples[j] {
                    return Err(format!("samples {i} and {j} coincide"));
                }
                if !shift_related(&samples[i], &samples[j]) {
                    return Err(format!("samples {i} and {j} are not in one orbit"));
                }
            }
        }
        if let Some(b) = base {
            if !shift_related(&samples[0], b) {
                return Err("samples do not lie in the base point's orbit".into());
            }
        }
        match self {
            OrbitCertificate::PrependBackward { at, prepend_edges, .. } => {
                if prepend_edges.len() != 3 {
                    return Err("expected 3 prepend edges".into());
                }
                let distinct: BTreeSet<&EdgeRef> = prepend_edges.iter().collect();
                if distinct.len() != 3 {
                    return Err("prepend edges repeat".into());
                }
                let targets: Vec<VertexRef> = prepend_edges
                    .iter()
                    .map(|e| g.edge_target(e).map_err(|err| err.to_string()))
                    .collect::<Result<_, _>>()?;
                let star = targets.iter().all(|t| t == at);
                let chain = targets[0] == *at
                    && (0..2).all(|i| {
                        g.edge_source(&prepend_edges[i])
                            .map(|s| Some(s) == targets.get(i + 1).cloned())
                            .unwrap_or(false)
                    });
                if star {
                    let d = g.in_degree(at).map_err(|e| e.to_string())?;
                    if !d.is_omega() {
                        return Err(format!("{at} has finite in-degree {d}"));
                    }
                } else if !chain {
                    return Err("prepend edges neither enter the vertex nor chain backward".into());
                }
                Ok(())
            }
            OrbitCertificate::PrependCycleExit { cycle, exit, .. } => {
                cycle.validate(g)?;
                let src = g.edge_source(exit).map_err(|e| e.to_string())?;
                let pos = cycle
                    .vertices
                    .iter()
                    .position(|v| VertexRef::Core(v.clone()) == src)
                    .ok_or("exit does not leave the cycle")?;
                if *exit == cycle.edges[pos] {
                    return Err("exit is a cycle edge".into());
                }
                Ok(())
            }
            OrbitCertificate::ShiftEscape { at, .. } => {
                let tag = match &samples[0] {
                    BoundaryPoint::RayTail { tag, .. } => tag.clone(),
                    _ => return Err("escape samples must ride a forward ray".into()),
                };
                for s in samples {
                    if !matches!(s, BoundaryPoint::RayTail { tag: t, .. } if *t == tag) {
                        return Err("escape samples ride different rays".into());
                    }
                }
                match at {
                    VertexRef::Derived { tag: t, .. } if *t == tag => Ok(()),
                    _ => Err(format!("escape vertex {at} is not on ray `{tag}`")),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitReport {
    /// Every member, canonical and sorted; closed under the shift relation.
    Finite { members: Vec<BoundaryPoint> },
    Infinite { certificate: OrbitCertificate },
}

impl OrbitReport {
    pub fn is_finite(&self) -> bool {
        matches!(self, OrbitReport::Finite { .. })
    }

    pub fn size(&self) -> Option<usize> {
        match self {
            OrbitReport::Finite { members } => Some(members.len()),
            OrbitReport::Infinite { .. } => None,
        }
    }
}

/// Positions 0..count enumerate every distinct suffix of the point.
fn position_count(x: &BoundaryPoint) -> usize {
    match x {
        BoundaryPoint::FinitePath { edges, .. } => edges.len() + 1,
        BoundaryPoint::Lasso { stem, cycle, .. } => stem.len() + cycle.len(),
        BoundaryPoint::RayTail { stem, .. } => stem.len() + 1,
    }
}

pub(crate) enum Escape {
    Ray,
    At {
        pos: usize,
        at: VertexRef,
        reason: OmegaReason,
    },
}

/// First position along the point whose vertex admits infinitely many
/// backward continuations — each one is a distinct orbit member, so the
/// orbit is finite exactly when no position escapes. Ray tails escape
/// forward instead: their shifts are pairwise distinct already.
pub(crate) fn escape_of(
    g: &GraphPresentation,
    x: &BoundaryPoint,
    memo: &mut BTreeMap<VertexRef, CountClass>,
) -> Result<Option<Escape>, GroupoidError> {
    if matches!(x, BoundaryPoint::RayTail { .. }) {
        return Ok(Some(Escape::Ray));
    }
    for pos in 0..position_count(x) {
        let at = x.shift(pos)?.start_vertex(g)?;
        let class = match memo.get(&at) {
            Some(c) => c.clone(),
            None => {
                let c = classify(g, &at)?;
                memo.insert(at.clone(), c.clone());
                c
            }
        };
        if let CountClass::Infinite(reason) = class {
            return Ok(Some(Escape::At { pos, at, reason }));
        }
    }
    Ok(None)
}

/// Shortest path between core vertices, lexicographically least among the
/// shortest, using copy 0 of the smallest arc at each step.
fn lex_shortest_core_path(g: &GraphPresentation, from: &str, to: &str) -> Option<Vec<EdgeRef>> {
    let mut dist: BTreeMap<VertexId, usize> = BTreeMap::from([(to.to_string(), 0)]);
    let mut queue: VecDeque<VertexId> = VecDeque::from([to.to_string()]);
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        for a in g.arcs_into(&cur) {
            if !dist.contains_key(&a.source) {
                dist.insert(a.source.clone(), d + 1);
                queue.push_back(a.source.clone());
            }
        }
    }
    dist.get(from)?;
    let mut edges = Vec::new();
    let mut cur = from.to_string();
    while cur != to {
        let d = dist[&cur];
        let next = g
            .arcs_from(&cur)
            .filter(|a| dist.get(&a.target) == Some(&(d - 1)))
            .map(|a| a.target.clone())
            .min()
            .expect("distance decreases toward the target");
        edges.push(EdgeRef::Core {
            arc: smallest_arc_between(g, &cur, &next).expect("edge exists"),
            copy: 0,
        });
        cur = next;
    }
    Some(edges)
}

/// The core vertex whose coreach carries the infinite mechanism, plus the
/// fixed edges leading from it to the (possibly derived) counted vertex.
fn core_carrier(
    g: &GraphPresentation,
    at: &VertexRef,
) -> (VertexId, Vec<EdgeRef>) {
    match at {
        VertexRef::Core(v) => (v.clone(), Vec::new()),
        VertexRef::Derived { tag, index } => {
            let p = g.primitive(tag).expect("validated");
            match p.kind {
                PrimitiveKind::OutStar => {
                    (p.anchor.clone(), vec![EdgeRef::family(tag.clone(), *index)])
                }
                PrimitiveKind::FwdRay => (
                    p.anchor.clone(),
                    (1..=*index).map(|i| EdgeRef::family(tag.clone(), i)).collect(),
                ),
                _ => unreachable!("instar sources are finite, backray vertices handled directly"),
            }
        }
    }
}

pub(crate) fn certificate_for(
    g: &GraphPresentation,
    x: &BoundaryPoint,
    escape: Escape,
) -> Result<OrbitCertificate, GroupoidError> {
    match escape {
        Escape::Ray => {
            let (stem_len, depth) = match x {
                BoundaryPoint::RayTail { stem, depth, .. } => (stem.len(), *depth),
                _ => unreachable!("ray escape comes from a ray tail"),
            };
            let tag = match x {
                BoundaryPoint::RayTail { tag, .. } => tag.clone(),
                _ => unreachable!(),
            };
            let pure = x.shift(stem_len)?;
            Ok(OrbitCertificate::ShiftEscape {
                at: VertexRef::derived(tag, depth.max(1) as i64),
                samples: vec![pure.clone(), pure.shift(1)?, pure.shift(2)?],
            })
        }
        Escape::At { pos, at, reason } => {
            let s = x.shift(pos)?;
            if let OmegaReason::BackRayVertex { tag } = &reason {
                // The counted vertex sits at tag(-k); nested segments from
                // ever deeper ray vertices prepend onto it directly.
                let k = match &at {
                    VertexRef::Derived { index, .. } => (-index) as i64,
                    VertexRef::Core(_) => unreachable!("backray vertices are derived"),
                };
                let segment = |i: i64| -> Vec<EdgeRef> {
                    (-(k + i)..=-(k + 1))
                        .map(|j| EdgeRef::family(tag.clone(), j))
                        .collect()
                };
                return Ok(OrbitCertificate::PrependBackward {
                    at: at.clone(),
                    prepend_edges: (1..=3).map(|i| EdgeRef::family(tag.clone(), -(k + i))).collect(),
                    samples: (1..=3).map(|i| s.prepend(&segment(i))).collect(),
                });
            }
            let (core_u, tail) = core_carrier(g, &at);
            match reason {
                OmegaReason::OmegaArc { arc } => {
                    let landing = g.arc(&arc).expect("classified").target.clone();
                    let mut q = lex_shortest_core_path(g, &landing, &core_u)
                        .expect("landing coreaches the counted vertex");
                    q.extend(tail);
                    let samples = (0..3)
                        .map(|c| {
                            let mut p = vec![EdgeRef::core(arc.clone(), c)];
                            p.extend(q.iter().cloned());
                            s.prepend(&p)
                        })
                        .collect();
                    Ok(OrbitCertificate::PrependBackward {
                        at: VertexRef::Core(landing),
                        prepend_edges: (0..3).map(|c| EdgeRef::core(arc.clone(), c)).collect(),
                        samples,
                    })
                }
                OmegaReason::InStar { tag } => {
                    let landing = g.primitive(&tag).expect("classified").anchor.clone();
                    let mut q = lex_shortest_core_path(g, &landing, &core_u)
                        .expect("anchor coreaches the counted vertex");
                    q.extend(tail);
                    let samples = (1..=3)
                        .map(|i| {
                            let mut p = vec![EdgeRef::family(tag.clone(), i)];
                            p.extend(q.iter().cloned());
                            s.prepend(&p)
                        })
                        .collect();
                    Ok(OrbitCertificate::PrependBackward {
                        at: VertexRef::Core(landing),
                        prepend_edges: (1..=3).map(|i| EdgeRef::family(tag.clone(), i)).collect(),
                        samples,
                    })
                }
                OmegaReason::BackRayAnchor { tag } => {
                    let landing = g.primitive(&tag).expect("classified").anchor.clone();
                    let mut q = lex_shortest_core_path(g, &landing, &core_u)
                        .expect("anchor coreaches the counted vertex");
                    q.extend(tail);
                    let samples = (1..=3)
                        .map(|i| {
                            let mut p: Vec<EdgeRef> =
                                (-i..=-1).map(|j| EdgeRef::family(tag.clone(), j)).collect();
                            p.extend(q.iter().cloned());
                            s.prepend(&p)
                        })
                        .collect();
                    Ok(OrbitCertificate::PrependBackward {
                        at: VertexRef::Core(landing),
                        prepend_edges: (1..=3).map(|i| EdgeRef::family(tag.clone(), -i)).collect(),
                        samples,
                    })
                }
                OmegaReason::CycleExit { cycle, exit } => {
                    let src = g.edge_source(&exit)?;
                    let zi = cycle
                        .vertices
                        .iter()
                        .position(|v| VertexRef::Core(v.clone()) == src)
                        .expect("exit leaves the cycle");
                    let mut lap = cycle.edges[zi..].to_vec();
                    lap.extend(cycle.edges[..zi].iter().cloned());
                    let after = match g.edge_target(&exit)? {
                        VertexRef::Core(v) => v,
                        VertexRef::Derived { .. } => {
                            unreachable!("an exit inside a core coreach is a core edge")
                        }
                    };
                    let mut q = lex_shortest_core_path(g, &after, &core_u)
                        .expect("exit target coreaches the counted vertex");
                    q.extend(tail);
                    let samples = (1..=3)
                        .map(|k| {
                            let mut p = Vec::new();
                            for _ in 0..k {
                                p.extend(lap.iter().cloned());
                            }
                            p.push(exit.clone());
                            p.extend(q.iter().cloned());
                            s.prepend(&p)
                        })
                        .collect();
                    Ok(OrbitCertificate::PrependCycleExit { cycle, exit, samples })
                }
                OmegaReason::BackRayVertex { .. } => unreachable!("handled above"),
            }
        }
    }
}

/// The orbit of a boundary point under the shift relation. Finite orbits are
/// enumerated exactly: every member is a backward prepend of one of the
/// finitely many suffixes, edge-simple prepends suffice because rewinding a
/// no-exit cycle collapses canonically, and the result set is deduplicated
/// in canonical form. Infinite orbits return a certificate instead.
pub fn orbit(
    g: &GraphPresentation,
    x: &BoundaryPoint,
    cap: usize,
) -> Result<OrbitReport, GroupoidError> {
    x.validate(g)?;
    let mut memo = BTreeMap::new();
    if let Some(escape) = escape_of(g, x, &mut memo)? {
        return Ok(OrbitReport::Infinite {
            certificate: certificate_for(g, x, escape)?,
        });
    }
    let mut suffixes: BTreeSet<BoundaryPoint> = BTreeSet::new();
    for pos in 0..position_count(x) {
        suffixes.insert(x.shift(pos)?);
    }
    let mut members: BTreeSet<BoundaryPoint> = BTreeSet::new();
    for s in &suffixes {
        let u = s.start_vertex(g)?;
        // Backward walk, each edge used at most once per prepended path.
        let mut stack: Vec<(VertexRef, Vec<EdgeRef>)> = vec![(u, Vec::new())];
        while let Some((front, walked)) = stack.pop() {
            let forward: Vec<EdgeRef> = walked.iter().rev().cloned().collect();
            members.insert(s.prepend(&forward));
            if members.len() > cap {
                return Err(GroupoidError::CapExceeded { cap });
            }
            for e in g.in_edges_bounded(&front, 1)? {
                if walked.contains(&e) {
                    continue;
                }
                let src = g.edge_source(&e)?;
                let mut next = walked.clone();
                next.push(e);
                stack.push((src, next));
            }
        }
    }
    Ok(OrbitReport::Finite {
        members: members.into_iter().collect(),
    })
}

// ---------------------------------------------------------------------------
// König-style backward chains.

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum KonigError {
    #[error("a cycle runs through `{at}` inside the coreach")]
    CycleFound { at: VertexId },
    #[error("`{at}` receives infinitely many edges")]
    InfiniteReceiverFound { at: VertexId },
    #[error("only {count} vertices coreach the start")]
    FinitelyManyVertices { count: usize },
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// Core vertices reachable forward from some backray anchor: exactly those
/// with infinitely many coreaching vertices, once receivers are excluded.
fn backray_shadow(g: &GraphPresentation) -> Result<BTreeSet<VertexId>, QueryError> {
    let mut shadow = BTreeSet::new();
    for p in g.primitives.iter().filter(|p| p.kind == PrimitiveKind::BackRay) {
        shadow.extend(g.core_reachable(&p.anchor)?);
    }
    Ok(shadow)
}

fn has_infinite_coreach(
    g: &GraphPresentation,
    shadow: &BTreeSet<VertexId>,
    r: &VertexRef,
) -> bool {
    match r {
        VertexRef::Core(v) => shadow.contains(v),
        VertexRef::Derived { tag, .. } => {
            let p = g.primitive(tag).expect("validated");
            match p.kind {
                PrimitiveKind::BackRay => true,
                PrimitiveKind::InStar => false,
                PrimitiveKind::OutStar | PrimitiveKind::FwdRay => shadow.contains(&p.anchor),
            }
        }
    }
}

/// A backward path of `len` pairwise-distinct edges ending at `w0`, found
/// greedily: at each step take the smallest in-edge whose source still
/// coreaches infinitely many vertices (the pigeonhole step of König's
/// lemma). Output runs backward — the edge into `w0` first — so a longer
/// request extends a shorter one verbatim.
pub fn konig_backward_chain(
    g: &GraphPresentation,
    w0: &VertexRef,
    len: usize,
) -> Result<Vec<EdgeRef>, KonigError> {
    g.in_degree(w0)?; // validates the reference
    let (core_set, extra) = match w0 {
        VertexRef::Core(v) => (g.core_coreachable(v)?, 0usize),
        VertexRef::Derived { tag, index } => {
            let p = g.primitive(tag).expect("validated");
            match p.kind {
                PrimitiveKind::InStar => (BTreeSet::new(), 1),
                PrimitiveKind::OutStar => (g.core_coreachable(&p.anchor)?, 1),
                PrimitiveKind::FwdRay => (g.core_coreachable(&p.anchor)?, *index as usize),
                PrimitiveKind::BackRay => (BTreeSet::new(), 0),
            }
        }
    };
    let on_ray = matches!(w0, VertexRef::Derived { tag, .. }
        if g.primitive(tag).expect("validated").kind == PrimitiveKind::BackRay);
    let sub = restrict(g, &core_set);
    if let Some(v) = on_cycle_vertices(&sub).into_iter().next() {
        return Err(KonigError::CycleFound { at: v });
    }
    for v in &core_set {
        if g.in_degree(&VertexRef::Core(v.clone()))?.is_omega() {
            return Err(KonigError::InfiniteReceiverFound { at: v.clone() });
        }
    }
    let anchored_backray = g
        .primitives
        .iter()
        .any(|p| p.kind == PrimitiveKind::BackRay && core_set.contains(&p.anchor));
    if !on_ray && !anchored_backray {
        return Err(KonigError::FinitelyManyVertices {
            count: core_set.len() + extra,
        });
    }
    let shadow = backray_shadow(g)?;
    let mut chain = Vec::with_capacity(len);
    let mut cur = w0.clone();
    for _ in 0..len {
        let e = g
            .in_edges_bounded(&cur, 1)?
            .into_iter()
            .find(|e| {
                g.edge_source(e)
                    .map(|s| has_infinite_coreach(g, &shadow, &s))
                    .unwrap_or(false)
            })
            .expect("pigeonhole: some in-edge source keeps infinite coreach");
        cur = g.edge_source(&e)?;
        chain.push(e);
    }
    Ok(chain)
}

// ---------------------------------------------------------------------------
// Density of periodic points.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DensityParams {
    /// Maximum cylinder base length (L).
    pub stem_bound: usize,
    /// Maximum exclusion-set size and ω-family sampling depth (f).
    pub exclusion_bound: usize,
    /// Orbit-enumeration cap (K); affects only the reported orbit sizes,
    /// never the verdict, which rests on the symbolic counts.
    pub orbit_cap: usize,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams {
            stem_bound: 4,
            exclusion_bound: 3,
            orbit_cap: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityWitness {
    pub cylinder: CylinderSet,
    /// A periodic (finite-orbit) point inside the cylinder.
    pub point: BoundaryPoint,
    /// Exact orbit size when enumeration finished under the cap.
    pub orbit_size: Option<usize>,
    pub isotropy: IsotropyGroup,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensityOutcome {
    /// Every nonempty cylinder within the bounds holds a periodic point.
    Dense { witnesses: Vec<DensityWitness> },
    /// A cylinder all of whose points have infinite orbits.
    NotDense {
        cylinder: CylinderSet,
        certificate: OrbitCertificate,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityReport {
    pub params: DensityParams,
    /// Cylinders enumerated within the bounds, including empty ones.
    pub cylinders_total: usize,
    /// Nonempty cylinders actually examined.
    pub cylinders_checked: usize,
    pub outcome: DensityOutcome,
}

impl DensityReport {
    pub fn is_dense(&self) -> bool {
        matches!(self.outcome, DensityOutcome::Dense { .. })
    }
}

/// Nonempty subsets of `items` with at most `k` elements, in index order;
/// the empty set comes first. Subsets of a sorted slice stay sorted.
fn subsets_up_to(items: &[EdgeRef], k: usize) -> Vec<Vec<EdgeRef>> {
    fn rec(
        items: &[EdgeRef],
        k: usize,
        start: usize,
        cur: &mut Vec<EdgeRef>,
        out: &mut Vec<Vec<EdgeRef>>,
    ) {
        if cur.len() == k {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            out.push(cur.clone());
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![Vec::new()];
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Every cylinder Z(μ\F) with |μ| ≤ L and |F| ≤ f, starting from each core
/// vertex and each derived vertex with |index| ≤ f, with ω families sampled
/// to their first f members. Sorted canonically.
fn enumerate_cylinders(
    g: &GraphPresentation,
    stem_bound: usize,
    exclusion_bound: usize,
) -> Result<Vec<CylinderSet>, GroupoidError> {
    let f = exclusion_bound;
    let mut starts: Vec<VertexRef> =
        g.sorted_vertices().into_iter().map(VertexRef::Core).collect();
    let mut prims: Vec<&InfinitePrimitive> = g.primitives.iter().collect();
    prims.sort_by(|a, b| a.tag.cmp(&b.tag));
    for p in prims {
        let indices: Vec<i64> = match p.kind {
            PrimitiveKind::BackRay => (-(f as i64)..=-1).collect(),
            _ => (1..=f as i64).collect(),
        };
        for i in indices {
            starts.push(VertexRef::derived(p.tag.clone(), i));
        }
    }
    starts.sort();

    fn extend(
        g: &GraphPresentation,
        start: &VertexRef,
        end: &VertexRef,
        base: &mut Vec<EdgeRef>,
        stem_bound: usize,
        f: usize,
        out: &mut Vec<CylinderSet>,
    ) -> Result<(), GroupoidError> {
        let edges = g.out_edges_bounded(end, f as u64)?;
        for excluded in subsets_up_to(&edges, f) {
            out.push(CylinderSet {
                start: start.clone(),
                base: base.clone(),
                excluded,
            });
        }
        if base.len() == stem_bound {
            return Ok(());
        }
        for e in edges {
            let next = g.edge_target(&e)?;
            base.push(e);
            extend(g, start, &next, base, stem_bound, f, out)?;
            base.pop();
        }
        Ok(())
    }

    let mut out = Vec::new();
    for s in &starts {
        extend(g, s, s, &mut Vec::new(), stem_bound, f, &mut out)?;
    }
    out.sort();
    Ok(out)
}

/// When a condition already fails, the matching lemma shapes a cylinder
/// whose points all have infinite orbits; conditions are consulted in the
/// fixed order a, b, c, d.
fn not_dense_from_conditions(
    g: &GraphPresentation,
    report: &ConditionReport,
) -> Result<(CylinderSet, OrbitCertificate), GroupoidError> {
    if let Some(Witness::InfiniteReceiver { vertex, sample_in_edges }) = &report.a.witness {
        let at = VertexRef::core(vertex.clone());
        let x0 = complete_from(g, &at)?;
        let samples = sample_in_edges.iter().map(|e| x0.prepend(&[e.clone()])).collect();
        return Ok((
            CylinderSet::at_vertex(at.clone()),
            OrbitCertificate::PrependBackward {
                at,
                prepend_edges: sample_in_edges.clone(),
                samples,
            },
        ));
    }
    if let Some(Witness::CycleWithExit { cycle, exit, position }) = &report.b.witness {
        let after = g.edge_target(exit)?;
        let x0 = complete_from(g, &after)?.prepend(&[exit.clone()]);
        let mut lap = cycle.edges[*position..].to_vec();
        lap.extend(cycle.edges[..*position].iter().cloned());
        let samples = (1..=3)
            .map(|k| {
                let mut p = Vec::new();
                for _ in 0..k {
                    p.extend(lap.iter().cloned());
                }
                x0.prepend(&p)
            })
            .collect();
        let start = VertexRef::core(cycle.vertices[*position].clone());
        return Ok((
            CylinderSet {
                start,
                base: vec![exit.clone()],
                excluded: Vec::new(),
            },
            OrbitCertificate::PrependCycleExit {
                cycle: cycle.clone(),
                exit: exit.clone(),
                samples,
            },
        ));
    }
    if let Some(Witness::BackwardChain(gen)) = &report.c.witness {
        match gen {
            ChainGen::BackRay { tag } => {
                let anchor = g.primitive(tag).expect("witnessed").anchor.clone();
                let at = VertexRef::core(anchor);
                let x0 = complete_from(g, &at)?;
                let samples = (1..=3)
                    .map(|i| {
                        let seg: Vec<EdgeRef> =
                            (-i..=-1).map(|j| EdgeRef::family(tag.clone(), j)).collect();
                        x0.prepend(&seg)
                    })
                    .collect();
                return Ok((
                    CylinderSet::at_vertex(at.clone()),
                    OrbitCertificate::PrependBackward {
                        at,
                        prepend_edges: (1..=3)
                            .map(|i| EdgeRef::family(tag.clone(), -i))
                            .collect(),
                        samples,
                    },
                ));
            }
            ChainGen::OmegaCycle { cycle } => {
                let v0 = cycle.vertices[0].clone();
                let arc = match &cycle.edges[cycle.len() - 1] {
                    EdgeRef::Core { arc, .. } => arc.clone(),
                    EdgeRef::Family { .. } => unreachable!("ω cycles are core"),
                };
                let at = VertexRef::core(v0);
                let x0 = complete_from(g, &at)?;
                let samples = (1..=3)
                    .map(|c| x0.prepend(&[EdgeRef::core(arc.clone(), c)]))
                    .collect();
                return Ok((
                    CylinderSet::at_vertex(at.clone()),
                    OrbitCertificate::PrependBackward {
                        at,
                        prepend_edges: (1..=3).map(|c| EdgeRef::core(arc.clone(), c)).collect(),
                        samples,
                    },
                ));
            }
        }
    }
    let Some(Witness::StrandedVertex { vertex, .. }) = &report.d.witness else {
        unreachable!("some condition failed");
    };
    let x0 = complete_from(g, vertex)?;
    let samples = vec![x0.clone(), x0.shift(1)?, x0.shift(2)?];
    Ok((
        CylinderSet::at_vertex(vertex.clone()),
        OrbitCertificate::ShiftEscape {
            at: vertex.clone(),
            samples,
        },
    ))
}

/// Decide whether periodic points are dense in the boundary: sweep every
/// cylinder Z(μ\F) within the bounds and place a finite-orbit point in each
/// nonempty one. Orbit finiteness is established symbolically from the
/// backward counts; the cap only limits how large a reported orbit gets
/// enumerated. When a structural condition fails, the matching cylinder and
/// certificate are emitted without sweeping.
pub fn periodic_density_check(
    g: &GraphPresentation,
    params: DensityParams,
) -> Result<DensityReport, GroupoidError> {
    let conditions = decide_rfd(g);
    if !conditions.rfd {
        let (cylinder, certificate) = not_dense_from_conditions(g, &conditions)?;
        return Ok(DensityReport {
            params,
            cylinders_total: 0,
            cylinders_checked: 0,
            outcome: DensityOutcome::NotDense { cylinder, certificate },
        });
    }
    let cylinders = enumerate_cylinders(g, params.stem_bound, params.exclusion_bound)?;
    let cylinders_total = cylinders.len();
    let mut checked = 0usize;
    let mut class_memo: BTreeMap<VertexRef, CountClass> = BTreeMap::new();
    enum Eval {
        Fine(Option<usize>, IsotropyGroup),
        Escapes(OrbitCertificate),
    }
    let mut point_memo: BTreeMap<BoundaryPoint, usize> = BTreeMap::new();
    let mut evals: Vec<Eval> = Vec::new();
    let mut witnesses = Vec::new();
    for z in cylinders {
        let Some(point) = cylinder_nonempty(g, &z)? else {
            continue;
        };
        checked += 1;
        let idx = match point_memo.get(&point) {
            Some(&i) => i,
            None => {
                let eval = match escape_of(g, &point, &mut class_memo)? {
                    Some(escape) => Eval::Escapes(certificate_for(g, &point, escape)?),
                    None => match orbit(g, &point, params.orbit_cap) {
                        Ok(OrbitReport::Finite { members }) => {
                            Eval::Fine(Some(members.len()), isotropy(&point))
                        }
                        // The counts said finite; a disagreeing enumeration
                        // is surfaced rather than papered over.
                        Ok(OrbitReport::Infinite { certificate }) => Eval::Escapes(certificate),
                        Err(GroupoidError::CapExceeded { .. }) => {
                            Eval::Fine(None, isotropy(&point))
                        }
                        Err(e) => return Err(e),
                    },
                };
                evals.push(eval);
                point_memo.insert(point.clone(), evals.len() - 1);
                evals.len() - 1
            }
        };
        match &evals[idx] {
            Eval::Escapes(certificate) => {
                return Ok(DensityReport {
                    params,
                    cylinders_total,
                    cylinders_checked: checked,
                    outcome: DensityOutcome::NotDense {
                        cylinder: z,
                        certificate: certificate.clone(),
                    },
                });
            }
            Eval::Fine(size, iso) => {
                witnesses.push(DensityWitness {
                    cylinder: z,
                    point: point.clone(),
                    orbit_size: *size,
                    isotropy: iso.clone(),
                });
            }
        }
    }
    Ok(DensityReport {
        params,
        cylinders_total,
        cylinders_checked: checked,
        outcome: DensityOutcome::Dense { witnesses },
    })
}

/// Re-check a NotDense verdict: the certificate is internally valid and one
/// of its samples shifts into the named cylinder, tying the infinite orbit
/// to the set it is claimed to exhaust.
pub fn validate_not_dense(
    g: &GraphPresentation,
    cylinder: &CylinderSet,
    certificate: &OrbitCertificate,
) -> Result<(), String> {
    cylinder.validate(g).map_err(|e| e.to_string())?;
    certificate.validate(g, None)?;
    let first = &certificate.samples()[0];
    let horizon = match first {
        BoundaryPoint::FinitePath { edges, .. } => edges.len(),
        BoundaryPoint::Lasso { stem, cycle, .. } => stem.len() + cycle.len(),
        BoundaryPoint::RayTail { stem, .. } => stem.len(),
    };
    for k in 0..=horizon {
        let shifted = first.shift(k).map_err(|e| e.to_string())?;
        if cylinder.contains(g, &shifted).map_err(|e| e.to_string())? {
            return Ok(());
        }
    }
    Err("no sample shifts into the cylinder".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::presentation::GraphPresentation;

    fn parse(text: &str) -> GraphPresentation {
        GraphPresentation::parse(text).expect("fixture parses")
    }

    fn loop_point(g: &GraphPresentation) -> BoundaryPoint {
        complete_from(g, &VertexRef::core("v")).expect("loop completes")
    }

    #[test]
    fn compose_merges_evidence_on_the_loop() {
        let g = fixtures::single_loop();
        let x = loop_point(&g);
        let el = GroupoidElement::new(x.clone(), 1, x.clone(), (1, 0)).unwrap();
        el.validate(&g).unwrap();
        let sq = el.compose(&el).unwrap();
        assert_eq!(sq.k, 2);
        assert_eq!(sq.evidence, (2, 0));
        sq.validate(&g).unwrap();
        let inv = el.invert();
        assert_eq!(inv.k, -1);
        assert_eq!(inv.evidence, (0, 1));
        let round = el.compose(&inv).unwrap();
        assert!(round.is_unit());
        assert!(GroupoidElement::unit(x).is_unit());
    }

    #[test]
    fn compose_rejects_mismatched_points() {
        let g = fixtures::single_loop();
        let x = loop_point(&g);
        let sink = BoundaryPoint::FinitePath {
            edges: vec![],
            terminal: VertexRef::core("v"),
        };
        let a = GroupoidElement::unit(x);
        let b = GroupoidElement::unit(sink);
        assert!(matches!(
            a.compose(&b),
            Err(GroupoidError::NotComposable { .. })
        ));
    }

    #[test]
    fn evidence_must_exhibit_the_pairing() {
        let g = fixtures::diamond();
        let x = complete_from(&g, &VertexRef::core("x")).unwrap();
        let err = GroupoidElement::new(x.clone(), 1, x, (2, 0));
        assert!(matches!(err, Err(GroupoidError::BadEvidence { m: 2, n: 0 })));
    }

    #[test]
    fn isotropy_by_shape() {
        let g = fixtures::single_loop();
        let x = loop_point(&g);
        assert_eq!(isotropy(&x), IsotropyGroup::InfiniteCyclic { period: 1 });
        let gen = isotropy_generator(&x).unwrap();
        assert_eq!((gen.k, gen.evidence), (1, (1, 0)));
        gen.validate(&g).unwrap();

        let two = parse("vertex a\nvertex b\nedge e1: a -> b\nedge e2: b -> a\n");
        let y = complete_from(&two, &VertexRef::core("a")).unwrap();
        assert_eq!(isotropy(&y), IsotropyGroup::InfiniteCyclic { period: 2 });

        let s = fixtures::stranded();
        let ray = complete_from(&s, &VertexRef::core("v2")).unwrap();
        assert_eq!(isotropy(&ray), IsotropyGroup::Trivial);
        let path = BoundaryPoint::FinitePath {
            edges: vec![],
            terminal: VertexRef::core("w"),
        };
        assert_eq!(isotropy(&path), IsotropyGroup::Trivial);
    }

    #[test]
    fn counts_on_small_graphs() {
        let chain = parse("vertex u\nvertex v\nedge e: u -> v\n");
        assert_eq!(
            path_count_into(&chain, &VertexRef::core("v"), CountMode::Exact).unwrap(),
            ExtNat::Fin(2)
        );
        assert_eq!(
            path_count_into(&chain, &VertexRef::core("u"), CountMode::Exact).unwrap(),
            ExtNat::Fin(1)
        );

        let d = fixtures::diamond();
        let w = VertexRef::core("w");
        assert_eq!(
            path_count_into(&d, &w, CountMode::Exact).unwrap(),
            ExtNat::Fin(5)
        );
        assert_eq!(
            path_count_into(&d, &w, CountMode::Bound).unwrap(),
            ExtNat::Fin(7)
        );
    }

    #[test]
    fn windings_of_a_no_exit_cycle_collapse() {
        let g = fixtures::single_loop();
        let v = VertexRef::core("v");
        assert_eq!(
            path_count_into(&g, &v, CountMode::Exact).unwrap(),
            ExtNat::Fin(2)
        );
        assert_eq!(
            path_count_into(&g, &v, CountMode::Bound).unwrap(),
            ExtNat::Fin(2)
        );
    }

    #[test]
    fn infinite_counts_name_their_reason() {
        let r = fixtures::receiver();
        assert_eq!(
            path_count_into(&r, &VertexRef::core("v"), CountMode::Exact).unwrap(),
            ExtNat::Omega
        );
        let b = fixtures::backward_chain();
        assert_eq!(
            path_count_into(&b, &VertexRef::core("v4"), CountMode::Exact).unwrap(),
            ExtNat::Omega
        );
        assert_eq!(
            path_count_into(&b, &VertexRef::derived("bk0", -2), CountMode::Exact).unwrap(),
            ExtNat::Omega
        );
    }

    #[test]
    fn derived_vertex_counts() {
        let s = fixtures::stranded();
        // Three paths end at the anchor v2; entering at depth 3 adds the
        // three ray positions passed on the way.
        assert_eq!(
            path_count_into(&s, &VertexRef::derived("fw0", 3), CountMode::Exact).unwrap(),
            ExtNat::Fin(6)
        );
        let o = parse("vertex a\nvertex b\nedge e: a -> b\noutstar o: b\n");
        assert_eq!(
            path_count_into(&o, &VertexRef::derived("o", 1), CountMode::Exact).unwrap(),
            ExtNat::Fin(3)
        );
        let r = fixtures::receiver();
        assert_eq!(
            path_count_into(&r, &VertexRef::derived("in0", 5), CountMode::Exact).unwrap(),
            ExtNat::Fin(1)
        );
    }

    #[test]
    fn exact_never_exceeds_bound_on_fixtures() {
        for g in [
            fixtures::receiver(),
            fixtures::cycle_exit(),
            fixtures::backward_chain(),
            fixtures::stranded(),
            fixtures::sink(),
            fixtures::single_loop(),
            fixtures::double_loop(),
            fixtures::omega_in(),
            fixtures::omega_loop(),
            fixtures::diamond(),
        ] {
            for v in g.sorted_vertices() {
                let r = VertexRef::core(v);
                let exact = path_count_into(&g, &r, CountMode::Exact).unwrap();
                let bound = path_count_into(&g, &r, CountMode::Bound).unwrap();
                assert!(exact <= bound, "{r}: {exact} > {bound}");
            }
        }
    }

    #[test]
    fn orbit_of_loop_and_sink_is_a_singleton() {
        let g = fixtures::single_loop();
        let x = loop_point(&g);
        let OrbitReport::Finite { members } = orbit(&g, &x, 64).unwrap() else {
            panic!("loop orbit is finite");
        };
        assert_eq!(members, vec![x]);

        let s = fixtures::sink();
        let y = BoundaryPoint::FinitePath {
            edges: vec![],
            terminal: VertexRef::core("v"),
        };
        let OrbitReport::Finite { members } = orbit(&s, &y, 64).unwrap() else {
            panic!("sink orbit is finite");
        };
        assert_eq!(members, vec![y]);
    }

    #[test]
    fn orbit_enumerates_all_prepends_and_respects_cap() {
        let d = fixtures::diamond();
        let y = BoundaryPoint::FinitePath {
            edges: vec![],
            terminal: VertexRef::core("w"),
        };
        let OrbitReport::Finite { members } = orbit(&d, &y, 64).unwrap() else {
            panic!("diamond orbit is finite");
        };
        let shown: Vec<String> = members.iter().map(|m| m.to_string()).collect();
        assert_eq!(shown, ["w", "e.f", "e[1].f", "f", "g"]);
        // Shift-closure: removing the first edge of a member stays inside.
        for m in &members {
            if !m.is_empty() {
                assert!(members.contains(&m.shift(1).unwrap()));
            }
        }
        assert_eq!(
            orbit(&d, &y, 3),
            Err(GroupoidError::CapExceeded { cap: 3 })
        );
    }

    #[test]
    fn orbit_infinite_by_prepending_at_a_receiver() {
        let r = fixtures::receiver();
        let x = complete_from(&r, &VertexRef::core("v")).unwrap();
        let OrbitReport::Infinite { certificate } = orbit(&r, &x, 64).unwrap() else {
            panic!("receiver orbit is infinite");
        };
        certificate.validate(&r, Some(&x)).unwrap();
        let OrbitCertificate::PrependBackward { at, .. } = &certificate else {
            panic!("receiver yields a backward-prepend certificate");
        };
        assert_eq!(*at, VertexRef::core("v"));
    }

    #[test]
    fn orbit_infinite_by_winding_a_cycle_with_exit() {
        let g = parse("vertex u\nvertex v\nedge e: v -> v\nedge f: v -> u\n");
        let x = BoundaryPoint::FinitePath {
            edges: vec![EdgeRef::core("f", 0)],
            terminal: VertexRef::core("u"),
        };
        let OrbitReport::Infinite { certificate } = orbit(&g, &x, 64).unwrap() else {
            panic!("exit orbit is infinite");
        };
        certificate.validate(&g, Some(&x)).unwrap();
        let OrbitCertificate::PrependCycleExit { cycle, exit, samples } = &certificate else {
            panic!("winding certificate expected");
        };
        assert_eq!(cycle.to_string(), "(e)");
        assert_eq!(exit.to_string(), "f");
        let shown: Vec<String> = samples.iter().map(|s| s.to_string()).collect();
        assert_eq!(shown, ["e.f", "e.e.f", "e.e.e.f"]);
    }

    #[test]
    fn orbit_infinite_along_a_backray() {
        let b = fixtures::backward_chain();
        let x = complete_from(&b, &VertexRef::core("v")).unwrap();
        let OrbitReport::Infinite { certificate } = orbit(&b, &x, 64).unwrap() else {
            panic!("backray orbit is infinite");
        };
        certificate.validate(&b, Some(&x)).unwrap();
        let OrbitCertificate::PrependBackward { at, prepend_edges, .. } = &certificate else {
            panic!("backward-prepend certificate expected");
        };
        assert_eq!(*at, VertexRef::core("v"));
        assert_eq!(prepend_edges[0].to_string(), "bk0[-1]");
    }

    #[test]
    fn orbit_escapes_along_a_ray() {
        let s = fixtures::stranded();
        let x = complete_from(&s, &VertexRef::core("v2")).unwrap();
        let OrbitReport::Infinite { certificate } = orbit(&s, &x, 64).unwrap() else {
            panic!("ray orbit is infinite");
        };
        certificate.validate(&s, Some(&x)).unwrap();
        let OrbitCertificate::ShiftEscape { at, samples } = &certificate else {
            panic!("escape certificate expected");
        };
        assert_eq!(*at, VertexRef::derived("fw0", 1));
        let shown: Vec<String> = samples.iter().map(|s| s.to_string()).collect();
        assert_eq!(shown, ["fw0^ray", "fw0^ray@1", "fw0^ray@2"]);
    }

    #[test]
    fn konig_chain_climbs_the_backray() {
        let b = fixtures::backward_chain();
        let v = VertexRef::core("v");
        let five = konig_backward_chain(&b, &v, 5).unwrap();
        let shown: Vec<String> = five.iter().map(|e| e.to_string()).collect();
        assert_eq!(
            shown,
            ["bk0[-1]", "bk0[-2]", "bk0[-3]", "bk0[-4]", "bk0[-5]"]
        );
        // Prefix-stability: a shorter request is a verbatim prefix.
        assert_eq!(konig_backward_chain(&b, &v, 3).unwrap(), five[..3].to_vec());
    }

    #[test]
    fn konig_prefers_the_infinite_branch() {
        let g = parse(
            "vertex u\nvertex s\nvertex t\nedge a: s -> u\nedge b: t -> s\nbackray r: u\n",
        );
        let chain = konig_backward_chain(&g, &VertexRef::core("u"), 2).unwrap();
        let shown: Vec<String> = chain.iter().map(|e| e.to_string()).collect();
        // The side branch through s dies out after two steps; the greedy
        // pick must climb the ray even though `a` sorts before `r[-1]`.
        assert_eq!(shown, ["r[-1]", "r[-2]"]);
    }

    #[test]
    fn konig_rejects_bad_preconditions() {
        let l = fixtures::single_loop();
        assert_eq!(
            konig_backward_chain(&l, &VertexRef::core("v"), 1),
            Err(KonigError::CycleFound { at: "v".into() })
        );
        let r = fixtures::receiver();
        assert_eq!(
            konig_backward_chain(&r, &VertexRef::core("v"), 1),
            Err(KonigError::InfiniteReceiverFound { at: "v".into() })
        );
        let d = fixtures::diamond();
        assert_eq!(
            konig_backward_chain(&d, &VertexRef::core("w"), 1),
            Err(KonigError::FinitelyManyVertices { count: 3 })
        );
    }

    #[test]
    fn konig_starts_anywhere_on_a_backray() {
        let b = fixtures::backward_chain();
        let chain = konig_backward_chain(&b, &VertexRef::derived("bk0", -2), 2).unwrap();
        let shown: Vec<String> = chain.iter().map(|e| e.to_string()).collect();
        assert_eq!(shown, ["bk0[-3]", "bk0[-4]"]);
    }

    #[test]
    fn density_dense_on_the_loop() {
        let g = fixtures::single_loop();
        let params = DensityParams {
            stem_bound: 2,
            exclusion_bound: 3,
            orbit_cap: 16,
        };
        let report = periodic_density_check(&g, params).unwrap();
        assert!(report.is_dense());
        let DensityOutcome::Dense { witnesses } = &report.outcome else {
            unreachable!();
        };
        // Z(v), Z(e), Z(e.e); the variants excluding the only out-edge are
        // empty and skipped.
        assert_eq!(witnesses.len(), 3);
        assert_eq!(report.cylinders_checked, 3);
        assert_eq!(report.cylinders_total, 6);
        let x = loop_point(&g);
        for w in witnesses {
            assert_eq!(w.point, x);
            assert_eq!(w.orbit_size, Some(1));
            assert_eq!(w.isotropy, IsotropyGroup::InfiniteCyclic { period: 1 });
            assert!(w.cylinder.contains(&g, &w.point).unwrap());
        }
    }

    #[test]
    fn density_not_dense_matches_the_failing_condition() {
        let r = fixtures::receiver();
        let rep = periodic_density_check(&r, DensityParams::default()).unwrap();
        let DensityOutcome::NotDense { cylinder, certificate } = &rep.outcome else {
            panic!("receiver is not dense");
        };
        assert_eq!(cylinder.to_string(), "Z(v)");
        assert!(matches!(
            certificate,
            OrbitCertificate::PrependBackward { at, .. } if *at == VertexRef::core("v")
        ));
        validate_not_dense(&r, cylinder, certificate).unwrap();

        let c = fixtures::cycle_exit();
        let rep = periodic_density_check(&c, DensityParams::default()).unwrap();
        let DensityOutcome::NotDense { cylinder, certificate } = &rep.outcome else {
            panic!("cycle-with-exit is not dense");
        };
        assert_eq!(cylinder.to_string(), "Z(d1)");
        assert!(matches!(certificate, OrbitCertificate::PrependCycleExit { .. }));
        validate_not_dense(&c, cylinder, certificate).unwrap();

        let b = fixtures::backward_chain();
        let rep = periodic_density_check(&b, DensityParams::default()).unwrap();
        let DensityOutcome::NotDense { cylinder, certificate } = &rep.outcome else {
            panic!("backward chain is not dense");
        };
        assert_eq!(cylinder.to_string(), "Z(v)");
        validate_not_dense(&b, cylinder, certificate).unwrap();

        let s = fixtures::stranded();
        let rep = periodic_density_check(&s, DensityParams::default()).unwrap();
        let DensityOutcome::NotDense { cylinder, certificate } = &rep.outcome else {
            panic!("stranded is not dense");
        };
        assert_eq!(cylinder.to_string(), "Z(fw0(1))");
        assert!(matches!(certificate, OrbitCertificate::ShiftEscape { .. }));
        validate_not_dense(&s, cylinder, certificate).unwrap();

        let o = fixtures::omega_loop();
        let rep = periodic_density_check(&o, DensityParams::default()).unwrap();
        let DensityOutcome::NotDense { cylinder, certificate } = &rep.outcome else {
            panic!("omega loop is not dense");
        };
        assert_eq!(cylinder.to_string(), "Z(v)");
        validate_not_dense(&o, cylinder, certificate).unwrap();
    }

    #[test]
    fn density_agrees_with_the_four_conditions_on_fixtures() {
        let params = DensityParams {
            stem_bound: 2,
            exclusion_bound: 2,
            orbit_cap: 32,
        };
        for g in [
            fixtures::receiver(),
            fixtures::cycle_exit(),
            fixtures::backward_chain(),
            fixtures::stranded(),
            fixtures::sink(),
            fixtures::single_loop(),
            fixtures::double_loop(),
            fixtures::omega_in(),
            fixtures::omega_loop(),
            fixtures::diamond(),
        ] {
            let rfd = decide_rfd(&g).rfd;
            let report = periodic_density_check(&g, params).unwrap();
            assert_eq!(report.is_dense(), rfd, "graph: {}", g.serialize());
            assert_eq!(report, periodic_density_check(&g, params).unwrap());
        }
    }

    #[test]
    fn density_witnesses_live_in_their_cylinders() {
        let g = fixtures::diamond();
        let params = DensityParams {
            stem_bound: 2,
            exclusion_bound: 2,
            orbit_cap: 32,
        };
        let report = periodic_density_check(&g, params).unwrap();
        let DensityOutcome::Dense { witnesses } = &report.outcome else {
            panic!("the diamond is acyclic with finite degrees, hence dense");
        };
        assert!(!witnesses.is_empty());
        for w in witnesses {
            assert!(w.cylinder.contains(&g, &w.point).unwrap());
            w.point.validate(&g).unwrap();
        }
    }
}
