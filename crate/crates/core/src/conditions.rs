//! The four structural conditions that together decide residual
//! finite-dimensionality, each as an exact decider returning a
//! machine-checkable witness on failure:
//!
//! (a) no vertex receives infinitely many edges;
//! (b) no cycle has an exit;
//! (c) no infinite backward chain of pairwise-distinct edges exists;
//! (d) every vertex has a finite path to a sink, a cycle, or an infinite
//!     emitter.
//!
//! All four are decided symbolically from the finite presentation; the only
//! enumeration (simple cycles) is capped. Witnesses are canonical — smallest
//! vertex, then shortest lexicographically-least cycle, then smallest edge —
//! so reports are reproducible byte for byte.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::presentation::{
    ArcId, EdgeRef, GraphPresentation, PrimitiveKind, Tag, VertexId, VertexRef,
};

/// A vertex-simple directed cycle in the core multigraph. `edges[i]` runs
/// from `vertices[i]` to `vertices[(i+1) % n]`; the canonical form starts at
/// the smallest vertex and uses copy 0 of the smallest arc between each
/// consecutive pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cycle {
    pub edges: Vec<EdgeRef>,
    pub vertices: Vec<VertexId>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains_vertex(&self, v: &str) -> bool {
        self.vertices.iter().any(|w| w == v)
    }

    /// Rotate so the smallest vertex comes first.
    pub fn rotate_to_min(mut self) -> Self {
        if let Some(pos) = self
            .vertices
            .iter()
            .enumerate()
            .min_by_key(|(_, v)| v.as_str().to_string())
            .map(|(i, _)| i)
        {
            self.vertices.rotate_left(pos);
            self.edges.rotate_left(pos);
        }
        self
    }

    /// Check the cycle against a presentation: edges exist, endpoints chain
    /// up, the walk closes, and no vertex repeats.
    pub fn validate(&self, g: &GraphPresentation) -> Result<(), String> {
        if self.edges.is_empty() {
            return Err("cycle has no edges".into());
        }
        if self.vertices.len() != self.edges.len() {
            return Err("cycle vertex/edge counts differ".into());
        }
        let n = self.edges.len();
        for i in 0..n {
            let (src, dst) = g
                .edge_endpoints(&self.edges[i])
                .map_err(|e| format!("cycle edge {}: {e}", self.edges[i]))?;
            if src != VertexRef::Core(self.vertices[i].clone()) {
                return Err(format!(
                    "cycle edge {} does not leave {}",
                    self.edges[i], self.vertices[i]
                ));
            }
            let expect = VertexRef::Core(self.vertices[(i + 1) % n].clone());
            if dst != expect {
                return Err(format!(
                    "cycle edge {} does not enter {expect}",
                    self.edges[i]
                ));
            }
        }
        let distinct: BTreeSet<&VertexId> = self.vertices.iter().collect();
        if distinct.len() != n {
            return Err("cycle revisits a vertex".into());
        }
        Ok(())
    }
}

impl std::fmt::Display for Cycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.edges.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join("."))
    }
}

/// What generates an infinite backward chain: a backray primitive, or a
/// directed cycle all of whose arcs have multiplicity ω (each lap can take a
/// fresh parallel copy).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainGen {
    BackRay { tag: Tag },
    OmegaCycle { cycle: Cycle },
}

/// Finite summary of the forward closure of a stranded vertex: every vertex
/// it can reach, sampled when the closure escapes along a fwdray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardClosure {
    pub samples: Vec<VertexRef>,
    /// Set when the closure continues along an infinite forward ray.
    pub continues_along: Option<Tag>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A vertex with infinite in-degree, plus three of its in-edges.
    InfiniteReceiver {
        vertex: VertexId,
        sample_in_edges: Vec<EdgeRef>,
    },
    /// A cycle and an edge that leaves it: the exit shares its source with
    /// `cycle.edges[position]` but is a different edge.
    CycleWithExit {
        cycle: Cycle,
        exit: EdgeRef,
        position: usize,
    },
    /// A generator of an infinite backward chain.
    BackwardChain(ChainGen),
    /// A vertex whose forward closure avoids sinks, cycles and infinite
    /// emitters alike.
    StrandedVertex {
        vertex: VertexRef,
        closure: ForwardClosure,
    },
}

impl Witness {
    /// Re-check the witness against the presentation it came from. Reports
    /// are only trusted after this passes, so a buggy decider cannot smuggle
    /// a wrong verdict past the test suite.
    pub fn validate(&self, g: &GraphPresentation) -> Result<(), String> {
        match self {
            Witness::InfiniteReceiver {
                vertex,
                sample_in_edges,
            } => {
                let r = VertexRef::core(vertex.clone());
                let d = g.in_degree(&r).map_err(|e| e.to_string())?;
                if !d.is_omega() {
                    return Err(format!("{vertex} has finite in-degree {d}"));
                }
                if sample_in_edges.len() != 3 {
                    return Err("expected exactly three sample in-edges".into());
                }
                let distinct: BTreeSet<&EdgeRef> = sample_in_edges.iter().collect();
                if distinct.len() != 3 {
                    return Err("sample in-edges repeat".into());
                }
                for e in sample_in_edges {
                    let (_, dst) = g.edge_endpoints(e).map_err(|err| err.to_string())?;
                    if dst != r {
                        return Err(format!("sample edge {e} does not enter {vertex}"));
                    }
                }
                Ok(())
            }
            Witness::CycleWithExit {
                cycle,
                exit,
                position,
            } => {
                cycle.validate(g)?;
                let at = cycle
                    .vertices
                    .get(*position)
                    .ok_or("exit position outside the cycle")?;
                let (src, _) = g.edge_endpoints(exit).map_err(|e| e.to_string())?;
                if src != VertexRef::Core(at.clone()) {
                    return Err(format!("exit {exit} does not leave {at}"));
                }
                if exit == &cycle.edges[*position] {
                    return Err(format!("exit {exit} is the cycle edge itself"));
                }
                Ok(())
            }
            Witness::BackwardChain(ChainGen::BackRay { tag }) => {
                match g.primitive(tag) {
                    Some(p) if p.kind == PrimitiveKind::BackRay => Ok(()),
                    Some(_) => Err(format!("`{tag}` is not a backray")),
                    None => Err(format!("unknown primitive `{tag}`")),
                }
            }
            Witness::BackwardChain(ChainGen::OmegaCycle { cycle }) => {
                cycle.validate(g)?;
                for e in &cycle.edges {
                    let arc = match e {
                        EdgeRef::Core { arc, .. } => g.arc(arc),
                        EdgeRef::Family { .. } => None,
                    };
                    match arc {
                        Some(a) if a.mult.is_omega() => {}
                        _ => return Err(format!("cycle edge {e} lacks multiplicity omega")),
                    }
                }
                Ok(())
            }
            Witness::StrandedVertex { vertex, closure } => {
                let on_cycle = on_cycle_vertices(g);
                if closure.samples.is_empty() {
                    return Err("empty forward-closure sample".into());
                }
                if closure.samples.first() != Some(vertex) {
                    return Err("closure sample does not start at the witness vertex".into());
                }
                for s in &closure.samples {
                    let out = g.out_degree(s).map_err(|e| e.to_string())?;
                    if out.is_zero() {
                        return Err(format!("{s} is a sink"));
                    }
                    if out.is_omega() {
                        return Err(format!("{s} is an infinite emitter"));
                    }
                    if let VertexRef::Core(v) = s {
                        if on_cycle.contains(v) {
                            return Err(format!("{s} lies on a cycle"));
                        }
                    }
                }
                match (&closure.continues_along, vertex) {
                    (Some(tag), _) => match g.primitive(tag) {
                        Some(p) if p.kind == PrimitiveKind::FwdRay => Ok(()),
                        _ => Err(format!("`{tag}` is not a fwdray")),
                    },
                    // A core witness with a finite closure must genuinely
                    // trap: every out-neighbour of a sample stays sampled.
                    (None, VertexRef::Core(_)) => {
                        let inside: BTreeSet<&VertexRef> = closure.samples.iter().collect();
                        for s in &closure.samples {
                            if let VertexRef::Core(v) = s {
                                for a in g.arcs_from(v) {
                                    let t = VertexRef::Core(a.target.clone());
                                    if !inside.contains(&t) {
                                        return Err(format!(
                                            "closure omits {t}, reachable from {s}"
                                        ));
                                    }
                                }
                            }
                        }
                        Ok(())
                    }
                    (None, VertexRef::Derived { .. }) => {
                        Err("derived witness must name the ray it escapes along".into())
                    }
                }
            }
        }
    }
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Witness::InfiniteReceiver {
                vertex,
                sample_in_edges,
            } => {
                let shown: Vec<String> =
                    sample_in_edges.iter().map(|e| e.to_string()).collect();
                write!(
                    f,
                    "infinite receiver {vertex} (in-edges {}, ...)",
                    shown.join(", ")
                )
            }
            Witness::CycleWithExit { cycle, exit, .. } => {
                write!(f, "cycle {cycle} with exit {exit}")
            }
            Witness::BackwardChain(ChainGen::BackRay { tag }) => {
                write!(f, "backward chain along backray {tag}")
            }
            Witness::BackwardChain(ChainGen::OmegaCycle { cycle }) => {
                write!(f, "backward chain winding the omega-cycle {cycle}")
            }
            Witness::StrandedVertex { vertex, closure } => match &closure.continues_along {
                Some(tag) => write!(f, "stranded vertex {vertex} (escapes along fwdray {tag})"),
                None => write!(f, "stranded vertex {vertex}"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionOutcome {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl ConditionOutcome {
    fn holds() -> Self {
        ConditionOutcome {
            holds: true,
            witness: None,
        }
    }

    fn fails(w: Witness) -> Self {
        ConditionOutcome {
            holds: false,
            witness: Some(w),
        }
    }
}

/// Verdict for one presentation: the four condition outcomes, their
/// conjunction, and per-component sub-reports when the input is disconnected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub a: ConditionOutcome,
    pub b: ConditionOutcome,
    pub c: ConditionOutcome,
    pub d: ConditionOutcome,
    pub rfd: bool,
    pub components: Vec<ConditionReport>,
}

impl ConditionReport {
    pub fn outcomes(&self) -> [(&'static str, &ConditionOutcome); 4] {
        [("a", &self.a), ("b", &self.b), ("c", &self.c), ("d", &self.d)]
    }

    /// All witnesses carried by the top-level outcomes, in condition order.
    pub fn witnesses(&self) -> Vec<&Witness> {
        self.outcomes()
            .into_iter()
            .filter_map(|(_, o)| o.witness.as_ref())
            .collect()
    }
}

/// Successor map of the core digraph with parallel arcs collapsed.
fn collapsed_successors(g: &GraphPresentation) -> BTreeMap<VertexId, BTreeSet<VertexId>> {
    let mut map: BTreeMap<VertexId, BTreeSet<VertexId>> = g
        .vertices
        .iter()
        .map(|v| (v.clone(), BTreeSet::new()))
        .collect();
    for a in &g.arcs {
        map.get_mut(&a.source).expect("validated").insert(a.target.clone());
    }
    map
}

pub(crate) fn smallest_arc_between(g: &GraphPresentation, from: &str, to: &str) -> Option<ArcId> {
    g.arcs
        .iter()
        .filter(|a| a.source == from && a.target == to)
        .map(|a| a.id.clone())
        .min()
}

/// Core vertices lying on at least one directed cycle: those reachable from
/// one of their own successors.
pub fn on_cycle_vertices(g: &GraphPresentation) -> BTreeSet<VertexId> {
    let succs = collapsed_successors(g);
    let mut reach: BTreeMap<&str, BTreeSet<VertexId>> = BTreeMap::new();
    for v in &g.vertices {
        reach.insert(v, g.core_reachable(v).expect("validated"));
    }
    g.vertices
        .iter()
        .filter(|v| succs[*v].iter().any(|u| reach[u.as_str()].contains(*v)))
        .cloned()
        .collect()
}

/// All vertex-simple directed cycles of the core multigraph, one per vertex
/// sequence, each rooted at its smallest vertex with copy 0 of the smallest
/// arc between consecutive vertices. Ordered by root, then depth-first
/// discovery. Returns the truncation flag when `cap` is hit.
pub fn enumerate_cycles_capped(g: &GraphPresentation, cap: usize) -> (Vec<Cycle>, bool) {
    let succs = collapsed_successors(g);
    let mut out: Vec<Cycle> = Vec::new();
    let mut truncated = false;

    fn dfs(
        g: &GraphPresentation,
        succs: &BTreeMap<VertexId, BTreeSet<VertexId>>,
        root: &str,
        path: &mut Vec<VertexId>,
        on_path: &mut BTreeSet<VertexId>,
        out: &mut Vec<Cycle>,
        cap: usize,
        truncated: &mut bool,
    ) {
        if *truncated {
            return;
        }
        let cur = path.last().expect("non-empty path").clone();
        for next in &succs[&cur] {
            if *truncated {
                return;
            }
            if next == root {
                if out.len() >= cap {
                    *truncated = true;
                    return;
                }
                let n = path.len();
                let edges = (0..n)
                    .map(|i| {
                        let from = &path[i];
                        let to = &path[(i + 1) % n];
                        EdgeRef::Core {
                            arc: smallest_arc_between(g, from, to).expect("edge exists"),
                            copy: 0,
                        }
                    })
                    .collect();
                out.push(Cycle {
                    edges,
                    vertices: path.clone(),
                });
            } else if next.as_str() > root && !on_path.contains(next) {
                path.push(next.clone());
                on_path.insert(next.clone());
                dfs(g, succs, root, path, on_path, out, cap, truncated);
                on_path.remove(next);
                path.pop();
            }
        }
    }

    for root in g.sorted_vertices() {
        let mut path = vec![root.clone()];
        let mut on_path = BTreeSet::from([root.clone()]);
        dfs(
            g,
            &succs,
            &root,
            &mut path,
            &mut on_path,
            &mut out,
            cap,
            &mut truncated,
        );
        if truncated {
            break;
        }
    }
    (out, truncated)
}

pub const DEFAULT_CYCLE_CAP: usize = 10_000;

pub fn enumerate_cycles(g: &GraphPresentation) -> Vec<Cycle> {
    enumerate_cycles_capped(g, DEFAULT_CYCLE_CAP).0
}

/// Shortest cycle through `v`, lexicographically least among the shortest,
/// in canonical (rotated-to-min) form. `v` must lie on a cycle.
pub(crate) fn shortest_cycle_through(g: &GraphPresentation, v: &str) -> Cycle {
    let succs = collapsed_successors(g);
    let mut preds: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (from, tos) in &succs {
        for to in tos {
            preds.entry(to).or_default().insert(from);
        }
    }
    // dist[x] = length of the shortest core path x -> v.
    let mut dist: BTreeMap<&str, usize> = BTreeMap::from([(v, 0)]);
    let mut queue = VecDeque::from([v]);
    while let Some(cur) = queue.pop_front() {
        let d = dist[cur];
        if let Some(ps) = preds.get(cur) {
            for p in ps {
                if !dist.contains_key(p) {
                    dist.insert(p, d + 1);
                    queue.push_back(p);
                }
            }
        }
    }
    // First step: the smallest successor minimizing the total length.
    let first = succs[v]
        .iter()
        .filter_map(|u| dist.get(u.as_str()).map(|d| (1 + d, u)))
        .min()
        .map(|(_, u)| u.clone())
        .expect("vertex lies on a cycle");
    let mut vertices = vec![v.to_string()];
    let mut cur = first;
    while cur != v {
        vertices.push(cur.clone());
        let d = dist[cur.as_str()];
        cur = succs[&cur]
            .iter()
            .find(|w| dist.get(w.as_str()) == Some(&(d - 1)))
            .expect("distance decreases toward v")
            .clone();
    }
    let n = vertices.len();
    let edges = (0..n)
        .map(|i| EdgeRef::Core {
            arc: smallest_arc_between(g, &vertices[i], &vertices[(i + 1) % n])
                .expect("edge exists"),
            copy: 0,
        })
        .collect();
    Cycle { edges, vertices }.rotate_to_min()
}

/// Condition (a): every vertex has finite in-degree. Only core vertices can
/// receive infinitely many edges (derived vertices receive at most one), so
/// the scan is over sorted core vertices.
pub fn check_no_infinite_receiver(g: &GraphPresentation) -> ConditionOutcome {
    for v in g.sorted_vertices() {
        let r = VertexRef::Core(v.clone());
        if g.in_degree(&r).expect("validated").is_omega() {
            let samples = g
                .in_edges_bounded(&r, 3)
                .expect("validated")
                .into_iter()
                .take(3)
                .collect();
            return ConditionOutcome::fails(Witness::InfiniteReceiver {
                vertex: v,
                sample_in_edges: samples,
            });
        }
    }
    ConditionOutcome::holds()
}

/// Condition (b): no cycle has an exit. Equivalent formulation used here: no
/// vertex on a cycle emits two or more edges (the second edge, a parallel
/// copy included, exits the shortest cycle through that vertex).
pub fn check_no_cycle_with_exit(g: &GraphPresentation) -> ConditionOutcome {
    let on_cycle = on_cycle_vertices(g);
    let failing = on_cycle.iter().find(|v| {
        g.out_degree(&VertexRef::Core((*v).clone()))
            .expect("validated")
            .at_least(2)
    });
    let Some(v) = failing else {
        return ConditionOutcome::holds();
    };
    let cycle = shortest_cycle_through(g, v);
    let position = cycle
        .vertices
        .iter()
        .position(|w| w == v)
        .expect("cycle passes through v");
    let cycle_edge = cycle.edges[position].clone();
    let exit = g
        .out_edges_bounded(&VertexRef::Core(v.clone()), 2)
        .expect("validated")
        .into_iter()
        .find(|e| e != &cycle_edge)
        .expect("out-degree at least two");
    ConditionOutcome::fails(Witness::CycleWithExit {
        cycle,
        exit,
        position,
    })
}

/// Condition (c): no infinite backward chain. Over this presentation
/// language a chain of pairwise-distinct edges going ever backwards exists
/// iff some backray does, or the sub-digraph of ω-multiplicity arcs has a
/// directed cycle (each lap can consume a fresh parallel copy; finite
/// multiplicities run out). This rule is property-tested against a
/// brute-force search in the oracle tests.
pub fn check_no_infinite_backward_chain(g: &GraphPresentation) -> ConditionOutcome {
    let backray = g
        .primitives
        .iter()
        .filter(|p| p.kind == PrimitiveKind::BackRay)
        .map(|p| p.tag.clone())
        .min();
    if let Some(tag) = backray {
        return ConditionOutcome::fails(Witness::BackwardChain(ChainGen::BackRay { tag }));
    }
    let omega_sub = GraphPresentation {
        vertices: g.vertices.clone(),
        arcs: g.arcs.iter().filter(|a| a.mult.is_omega()).cloned().collect(),
        primitives: Vec::new(),
    };
    let on_cycle = on_cycle_vertices(&omega_sub);
    match on_cycle.first() {
        None => ConditionOutcome::holds(),
        Some(v) => ConditionOutcome::fails(Witness::BackwardChain(ChainGen::OmegaCycle {
            cycle: shortest_cycle_through(&omega_sub, v),
        })),
    }
}

/// Good vertices for condition (d): sinks, cycle vertices, infinite emitters.
fn good_core_vertices(g: &GraphPresentation) -> BTreeSet<VertexId> {
    let mut good = on_cycle_vertices(g);
    for v in &g.vertices {
        let d = g.out_degree(&VertexRef::Core(v.clone())).expect("validated");
        if d.is_zero() || d.is_omega() {
            good.insert(v.clone());
        }
    }
    good
}

/// Condition (d): every vertex reaches a sink, a cycle, or an infinite
/// emitter. Fwdray vertices never do (each emits exactly one edge, deeper
/// into the ray), so any fwdray fails immediately; otherwise every core
/// vertex must backward-close into the good set. Derived vertices ride on
/// their anchors: instar sources and backray vertices reach the anchor, and
/// outstar targets are sinks themselves.
pub fn check_reaches_terminal(g: &GraphPresentation) -> ConditionOutcome {
    let fwdray = g
        .primitives
        .iter()
        .filter(|p| p.kind == PrimitiveKind::FwdRay)
        .map(|p| p.tag.clone())
        .min();
    if let Some(tag) = fwdray {
        let witness = VertexRef::derived(tag.clone(), 1);
        let samples = (1..=3).map(|i| VertexRef::derived(tag.clone(), i)).collect();
        return ConditionOutcome::fails(Witness::StrandedVertex {
            vertex: witness,
            closure: ForwardClosure {
                samples,
                continues_along: Some(tag),
            },
        });
    }
    let good = good_core_vertices(g);
    // Backward closure of the good set along core arcs.
    let mut closed = good.clone();
    let mut queue: VecDeque<VertexId> = closed.iter().cloned().collect();
    while let Some(cur) = queue.pop_front() {
        for a in g.arcs_into(&cur) {
            if closed.insert(a.source.clone()) {
                queue.push_back(a.source.clone());
            }
        }
    }
    let stranded = g.sorted_vertices().into_iter().find(|v| !closed.contains(v));
    match stranded {
        None => ConditionOutcome::holds(),
        Some(v) => {
            let closure = g.core_reachable(&v).expect("validated");
            ConditionOutcome::fails(Witness::StrandedVertex {
                vertex: VertexRef::Core(v),
                closure: ForwardClosure {
                    samples: closure.into_iter().map(VertexRef::Core).collect(),
                    continues_along: None,
                },
            })
        }
    }
}

/// Run all four condition checks and conjoin them into the RFD verdict.
/// Disconnected inputs additionally carry one sub-report per weakly
/// connected component; the top-level booleans equal the conjunction over
/// components because each condition is itself component-local.
pub fn decide_rfd(g: &GraphPresentation) -> ConditionReport {
    let a = check_no_infinite_receiver(g);
    let b = check_no_cycle_with_exit(g);
    let c = check_no_infinite_backward_chain(g);
    let d = check_reaches_terminal(g);
    let rfd = a.holds && b.holds && c.holds && d.holds;
    let comps = g.components();
    let components = if comps.len() > 1 {
        comps.iter().map(decide_rfd).collect()
    } else {
        Vec::new()
    };
    ConditionReport {
        a,
        b,
        c,
        d,
        rfd,
        components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cycle_vertices(c: &Cycle) -> Vec<&str> {
        c.vertices.iter().map(|v| v.as_str()).collect()
    }

    #[test]
    fn receiver_fixture_fails_only_a() {
        let g = fixtures::receiver();
        let r = decide_rfd(&g);
        assert!(!r.a.holds && r.b.holds && r.c.holds && r.d.holds);
        assert!(!r.rfd);
        match r.a.witness.as_ref().unwrap() {
            Witness::InfiniteReceiver {
                vertex,
                sample_in_edges,
            } => {
                assert_eq!(vertex, "v");
                let shown: Vec<String> =
                    sample_in_edges.iter().map(|e| e.to_string()).collect();
                assert_eq!(shown, vec!["a1", "a2", "a3"]);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn cycle_exit_fixture_fails_only_b() {
        let g = fixtures::cycle_exit();
        let r = decide_rfd(&g);
        assert!(r.a.holds && !r.b.holds && r.c.holds && r.d.holds);
        match r.b.witness.as_ref().unwrap() {
            Witness::CycleWithExit {
                cycle,
                exit,
                position,
            } => {
                assert_eq!(cycle_vertices(cycle), vec!["v", "v1", "v2", "v3"]);
                assert_eq!(exit.to_string(), "d1");
                assert_eq!(*position, 0);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn backward_chain_fixture_fails_only_c() {
        let g = fixtures::backward_chain();
        let r = decide_rfd(&g);
        assert!(r.a.holds && r.b.holds && !r.c.holds && r.d.holds);
        assert_eq!(
            r.c.witness,
            Some(Witness::BackwardChain(ChainGen::BackRay {
                tag: "bk0".into()
            }))
        );
    }

    #[test]
    fn stranded_fixture_fails_only_d() {
        let g = fixtures::stranded();
        let r = decide_rfd(&g);
        assert!(r.a.holds && r.b.holds && r.c.holds && !r.d.holds);
        match r.d.witness.as_ref().unwrap() {
            Witness::StrandedVertex { vertex, closure } => {
                assert_eq!(vertex, &VertexRef::derived("fw0", 1));
                assert_eq!(closure.continues_along.as_deref(), Some("fw0"));
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn independence_corpus_witnesses_self_validate() {
        for g in [
            fixtures::receiver(),
            fixtures::cycle_exit(),
            fixtures::backward_chain(),
            fixtures::stranded(),
            fixtures::omega_loop(),
            fixtures::omega_in(),
            fixtures::double_loop(),
        ] {
            let r = decide_rfd(&g);
            for w in r.witnesses() {
                w.validate(&g).expect("witness validates");
            }
        }
    }

    #[test]
    fn sink_and_loop_are_rfd() {
        for g in [fixtures::sink(), fixtures::single_loop(), fixtures::diamond()] {
            let r = decide_rfd(&g);
            assert!(r.rfd, "expected rfd for {}", g.serialize());
            assert!(r.witnesses().is_empty());
        }
    }

    #[test]
    fn double_loop_exit_is_second_copy() {
        let g = fixtures::double_loop();
        let r = decide_rfd(&g);
        assert!(!r.b.holds && r.c.holds);
        match r.b.witness.as_ref().unwrap() {
            Witness::CycleWithExit { cycle, exit, .. } => {
                assert_eq!(cycle_vertices(cycle), vec!["v"]);
                assert_eq!(exit, &EdgeRef::core("e", 1));
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn omega_arc_fails_a_at_target() {
        let g = fixtures::omega_in();
        let r = decide_rfd(&g);
        assert!(!r.a.holds && r.b.holds && r.c.holds && r.d.holds);
        match r.a.witness.as_ref().unwrap() {
            Witness::InfiniteReceiver { vertex, .. } => assert_eq!(vertex, "v"),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn omega_loop_fails_b_and_c_together() {
        let g = fixtures::omega_loop();
        let r = decide_rfd(&g);
        assert!(!r.a.holds && !r.b.holds && !r.c.holds && r.d.holds);
        match r.c.witness.as_ref().unwrap() {
            Witness::BackwardChain(ChainGen::OmegaCycle { cycle }) => {
                assert_eq!(cycle_vertices(cycle), vec!["v"]);
            }
            other => panic!("unexpected witness {other:?}"),
        }
        match r.b.witness.as_ref().unwrap() {
            Witness::CycleWithExit { exit, .. } => {
                assert_eq!(exit, &EdgeRef::core("e", 1));
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn cycle_enumeration_matches_drawn_cycles() {
        let g = fixtures::cycle_exit();
        let cycles = enumerate_cycles(&g);
        assert_eq!(cycles.len(), 2);
        assert_eq!(cycle_vertices(&cycles[0]), vec!["v", "v1", "v2", "v3"]);
        assert_eq!(cycle_vertices(&cycles[1]), vec!["v6"]);
        for c in &cycles {
            c.validate(&g).expect("enumerated cycle validates");
        }
        assert!(enumerate_cycles(&fixtures::receiver()).is_empty());
        assert_eq!(enumerate_cycles(&fixtures::single_loop()).len(), 1);
    }

    #[test]
    fn cycle_enumeration_cap_flags_truncation() {
        // Complete digraph on 5 vertices has far more than 3 simple cycles.
        let mut text = String::new();
        for i in 0..5 {
            text.push_str(&format!("vertex k{i}\n"));
        }
        let mut n = 0;
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    text.push_str(&format!("edge q{n}: k{i} -> k{j}\n"));
                    n += 1;
                }
            }
        }
        let g = GraphPresentation::parse(&text).unwrap();
        let (cycles, truncated) = enumerate_cycles_capped(&g, 3);
        assert_eq!(cycles.len(), 3);
        assert!(truncated);
        let (all, truncated) = enumerate_cycles_capped(&g, DEFAULT_CYCLE_CAP);
        assert!(!truncated);
        // Simple cycles of K5: sum over k of C(5,k) * (k-1)! for k = 2..5.
        assert_eq!(all.len(), 10 + 20 + 30 + 24);
    }

    #[test]
    fn disconnected_reports_carry_components() {
        let mut g = fixtures::single_loop();
        let other = GraphPresentation::parse("vertex z\nfwdray zr: z\n").unwrap();
        g.vertices.extend(other.vertices);
        g.primitives.extend(other.primitives);
        let r = decide_rfd(&g);
        assert!(!r.rfd);
        assert_eq!(r.components.len(), 2);
        assert!(r.components[0].rfd);
        assert!(!r.components[1].rfd);
        assert!(r.components[1].components.is_empty());
    }

    #[test]
    fn empty_presentation_is_rfd() {
        let r = decide_rfd(&GraphPresentation::default());
        assert!(r.rfd);
        assert!(r.components.is_empty());
    }

    #[test]
    fn on_cycle_detection_handles_self_loops_and_sccs() {
        let g = GraphPresentation::parse(
            "vertex a\nvertex b\nvertex c\nedge e: a -> b\nedge f: b -> a\nedge h: c -> c\n",
        )
        .unwrap();
        let on = on_cycle_vertices(&g);
        assert_eq!(on.into_iter().collect::<Vec<_>>(), vec!["a", "b", "c"]);
        let g = fixtures::stranded();
        assert!(on_cycle_vertices(&g).is_empty());
    }

    #[test]
    fn shortest_cycle_prefers_lexicographically_least() {
        // Two shortest cycles through a: a->b->a and a->c->a; the b-route wins.
        let g = GraphPresentation::parse(
            "vertex a\nvertex b\nvertex c\nedge e1: a -> b\nedge e2: b -> a\nedge e3: a -> c\nedge e4: c -> a\nedge x: a -> a\n",
        )
        .unwrap();
        // The self-loop is the unique shortest cycle.
        let c = shortest_cycle_through(&g, "a");
        assert_eq!(cycle_vertices(&c), vec!["a"]);
        assert_eq!(c.edges[0].to_string(), "x");
        // Drop the self-loop; now length 2 with the lexicographically least route.
        let g2 = GraphPresentation {
            arcs: g.arcs.iter().filter(|a| a.id != "x").cloned().collect(),
            ..g.clone()
        };
        let c = shortest_cycle_through(&g2, "a");
        assert_eq!(cycle_vertices(&c), vec!["a", "b"]);
    }
}
