//! Brute-force counterparts to the symbolic deciders.
//!
//! Everything here is deliberately naive: the presentation is expanded into
//! an explicit finite graph at a truncation bound, and paths, chains and
//! degrees are enumerated outright. Disagreement between this module and
//! the symbolic layer always indicts the symbolic layer. The random
//! generator at the bottom feeds the cross-validation corpus; identical
//! specs yield identical presentations, so test corpora are pinned by seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::presentation::{
    CoreArc, EdgeRef, ExtNat, GraphPresentation, InfinitePrimitive, PrimitiveKind, VertexRef,
};

/// One explicit edge of a truncated expansion, remembering the presentation
/// edge it came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExpandedEdge {
    pub edge: EdgeRef,
    pub source: VertexRef,
    pub target: VertexRef,
}

/// Explicit finite approximant of the (possibly countable) graph: every
/// infinite family and every ω multiplicity is cut off at `bound`. The
/// expansion at B embeds in the expansion at B+1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedExpansion {
    pub bound: u64,
    pub vertices: Vec<VertexRef>,
    pub edges: Vec<ExpandedEdge>,
}

impl TruncatedExpansion {
    pub fn edges_into<'a>(&'a self, v: &'a VertexRef) -> impl Iterator<Item = &'a ExpandedEdge> {
        self.edges.iter().filter(move |e| e.target == *v)
    }

    pub fn edges_from<'a>(&'a self, v: &'a VertexRef) -> impl Iterator<Item = &'a ExpandedEdge> {
        self.edges.iter().filter(move |e| e.source == *v)
    }

    pub fn in_count(&self, v: &VertexRef) -> usize {
        self.edges_into(v).count()
    }

    pub fn out_count(&self, v: &VertexRef) -> usize {
        self.edges_from(v).count()
    }
}

/// Expand a presentation into an explicit graph, truncating every ω
/// multiplicity and every infinite family at `bound` (≥ 1).
pub fn expand(g: &GraphPresentation, bound: u64) -> TruncatedExpansion {
    assert!(bound >= 1, "expansion bound must be at least 1");
    let mut vertices: Vec<VertexRef> = g
        .sorted_vertices()
        .into_iter()
        .map(VertexRef::Core)
        .collect();
    let mut edges: Vec<ExpandedEdge> = Vec::new();
    for a in &g.arcs {
        let copies = match a.mult {
            ExtNat::Fin(m) => m.min(bound),
            ExtNat::Omega => bound,
        };
        for c in 0..copies {
            edges.push(ExpandedEdge {
                edge: EdgeRef::core(a.id.clone(), c),
                source: VertexRef::core(a.source.clone()),
                target: VertexRef::core(a.target.clone()),
            });
        }
    }
    for p in &g.primitives {
        let anchor = VertexRef::core(p.anchor.clone());
        let member = |i: i64| VertexRef::derived(p.tag.clone(), i);
        for i in 1..=bound as i64 {
            match p.kind {
                PrimitiveKind::InStar => {
                    vertices.push(member(i));
                    edges.push(ExpandedEdge {
                        edge: EdgeRef::family(p.tag.clone(), i),
                        source: member(i),
                        target: anchor.clone(),
                    });
                }
                PrimitiveKind::OutStar => {
                    vertices.push(member(i));
                    edges.push(ExpandedEdge {
                        edge: EdgeRef::family(p.tag.clone(), i),
                        source: anchor.clone(),
                        target: member(i),
                    });
                }
                PrimitiveKind::BackRay => {
                    vertices.push(member(-i));
                    edges.push(ExpandedEdge {
                        edge: EdgeRef::family(p.tag.clone(), -i),
                        source: member(-i),
                        target: if i == 1 { anchor.clone() } else { member(-(i - 1)) },
                    });
                }
                PrimitiveKind::FwdRay => {
                    vertices.push(member(i));
                    edges.push(ExpandedEdge {
                        edge: EdgeRef::family(p.tag.clone(), i),
                        source: if i == 1 { anchor.clone() } else { member(i - 1) },
                        target: member(i),
                    });
                }
            }
        }
    }
    vertices.sort();
    edges.sort();
    TruncatedExpansion {
        bound,
        vertices,
        edges,
    }
}

/// All raw paths (edge sequences; length 0 included, repeats allowed) of
/// length ≤ `max_len` ending at `to`, in lexicographic order.
pub fn enumerate_paths(
    t: &TruncatedExpansion,
    to: &VertexRef,
    max_len: usize,
) -> Vec<Vec<EdgeRef>> {
    assert!(t.vertices.contains(to), "vertex {to} not in the expansion");
    let mut out: Vec<Vec<EdgeRef>> = Vec::new();
    // Backward DFS: walked edges are stored deepest-first and reversed on
    // emission, so each emitted sequence reads forward into `to`.
    let mut stack: Vec<(VertexRef, Vec<EdgeRef>)> = vec![(to.clone(), Vec::new())];
    while let Some((cur, walked)) = stack.pop() {
        out.push(walked.iter().rev().cloned().collect());
        if walked.len() == max_len {
            continue;
        }
        for e in t.edges_into(&cur) {
            let mut longer = walked.clone();
            longer.push(e.edge.clone());
            stack.push((e.source.clone(), longer));
        }
    }
    out.sort();
    out
}

/// Number of raw paths of length ≤ `max_len` ending at `to`, without
/// materializing them (saturating).
pub fn count_paths_into(t: &TruncatedExpansion, to: &VertexRef, max_len: usize) -> u64 {
    let mut memo: BTreeMap<(VertexRef, usize), u64> = BTreeMap::new();
    fn rec(
        t: &TruncatedExpansion,
        v: &VertexRef,
        budget: usize,
        memo: &mut BTreeMap<(VertexRef, usize), u64>,
    ) -> u64 {
        if let Some(&n) = memo.get(&(v.clone(), budget)) {
            return n;
        }
        let mut n: u64 = 1;
        if budget > 0 {
            for e in t.edges_into(v) {
                n = n.saturating_add(rec(t, &e.source, budget - 1, memo));
            }
        }
        memo.insert((v.clone(), budget), n);
        n
    }
    rec(t, to, max_len, &mut memo)
}

/// Raw path count with windings of forced cycles identified: a path whose
/// leading edges close a walk back to its start vertex, all of whose
/// vertices emit exactly one expanded edge, is counted as its unwound
/// remainder (riding such a cycle admits no choice, so a leading lap does
/// not change the continued boundary point). Growth of this count in
/// `max_len` is the brute-force signature of an infinite effective count.
pub fn effective_path_count(t: &TruncatedExpansion, to: &VertexRef, max_len: usize) -> usize {
    let mut normal: std::collections::BTreeSet<Vec<EdgeRef>> = Default::default();
    for p in enumerate_paths(t, to, max_len) {
        normal.insert(strip_forced_laps(t, p));
    }
    normal.len()
}

fn path_vertices(t: &TruncatedExpansion, p: &[EdgeRef]) -> Vec<VertexRef> {
    let mut vs = Vec::with_capacity(p.len() + 1);
    for e in p {
        let ee = t
            .edges
            .iter()
            .find(|x| x.edge == *e)
            .expect("path edge in expansion");
        vs.push(ee.source.clone());
    }
    if let Some(last) = p.last() {
        let ee = t.edges.iter().find(|x| x.edge == *last).expect("in expansion");
        vs.push(ee.target.clone());
    }
    vs
}

fn strip_forced_laps(t: &TruncatedExpansion, mut p: Vec<EdgeRef>) -> Vec<EdgeRef> {
    'outer: loop {
        if p.is_empty() {
            return p;
        }
        let vs = path_vertices(t, &p);
        let start = &vs[0];
        // First return of the walk to its start vertex.
        let Some(k) = (1..vs.len()).find(|&i| vs[i] == *start) else {
            return p;
        };
        for v in &vs[..k] {
            if t.out_count(v) != 1 {
                return p;
            }
        }
        p.drain(..k);
        continue 'outer;
    }
}

/// Indexed view of an expansion for the distinct-edge chain searches:
/// vertices and edges become dense indices, parallel copies of one core arc
/// become a group taken in ascending copy order (they are interchangeable,
/// so other orders are redundant), and the used set becomes a bitmap.
struct ChainIndex {
    /// Per edge: index of its source vertex.
    source: Vec<usize>,
    /// Per vertex: edges entering it, in expansion order.
    into: Vec<Vec<usize>>,
    /// Per edge: its copy group, if it is a copy of a core arc.
    group: Vec<Option<usize>>,
    /// Per group: member edges in ascending copy order.
    group_edges: Vec<Vec<usize>>,
    /// Per vertex: memo slot, assigned to core vertices only.
    core_slot: Vec<Option<u8>>,
    edges: Vec<EdgeRef>,
    vertex_ids: std::collections::BTreeMap<VertexRef, usize>,
}

impl ChainIndex {
    fn new(t: &TruncatedExpansion) -> Self {
        use std::collections::BTreeMap;
        let mut vertex_ids: BTreeMap<VertexRef, usize> = BTreeMap::new();
        for v in &t.vertices {
            let n = vertex_ids.len();
            vertex_ids.entry(v.clone()).or_insert(n);
        }
        let mut source = Vec::with_capacity(t.edges.len());
        let mut into = vec![Vec::new(); vertex_ids.len()];
        let mut group: Vec<Option<usize>> = vec![None; t.edges.len()];
        let mut group_ids: BTreeMap<&str, usize> = BTreeMap::new();
        let mut group_edges: Vec<Vec<usize>> = Vec::new();
        let mut edges = Vec::with_capacity(t.edges.len());
        for (i, e) in t.edges.iter().enumerate() {
            source.push(vertex_ids[&e.source]);
            into[vertex_ids[&e.target]].push(i);
            if let EdgeRef::Core { arc, .. } = &e.edge {
                let g = *group_ids.entry(arc.as_str()).or_insert_with(|| {
                    group_edges.push(Vec::new());
                    group_edges.len() - 1
                });
                group[i] = Some(g);
                group_edges[g].push(i);
            }
            edges.push(e.edge.clone());
        }
        for members in &mut group_edges {
            members.sort_by_key(|&i| match &edges[i] {
                EdgeRef::Core { copy, .. } => *copy,
                EdgeRef::Family { .. } => unreachable!("grouped edges are arc copies"),
            });
        }
        let mut core_slot = vec![None; vertex_ids.len()];
        let mut next_slot = 0u8;
        for (v, &i) in &vertex_ids {
            if matches!(v, VertexRef::Core(_)) && next_slot < 64 {
                core_slot[i] = Some(next_slot);
                next_slot += 1;
            }
        }
        ChainIndex {
            source,
            into,
            group,
            group_edges,
            core_slot,
            edges,
            vertex_ids,
        }
    }

    fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Search state shared by the existence and maximization variants.
struct ChainSearch<'a> {
    ix: &'a ChainIndex,
    used: Vec<bool>,
    /// Bitmap mirror of `used`: the memo key, maintained incrementally.
    used_bits: Vec<u64>,
    used_len: usize,
    /// Per group: how many members are taken (the next canonical copy).
    group_taken: Vec<usize>,
    /// Memo of explored states: used set → bitmask of core vertices whose
    /// subtree under that set has been fully explored or soundly pruned.
    /// The best extension from a state is a pure function of the state, so
    /// revisiting cannot improve the answer. Only core vertices are keyed —
    /// family-chain vertices branch at most once, so memoizing them buys
    /// nothing.
    visited: std::collections::HashMap<Vec<u64>, u64>,
    scratch_seen: Vec<bool>,
    scratch_dep: Vec<usize>,
    scratch_arr: Vec<usize>,
}

impl<'a> ChainSearch<'a> {
    fn new(ix: &'a ChainIndex) -> Self {
        ChainSearch {
            ix,
            used: vec![false; ix.edge_count()],
            used_bits: vec![0; ix.edge_count().div_ceil(64)],
            used_len: 0,
            group_taken: vec![0; ix.group_edges.len()],
            visited: Default::default(),
            scratch_seen: vec![false; ix.vertex_ids.len()],
            scratch_dep: vec![0; ix.vertex_ids.len()],
            scratch_arr: vec![0; ix.vertex_ids.len()],
        }
    }

    /// True when the state `(cur, used set)` was already explored; records
    /// it otherwise. Non-core vertices are never recorded: chains there sit
    /// on family chains and branch at most once, so the probe would only
    /// churn the table.
    fn already_explored(&mut self, cur: usize) -> bool {
        let Some(slot) = self.ix.core_slot[cur] else {
            return false;
        };
        let bit = 1u64 << slot;
        match self.visited.get_mut(&self.used_bits) {
            Some(mask) if *mask & bit != 0 => true,
            Some(mask) => {
                *mask |= bit;
                false
            }
            None => {
                self.visited.insert(self.used_bits.clone(), bit);
                false
            }
        }
    }

    fn may_take(&self, e: usize) -> bool {
        if self.used[e] {
            return false;
        }
        match self.ix.group[e] {
            None => true,
            Some(g) => {
                let next = self.group_taken[g];
                next < self.ix.group_edges[g].len() && self.ix.group_edges[g][next] == e
            }
        }
    }

    fn take(&mut self, e: usize) {
        self.used[e] = true;
        self.used_bits[e / 64] |= 1 << (e % 64);
        self.used_len += 1;
        if let Some(g) = self.ix.group[e] {
            self.group_taken[g] += 1;
        }
    }

    fn release(&mut self, e: usize) {
        self.used[e] = false;
        self.used_bits[e / 64] &= !(1 << (e % 64));
        self.used_len -= 1;
        if let Some(g) = self.ix.group[e] {
            self.group_taken[g] -= 1;
        }
    }

    /// Admissible upper bound on how many further distinct edges a chain
    /// standing at `cur` can traverse. The chain moves from a vertex to the
    /// source of an unused edge entering it, so only edges whose target is
    /// backward-reachable matter; within that sub-multigraph the chain
    /// departs each vertex at most once more than it arrives (and arrives
    /// at most once more than it departs, at its final vertex only).
    fn extension_bound(&mut self, cur: usize) -> usize {
        let seen = &mut self.scratch_seen;
        let dep = &mut self.scratch_dep;
        let arr = &mut self.scratch_arr;
        seen.fill(false);
        dep.fill(0);
        arr.fill(0);
        let mut stack = vec![cur];
        seen[cur] = true;
        let mut order = vec![cur];
        while let Some(v) = stack.pop() {
            for &e in &self.ix.into[v] {
                if self.used[e] {
                    continue;
                }
                let s = self.ix.source[e];
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                    order.push(s);
                }
            }
        }
        let mut total = 0usize;
        for &v in &order {
            for &e in &self.ix.into[v] {
                if self.used[e] {
                    continue;
                }
                total += 1;
                dep[v] += 1;
                arr[self.ix.source[e]] += 1;
            }
        }
        let mut by_exits = 0usize;
        let mut by_entries = 0usize;
        for &v in &order {
            by_exits += dep[v].min(arr[v] + usize::from(v == cur));
            by_entries += arr[v].min(dep[v]);
        }
        total.min(by_exits).min(by_entries + 1)
    }

    /// Depth-first existence search for a chain of `target_len` distinct
    /// edges ending where the search started.
    fn find_chain(&mut self, cur: usize, path: &mut Vec<usize>, target_len: usize) -> bool {
        if path.len() >= target_len {
            return true;
        }
        if path.len() + self.extension_bound(cur) < target_len {
            return false;
        }
        if self.already_explored(cur) {
            return false;
        }
        for i in 0..self.ix.into[cur].len() {
            let e = self.ix.into[cur][i];
            if !self.may_take(e) {
                continue;
            }
            self.take(e);
            path.push(e);
            if self.find_chain(self.ix.source[e], path, target_len) {
                return true;
            }
            path.pop();
            self.release(e);
        }
        false
    }

    /// Depth-first maximization of the chain length from `cur`, capped.
    fn longest_chain(&mut self, cur: usize, best: &mut usize, cap: usize) {
        *best = (*best).max(self.used_len);
        if *best >= cap || self.used_len + self.extension_bound(cur) <= *best {
            return;
        }
        if self.already_explored(cur) {
            return;
        }
        for i in 0..self.ix.into[cur].len() {
            let e = self.ix.into[cur][i];
            if !self.may_take(e) {
                continue;
            }
            self.take(e);
            self.longest_chain(self.ix.source[e], best, cap);
            self.release(e);
            if *best >= cap {
                return;
            }
        }
    }
}

/// A backward path of at least `min_len` pairwise-distinct edges anywhere
/// in the expansion, if one exists. The result lists edges backward from
/// the end vertex: `result[0]` enters the end vertex, and each later edge
/// enters the source of its predecessor.
pub fn brute_backward_chain(t: &TruncatedExpansion, min_len: usize) -> Option<Vec<EdgeRef>> {
    let ix = ChainIndex::new(t);
    for w0 in &t.vertices {
        let mut search = ChainSearch::new(&ix);
        let mut path = Vec::new();
        if search.find_chain(ix.vertex_ids[w0], &mut path, min_len) {
            return Some(path.into_iter().map(|e| ix.edges[e].clone()).collect());
        }
    }
    None
}

/// Length of the longest pairwise-distinct-edge backward chain ending at
/// `w0`, capped at `cap` (a value of `cap` means "at least `cap`").
pub fn longest_chain_into(t: &TruncatedExpansion, w0: &VertexRef, cap: usize) -> usize {
    let ix = ChainIndex::new(t);
    let Some(&v) = ix.vertex_ids.get(w0) else {
        return 0;
    };
    let mut search = ChainSearch::new(&ix);
    let mut best = 0;
    search.longest_chain(v, &mut best, cap);
    best.min(cap)
}

/// Brute-force side of the no-infinite-backward-chain decision: the longest
/// chain into each core vertex, measured at several truncation bounds,
/// plateaus exactly when no infinite backward chain exists. A backray or
/// an all-ω cycle keeps feeding fresh edges, so the length tracks the
/// bound; everything else exhausts a fixed edge supply.
pub fn chains_plateau(g: &GraphPresentation, bounds: &[u64], cap: usize) -> bool {
    for v in g.sorted_vertices() {
        let w = VertexRef::core(v);
        let mut lengths = bounds
            .iter()
            .map(|b| longest_chain_into(&expand(g, *b), &w, cap));
        let first = lengths.next().expect("at least one bound");
        if lengths.any(|l| l != first) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Random presentations.

/// Deterministic generation parameters: one spec, one presentation.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    pub seed: u64,
    /// Core vertex count is drawn from 1..=max_vertices.
    pub max_vertices: usize,
    /// Probability of an arc per ordered vertex pair (loops included).
    pub arc_density: f64,
    /// Probability that a generated arc has ω multiplicity (else 1 or 2).
    pub omega_prob: f64,
    pub instars: usize,
    pub outstars: usize,
    pub backrays: usize,
    pub fwdrays: usize,
}

/// Generate a valid presentation from a spec. All randomness flows from the
/// seed: identical specs produce identical presentations.
pub fn random_presentation(spec: &RandomSpec) -> GraphPresentation {
    assert!(spec.max_vertices >= 1, "need at least one vertex");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = rng.random_range(1..=spec.max_vertices);
    let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(spec.arc_density) {
                let mult = if rng.random_bool(spec.omega_prob) {
                    ExtNat::Omega
                } else {
                    ExtNat::Fin(rng.random_range(1..=2))
                };
                arcs.push(CoreArc {
                    id: format!("a{}", arcs.len()),
                    source: vertices[i].clone(),
                    target: vertices[j].clone(),
                    mult,
                });
            }
        }
    }
    let mut primitives = Vec::new();
    let add = |kind: PrimitiveKind, count: usize, rng: &mut ChaCha8Rng,
               primitives: &mut Vec<InfinitePrimitive>| {
        let prefix = match kind {
            PrimitiveKind::InStar => "in",
            PrimitiveKind::OutStar => "os",
            PrimitiveKind::BackRay => "br",
            PrimitiveKind::FwdRay => "fr",
        };
        for k in 0..count {
            primitives.push(InfinitePrimitive {
                kind,
                tag: format!("{prefix}{k}"),
                anchor: vertices[rng.random_range(0..n)].clone(),
            });
        }
    };
    add(PrimitiveKind::InStar, spec.instars, &mut rng, &mut primitives);
    add(PrimitiveKind::OutStar, spec.outstars, &mut rng, &mut primitives);
    add(PrimitiveKind::BackRay, spec.backrays, &mut rng, &mut primitives);
    add(PrimitiveKind::FwdRay, spec.fwdrays, &mut rng, &mut primitives);
    let g = GraphPresentation {
        vertices,
        arcs,
        primitives,
    };
    g.validate().expect("generated presentation is valid");
    g
}

/// The pinned cross-validation spec for one corpus slot: at most 6 core
/// vertices and at most 2 infinite primitives, with kinds and density varied
/// by the seed itself.
pub fn desk_spec(seed: u64) -> RandomSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut counts = [0usize; 4];
    let total = rng.random_range(0..=2);
    for _ in 0..total {
        counts[rng.random_range(0..4)] += 1;
    }
    RandomSpec {
        seed,
        max_vertices: 6,
        arc_density: rng.random_range(0.10..0.40),
        omega_prob: rng.random_range(0.0..0.25),
        instars: counts[0],
        outstars: counts[1],
        backrays: counts[2],
        fwdrays: counts[3],
    }
}

/// Like [`desk_spec`] but guaranteed to carry a backray, for exercising the
/// König-style chain construction.
pub fn konig_spec(seed: u64) -> RandomSpec {
    let mut spec = desk_spec(seed);
    spec.backrays = spec.backrays.max(1);
    // Keep the other primitive families out of the coreach bookkeeping.
    spec.instars = 0;
    spec
}
