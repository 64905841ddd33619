//! Deterministic DOT rendering of a presentation, with optional witness
//! highlighting. Core vertices draw as filled nodes; each infinite family
//! is truncated to three representatives plus a dotted continuation edge,
//! so the figure stays finite while showing how the family extends.
//!
//! Output is a pure function of the inputs (nodes and edges emit in sorted
//! order), so renders are snapshot-testable.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::conditions::{ChainGen, Witness};
use crate::presentation::{
    EdgeRef, ExtNat, GraphPresentation, InfinitePrimitive, PrimitiveKind, Tag, VertexRef,
};

/// How many family members are drawn before the dotted continuation.
const SHOWN: i64 = 3;

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// What a witness pins down in the drawing: arcs (any copy collapses onto
/// the one drawn edge), family edges by exact index, and vertices.
#[derive(Default)]
struct Highlights {
    arcs: BTreeSet<String>,
    family_edges: BTreeSet<(Tag, i64)>,
    /// Families where the highlight lies beyond the drawn representatives,
    /// so the continuation edge lights up instead.
    family_tails: BTreeSet<Tag>,
    vertices: BTreeSet<String>,
}

impl Highlights {
    fn add_edge(&mut self, e: &EdgeRef) {
        match e {
            EdgeRef::Core { arc, .. } => {
                self.arcs.insert(arc.clone());
            }
            EdgeRef::Family { tag, index } => {
                if index.abs() <= SHOWN {
                    self.family_edges.insert((tag.clone(), *index));
                } else {
                    self.family_tails.insert(tag.clone());
                }
            }
        }
    }

    fn add_vertex(&mut self, v: &VertexRef) {
        self.vertices.insert(v.to_string());
    }

    fn from(witnesses: &[&Witness]) -> Self {
        let mut h = Highlights::default();
        for w in witnesses {
            match w {
                Witness::InfiniteReceiver {
                    vertex,
                    sample_in_edges,
                } => {
                    h.vertices.insert(vertex.clone());
                    for e in sample_in_edges {
                        h.add_edge(e);
                    }
                }
                Witness::CycleWithExit { cycle, exit, .. } => {
                    for e in &cycle.edges {
                        h.add_edge(e);
                    }
                    h.add_edge(exit);
                }
                Witness::BackwardChain(ChainGen::BackRay { tag }) => {
                    for i in 1..=SHOWN {
                        h.family_edges.insert((tag.clone(), -i));
                    }
                    h.family_tails.insert(tag.clone());
                }
                Witness::BackwardChain(ChainGen::OmegaCycle { cycle }) => {
                    for e in &cycle.edges {
                        h.add_edge(e);
                    }
                }
                Witness::StrandedVertex { vertex, closure } => {
                    h.add_vertex(vertex);
                    for v in &closure.samples {
                        h.add_vertex(v);
                    }
                    if let Some(tag) = &closure.continues_along {
                        h.family_tails.insert(tag.clone());
                    }
                }
            }
        }
        h
    }
}

fn mult_label(id: &str, mult: ExtNat) -> String {
    match mult {
        ExtNat::Fin(1) => id.to_string(),
        ExtNat::Fin(n) => format!("{id} \u{00d7}{n}"),
        ExtNat::Omega => format!("{id} \u{00d7}\u{03c9}"),
    }
}

/// The representative member indices drawn for a family.
fn shown_indices(kind: PrimitiveKind) -> Vec<i64> {
    match kind {
        PrimitiveKind::BackRay => (1..=SHOWN).map(|i| -i).collect(),
        _ => (1..=SHOWN).collect(),
    }
}

fn family_edges_drawn(g: &GraphPresentation, p: &InfinitePrimitive) -> Vec<(EdgeRef, VertexRef, VertexRef)> {
    shown_indices(p.kind)
        .into_iter()
        .map(|i| {
            let e = EdgeRef::family(p.tag.clone(), i);
            let (src, dst) = g
                .edge_endpoints(&e)
                .expect("representative indices are valid");
            (e, src, dst)
        })
        .collect()
}

/// Render the presentation as a DOT digraph. Witness edges and vertices, if
/// any are passed, are drawn in red with heavier strokes.
pub fn dot_export(g: &GraphPresentation, witnesses: &[&Witness]) -> String {
    let h = Highlights::from(witnesses);
    let mut out = String::from("digraph presentation {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle, fontsize=11, margin=0.02];\n");
    out.push_str("  edge [fontsize=10];\n");

    let mut vertices = g.vertices.clone();
    vertices.sort();
    for v in &vertices {
        let mut attrs = vec![
            "style=filled".to_string(),
            "fillcolor=lightgrey".to_string(),
        ];
        if h.vertices.contains(v) {
            attrs.push("color=red".to_string());
            attrs.push("penwidth=2".to_string());
        }
        let _ = writeln!(out, "  {} [{}];", quoted(v), attrs.join(", "));
    }

    let mut primitives: Vec<&InfinitePrimitive> = g.primitives.iter().collect();
    primitives.sort_by(|p, q| p.tag.cmp(&q.tag));
    for p in &primitives {
        for i in shown_indices(p.kind) {
            let name = VertexRef::derived(p.tag.clone(), i).to_string();
            let mut attrs = vec!["style=dashed".to_string()];
            if h.vertices.contains(&name) {
                attrs.push("color=red".to_string());
                attrs.push("penwidth=2".to_string());
            }
            let _ = writeln!(out, "  {} [{}];", quoted(&name), attrs.join(", "));
        }
        let _ = writeln!(
            out,
            "  {} [label=\"\u{22ef}\", shape=none];",
            quoted(&format!("{}..", p.tag))
        );
    }

    let mut arcs = g.arcs.clone();
    arcs.sort_by(|a, b| a.id.cmp(&b.id));
    for a in &arcs {
        let mut attrs = vec![format!("label={}", quoted(&mult_label(&a.id, a.mult)))];
        if h.arcs.contains(&a.id) {
            attrs.push("color=red".to_string());
            attrs.push("penwidth=2".to_string());
        }
        let _ = writeln!(
            out,
            "  {} -> {} [{}];",
            quoted(&a.source),
            quoted(&a.target),
            attrs.join(", ")
        );
    }

    for p in &primitives {
        for (e, src, dst) in family_edges_drawn(g, p) {
            let index = match &e {
                EdgeRef::Family { index, .. } => *index,
                EdgeRef::Core { .. } => unreachable!("family edges only"),
            };
            let mut attrs = vec![format!("label={}", quoted(&e.to_string()))];
            if h.family_edges.contains(&(p.tag.clone(), index)) {
                attrs.push("color=red".to_string());
                attrs.push("penwidth=2".to_string());
            }
            let _ = writeln!(
                out,
                "  {} -> {} [{}];",
                quoted(&src.to_string()),
                quoted(&dst.to_string()),
                attrs.join(", ")
            );
        }
        // Dotted continuation: where the family keeps going beyond the
        // drawn representatives.
        let more = quoted(&format!("{}..", p.tag));
        let last = VertexRef::derived(p.tag.clone(), *shown_indices(p.kind).last().expect("nonempty"));
        let (from, to) = match p.kind {
            // Ever more edges into the anchor / ever-earlier ray segments.
            PrimitiveKind::InStar => (more.clone(), quoted(&p.anchor)),
            PrimitiveKind::BackRay => (more.clone(), quoted(&last.to_string())),
            PrimitiveKind::OutStar => (quoted(&p.anchor), more.clone()),
            PrimitiveKind::FwdRay => (quoted(&last.to_string()), more.clone()),
        };
        let mut attrs = vec!["style=dotted".to_string()];
        if h.family_tails.contains(&p.tag) {
            attrs.push("color=red".to_string());
            attrs.push("penwidth=2".to_string());
        }
        let _ = writeln!(out, "  {from} -> {to} [{}];", attrs.join(", "));
    }

    out.push_str("}\n");
    out
}
