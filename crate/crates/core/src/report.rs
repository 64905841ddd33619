//! Renderings of every report the library produces: structured JSON
//! documents (stable, alphabetically-ordered keys, graph objects in the
//! textual notation) and human-readable text with optional ANSI color.
//!
//! The same inputs always render to the same bytes, so structured reports
//! can be diffed across runs and the human form snapshot-tested.

use std::io::IsTerminal;

use serde_json::{json, Value};

use crate::boundary::{BoundaryPoint, LocalHomeoReport};
use crate::conditions::{ChainGen, ConditionOutcome, ConditionReport, Cycle, Witness};
use crate::groupoid::{
    DensityOutcome, DensityReport, GroupoidElement, IsotropyGroup, OrbitCertificate, OrbitReport,
};
use crate::oracle::TruncatedExpansion;
use crate::presentation::GraphPresentation;

// Structured documents.

fn strings<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> Value {
    Value::Array(items.into_iter().map(|x| Value::String(x.to_string())).collect())
}

fn cycle_json(c: &Cycle) -> Value {
    json!({
        "edges": strings(&c.edges),
        "vertices": strings(&c.vertices),
    })
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::InfiniteReceiver {
            vertex,
            sample_in_edges,
        } => json!({
            "type": "infinite_receiver",
            "vertex": vertex,
            "sample_in_edges": strings(sample_in_edges),
        }),
        Witness::CycleWithExit {
            cycle,
            exit,
            position,
        } => json!({
            "type": "cycle_with_exit",
            "cycle": cycle_json(cycle),
            "exit": exit.to_string(),
            "position": position,
        }),
        Witness::BackwardChain(ChainGen::BackRay { tag }) => json!({
            "type": "backward_chain",
            "generator": {"type": "backray", "tag": tag},
        }),
        Witness::BackwardChain(ChainGen::OmegaCycle { cycle }) => json!({
            "type": "backward_chain",
            "generator": {"type": "omega_cycle", "cycle": cycle_json(cycle)},
        }),
        Witness::StrandedVertex { vertex, closure } => json!({
            "type": "stranded_vertex",
            "vertex": vertex.to_string(),
            "closure": {
                "samples": strings(&closure.samples),
                "continues_along": closure.continues_along,
            },
        }),
    }
}

fn outcome_json(o: &ConditionOutcome) -> Value {
    json!({
        "holds": o.holds,
        "witness": o.witness.as_ref().map(witness_json),
    })
}

/// The verdict document: `rfd`, per-condition outcomes keyed `a`–`d` with
/// optional witnesses, and sub-reports per weakly-connected component when
/// there are several.
pub fn conditions_json(r: &ConditionReport) -> Value {
    let components: Vec<Value> = r.components.iter().map(conditions_json).collect();
    json!({
        "kind": "conditions",
        "rfd": r.rfd,
        "conditions": {
            "a": outcome_json(&r.a),
            "b": outcome_json(&r.b),
            "c": outcome_json(&r.c),
            "d": outcome_json(&r.d),
        },
        "components": components,
    })
}

fn isotropy_json(i: &IsotropyGroup) -> Value {
    match i {
        IsotropyGroup::Trivial => json!({"type": "trivial"}),
        IsotropyGroup::InfiniteCyclic { period } => {
            json!({"type": "infinite_cyclic", "period": period})
        }
    }
}

fn certificate_json(c: &OrbitCertificate) -> Value {
    match c {
        OrbitCertificate::PrependBackward {
            at,
            prepend_edges,
            samples,
        } => json!({
            "type": "prepend_backward",
            "at": at.to_string(),
            "prepend_edges": strings(prepend_edges),
            "samples": strings(samples),
        }),
        OrbitCertificate::PrependCycleExit {
            cycle,
            exit,
            samples,
        } => json!({
            "type": "prepend_cycle_exit",
            "cycle": cycle_json(cycle),
            "exit": exit.to_string(),
            "samples": strings(samples),
        }),
        OrbitCertificate::ShiftEscape { at, samples } => json!({
            "type": "shift_escape",
            "at": at.to_string(),
            "samples": strings(samples),
        }),
    }
}

pub fn density_json(r: &DensityReport) -> Value {
    let outcome = match &r.outcome {
        DensityOutcome::Dense { witnesses } => {
            let ws: Vec<Value> = witnesses
                .iter()
                .map(|w| {
                    json!({
                        "cylinder": w.cylinder.to_string(),
                        "point": w.point.to_string(),
                        "orbit_size": w.orbit_size,
                        "isotropy": isotropy_json(&w.isotropy),
                    })
                })
                .collect();
            json!({"type": "dense", "witnesses": ws})
        }
        DensityOutcome::NotDense {
            cylinder,
            certificate,
        } => json!({
            "type": "not_dense",
            "cylinder": cylinder.to_string(),
            "certificate": certificate_json(certificate),
        }),
    };
    json!({
        "kind": "density",
        "dense": r.is_dense(),
        "params": {
            "stem_bound": r.params.stem_bound,
            "exclusion_bound": r.params.exclusion_bound,
            "orbit_cap": r.params.orbit_cap,
        },
        "cylinders": {"total": r.cylinders_total, "checked": r.cylinders_checked},
        "outcome": outcome,
    })
}

pub fn orbit_json(point: &BoundaryPoint, r: &OrbitReport) -> Value {
    let orbit = match r {
        OrbitReport::Finite { members } => {
            json!({"type": "finite", "members": strings(members)})
        }
        OrbitReport::Infinite { certificate } => {
            json!({"type": "infinite", "certificate": certificate_json(certificate)})
        }
    };
    json!({
        "kind": "orbit",
        "point": point.to_string(),
        "finite": r.is_finite(),
        "orbit": orbit,
    })
}

pub fn isotropy_report_json(
    point: &BoundaryPoint,
    iso: &IsotropyGroup,
    generator: Option<&GroupoidElement>,
) -> Value {
    json!({
        "kind": "isotropy",
        "point": point.to_string(),
        "isotropy": isotropy_json(iso),
        "generator": generator.map(|g| json!({
            "x": g.x.to_string(),
            "k": g.k,
            "y": g.y.to_string(),
            "evidence": {"m": g.evidence.0, "n": g.evidence.1},
        })),
    })
}

pub fn expansion_json(t: &TruncatedExpansion) -> Value {
    let edges: Vec<Value> = t
        .edges
        .iter()
        .map(|e| {
            json!({
                "edge": e.edge.to_string(),
                "source": e.source.to_string(),
                "target": e.target.to_string(),
            })
        })
        .collect();
    json!({
        "kind": "expansion",
        "bound": t.bound,
        "vertex_count": t.vertices.len(),
        "edge_count": t.edges.len(),
        "vertices": strings(&t.vertices),
        "edges": edges,
    })
}

/// Result of the self-check pass: presentation well-formedness, every
/// witness re-validated, and bounded shift-bijectivity probes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub vertices: usize,
    pub arcs: usize,
    pub primitives: usize,
    pub witnesses_checked: usize,
    /// Start vertex of each probe alongside its result.
    pub homeo_probes: Vec<(String, LocalHomeoReport)>,
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

pub fn validation_json(r: &ValidationReport) -> Value {
    let probes: Vec<Value> = r
        .homeo_probes
        .iter()
        .map(|(start, p)| {
            json!({
                "start": start,
                "base": strings(&p.base),
                "depth": p.depth,
                "source_count": p.source_count,
                "target_count": p.target_count,
                "bijective": p.bijective,
                "violation": p.violation,
            })
        })
        .collect();
    json!({
        "kind": "validation",
        "valid": r.is_valid(),
        "presentation": {
            "vertices": r.vertices,
            "arcs": r.arcs,
            "primitives": r.primitives,
        },
        "witnesses_checked": r.witnesses_checked,
        "shift_probes": probes,
        "issues": r.issues,
    })
}

pub fn random_json(seed: u64, text: &str) -> Value {
    json!({
        "kind": "random",
        "seed": seed,
        "presentation": text,
    })
}

/// Serialize a document with a trailing newline. `Value` maps are ordered,
/// so equal documents print as equal bytes.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

// Human rendering.

/// ANSI styling switch, resolved from `RFD_COLOR` (`auto`, `never`,
/// `always`; default `auto` = color only when stdout is a terminal).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Style {
    pub color: bool,
}

impl Style {
    pub fn plain() -> Self {
        Style { color: false }
    }

    pub fn from_env() -> Self {
        let color = match std::env::var("RFD_COLOR").as_deref() {
            Ok("always") => true,
            Ok("never") => false,
            _ => std::io::stdout().is_terminal(),
        };
        Style { color }
    }

    fn paint(&self, code: &str, s: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }

    fn good(&self, s: &str) -> String {
        self.paint("32", s)
    }

    fn bad(&self, s: &str) -> String {
        self.paint("31", s)
    }

    fn bold(&self, s: &str) -> String {
        self.paint("1", s)
    }
}

fn witness_lines(w: &Witness, out: &mut Vec<String>) {
    match w {
        Witness::InfiniteReceiver {
            vertex,
            sample_in_edges,
        } => {
            let edges: Vec<String> = sample_in_edges.iter().map(|e| e.to_string()).collect();
            out.push(format!(
                "      witness: vertex {vertex} receives infinitely many edges (e.g. {}, ...)",
                edges.join(", ")
            ));
        }
        Witness::CycleWithExit {
            cycle,
            exit,
            position,
        } => {
            out.push(format!(
                "      witness: cycle {cycle} has exit {exit} at {}",
                cycle.vertices[*position]
            ));
        }
        Witness::BackwardChain(ChainGen::BackRay { tag }) => {
            out.push(format!(
                "      witness: backray {tag} supplies arbitrarily long backward chains"
            ));
        }
        Witness::BackwardChain(ChainGen::OmegaCycle { cycle }) => {
            out.push(format!(
                "      witness: cycle {cycle} of omega-multiplicity arcs winds through fresh copies"
            ));
        }
        Witness::StrandedVertex { vertex, closure } => {
            let samples: Vec<String> = closure.samples.iter().map(|v| v.to_string()).collect();
            let mut line = format!(
                "      witness: {vertex} reaches no sink, cycle, or infinite emitter (forward closure: {}",
                samples.join(", ")
            );
            if let Some(tag) = &closure.continues_along {
                line.push_str(&format!(", continuing along {tag}"));
            }
            line.push(')');
            out.push(line);
        }
    }
}

const CONDITION_NAMES: [(&str, &str); 4] = [
    ("a", "no vertex receives infinitely many edges"),
    ("b", "no cycle has an exit"),
    ("c", "no infinite backward chain of distinct edges"),
    ("d", "every vertex reaches a sink, cycle, or infinite emitter"),
];

pub fn render_conditions(r: &ConditionReport, style: Style) -> String {
    let mut out = Vec::new();
    let verdict = if r.rfd {
        style.good("yes")
    } else {
        style.bad("no")
    };
    out.push(format!("{} {verdict}", style.bold("RFD:")));
    for ((label, o), (_, name)) in r.outcomes().iter().zip(CONDITION_NAMES) {
        let status = if o.holds {
            style.good("holds")
        } else {
            style.bad("FAILS")
        };
        out.push(format!("  ({label}) {name:<58} {status}"));
        if let Some(w) = &o.witness {
            witness_lines(w, &mut out);
        }
    }
    if !r.components.is_empty() {
        out.push(format!(
            "  {} weakly connected components; the graph is RFD iff every component is:",
            r.components.len()
        ));
        for (i, comp) in r.components.iter().enumerate() {
            let verdict = if comp.rfd {
                style.good("RFD")
            } else {
                style.bad("not RFD")
            };
            let failing: Vec<&str> = comp
                .outcomes()
                .iter()
                .filter(|(_, o)| !o.holds)
                .map(|(l, _)| *l)
                .collect();
            let detail = if failing.is_empty() {
                String::new()
            } else {
                format!(" (fails {})", failing.join(", "))
            };
            out.push(format!("    component {}: {verdict}{detail}", i + 1));
        }
    }
    out.join("\n") + "\n"
}

fn certificate_lines(c: &OrbitCertificate, out: &mut Vec<String>) {
    match c {
        OrbitCertificate::PrependBackward {
            at, prepend_edges, ..
        } => {
            let edges: Vec<String> = prepend_edges.iter().map(|e| e.to_string()).collect();
            out.push(format!(
                "  certificate: ever-longer prefixes into {at} (e.g. {}, ...)",
                edges.join(", ")
            ));
        }
        OrbitCertificate::PrependCycleExit { cycle, exit, .. } => {
            out.push(format!(
                "  certificate: winding {cycle} any number of times before exit {exit}"
            ));
        }
        OrbitCertificate::ShiftEscape { at, .. } => {
            out.push(format!(
                "  certificate: shifts escape along the forward ray at {at}"
            ));
        }
    }
    let samples: Vec<String> = c.samples().iter().map(|p| p.to_string()).collect();
    out.push(format!("  orbit samples: {}", samples.join(", ")));
}

pub fn render_density(r: &DensityReport, style: Style) -> String {
    let mut out = Vec::new();
    let verdict = if r.is_dense() {
        style.good("yes")
    } else {
        style.bad("no")
    };
    out.push(format!(
        "{} {verdict}  (stem bound {}, exclusion bound {}, orbit cap {})",
        style.bold("dense periodic points:"),
        r.params.stem_bound,
        r.params.exclusion_bound,
        r.params.orbit_cap
    ));
    out.push(format!(
        "cylinders: {} enumerated, {} nonempty and checked",
        r.cylinders_total, r.cylinders_checked
    ));
    match &r.outcome {
        DensityOutcome::Dense { witnesses } => {
            for w in witnesses {
                let size = match w.orbit_size {
                    Some(n) => format!("orbit size {n}"),
                    None => "orbit size > cap".to_string(),
                };
                out.push(format!(
                    "  {}  periodic point {}, {size}, isotropy {}",
                    w.cylinder, w.point, w.isotropy
                ));
            }
        }
        DensityOutcome::NotDense {
            cylinder,
            certificate,
        } => {
            out.push(format!(
                "  {} holds no periodic point: every orbit through it is infinite",
                cylinder
            ));
            certificate_lines(certificate, &mut out);
        }
    }
    out.join("\n") + "\n"
}

pub fn render_orbit(point: &BoundaryPoint, r: &OrbitReport, style: Style) -> String {
    let mut out = Vec::new();
    match r {
        OrbitReport::Finite { members } => {
            out.push(format!(
                "{} {} ({} member{})",
                style.bold(&format!("orbit of {point}:")),
                style.good("finite"),
                members.len(),
                if members.len() == 1 { "" } else { "s" }
            ));
            for m in members {
                out.push(format!("  {m}"));
            }
        }
        OrbitReport::Infinite { certificate } => {
            out.push(format!(
                "{} {}",
                style.bold(&format!("orbit of {point}:")),
                style.bad("infinite")
            ));
            certificate_lines(certificate, &mut out);
        }
    }
    out.join("\n") + "\n"
}

pub fn render_isotropy(
    point: &BoundaryPoint,
    iso: &IsotropyGroup,
    generator: Option<&GroupoidElement>,
    style: Style,
) -> String {
    let mut out = vec![format!(
        "{} {iso}",
        style.bold(&format!("isotropy of {point}:"))
    )];
    if let Some(g) = generator {
        out.push(format!(
            "  generator: {g} with evidence (m, n) = ({}, {})",
            g.evidence.0, g.evidence.1
        ));
    }
    out.join("\n") + "\n"
}

pub fn render_expansion(t: &TruncatedExpansion, style: Style) -> String {
    let mut out = vec![format!(
        "{} (vertices: {}, edges: {})",
        style.bold(&format!("truncated expansion at bound {}", t.bound)),
        t.vertices.len(),
        t.edges.len()
    )];
    let vs: Vec<String> = t.vertices.iter().map(|v| v.to_string()).collect();
    out.push(format!("vertices: {}", vs.join(", ")));
    if !t.edges.is_empty() {
        out.push("edges:".to_string());
        for e in &t.edges {
            out.push(format!("  {}: {} -> {}", e.edge, e.source, e.target));
        }
    }
    out.join("\n") + "\n"
}

pub fn render_validation(r: &ValidationReport, style: Style) -> String {
    let verdict = if r.is_valid() {
        style.good("valid")
    } else {
        style.bad("INVALID")
    };
    let mut out = vec![
        format!("{} {verdict}", style.bold("presentation:")),
        format!(
            "  {} vertices, {} arcs, {} infinite primitives",
            r.vertices, r.arcs, r.primitives
        ),
        format!("  witnesses re-validated: {}", r.witnesses_checked),
    ];
    for (start, p) in &r.homeo_probes {
        let base = if p.base.is_empty() {
            format!("Z({start})")
        } else {
            let parts: Vec<String> = p.base.iter().map(|e| e.to_string()).collect();
            format!("Z({})", parts.join("."))
        };
        let status = if p.bijective {
            style.good("bijective")
        } else {
            style.bad("NOT bijective")
        };
        out.push(format!(
            "  shift probe on {base} (depth {}): {} -> {} points, {status}",
            p.depth, p.source_count, p.target_count
        ));
    }
    for issue in &r.issues {
        out.push(format!("  {} {issue}", style.bad("issue:")));
    }
    out.join("\n") + "\n"
}

/// Collect the self-check report for a presentation: structural validation,
/// re-validation of every witness the verdict produces, and bounded shift
/// probes on the shortest cylinder bases.
pub fn validate_presentation(g: &GraphPresentation) -> ValidationReport {
    let mut issues = Vec::new();
    if let Err(e) = g.validate() {
        issues.push(e.to_string());
    }
    let verdict = crate::conditions::decide_rfd(g);
    let mut witnesses_checked = 0;
    for (label, o) in verdict.outcomes() {
        if let Some(w) = &o.witness {
            witnesses_checked += 1;
            if let Err(e) = w.validate(g) {
                issues.push(format!("witness for condition ({label}) fails: {e}"));
            }
        }
    }
    let mut homeo_probes = Vec::new();
    for v in g.sorted_vertices() {
        let start = crate::presentation::VertexRef::core(v);
        match crate::boundary::local_homeo_check(g, &start, &[], 2, 2) {
            Ok(p) => {
                if !p.bijective {
                    issues.push(format!(
                        "shift probe at {start}: {}",
                        p.violation.clone().unwrap_or_default()
                    ));
                }
                homeo_probes.push((start.to_string(), p));
            }
            Err(e) => issues.push(format!("shift probe at {start}: {e}")),
        }
    }
    ValidationReport {
        vertices: g.vertices.len(),
        arcs: g.arcs.len(),
        primitives: g.primitives.len(),
        witnesses_checked,
        homeo_probes,
        issues,
    }
}
