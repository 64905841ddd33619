//! Python bindings: a thin class around the presentation plus the main
//! verdict/dynamics entry points. Structured results cross the boundary as
//! JSON strings (the same documents the CLI emits), keeping the FFI surface
//! small and the Python side free to `json.loads` them.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rfdgraph::conditions::decide_rfd;
use rfdgraph::dot::dot_export;
use rfdgraph::groupoid::{
    isotropy, isotropy_generator, orbit, periodic_density_check, DensityParams,
};
use rfdgraph::notation::{parse_point, parse_vertex};
use rfdgraph::oracle::{desk_spec, expand, random_presentation};
use rfdgraph::report;
use rfdgraph::GraphPresentation;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A finitely presented (possibly countably infinite) directed graph.
#[pyclass(frozen)]
struct Presentation {
    inner: GraphPresentation,
}

#[pymethods]
impl Presentation {
    /// Parse the presentation language (vertex/edge/instar/outstar/
    /// backray/fwdray lines).
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = GraphPresentation::parse(text).map_err(value_err)?;
        inner.validate().map_err(value_err)?;
        Ok(Presentation { inner })
    }

    /// Canonical text form; `parse(p.serialize())` reproduces `p`.
    fn serialize(&self) -> String {
        self.inner.serialize()
    }

    fn vertices(&self) -> Vec<String> {
        self.inner.sorted_vertices()
    }

    fn arcs(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.inner.arcs.iter().map(|a| a.id.clone()).collect();
        ids.sort();
        ids
    }

    /// `(kind, tag, anchor)` per infinite family, sorted by tag.
    fn primitives(&self) -> Vec<(String, String, String)> {
        let mut out: Vec<(String, String, String)> = self
            .inner
            .primitives
            .iter()
            .map(|p| (p.kind.keyword().to_string(), p.tag.clone(), p.anchor.clone()))
            .collect();
        out.sort_by(|a, b| a.1.cmp(&b.1));
        out
    }

    /// Out-degree of a vertex (core `v` or derived `tag(i)`): a number, or
    /// `"omega"` for infinite emitters.
    fn out_degree(&self, vertex: &str) -> PyResult<String> {
        let v = parse_vertex(&self.inner, vertex).map_err(value_err)?;
        Ok(self.inner.out_degree(&v).map_err(value_err)?.to_string())
    }

    fn in_degree(&self, vertex: &str) -> PyResult<String> {
        let v = parse_vertex(&self.inner, vertex).map_err(value_err)?;
        Ok(self.inner.in_degree(&v).map_err(value_err)?.to_string())
    }

    /// The verdict: does every condition hold?
    fn is_rfd(&self) -> bool {
        decide_rfd(&self.inner).rfd
    }

    /// Full condition report as a JSON document.
    fn check_json(&self) -> String {
        report::to_pretty(&report::conditions_json(&decide_rfd(&self.inner)))
    }

    /// Density-of-periodic-points report as a JSON document.
    #[pyo3(signature = (stem_bound=4, exclusion_bound=3, orbit_cap=64))]
    fn density_json(
        &self,
        stem_bound: usize,
        exclusion_bound: usize,
        orbit_cap: usize,
    ) -> PyResult<String> {
        let params = DensityParams {
            stem_bound,
            exclusion_bound,
            orbit_cap,
        };
        let r = periodic_density_check(&self.inner, params).map_err(value_err)?;
        Ok(report::to_pretty(&report::density_json(&r)))
    }

    #[pyo3(signature = (stem_bound=4, exclusion_bound=3, orbit_cap=64))]
    fn is_dense(
        &self,
        stem_bound: usize,
        exclusion_bound: usize,
        orbit_cap: usize,
    ) -> PyResult<bool> {
        let params = DensityParams {
            stem_bound,
            exclusion_bound,
            orbit_cap,
        };
        Ok(periodic_density_check(&self.inner, params)
            .map_err(value_err)?
            .is_dense())
    }

    /// Orbit of a boundary point (report notation) as a JSON document.
    #[pyo3(signature = (point, orbit_cap=64))]
    fn orbit_json(&self, point: &str, orbit_cap: usize) -> PyResult<String> {
        let p = parse_point(&self.inner, point).map_err(value_err)?;
        p.validate(&self.inner).map_err(value_err)?;
        let r = orbit(&self.inner, &p, orbit_cap).map_err(value_err)?;
        Ok(report::to_pretty(&report::orbit_json(&p, &r)))
    }

    /// Isotropy group of a boundary point as a JSON document.
    fn isotropy_json(&self, point: &str) -> PyResult<String> {
        let p = parse_point(&self.inner, point).map_err(value_err)?;
        p.validate(&self.inner).map_err(value_err)?;
        let iso = isotropy(&p);
        let gen = isotropy_generator(&p);
        Ok(report::to_pretty(&report::isotropy_report_json(
            &p,
            &iso,
            gen.as_ref(),
        )))
    }

    /// Finite truncation of the graph at `bound` as a JSON document.
    #[pyo3(signature = (bound=8))]
    fn expand_json(&self, bound: u64) -> PyResult<String> {
        if bound == 0 {
            return Err(value_err("bound must be at least 1"));
        }
        Ok(report::to_pretty(&report::expansion_json(&expand(
            &self.inner,
            bound,
        ))))
    }

    /// DOT rendering; pass `with_witnesses=True` to highlight the failing
    /// conditions' edges.
    #[pyo3(signature = (with_witnesses=false))]
    fn dot(&self, with_witnesses: bool) -> String {
        if with_witnesses {
            let r = decide_rfd(&self.inner);
            dot_export(&self.inner, &r.witnesses())
        } else {
            dot_export(&self.inner, &[])
        }
    }

    /// Self-check (well-formedness, witness re-validation, shift probes)
    /// as a JSON document.
    fn validate_json(&self) -> String {
        report::to_pretty(&report::validation_json(&report::validate_presentation(
            &self.inner,
        )))
    }

    fn __repr__(&self) -> String {
        format!(
            "Presentation(vertices={}, arcs={}, primitives={})",
            self.inner.vertices.len(),
            self.inner.arcs.len(),
            self.inner.primitives.len()
        )
    }

    fn __str__(&self) -> String {
        self.inner.serialize()
    }
}

/// Text of the pinned pseudorandom presentation for a seed (the same corpus
/// the test suite sweeps).
#[pyfunction]
fn random_presentation_text(seed: u64) -> String {
    random_presentation(&desk_spec(seed)).serialize()
}

#[pymodule]
fn rfdgraph_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Presentation>()?;
    m.add_function(wrap_pyfunction!(random_presentation_text, m)?)?;
    Ok(())
}
