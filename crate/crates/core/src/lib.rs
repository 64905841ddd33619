//! Decide whether the C*-algebra of a directed graph is residually
//! finite-dimensional (RFD), for graphs given by a finite presentation that
//! may denote countably infinite graphs.
//!
//! The verdict comes from four structural conditions on the graph — no
//! infinite receiver, no cycle with an exit, no infinite backward chain,
//! and every vertex reaches a terminal (sink, cycle, or infinite emitter).
//! Each failing condition is reported with a machine-checkable witness.
//! An independent cross-check runs in the dynamical model: the graph is RFD
//! exactly when periodic points are dense in its boundary path space, and
//! [`groupoid::periodic_density_check`] verifies that cylinder by cylinder.

pub mod boundary;
pub mod cli;
pub mod conditions;
pub mod dot;
pub mod fixtures;
pub mod groupoid;
pub mod notation;
pub mod oracle;
pub mod presentation;
pub mod report;

pub use presentation::{EdgeRef, ExtNat, GraphPresentation, VertexRef};
