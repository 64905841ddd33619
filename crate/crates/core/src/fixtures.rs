//! Named example presentations used across tests, docs and the CLI examples.
//!
//! The first four each violate exactly one of the four structural conditions,
//! in order; the rest exercise single concepts (sinks, loops, ω families,
//! path counting).

use crate::presentation::GraphPresentation;

/// Fails only the no-infinite-receiver condition (an instar feeds `v`).
pub const RECEIVER: &str = include_str!("../fixtures/receiver.graph");
/// Fails only the no-cycle-with-exit condition (edge `d1` leaves the 4-cycle).
pub const CYCLE_EXIT: &str = include_str!("../fixtures/cycle_exit.graph");
/// Fails only the no-infinite-backward-chain condition (a backray into `v`).
pub const BACKWARD_CHAIN: &str = include_str!("../fixtures/backward_chain.graph");
/// Fails only the reaches-terminal condition (a fwdray strands every vertex).
pub const STRANDED: &str = include_str!("../fixtures/stranded.graph");
/// A single vertex with no edges; satisfies everything.
pub const SINK: &str = include_str!("../fixtures/sink.graph");
/// A single loop with no exit; satisfies everything.
pub const LOOP: &str = include_str!("../fixtures/loop.graph");
/// A multiplicity-2 loop: the second copy exits the first.
pub const DOUBLE_LOOP: &str = include_str!("../fixtures/double_loop.graph");
/// One ω-arc `u -> v`: `v` is an infinite receiver, `u` an infinite emitter.
pub const OMEGA_IN: &str = include_str!("../fixtures/omega_in.graph");
/// An ω-loop: fails the receiver, cycle-exit and backward-chain conditions.
pub const OMEGA_LOOP: &str = include_str!("../fixtures/omega_loop.graph");
/// Small acyclic multigraph with five paths into `w`.
pub const DIAMOND: &str = include_str!("../fixtures/diamond.graph");

fn must(text: &str) -> GraphPresentation {
    GraphPresentation::parse(text).expect("fixture parses")
}

pub fn receiver() -> GraphPresentation {
    must(RECEIVER)
}

pub fn cycle_exit() -> GraphPresentation {
    must(CYCLE_EXIT)
}

pub fn backward_chain() -> GraphPresentation {
    must(BACKWARD_CHAIN)
}

pub fn stranded() -> GraphPresentation {
    must(STRANDED)
}

pub fn sink() -> GraphPresentation {
    must(SINK)
}

pub fn single_loop() -> GraphPresentation {
    must(LOOP)
}

pub fn double_loop() -> GraphPresentation {
    must(DOUBLE_LOOP)
}

pub fn omega_in() -> GraphPresentation {
    must(OMEGA_IN)
}

pub fn omega_loop() -> GraphPresentation {
    must(OMEGA_LOOP)
}

pub fn diamond() -> GraphPresentation {
    must(DIAMOND)
}
