//! Timed occurrence-net models of service orchestrations.
//!
//! Orchestrations are modelled as occurrence nets whose tokens carry a value
//! and a date. Transitions race: among enabled conflicting transitions the
//! one with the earliest completion date fires. On top of that semantics the
//! crate decides whether end-to-end latency is monotonic in the latencies of
//! the called services, both structurally and by exhaustive search, and
//! synthesizes replayable counterexamples when it is not.

pub mod net;
pub mod number;
pub mod unfolding;
pub mod timed;
pub mod monotony;
pub mod io;

pub use number::{ExtDate, Rational};
