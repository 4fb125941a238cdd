//! Monotony of end-to-end latency: structural, global and brute-force
//! checks, conditional monotony, and counterexample synthesis.

mod global;
mod oracle;
mod preorch;
mod structural;
mod synthesis;
mod values;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

pub use global::{check_global_condition, global_condition_explains, GlobalCondition};
pub use oracle::brute_force_monotony;
pub use preorch::{InitialGrid, LatencyClass, MemberIndex, PreOrchError, PreOrchNet};
pub use structural::{structural_check, violating_clusters};
pub use synthesis::{synthesize_counterexample, verify_counterexample, Synthesis, Verification};
pub use values::{check_distinct_values, conditional_brute_force, conditional_monotony_check, DistinctValues};

use crate::net::{SoundnessWitness, TransitionIx, DEFAULT_STATE_CAP};
use crate::number::ExtDate;
use crate::timed::{ExecError, OrchNet, ShapeMismatch, TieBreak, Value};
use crate::unfolding::{InduceError, UnfoldError};

pub const DEFAULT_MEMBER_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Reachable markings explored by the soundness check.
    pub state_cap: usize,
    /// Maximal configurations enumerated.
    pub config_cap: usize,
    /// Grid members enumerated by the oracle.
    pub member_cap: usize,
    pub tie_break: TieBreak,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            state_cap: DEFAULT_STATE_CAP,
            config_cap: DEFAULT_STATE_CAP,
            member_cap: DEFAULT_MEMBER_CAP,
            tie_break: TieBreak::Lexicographic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonotonyError {
    #[error("workflow net is not sound: {0:?}")]
    Unsound(SoundnessWitness),
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
    #[error(transparent)]
    Induce(#[from] InduceError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Shape(#[from] ShapeMismatch),
    #[error("the net satisfies the cluster condition; there is nothing to synthesize")]
    NoViolation,
    #[error("no member with finite latencies at daemon index {0}")]
    NoFiniteMember(usize),
    #[error("synthesis failed: {0}")]
    SynthesisFailed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Monotonic,
    NonMonotonic,
    ConditionallyMonotonic,
    Undecided,
}

/// A cluster of the workflow net with two transitions whose postsets differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterWitness {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub t1: String,
    pub t2: String,
    pub post1: Vec<String>,
    pub post2: Vec<String>,
    #[serde(skip)]
    pub pair: (TransitionIx, TransitionIx),
    #[serde(skip)]
    pub members: Vec<TransitionIx>,
}

/// `hi >= lo` with `E(hi) < E(lo)` at `omega`.
#[derive(Debug, Clone)]
pub struct PairWitness {
    pub lo: OrchNet,
    pub hi: OrchNet,
    pub omega: usize,
    pub tie_break: TieBreak,
    pub e_lo: ExtDate,
    pub e_hi: ExtDate,
    pub v_lo: BTreeSet<Value>,
    pub v_hi: BTreeSet<Value>,
    /// Grid coordinates when both sides are members of a pre-OrchNet.
    pub lo_member: Option<Vec<(String, ExtDate)>>,
    pub hi_member: Option<Vec<(String, ExtDate)>>,
}

#[derive(Debug, Clone)]
pub struct MonotonyVerdict {
    pub outcome: Outcome,
    /// The verdict only covers the enumerated grid.
    pub grid_relative: bool,
    pub clusters: Vec<ClusterWitness>,
    pub pair: Option<PairWitness>,
    pub notes: Vec<String>,
}

impl MonotonyVerdict {
    pub fn new(outcome: Outcome) -> Self {
        MonotonyVerdict {
            outcome,
            grid_relative: false,
            clusters: Vec::new(),
            pair: None,
            notes: Vec::new(),
        }
    }

    pub fn undecided(note: impl Into<String>) -> Self {
        let mut v = MonotonyVerdict::new(Outcome::Undecided);
        v.notes.push(note.into());
        v
    }
}

#[cfg(test)]
mod tests;
