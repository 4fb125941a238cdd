//! Workflow nets and their soundness by exhaustive reachability.
//!
//! Workflow nets here are loop-free, so the marking graph is finite and
//! acyclic. Exploration is still bounded by a configurable cap and reports
//! `Undecided` rather than passing silently when the cap is hit.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::ops::Deref;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use super::{Net, NetError, PlaceIx, TransitionIx};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("expected exactly one source place (no producers), found {0:?}")]
    Source(Vec<String>),
    #[error("expected exactly one sink place (no consumers), found {0:?}")]
    Sink(Vec<String>),
    #[error("initial marking must be exactly the source place `{0}`")]
    InitialMarking(String),
    #[error("transition `{0}` has an empty preset or postset")]
    EmptyNeighbourhood(String),
}

/// A loop-free net with a unique source `i` and unique sink `o`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowNet {
    net: Net,
    source: PlaceIx,
    sink: PlaceIx,
}

impl WorkflowNet {
    pub fn new(net: Net) -> Result<Self, WorkflowError> {
        if let Err(n) = net.topological_order() {
            return Err(NetError::Cyclic(net.node_id(n).to_string()).into());
        }
        let ids = |ps: Vec<PlaceIx>| ps.into_iter().map(|p| net.place_id(p).to_string()).collect();
        let sources = net.minimal_places();
        if sources.len() != 1 {
            return Err(WorkflowError::Source(ids(sources)));
        }
        let sinks = net.maximal_places();
        if sinks.len() != 1 {
            return Err(WorkflowError::Sink(ids(sinks)));
        }
        let (source, sink) = (sources[0], sinks[0]);
        if net.initial_marking() != [source] {
            return Err(WorkflowError::InitialMarking(net.place_id(source).to_string()));
        }
        if let Some(t) = net
            .transitions()
            .find(|&t| net.preset(t).is_empty() || net.postset(t).is_empty())
        {
            return Err(WorkflowError::EmptyNeighbourhood(net.transition_id(t).to_string()));
        }
        Ok(WorkflowNet { net, source, sink })
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn source(&self) -> PlaceIx {
        self.source
    }

    pub fn sink(&self) -> PlaceIx {
        self.sink
    }
}

impl Deref for WorkflowNet {
    type Target = Net;

    fn deref(&self) -> &Net {
        &self.net
    }
}

/// A safe marking as a set of places.
pub type Marking = FixedBitSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("net is not 1-safe: firing `{transition}` at {marking:?} puts a second token on a place")]
    Unsafe {
        marking: Vec<String>,
        transition: String,
    },
    #[error("marking graph exceeds {0} markings")]
    CapExceeded(usize),
}

/// The reachable marking graph. Marking 0 is the initial marking.
#[derive(Debug, Clone)]
pub struct MarkingGraph {
    pub markings: Vec<Marking>,
    pub edges: Vec<Vec<(TransitionIx, usize)>>,
}

impl MarkingGraph {
    pub fn marking_ids(&self, net: &Net, m: usize) -> Vec<String> {
        self.markings[m]
            .ones()
            .map(|i| net.place_id(PlaceIx(i)).to_string())
            .collect()
    }

    pub fn marking_sets(&self) -> BTreeSet<Vec<usize>> {
        self.markings.iter().map(|m| m.ones().collect()).collect()
    }
}

/// Breadth-first exploration of the markings reachable from the initial
/// marking, failing on the first unsafe firing.
pub fn explore_markings(net: &Net, cap: usize) -> Result<MarkingGraph, ExploreError> {
    let mut m0 = FixedBitSet::with_capacity(net.place_count());
    for p in net.initial_marking() {
        m0.insert(p.0);
    }
    let mut index: HashMap<Marking, usize> = HashMap::new();
    let mut graph = MarkingGraph {
        markings: vec![m0.clone()],
        edges: vec![Vec::new()],
    };
    index.insert(m0, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        let m = graph.markings[k].clone();
        for t in net.transitions() {
            if !net.preset(t).iter().all(|p| m.contains(p.0)) {
                continue;
            }
            let mut next = m.clone();
            for p in net.preset(t) {
                next.set(p.0, false);
            }
            for p in net.postset(t) {
                if next.put(p.0) {
                    return Err(ExploreError::Unsafe {
                        marking: m.ones().map(|i| net.place_id(PlaceIx(i)).to_string()).collect(),
                        transition: net.transition_id(t).to_string(),
                    });
                }
            }
            let target = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if graph.markings.len() >= cap {
                        return Err(ExploreError::CapExceeded(cap));
                    }
                    let j = graph.markings.len();
                    graph.markings.push(next.clone());
                    graph.edges.push(Vec::new());
                    index.insert(next, j);
                    queue.push_back(j);
                    j
                }
            };
            graph.edges[k].push((t, target));
        }
    }
    Ok(graph)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SoundnessWitness {
    /// A reachable marking from which `{o}` cannot be reached.
    CannotComplete { marking: Vec<String> },
    /// A reachable marking with `o` and something else.
    UncleanCompletion { marking: Vec<String> },
    /// A transition that fires on no path.
    DeadTransition { transition: String },
    /// Some firing double-marks a place.
    NotSafe {
        marking: Vec<String>,
        transition: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SoundnessVerdict {
    Sound,
    Unsound { witness: SoundnessWitness },
    Undecided { cap: usize },
}

impl SoundnessVerdict {
    pub fn is_sound(&self) -> bool {
        matches!(self, SoundnessVerdict::Sound)
    }
}

pub fn is_sound(wf: &WorkflowNet, cap: usize) -> SoundnessVerdict {
    let graph = match explore_markings(wf, cap) {
        Ok(g) => g,
        Err(ExploreError::CapExceeded(cap)) => return SoundnessVerdict::Undecided { cap },
        Err(ExploreError::Unsafe { marking, transition }) => {
            return SoundnessVerdict::Unsound {
                witness: SoundnessWitness::NotSafe { marking, transition },
            }
        }
    };
    let sink = wf.sink().0;
    let n = graph.markings.len();

    for k in 0..n {
        let m = &graph.markings[k];
        if m.contains(sink) && m.count_ones(..) > 1 {
            return SoundnessVerdict::Unsound {
                witness: SoundnessWitness::UncleanCompletion {
                    marking: graph.marking_ids(wf, k),
                },
            };
        }
    }

    // Backward reachability from {o} over reversed edges.
    let mut reverse = vec![Vec::new(); n];
    for (k, es) in graph.edges.iter().enumerate() {
        for &(_, j) in es {
            reverse[j].push(k);
        }
    }
    let mut can_finish = vec![false; n];
    let mut stack: Vec<usize> = (0..n)
        .filter(|&k| graph.markings[k].contains(sink) && graph.markings[k].count_ones(..) == 1)
        .collect();
    while let Some(k) = stack.pop() {
        if std::mem::replace(&mut can_finish[k], true) {
            continue;
        }
        stack.extend(reverse[k].iter().copied());
    }
    if let Some(k) = (0..n).find(|&k| !can_finish[k]) {
        return SoundnessVerdict::Unsound {
            witness: SoundnessWitness::CannotComplete {
                marking: graph.marking_ids(wf, k),
            },
        };
    }

    let mut fired = vec![false; wf.transition_count()];
    for es in &graph.edges {
        for &(t, _) in es {
            fired[t.0] = true;
        }
    }
    if let Some(t) = wf.transitions().find(|t| !fired[t.0]) {
        return SoundnessVerdict::Unsound {
            witness: SoundnessWitness::DeadTransition {
                transition: wf.transition_id(t).to_string(),
            },
        };
    }
    SoundnessVerdict::Sound
}
