//! Place/transition nets and the structural machinery built on them.

mod cluster;
mod config;
mod relations;
mod workflow;

pub use cluster::{closure, clusters, Cluster};
pub use config::{maximal_configurations, ConfigError, Configuration};
pub use relations::{
    validate_occurrence_net, Condition, NodeRelations, OccurrenceNet, Relation, Violation,
};
pub use workflow::{
    explore_markings, is_sound, ExploreError, Marking, MarkingGraph, SoundnessVerdict,
    SoundnessWitness, WorkflowError, WorkflowNet,
};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Default bound on explored markings / configurations.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceIx(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionIx(pub usize);

/// A place or a transition. Places order before transitions; within a kind
/// the index order is the lexicographic order of identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Place(PlaceIx),
    Transition(TransitionIx),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("transition `{transition}` references undeclared place `{place}`")]
    DanglingPlace { transition: String, place: String },
    #[error("transition `{transition}` lists place `{place}` twice in its {side}")]
    RepeatedArc {
        transition: String,
        place: String,
        side: &'static str,
    },
    #[error("initial marking references undeclared place `{0}`")]
    UnknownInitialPlace(String),
    #[error("flow graph has a cycle through `{0}`")]
    Cyclic(String),
}

/// A safe Petri net `(P, T, F, M0)`.
///
/// Presets and postsets keep their declaration order, which is the argument
/// order seen by value functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    place_ids: Vec<String>,
    transition_ids: Vec<String>,
    pre: Vec<Vec<PlaceIx>>,
    post: Vec<Vec<PlaceIx>>,
    producers: Vec<Vec<TransitionIx>>,
    consumers: Vec<Vec<TransitionIx>>,
    initial: Vec<PlaceIx>,
    place_index: HashMap<String, PlaceIx>,
    transition_index: HashMap<String, TransitionIx>,
}

#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<(String, Vec<String>, Vec<String>)>,
    initial: Vec<String>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, id: impl Into<String>) -> &mut Self {
        self.places.push(id.into());
        self
    }

    pub fn marked_place(&mut self, id: impl Into<String>) -> &mut Self {
        let id = id.into();
        self.initial.push(id.clone());
        self.places.push(id);
        self
    }

    pub fn mark(&mut self, id: impl Into<String>) -> &mut Self {
        self.initial.push(id.into());
        self
    }

    pub fn transition<S: Into<String>>(
        &mut self,
        id: impl Into<String>,
        pre: impl IntoIterator<Item = S>,
        post: impl IntoIterator<Item = S>,
    ) -> &mut Self {
        self.transitions.push((
            id.into(),
            pre.into_iter().map(Into::into).collect(),
            post.into_iter().map(Into::into).collect(),
        ));
        self
    }

    pub fn build(&self) -> Result<Net, NetError> {
        let mut place_ids = self.places.clone();
        place_ids.sort();
        let mut transitions = self.transitions.clone();
        transitions.sort_by(|a, b| a.0.cmp(&b.0));

        let mut seen = BTreeSet::new();
        for id in place_ids.iter().chain(transitions.iter().map(|t| &t.0)) {
            if !seen.insert(id.as_str()) {
                return Err(NetError::DuplicateId(id.clone()));
            }
        }
        let place_index: HashMap<String, PlaceIx> = place_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), PlaceIx(i)))
            .collect();

        let mut pre = Vec::with_capacity(transitions.len());
        let mut post = Vec::with_capacity(transitions.len());
        let mut producers = vec![Vec::new(); place_ids.len()];
        let mut consumers = vec![Vec::new(); place_ids.len()];
        for (ti, (tid, tpre, tpost)) in transitions.iter().enumerate() {
            let resolve = |ids: &[String], side: &'static str| {
                let mut out = Vec::with_capacity(ids.len());
                for pid in ids {
                    let p = *place_index.get(pid).ok_or_else(|| NetError::DanglingPlace {
                        transition: tid.clone(),
                        place: pid.clone(),
                    })?;
                    if out.contains(&p) {
                        return Err(NetError::RepeatedArc {
                            transition: tid.clone(),
                            place: pid.clone(),
                            side,
                        });
                    }
                    out.push(p);
                }
                Ok(out)
            };
            let tp = resolve(tpre, "preset")?;
            let tq = resolve(tpost, "postset")?;
            for p in &tp {
                consumers[p.0].push(TransitionIx(ti));
            }
            for p in &tq {
                producers[p.0].push(TransitionIx(ti));
            }
            pre.push(tp);
            post.push(tq);
        }

        let mut initial = Vec::new();
        for id in &self.initial {
            let p = *place_index
                .get(id)
                .ok_or_else(|| NetError::UnknownInitialPlace(id.clone()))?;
            if !initial.contains(&p) {
                initial.push(p);
            }
        }
        initial.sort();

        let transition_ids: Vec<String> = transitions.into_iter().map(|t| t.0).collect();
        let transition_index = transition_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), TransitionIx(i)))
            .collect();
        Ok(Net {
            place_ids,
            transition_ids,
            pre,
            post,
            producers,
            consumers,
            initial,
            place_index,
            transition_index,
        })
    }
}

impl Net {
    pub fn builder() -> NetBuilder {
        NetBuilder::new()
    }

    pub fn place_count(&self) -> usize {
        self.place_ids.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transition_ids.len()
    }

    pub fn node_count(&self) -> usize {
        self.place_count() + self.transition_count()
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceIx> + '_ {
        (0..self.place_ids.len()).map(PlaceIx)
    }

    pub fn transitions(&self) -> impl Iterator<Item = TransitionIx> + '_ {
        (0..self.transition_ids.len()).map(TransitionIx)
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.places()
            .map(Node::Place)
            .chain(self.transitions().map(Node::Transition))
    }

    pub fn place_id(&self, p: PlaceIx) -> &str {
        &self.place_ids[p.0]
    }

    pub fn transition_id(&self, t: TransitionIx) -> &str {
        &self.transition_ids[t.0]
    }

    pub fn node_id(&self, n: Node) -> &str {
        match n {
            Node::Place(p) => self.place_id(p),
            Node::Transition(t) => self.transition_id(t),
        }
    }

    pub fn find_place(&self, id: &str) -> Option<PlaceIx> {
        self.place_index.get(id).copied()
    }

    pub fn find_transition(&self, id: &str) -> Option<TransitionIx> {
        self.transition_index.get(id).copied()
    }

    pub fn find_node(&self, id: &str) -> Option<Node> {
        self.find_place(id)
            .map(Node::Place)
            .or_else(|| self.find_transition(id).map(Node::Transition))
    }

    pub fn preset(&self, t: TransitionIx) -> &[PlaceIx] {
        &self.pre[t.0]
    }

    pub fn postset(&self, t: TransitionIx) -> &[PlaceIx] {
        &self.post[t.0]
    }

    /// Transitions producing into `p`.
    pub fn producers(&self, p: PlaceIx) -> &[TransitionIx] {
        &self.producers[p.0]
    }

    /// Transitions consuming from `p`.
    pub fn consumers(&self, p: PlaceIx) -> &[TransitionIx] {
        &self.consumers[p.0]
    }

    pub fn initial_marking(&self) -> &[PlaceIx] {
        &self.initial
    }

    pub fn is_initially_marked(&self, p: PlaceIx) -> bool {
        self.initial.binary_search(&p).is_ok()
    }

    pub fn sorted_postset(&self, t: TransitionIx) -> Vec<PlaceIx> {
        let mut v = self.post[t.0].clone();
        v.sort();
        v
    }

    /// Flat index: places first, then transitions.
    pub fn flat(&self, n: Node) -> usize {
        match n {
            Node::Place(p) => p.0,
            Node::Transition(t) => self.place_count() + t.0,
        }
    }

    pub fn unflat(&self, i: usize) -> Node {
        if i < self.place_count() {
            Node::Place(PlaceIx(i))
        } else {
            Node::Transition(TransitionIx(i - self.place_count()))
        }
    }

    /// Direct successors in the flow graph.
    pub fn successors(&self, n: Node) -> Vec<Node> {
        match n {
            Node::Place(p) => self.consumers(p).iter().map(|&t| Node::Transition(t)).collect(),
            Node::Transition(t) => self.postset(t).iter().map(|&p| Node::Place(p)).collect(),
        }
    }

    pub fn predecessors(&self, n: Node) -> Vec<Node> {
        match n {
            Node::Place(p) => self.producers(p).iter().map(|&t| Node::Transition(t)).collect(),
            Node::Transition(t) => self.preset(t).iter().map(|&p| Node::Place(p)).collect(),
        }
    }

    /// Topological order of all nodes (Kahn, smallest node first), or the
    /// first node found on a cycle.
    pub fn topological_order(&self) -> Result<Vec<Node>, Node> {
        let n = self.node_count();
        let mut indeg = vec![0usize; n];
        for node in self.nodes() {
            indeg[self.flat(node)] = self.predecessors(node).len();
        }
        let mut ready: BTreeSet<Node> = self.nodes().filter(|&x| indeg[self.flat(x)] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(x) = ready.pop_first() {
            order.push(x);
            for y in self.successors(x) {
                let k = self.flat(y);
                indeg[k] -= 1;
                if indeg[k] == 0 {
                    ready.insert(y);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            let stuck = self.nodes().find(|&x| indeg[self.flat(x)] > 0).expect("cycle node");
            Err(stuck)
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    /// Places with no producer.
    pub fn minimal_places(&self) -> Vec<PlaceIx> {
        self.places().filter(|&p| self.producers(p).is_empty()).collect()
    }

    /// Places with no consumer.
    pub fn maximal_places(&self) -> Vec<PlaceIx> {
        self.places().filter(|&p| self.consumers(p).is_empty()).collect()
    }

    /// Sub-net on `keep`, with `marked` as its initial marking. Arcs to dropped
    /// places disappear; callers keep transitions together with their
    /// neighbourhoods when that matters.
    pub fn restrict(&self, keep: &BTreeSet<Node>, marked: &BTreeSet<PlaceIx>) -> Net {
        let mut b = NetBuilder::new();
        for &n in keep {
            match n {
                Node::Place(p) => {
                    b.place(self.place_id(p));
                }
                Node::Transition(t) => {
                    let side = |ps: &[PlaceIx]| -> Vec<String> {
                        ps.iter()
                            .filter(|p| keep.contains(&Node::Place(**p)))
                            .map(|&p| self.place_id(p).to_string())
                            .collect()
                    };
                    b.transition(self.transition_id(t), side(self.preset(t)), side(self.postset(t)));
                }
            }
        }
        for &p in marked {
            b.mark(self.place_id(p));
        }
        b.build().expect("restriction of a valid net is valid")
    }

    /// Identifier-level rendering of presets and postsets, handy for
    /// comparing nets independent of index layout.
    pub fn shape(&self) -> BTreeMap<String, (Vec<String>, Vec<String>)> {
        self.transitions()
            .map(|t| {
                let ids = |ps: &[PlaceIx]| ps.iter().map(|&p| self.place_id(p).to_string()).collect();
                (
                    self.transition_id(t).to_string(),
                    (ids(self.preset(t)), ids(self.postset(t))),
                )
            })
            .collect()
    }
}

impl fmt::Display for Net {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.transitions() {
            let ids = |ps: &[PlaceIx]| {
                ps.iter().map(|&p| self.place_id(p)).collect::<Vec<_>>().join(",")
            };
            writeln!(
                f,
                "{{{}}} -{}-> {{{}}}",
                ids(self.preset(t)),
                self.transition_id(t),
                ids(self.postset(t))
            )?;
        }
        Ok(())
    }
}
