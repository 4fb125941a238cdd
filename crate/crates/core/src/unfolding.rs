//! Unfoldings of safe, loop-free nets by possible extensions, and the
//! pre-OrchNet induced on them by per-transition annotations.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::monotony::{InitialGrid, LatencyClass, PreOrchError, PreOrchNet};
use crate::net::{
    is_sound, Net, Node, OccurrenceNet, PlaceIx, SoundnessVerdict, SoundnessWitness, TransitionIx, Violation,
    WorkflowError, WorkflowNet,
};
use crate::number::ExtDate;
use crate::timed::{InitialSpec, OrchNet, OrchNetError, TransitionSpec};

pub const DEFAULT_EVENT_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnfoldError {
    #[error("not a workflow net: {0}")]
    Workflow(#[from] WorkflowError),
    #[error("workflow net is not sound: {0:?}")]
    Unsound(SoundnessWitness),
    #[error("soundness undecided: more than {0} reachable markings")]
    Undecided(usize),
    #[error("net is cyclic")]
    Cyclic,
    #[error("unfolding exceeds {0} events")]
    EventCap(usize),
    #[error("not an occurrence net: {0:?}")]
    NotOccurrence(Vec<Violation>),
}

/// Label map from an unfolding to its original net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub places: Vec<PlaceIx>,
    pub transitions: Vec<TransitionIx>,
}

impl Morphism {
    pub fn identity(net: &Net) -> Self {
        Morphism {
            places: net.places().collect(),
            transitions: net.transitions().collect(),
        }
    }

    pub fn place(&self, p: PlaceIx) -> PlaceIx {
        self.places[p.0]
    }

    pub fn transition(&self, t: TransitionIx) -> TransitionIx {
        self.transitions[t.0]
    }

    pub fn node(&self, n: Node) -> Node {
        match n {
            Node::Place(p) => Node::Place(self.place(p)),
            Node::Transition(t) => Node::Transition(self.transition(t)),
        }
    }

    /// Unfolding copies of an original transition.
    pub fn copies(&self, t: TransitionIx) -> Vec<TransitionIx> {
        (0..self.transitions.len())
            .filter(|&e| self.transitions[e] == t)
            .map(TransitionIx)
            .collect()
    }

    /// Neighbourhood bijection for every event, and a label-preserving
    /// bijection between minimal places and the initial marking.
    pub fn check_laws(&self, unfolding: &Net, original: &Net) -> Result<(), String> {
        for e in unfolding.transitions() {
            let t = self.transition(e);
            for (side, u, o) in [
                ("preset", unfolding.preset(e), original.preset(t)),
                ("postset", unfolding.postset(e), original.postset(t)),
            ] {
                let image: BTreeSet<PlaceIx> = u.iter().map(|&p| self.place(p)).collect();
                let target: BTreeSet<PlaceIx> = o.iter().copied().collect();
                if image.len() != u.len() || image != target {
                    return Err(format!(
                        "{side} of `{}` does not map bijectively onto that of `{}`",
                        unfolding.transition_id(e),
                        original.transition_id(t)
                    ));
                }
            }
        }
        let minimal: Vec<PlaceIx> = unfolding.minimal_places().iter().map(|&p| self.place(p)).collect();
        let distinct: BTreeSet<PlaceIx> = minimal.iter().copied().collect();
        if distinct.len() != minimal.len() || distinct.iter().copied().collect::<Vec<_>>() != original.initial_marking() {
            return Err("minimal places do not match the initial marking".into());
        }
        Ok(())
    }

    pub fn node_map(&self, unfolding: &Net, original: &Net) -> BTreeMap<String, String> {
        unfolding
            .nodes()
            .map(|n| (unfolding.node_id(n).to_string(), original.node_id(self.node(n)).to_string()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct UnfoldingResult {
    pub unfolding: Arc<OccurrenceNet>,
    pub morphism: Morphism,
}

impl UnfoldingResult {
    /// An occurrence net is its own unfolding.
    pub fn identity(on: OccurrenceNet) -> Self {
        let morphism = Morphism::identity(&on);
        UnfoldingResult {
            unfolding: Arc::new(on),
            morphism,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnfoldingReport {
    pub places: Vec<String>,
    pub events: Vec<EventReport>,
    pub node_map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EventReport {
    pub id: String,
    pub label: String,
    pub pre: Vec<String>,
    pub post: Vec<String>,
}

impl UnfoldingResult {
    pub fn report(&self, original: &Net) -> UnfoldingReport {
        let u = self.unfolding.net();
        let ids = |ps: &[PlaceIx]| ps.iter().map(|&p| u.place_id(p).to_string()).collect();
        UnfoldingReport {
            places: u.places().map(|p| u.place_id(p).to_string()).collect(),
            events: u
                .transitions()
                .map(|e| EventReport {
                    id: u.transition_id(e).to_string(),
                    label: original.transition_id(self.morphism.transition(e)).to_string(),
                    pre: ids(u.preset(e)),
                    post: ids(u.postset(e)),
                })
                .collect(),
            node_map: self.morphism.node_map(u, original),
        }
    }
}

fn hash12(s: &str) -> String {
    let digest = Sha256::digest(s.as_bytes());
    let mut out = String::with_capacity(12);
    for b in &digest[..6] {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

struct Condition {
    label: PlaceIx,
    producer: Option<usize>,
}

struct Event {
    label: TransitionIx,
    preset: Vec<usize>,
    postset: Vec<usize>,
    /// Events at or before this one.
    past: BTreeSet<usize>,
}

struct Builder<'a> {
    net: &'a Net,
    conditions: Vec<Condition>,
    events: Vec<Event>,
    by_label: Vec<Vec<usize>>,
}

impl Builder<'_> {
    fn past_of(&self, c: usize) -> Option<&BTreeSet<usize>> {
        self.conditions[c].producer.map(|e| &self.events[e].past)
    }

    /// `xs` is a co-set iff the union of its causal pasts is conflict free
    /// and consumes none of `xs`.
    fn is_coset(&self, xs: &[usize]) -> bool {
        let mut past = BTreeSet::new();
        for &c in xs {
            if let Some(p) = self.past_of(c) {
                past.extend(p.iter().copied());
            }
        }
        let mut consumed = HashSet::new();
        for &e in &past {
            for &c in &self.events[e].preset {
                if !consumed.insert(c) {
                    return false;
                }
            }
        }
        xs.iter().all(|c| !consumed.contains(c))
    }

    fn extend(&mut self, t: TransitionIx, cap: usize, seen: &mut HashSet<(TransitionIx, Vec<usize>)>) -> Result<bool, UnfoldError> {
        let pre = self.net.preset(t).to_vec();
        let mut found = Vec::new();
        let mut partial = Vec::with_capacity(pre.len());
        self.search(&pre, &mut partial, &mut found);
        let mut added = false;
        for xs in found {
            if !seen.insert((t, xs.clone())) {
                continue;
            }
            if self.events.len() >= cap {
                return Err(UnfoldError::EventCap(cap));
            }
            let e = self.events.len();
            let mut past: BTreeSet<usize> = BTreeSet::from([e]);
            for &c in &xs {
                if let Some(p) = self.past_of(c) {
                    past.extend(p.iter().copied());
                }
            }
            let postset: Vec<usize> = self
                .net
                .postset(t)
                .iter()
                .map(|&p| {
                    self.conditions.push(Condition {
                        label: p,
                        producer: Some(e),
                    });
                    let c = self.conditions.len() - 1;
                    self.by_label[p.0].push(c);
                    c
                })
                .collect();
            self.events.push(Event {
                label: t,
                preset: xs,
                postset,
                past,
            });
            added = true;
        }
        Ok(added)
    }

    fn search(&self, pre: &[PlaceIx], partial: &mut Vec<usize>, found: &mut Vec<Vec<usize>>) {
        if partial.len() == pre.len() {
            found.push(partial.clone());
            return;
        }
        for &c in &self.by_label[pre[partial.len()].0] {
            partial.push(c);
            if self.is_coset(partial) {
                self.search(pre, partial, found);
            }
            partial.pop();
        }
    }
}

/// Unfolds a loop-free net. Soundness is not checked here; see [`unfold`].
pub fn unfold_net(net: &Net, event_cap: usize) -> Result<UnfoldingResult, UnfoldError> {
    if !net.is_acyclic() {
        return Err(UnfoldError::Cyclic);
    }
    let mut b = Builder {
        net,
        conditions: Vec::new(),
        events: Vec::new(),
        by_label: vec![Vec::new(); net.place_count()],
    };
    for &p in net.initial_marking() {
        b.conditions.push(Condition { label: p, producer: None });
        b.by_label[p.0].push(b.conditions.len() - 1);
    }
    let mut seen = HashSet::new();
    let mut changed = true;
    while changed {
        changed = false;
        for t in net.transitions() {
            changed |= b.extend(t, event_cap, &mut seen)?;
        }
    }

    // Canonical names: full names hash label and preset; labels that occur
    // once keep the original identifier.
    let mut cond_full = vec![String::new(); b.conditions.len()];
    let mut event_full = vec![String::new(); b.events.len()];
    for (c, cond) in b.conditions.iter().enumerate() {
        if cond.producer.is_none() {
            cond_full[c] = net.place_id(cond.label).to_string();
        }
    }
    for (e, ev) in b.events.iter().enumerate() {
        let label = net.transition_id(ev.label);
        let mut pre: Vec<&str> = ev.preset.iter().map(|&c| cond_full[c].as_str()).collect();
        pre.sort();
        event_full[e] = format!("{label}#{}", hash12(&format!("{label}|{}", pre.join(","))));
        for &c in &ev.postset {
            let place = net.place_id(b.conditions[c].label);
            cond_full[c] = format!("{place}#{}", hash12(&format!("{place}|{}", event_full[e])));
        }
    }
    let mut event_label_count: HashMap<TransitionIx, usize> = HashMap::new();
    for ev in &b.events {
        *event_label_count.entry(ev.label).or_default() += 1;
    }
    let mut cond_label_count: HashMap<PlaceIx, usize> = HashMap::new();
    for c in &b.conditions {
        *cond_label_count.entry(c.label).or_default() += 1;
    }
    let cond_name: Vec<String> = b
        .conditions
        .iter()
        .enumerate()
        .map(|(c, cond)| {
            if cond_label_count[&cond.label] == 1 {
                net.place_id(cond.label).to_string()
            } else {
                cond_full[c].clone()
            }
        })
        .collect();
    let event_name: Vec<String> = b
        .events
        .iter()
        .enumerate()
        .map(|(e, ev)| {
            if event_label_count[&ev.label] == 1 {
                net.transition_id(ev.label).to_string()
            } else {
                event_full[e].clone()
            }
        })
        .collect();

    let mut nb = Net::builder();
    for (c, cond) in b.conditions.iter().enumerate() {
        nb.place(cond_name[c].clone());
        if cond.producer.is_none() {
            nb.mark(cond_name[c].clone());
        }
    }
    for (e, ev) in b.events.iter().enumerate() {
        nb.transition(
            event_name[e].clone(),
            ev.preset.iter().map(|&c| cond_name[c].clone()),
            ev.postset.iter().map(|&c| cond_name[c].clone()),
        );
    }
    let u = nb.build().expect("canonical names are unique");
    let mut places = vec![PlaceIx(0); u.place_count()];
    for (c, cond) in b.conditions.iter().enumerate() {
        places[u.find_place(&cond_name[c]).expect("built").0] = cond.label;
    }
    let mut transitions = vec![TransitionIx(0); u.transition_count()];
    for (e, ev) in b.events.iter().enumerate() {
        transitions[u.find_transition(&event_name[e]).expect("built").0] = ev.label;
    }
    let on = OccurrenceNet::new(u).map_err(UnfoldError::NotOccurrence)?;
    Ok(UnfoldingResult {
        unfolding: Arc::new(on),
        morphism: Morphism { places, transitions },
    })
}

/// Unfolds a workflow net after checking that it is sound.
pub fn unfold(wf: &WorkflowNet, state_cap: usize) -> Result<UnfoldingResult, UnfoldError> {
    match is_sound(wf, state_cap) {
        SoundnessVerdict::Sound => unfold_net(wf, DEFAULT_EVENT_CAP),
        SoundnessVerdict::Unsound { witness } => Err(UnfoldError::Unsound(witness)),
        SoundnessVerdict::Undecided { cap } => Err(UnfoldError::Undecided(cap)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetKind {
    Workflow,
    Occurrence,
}

/// A net with one spec per original transition, the equality classes of
/// latencies, and optional grids for the oracle.
#[derive(Debug, Clone)]
pub struct AnnotatedNet {
    pub kind: NetKind,
    pub net: Net,
    pub omega_count: usize,
    pub transitions: Vec<TransitionSpec>,
    /// Latency class of every transition; defaults to its own identifier.
    pub classes: Vec<String>,
    pub initial: BTreeMap<PlaceIx, InitialSpec>,
    pub class_grids: BTreeMap<String, Vec<ExtDate>>,
    pub initial_date_grids: BTreeMap<PlaceIx, Vec<ExtDate>>,
    pub upward_closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InduceError {
    #[error(transparent)]
    OrchNet(#[from] OrchNetError),
    #[error(transparent)]
    PreOrch(#[from] PreOrchError),
}

impl AnnotatedNet {
    /// Unfolding for workflow nets (soundness checked), identity for
    /// occurrence nets.
    pub fn unfold(&self, state_cap: usize) -> Result<UnfoldingResult, UnfoldError> {
        match self.kind {
            NetKind::Workflow => unfold(&WorkflowNet::new(self.net.clone())?, state_cap),
            NetKind::Occurrence => OccurrenceNet::new(self.net.clone())
                .map(UnfoldingResult::identity)
                .map_err(UnfoldError::NotOccurrence),
        }
    }

    /// Every event gets the spec of its label; minimal places take the
    /// initial spec of the place they copy.
    pub fn induced_orchnet(&self, u: &UnfoldingResult) -> Result<OrchNet, OrchNetError> {
        let un = u.unfolding.net();
        let transitions = un
            .transitions()
            .map(|e| self.transitions[u.morphism.transition(e).0].clone())
            .collect();
        let initial = un
            .minimal_places()
            .into_iter()
            .filter_map(|p| self.initial.get(&u.morphism.place(p)).map(|s| (p, s.clone())))
            .collect();
        OrchNet::new(u.unfolding.clone(), transitions, initial, self.omega_count)
    }

    pub fn class_names(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.classes.iter().collect();
        set.into_iter().cloned().collect()
    }

    pub fn class_members(&self, class: &str) -> Vec<TransitionIx> {
        self.net.transitions().filter(|t| self.classes[t.0] == class).collect()
    }

    /// All unfolding copies of one workflow transition share its class.
    pub fn induced_preorchnet(&self, u: &UnfoldingResult) -> Result<PreOrchNet, InduceError> {
        let base = self.induced_orchnet(u)?;
        let un = u.unfolding.net();
        let classes = self
            .class_names()
            .into_iter()
            .map(|name| LatencyClass {
                members: un
                    .transitions()
                    .filter(|&e| self.classes[u.morphism.transition(e).0] == name)
                    .collect(),
                grid: self.class_grids.get(&name).cloned(),
                name,
            })
            .collect();
        let initial_grids = un
            .minimal_places()
            .into_iter()
            .filter_map(|p| {
                self.initial_date_grids.get(&u.morphism.place(p)).map(|g| InitialGrid {
                    place: p,
                    grid: g.clone(),
                })
            })
            .collect();
        Ok(PreOrchNet::new(base, classes, initial_grids, self.upward_closed)?)
    }
}
