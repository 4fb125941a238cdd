//! Configurations: causally closed, conflict-free node sets.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use super::{Net, Node, OccurrenceNet, PlaceIx, TransitionIx};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("more than {0} maximal configurations")]
    CapExceeded(usize),
    #[error("node set is not causally closed (missing cause of `{0}`)")]
    NotCausallyClosed(String),
    #[error("node set contains conflicting nodes `{0}` and `{1}`")]
    NotConflictFree(String, String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub transitions: BTreeSet<TransitionIx>,
    pub places: BTreeSet<PlaceIx>,
}

impl Configuration {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The configuration generated by a causally closed transition set:
    /// all minimal places plus every postset.
    pub fn from_transitions(net: &Net, ts: impl IntoIterator<Item = TransitionIx>) -> Self {
        let transitions: BTreeSet<TransitionIx> = ts.into_iter().collect();
        let mut places: BTreeSet<PlaceIx> = net.minimal_places().into_iter().collect();
        for &t in &transitions {
            places.extend(net.postset(t).iter().copied());
        }
        Configuration { transitions, places }
    }

    pub fn from_nodes(nodes: impl IntoIterator<Item = Node>) -> Self {
        let mut c = Configuration::empty();
        for n in nodes {
            c.insert(n);
        }
        c
    }

    pub fn insert(&mut self, n: Node) {
        match n {
            Node::Place(p) => {
                self.places.insert(p);
            }
            Node::Transition(t) => {
                self.transitions.insert(t);
            }
        }
    }

    pub fn contains(&self, n: Node) -> bool {
        match n {
            Node::Place(p) => self.places.contains(&p),
            Node::Transition(t) => self.transitions.contains(&t),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.places
            .iter()
            .map(|&p| Node::Place(p))
            .chain(self.transitions.iter().map(|&t| Node::Transition(t)))
    }

    pub fn len(&self) -> usize {
        self.places.len() + self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// First violation of causal closure or conflict freedom, if any.
    pub fn check(&self, on: &OccurrenceNet) -> Result<(), ConfigError> {
        let rel = on.relations();
        for x in self.nodes() {
            for y in on.predecessors(x) {
                if !self.contains(y) {
                    return Err(ConfigError::NotCausallyClosed(on.node_id(x).to_string()));
                }
            }
        }
        let ts: Vec<_> = self.transitions.iter().copied().collect();
        for (i, &t) in ts.iter().enumerate() {
            for &u in &ts[i + 1..] {
                if rel.directly_conflict(t, u) {
                    return Err(ConfigError::NotConflictFree(
                        on.transition_id(t).to_string(),
                        on.transition_id(u).to_string(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_configuration(&self, on: &OccurrenceNet) -> bool {
        self.check(on).is_ok()
    }

    /// Places of the configuration not consumed inside it.
    pub fn cut(&self, net: &Net) -> BTreeSet<PlaceIx> {
        let mut cut = self.places.clone();
        for &t in &self.transitions {
            for p in net.preset(t) {
                cut.remove(p);
            }
        }
        cut
    }

    /// Transitions of the configuration with no transition after them inside it.
    pub fn max_transitions(&self, net: &Net) -> Vec<TransitionIx> {
        self.transitions
            .iter()
            .copied()
            .filter(|&t| {
                !net.postset(t).iter().any(|&p| {
                    net.consumers(p).iter().any(|u| self.transitions.contains(u))
                })
            })
            .collect()
    }

    /// Maximal w.r.t. inclusion: nothing can be added.
    pub fn is_maximal(&self, on: &OccurrenceNet) -> bool {
        if on.minimal_places().iter().any(|p| !self.places.contains(p)) {
            return false;
        }
        let cut = self.cut(on);
        !on.transitions()
            .any(|t| !self.transitions.contains(&t) && on.preset(t).iter().all(|p| cut.contains(p)))
    }

    pub fn transition_ids(&self, net: &Net) -> Vec<String> {
        self.transitions.iter().map(|&t| net.transition_id(t).to_string()).collect()
    }

    pub fn node_ids(&self, net: &Net) -> Vec<String> {
        self.nodes().map(|n| net.node_id(n).to_string()).collect()
    }
}

/// Enumerates every maximal configuration, in canonical (sorted) order.
///
/// Search branches on the smallest enabled, not yet excluded transition:
/// either it fires, or it is excluded for good. A leaf is kept only if no
/// excluded transition is still enabled there, so every maximal configuration
/// is produced exactly once.
pub fn maximal_configurations(
    on: &OccurrenceNet,
    cap: usize,
) -> Result<Vec<Configuration>, ConfigError> {
    let mut marked = FixedBitSet::with_capacity(on.place_count());
    for p in on.minimal_places() {
        marked.insert(p.0);
    }
    let mut search = Search {
        on,
        cap,
        out: Vec::new(),
        fired: Vec::new(),
    };
    let excluded = FixedBitSet::with_capacity(on.transition_count());
    search.go(marked, excluded)?;
    let mut out = search.out;
    out.sort();
    Ok(out)
}

struct Search<'a> {
    on: &'a OccurrenceNet,
    cap: usize,
    out: Vec<Configuration>,
    fired: Vec<TransitionIx>,
}

impl Search<'_> {
    fn enabled(&self, marked: &FixedBitSet, t: TransitionIx) -> bool {
        self.on.preset(t).iter().all(|p| marked.contains(p.0))
    }

    fn go(&mut self, marked: FixedBitSet, excluded: FixedBitSet) -> Result<(), ConfigError> {
        let on = self.on;
        let next = on
            .transitions()
            .find(|&t| !self.fired.contains(&t) && !excluded.contains(t.0) && self.enabled(&marked, t));
        let Some(t) = next else {
            let dangling = excluded.ones().any(|i| self.enabled(&marked, TransitionIx(i)));
            if !dangling {
                if self.out.len() >= self.cap {
                    return Err(ConfigError::CapExceeded(self.cap));
                }
                self.out.push(Configuration::from_transitions(on, self.fired.iter().copied()));
            }
            return Ok(());
        };

        let mut fired_marking = marked.clone();
        for p in on.preset(t) {
            fired_marking.set(p.0, false);
        }
        for p in on.postset(t) {
            fired_marking.insert(p.0);
        }
        self.fired.push(t);
        self.go(fired_marking, excluded.clone())?;
        self.fired.pop();

        // Excluding t only pays off if something else can consume its preset.
        if on.relations().direct_conflicts(t).next().is_some() {
            let mut ex = excluded;
            ex.insert(t.0);
            self.go(marked, ex)?;
        }
        Ok(())
    }
}
