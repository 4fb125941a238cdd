//! Clusters: minimal node sets closed under `t -> pre(t)` and `p -> post(p)`.
//!
//! Both closure rules follow consumption arcs, in opposite directions, so the
//! closure of any node is its connected component over place-to-transition
//! arcs. Components are disjoint, hence each one is minimal.

use std::collections::BTreeSet;


use super::{Net, Node, PlaceIx, TransitionIx};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cluster {
    pub places: BTreeSet<PlaceIx>,
    pub transitions: BTreeSet<TransitionIx>,
}

impl Cluster {
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

    /// Checks the closure condition against `net`.
    pub fn is_closed(&self, net: &Net) -> bool {
        self.transitions
            .iter()
            .all(|&t| net.preset(t).iter().all(|p| self.places.contains(p)))
            && self
                .places
                .iter()
                .all(|&p| net.consumers(p).iter().all(|t| self.transitions.contains(t)))
    }

    pub fn ids(&self, net: &Net) -> Vec<String> {
        self.nodes().map(|n| net.node_id(n).to_string()).collect()
    }
}

/// The smallest closed set containing `seed`.
pub fn closure(net: &Net, seed: Node) -> Cluster {
    let mut c = Cluster {
        places: BTreeSet::new(),
        transitions: BTreeSet::new(),
    };
    let mut stack = vec![seed];
    while let Some(n) = stack.pop() {
        match n {
            Node::Place(p) => {
                if c.places.insert(p) {
                    stack.extend(net.consumers(p).iter().map(|&t| Node::Transition(t)));
                }
            }
            Node::Transition(t) => {
                if c.transitions.insert(t) {
                    stack.extend(net.preset(t).iter().map(|&p| Node::Place(p)));
                }
            }
        }
    }
    c
}

/// All clusters that contain at least one transition, ordered by their
/// smallest transition. Consumer-free places form transitionless singleton
/// clusters, which are left out.
pub fn clusters(net: &Net) -> Vec<Cluster> {
    let mut covered = BTreeSet::new();
    let mut out = Vec::new();
    for t in net.transitions() {
        if covered.contains(&t) {
            continue;
        }
        let c = closure(net, Node::Transition(t));
        covered.extend(c.transitions.iter().copied());
        out.push(c);
    }
    out
}
