//! Causality, conflict and concurrency on occurrence nets.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::{Net, NetError, Node, PlaceIx, TransitionIx};

/// Exactly one of these holds for any node pair of an occurrence net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    Before,
    After,
    Conflict,
    Concurrent,
}

/// Strict causality as ancestor bitsets plus the direct conflict relation on
/// transitions. Inherited conflict is answered on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRelations {
    places: usize,
    ancestors: Vec<FixedBitSet>,
    trans_cone: Vec<FixedBitSet>,
    direct_conflict: Vec<FixedBitSet>,
}

impl NodeRelations {
    pub fn compute(net: &Net) -> Result<Self, NetError> {
        let order = net
            .topological_order()
            .map_err(|n| NetError::Cyclic(net.node_id(n).to_string()))?;
        let n = net.node_count();
        let nt = net.transition_count();
        let mut ancestors = vec![FixedBitSet::with_capacity(n); n];
        let mut trans_cone = vec![FixedBitSet::with_capacity(nt); n];
        for node in order {
            let k = net.flat(node);
            let mut anc = FixedBitSet::with_capacity(n);
            let mut cone = FixedBitSet::with_capacity(nt);
            for pred in net.predecessors(node) {
                let j = net.flat(pred);
                anc.insert(j);
                anc.union_with(&ancestors[j]);
                cone.union_with(&trans_cone[j]);
            }
            if let Node::Transition(t) = node {
                cone.insert(t.0);
            }
            ancestors[k] = anc;
            trans_cone[k] = cone;
        }
        let mut direct_conflict = vec![FixedBitSet::with_capacity(nt); nt];
        for p in net.places() {
            let cs = net.consumers(p);
            for &t in cs {
                for &u in cs {
                    if t != u {
                        direct_conflict[t.0].insert(u.0);
                    }
                }
            }
        }
        Ok(NodeRelations {
            places: net.place_count(),
            ancestors,
            trans_cone,
            direct_conflict,
        })
    }

    fn flat(&self, n: Node) -> usize {
        match n {
            Node::Place(p) => p.0,
            Node::Transition(t) => self.places + t.0,
        }
    }

    /// `x < y`.
    pub fn precedes(&self, x: Node, y: Node) -> bool {
        self.ancestors[self.flat(y)].contains(self.flat(x))
    }

    pub fn precedes_eq(&self, x: Node, y: Node) -> bool {
        x == y || self.precedes(x, y)
    }

    /// `x # y`: some distinct `t <= x`, `t' <= y` share a preset place.
    pub fn in_conflict(&self, x: Node, y: Node) -> bool {
        let cy = &self.trans_cone[self.flat(y)];
        self.trans_cone[self.flat(x)]
            .ones()
            .any(|t| !self.direct_conflict[t].is_disjoint(cy))
    }

    /// Transitions sharing a preset place with `t`.
    pub fn direct_conflicts(&self, t: TransitionIx) -> impl Iterator<Item = TransitionIx> + '_ {
        self.direct_conflict[t.0].ones().map(TransitionIx)
    }

    pub fn directly_conflict(&self, t: TransitionIx, u: TransitionIx) -> bool {
        self.direct_conflict[t.0].contains(u.0)
    }

    pub fn concurrent(&self, x: Node, y: Node) -> bool {
        self.relation(x, y) == Relation::Concurrent
    }

    pub fn relation(&self, x: Node, y: Node) -> Relation {
        if x == y {
            Relation::Equal
        } else if self.precedes(x, y) {
            Relation::Before
        } else if self.precedes(y, x) {
            Relation::After
        } else if self.in_conflict(x, y) {
            Relation::Conflict
        } else {
            Relation::Concurrent
        }
    }

    /// Strict causes of `x`, as nodes.
    pub fn strict_cone(&self, net: &Net, x: Node) -> BTreeSet<Node> {
        self.ancestors[self.flat(x)].ones().map(|i| net.unflat(i)).collect()
    }

    /// `[x]`: the causes of `x` including `x`.
    pub fn cone(&self, net: &Net, x: Node) -> BTreeSet<Node> {
        let mut c = self.strict_cone(net, x);
        c.insert(x);
        c
    }

    /// Transitions `t <= x`.
    pub fn transition_cone(&self, x: Node) -> impl Iterator<Item = TransitionIx> + '_ {
        self.trans_cone[self.flat(x)].ones().map(TransitionIx)
    }
}

/// The four defining conditions of an occurrence net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `not (x # x)`
    NoSelfConflict,
    /// `<=` is a partial order with finite cones.
    PartialOrder,
    /// `|pre(p)| <= 1`
    UniqueProducer,
    /// The initial marking is exactly the set of minimal places.
    InitialIsMinimal,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::NoSelfConflict => "node in conflict with itself",
            Condition::PartialOrder => "causality is not a partial order (cycle)",
            Condition::UniqueProducer => "place has more than one producer",
            Condition::InitialIsMinimal => "initial marking differs from the minimal places",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub witness: String,
}

/// Checks all four occurrence-net conditions and reports every failure with
/// a witness node. An empty result means the net is an occurrence net.
pub fn validate_occurrence_net(net: &Net) -> Vec<Violation> {
    let mut out = Vec::new();
    let violation = |condition, node: Node| Violation {
        condition,
        witness: net.node_id(node).to_string(),
    };

    let cyclic = net.topological_order().err();
    if let Some(n) = cyclic {
        out.push(violation(Condition::PartialOrder, n));
    }

    // Self-conflict via backward reachability, which stays meaningful on
    // cyclic nets.
    for x in net.nodes() {
        let cone = backward_transitions(net, x);
        let clash = net.places().any(|p| {
            net.consumers(p).iter().filter(|t| cone.contains(t.0)).count() > 1
        });
        if clash {
            out.push(violation(Condition::NoSelfConflict, x));
        }
    }

    for p in net.places() {
        if net.producers(p).len() > 1 {
            out.push(violation(Condition::UniqueProducer, Node::Place(p)));
        }
    }

    let minimal: BTreeSet<PlaceIx> = net.minimal_places().into_iter().collect();
    let initial: BTreeSet<PlaceIx> = net.initial_marking().iter().copied().collect();
    if let Some(&p) = minimal.symmetric_difference(&initial).next() {
        out.push(violation(Condition::InitialIsMinimal, Node::Place(p)));
    }
    out
}

fn backward_transitions(net: &Net, x: Node) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(net.node_count());
    let mut trans = FixedBitSet::with_capacity(net.transition_count());
    let mut stack = vec![x];
    while let Some(n) = stack.pop() {
        if seen.put(net.flat(n)) {
            continue;
        }
        if let Node::Transition(t) = n {
            trans.insert(t.0);
        }
        stack.extend(net.predecessors(n));
    }
    trans
}

/// A net certified to satisfy the occurrence-net conditions, together with
/// its precomputed relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceNet {
    net: Net,
    relations: NodeRelations,
}

impl OccurrenceNet {
    pub fn new(net: Net) -> Result<Self, Vec<Violation>> {
        let violations = validate_occurrence_net(&net);
        if !violations.is_empty() {
            return Err(violations);
        }
        let relations = NodeRelations::compute(&net).expect("validated nets are acyclic");
        Ok(OccurrenceNet { net, relations })
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn relations(&self) -> &NodeRelations {
        &self.relations
    }

    /// The unique producer of a non-minimal place.
    pub fn producer(&self, p: PlaceIx) -> Option<TransitionIx> {
        self.net.producers(p).first().copied()
    }
}

impl Deref for OccurrenceNet {
    type Target = Net;

    fn deref(&self) -> &Net {
        &self.net
    }
}
