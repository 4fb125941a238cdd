use std::collections::BTreeMap;

use super::*;
use crate::net::fixtures::{chain_net, choice_concurrency_net, choice_net, fork_join_net};
use crate::net::Net;
use crate::timed::{LatencySpec, TransitionSpec, ValueFnSpec};
use crate::unfolding::{AnnotatedNet, NetKind};

fn annotated(kind: NetKind, net: Net, omega_count: usize, lat: &[(&str, &[i64])], grids: &[(&str, &[i64])]) -> AnnotatedNet {
    let transitions = net
        .transitions()
        .map(|t| {
            let id = net.transition_id(t);
            let latency = match lat.iter().find(|(k, _)| *k == id) {
                Some((_, [x])) => LatencySpec::constant(*x),
                Some((_, xs)) => LatencySpec::PerOmega(xs.iter().map(|&x| ExtDate::int(x)).collect()),
                None => LatencySpec::constant(1),
            };
            TransitionSpec::new(latency, ValueFnSpec::Const(Value::atom(id)))
        })
        .collect();
    let classes = net.transitions().map(|t| net.transition_id(t).to_string()).collect();
    let initial = net
        .minimal_places()
        .into_iter()
        .map(|p| (p, crate::timed::InitialSpec::at(0)))
        .collect();
    let class_grids = grids
        .iter()
        .map(|(k, g)| (k.to_string(), g.iter().map(|&x| ExtDate::int(x)).collect()))
        .collect();
    AnnotatedNet {
        kind,
        net,
        omega_count,
        transitions,
        classes,
        initial,
        class_grids,
        initial_date_grids: BTreeMap::new(),
        upward_closed: true,
    }
}

fn choice(lat_b: &[i64]) -> AnnotatedNet {
    annotated(
        NetKind::Occurrence,
        choice_net(),
        lat_b.len(),
        &[("a", &[2]), ("b", lat_b), ("c", &[4]), ("d", &[7])],
        &[("a", &[2]), ("b", &[1, 3]), ("c", &[4]), ("d", &[7])],
    )
}

fn pre(ann: &AnnotatedNet) -> PreOrchNet {
    ann.induced_preorchnet(&ann.unfold(1000).unwrap()).unwrap()
}

fn orch(ann: &AnnotatedNet) -> OrchNet {
    ann.induced_orchnet(&ann.unfold(1000).unwrap()).unwrap()
}

#[test]
fn fork_join_is_structurally_monotonic() {
    let ann = annotated(NetKind::Workflow, fork_join_net(), 1, &[], &[]);
    let v = structural_check(&ann, &CheckOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::Monotonic);
    assert!(v.clusters.is_empty());
}

#[test]
fn choice_fails_cluster_condition() {
    let ann = choice(&[3]);
    let c = violating_clusters(&ann.net);
    assert_eq!(c.len(), 1);
    assert_eq!(c[0].places, ["p0"]);
    assert_eq!(c[0].transitions, ["a", "b"]);
    let v = structural_check(&ann, &CheckOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::NonMonotonic);
    let w = v.pair.unwrap();
    let check = verify_counterexample(&w.lo, &w.hi, w.omega, TieBreak::Lexicographic).unwrap();
    assert!(check.accepted, "{}", check.reason);
}

#[test]
fn cluster_violation_without_upward_closure_is_undecided() {
    let mut ann = choice(&[3]);
    ann.upward_closed = false;
    let v = structural_check(&ann, &CheckOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::Undecided);
    assert_eq!(v.clusters.len(), 1);
}

#[test]
fn event_graphs_are_vacuously_monotonic() {
    let ann = annotated(NetKind::Occurrence, chain_net(), 1, &[], &[]);
    assert_eq!(structural_check(&ann, &CheckOptions::default()).unwrap().outcome, Outcome::Monotonic);
}

#[test]
fn global_condition_on_choice() {
    let o = orch(&choice(&[3, 1]));
    match check_global_condition(&o, 0, 100).unwrap() {
        GlobalCondition::Holds { e, .. } => assert_eq!(e, ExtDate::int(6)),
        other => panic!("{other:?}"),
    }
    match check_global_condition(&o, 1, 100).unwrap() {
        GlobalCondition::Violated {
            kappa, e_kappa, e_occurring, ..
        } => {
            assert_eq!(kappa.transition_ids(o.net()), ["a", "c"]);
            assert_eq!((e_kappa, e_occurring), (ExtDate::int(6), ExtDate::int(8)));
        }
        other => panic!("{other:?}"),
    }
    let chain = orch(&annotated(NetKind::Occurrence, chain_net(), 1, &[], &[]));
    assert!(!check_global_condition(&chain, 0, 100).unwrap().is_violated());
}

#[test]
fn oracle_finds_choice_violation() {
    let ann = choice(&[3]);
    let v = brute_force_monotony(&pre(&ann), &CheckOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::NonMonotonic);
    let w = v.pair.unwrap();
    assert_eq!((w.e_hi, w.e_lo), (ExtDate::int(6), ExtDate::int(8)));
    let b = |m: &Option<Vec<(String, ExtDate)>>| m.as_ref().unwrap().iter().find(|(k, _)| k == "b").unwrap().1;
    assert_eq!((b(&w.hi_member), b(&w.lo_member)), (ExtDate::int(3), ExtDate::int(1)));
    assert!(verify_counterexample(&w.lo, &w.hi, w.omega, TieBreak::Lexicographic).unwrap().accepted);
    let kappa = global_condition_explains(&w, 100).unwrap().unwrap();
    assert_eq!(kappa.transition_ids(w.lo.net()), ["a", "c"]);
}

#[test]
fn oracle_enumerate_all_agrees_on_choice() {
    let ann = choice(&[3]);
    let opts = CheckOptions {
        tie_break: TieBreak::EnumerateAll,
        ..CheckOptions::default()
    };
    assert_eq!(brute_force_monotony(&pre(&ann), &opts).unwrap().outcome, Outcome::NonMonotonic);
}

#[test]
fn oracle_passes_fork_join() {
    let g: &[i64] = &[1, 2, 3];
    let ann = annotated(NetKind::Workflow, fork_join_net(), 1, &[], &[("f", g), ("a", g), ("b", g), ("c", g)]);
    let p = pre(&ann);
    assert_eq!(p.member_count(), 81);
    let v = brute_force_monotony(&p, &CheckOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::Monotonic);
    assert!(v.grid_relative);
}

#[test]
fn oracle_passes_single_transition() {
    let ann = annotated(NetKind::Occurrence, chain_net(), 1, &[], &[("t", &[0, 5])]);
    assert_eq!(brute_force_monotony(&pre(&ann), &CheckOptions::default()).unwrap().outcome, Outcome::Monotonic);
}

#[test]
fn oracle_respects_member_cap() {
    let ann = choice(&[3]);
    let opts = CheckOptions {
        member_cap: 1,
        ..CheckOptions::default()
    };
    assert_eq!(brute_force_monotony(&pre(&ann), &opts).unwrap().outcome, Outcome::Undecided);
}

/// Quadratic scan over all comparable member pairs, independent of the
/// lattice pass in the oracle.
fn all_pairs_violation(p: &PreOrchNet) -> bool {
    let n = p.member_count() as usize;
    let e: Vec<Vec<ExtDate>> = (0..n)
        .map(|m| {
            let o = p.member(&p.decode(m));
            (0..o.omega_count()).map(|w| crate::timed::end_to_end(&o, w).unwrap().0).collect()
        })
        .collect();
    (0..n).any(|hi| {
        (0..n).any(|lo| {
            let (a, b) = (p.decode(hi), p.decode(lo));
            a.iter().zip(&b).all(|(x, y)| x >= y) && e[hi].iter().zip(&e[lo]).any(|(x, y)| x < y)
        })
    })
}

#[test]
fn lattice_pass_matches_all_pairs() {
    let g: &[i64] = &[0, 1, 2, 5];
    let cases = [
        annotated(NetKind::Occurrence, choice_net(), 1, &[], &[("a", g), ("b", g), ("c", g), ("d", g)]),
        annotated(
            NetKind::Occurrence,
            choice_concurrency_net(),
            1,
            &[],
            &[("a", g), ("b", g), ("c", g), ("d", &[1]), ("e", &[1]), ("f", &[0, 2])],
        ),
        annotated(NetKind::Workflow, fork_join_net(), 1, &[], &[("a", g), ("b", g), ("c", g)]),
    ];
    for ann in &cases {
        let p = pre(ann);
        let fast = brute_force_monotony(&p, &CheckOptions::default()).unwrap().outcome == Outcome::NonMonotonic;
        assert_eq!(fast, all_pairs_violation(&p));
    }
}

#[test]
fn synthesis_on_choice_verifies() {
    let ann = choice(&[3]);
    let c = &violating_clusters(&ann.net)[0];
    let s = synthesize_counterexample(&ann, c, 0, &CheckOptions::default()).unwrap();
    let v = verify_counterexample(&s.pair.lo, &s.pair.hi, 0, TieBreak::Lexicographic).unwrap();
    assert!(v.accepted, "{}", v.reason);
    assert!(v.e_hi.is_finite());
    assert!(global_condition_explains(&s.pair, 100).unwrap().is_some());
}

#[test]
fn synthesis_refuses_passing_nets() {
    let ann = annotated(NetKind::Workflow, fork_join_net(), 1, &[], &[]);
    let u = ann.unfold(100).unwrap();
    let net = u.unfolding.net();
    let fake = ClusterWitness {
        places: vec![],
        transitions: vec![],
        t1: "a".into(),
        t2: "b".into(),
        post1: vec![],
        post2: vec![],
        pair: (net.find_transition("a").unwrap(), net.find_transition("b").unwrap()),
        members: vec![],
    };
    assert_eq!(
        synthesize_counterexample(&ann, &fake, 0, &CheckOptions::default()).unwrap_err(),
        MonotonyError::NoViolation
    );
}

#[test]
fn synthesis_needs_finite_member() {
    let mut ann = choice(&[3]);
    ann.transitions[2].latency = LatencySpec::Const(ExtDate::Infinite);
    ann.class_grids.insert("c".into(), vec![ExtDate::Infinite]);
    let c = &violating_clusters(&ann.net)[0];
    assert_eq!(
        synthesize_counterexample(&ann, c, 0, &CheckOptions::default()).unwrap_err(),
        MonotonyError::NoFiniteMember(0)
    );
}

#[test]
fn verification_rejects_bad_pairs() {
    let o = orch(&choice(&[3]));
    let v = verify_counterexample(&o, &o, 0, TieBreak::Lexicographic).unwrap();
    assert!(!v.accepted);
    let mut up_a = o.clone();
    up_a.set_latency_by_id("a", LatencySpec::constant(9));
    let mut up_b = o.clone();
    up_b.set_latency_by_id("b", LatencySpec::constant(9));
    let v = verify_counterexample(&up_b, &up_a, 0, TieBreak::Lexicographic).unwrap();
    assert!(!v.accepted);
    assert!(!v.order.is_geq());
}

#[test]
fn distinct_values() {
    let o = orch(&choice(&[3]));
    assert_eq!(check_distinct_values(&o, 100).unwrap(), DistinctValues::Holds);
    let mut same = choice(&[3]);
    for t in ["c", "d"] {
        let ix = same.net.find_transition(t).unwrap();
        same.transitions[ix.0].value_fn = ValueFnSpec::Const(Value::atom("x"));
    }
    assert!(matches!(check_distinct_values(&orch(&same), 100).unwrap(), DistinctValues::Violated { .. }));
}

#[test]
fn choice_is_conditionally_monotonic() {
    let ann = choice(&[3]);
    let p = pre(&ann);
    let v = conditional_monotony_check(&p, &CheckOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::ConditionallyMonotonic);
    let b = conditional_brute_force(&p, &CheckOptions::default()).unwrap();
    assert_eq!(b.outcome, Outcome::ConditionallyMonotonic);
}

#[test]
fn equal_values_fall_back_to_brute_force() {
    let mut ann = choice(&[3]);
    for t in ["c", "d"] {
        let ix = ann.net.find_transition(t).unwrap();
        ann.transitions[ix.0].value_fn = ValueFnSpec::Const(Value::atom("x"));
    }
    let v = conditional_monotony_check(&pre(&ann), &CheckOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::NonMonotonic);
    let w = v.pair.unwrap();
    assert_eq!(w.v_lo, w.v_hi);
    assert!(verify_counterexample(&w.lo, &w.hi, w.omega, TieBreak::Lexicographic).unwrap().accepted);
}
