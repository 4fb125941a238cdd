use std::collections::BTreeSet;
use std::sync::Arc;

use super::*;
use crate::net::fixtures::{choice_concurrency_net, choice_net};
use crate::net::{Configuration, Net, OccurrenceNet};
use crate::number::ExtDate;

fn orch(net: Net, omega_count: usize, lat: &[(&str, &[i64])]) -> OrchNet {
    let mut o = OrchNet::with_defaults(Arc::new(OccurrenceNet::new(net).unwrap()), omega_count);
    for (id, table) in lat {
        let spec = if table.len() == 1 {
            LatencySpec::constant(table[0])
        } else {
            LatencySpec::PerOmega(table.iter().map(|&n| ExtDate::int(n)).collect())
        };
        o.set_latency_by_id(id, spec);
    }
    o
}

fn config(o: &OrchNet, ids: &[&str]) -> Configuration {
    let net = o.net().net();
    Configuration::from_transitions(net, ids.iter().map(|id| net.find_transition(id).unwrap()))
}

fn fastest_wins_net() -> Net {
    Net::builder()
        .marked_place("i_m")
        .marked_place("i_n")
        .marked_place("i_c")
        .place("q_m")
        .place("q_n")
        .place("r_m")
        .place("r_n")
        .place("o_s")
        .place("o_t")
        .transition("M", ["i_m"], ["q_m"])
        .transition("N", ["i_n"], ["q_n"])
        .transition("gM", ["q_m", "i_c"], ["r_m"])
        .transition("gN", ["q_n", "i_c"], ["r_n"])
        .transition("S", ["r_m"], ["o_s"])
        .transition("T", ["r_n"], ["o_t"])
        .build()
        .unwrap()
}

#[test]
fn choice_net_race_outcomes() {
    let o = orch(choice_net(), 2, &[("a", &[2]), ("b", &[3, 1]), ("c", &[4]), ("d", &[7])]);
    let r0 = execute_lex(&o, 0).unwrap();
    assert_eq!(r0.fired_ids(o.net()), ["a", "c"]);
    assert_eq!(r0.end_to_end, ExtDate::int(6));
    assert_eq!(r0.values, BTreeSet::from([Value::atom("c")]));
    assert_eq!(r0.steps[0].preempted.len(), 1);
    let r1 = execute_lex(&o, 1).unwrap();
    assert_eq!(r1.fired_ids(o.net()), ["b", "d"]);
    assert_eq!(r1.end_to_end, ExtDate::int(8));
}

#[test]
fn dates_follow_max_plus() {
    let o = orch(choice_net(), 1, &[("a", &[2]), ("c", &[4])]);
    let k = config(&o, &["a", "c"]);
    let d = eval_dates(&o, 0, &k).unwrap();
    let net = o.net().net();
    assert_eq!(d[&net.find_node("a").unwrap()], ExtDate::int(2));
    assert_eq!(d[&net.find_node("c").unwrap()], ExtDate::int(6));
    assert_eq!(latency(&o, 0, &Configuration::empty()).unwrap(), ExtDate::ZERO);
}

#[test]
fn merge_waits_for_latest_input() {
    let net = Net::builder()
        .marked_place("p0")
        .marked_place("p2")
        .place("p1")
        .place("o")
        .transition("m", ["p0"], ["p1"])
        .transition("j", ["p1", "p2"], ["o"])
        .build()
        .unwrap();
    let mut o = orch(net, 1, &[("m", &[3])]);
    let p2 = o.net().find_place("p2").unwrap();
    o.set_initial_date(p2, LatencySpec::constant(7));
    let (e, _) = end_to_end(&o, 0).unwrap();
    assert_eq!(e, ExtDate::int(7));
    o.set_initial_date(p2, LatencySpec::constant(1));
    assert_eq!(end_to_end(&o, 0).unwrap().0, ExtDate::int(3));
}

#[test]
fn concurrency_example() {
    let (a, b, c, star) = (2, 3, 5, 1);
    let o = orch(
        choice_concurrency_net(),
        1,
        &[("a", &[a]), ("b", &[b]), ("c", &[c]), ("d", &[star]), ("e", &[star]), ("f", &[star])],
    );
    let run = execute_lex(&o, 0).unwrap();
    assert_eq!(run.configuration.transition_ids(o.net()), ["a", "c", "d", "f"]);
    assert_eq!(run.end_to_end, ExtDate::int(6));
    assert_eq!(latency(&o, 0, &config(&o, &["b", "e"])).unwrap(), ExtDate::int(4));
}

#[test]
fn concurrency_example_over_star_class() {
    for star in 0..3 {
        for (a, expected) in [(2, 5 + star), (4, 3 + star)] {
            let o = orch(
                choice_concurrency_net(),
                1,
                &[("a", &[a]), ("b", &[3]), ("c", &[5]), ("d", &[star]), ("e", &[star]), ("f", &[star])],
            );
            assert_eq!(end_to_end(&o, 0).unwrap().0, ExtDate::int(expected), "a={a} star={star}");
        }
    }
}

#[test]
fn slower_component_speeds_up_orchestration() {
    let o = orch(fastest_wins_net(), 2, &[("M", &[1, 3]), ("N", &[2]), ("S", &[10]), ("T", &[3])]);
    assert_eq!(end_to_end(&o, 0).unwrap().0, ExtDate::int(11));
    assert_eq!(end_to_end(&o, 1).unwrap().0, ExtDate::int(5));
}

#[test]
fn symmetric_tie() {
    let o = orch(choice_net(), 1, &[("a", &[3]), ("b", &[3]), ("c", &[1]), ("d", &[1])]);
    let lex = execute(&o, 0, TieBreak::Lexicographic).unwrap();
    assert_eq!(lex.len(), 1);
    assert_eq!(lex[0].fired_ids(o.net())[0], "a");
    assert_eq!(lex[0].ties.len(), 1);
    let all = execute(&o, 0, TieBreak::EnumerateAll).unwrap();
    assert_eq!(all.len(), 2);
    assert_eq!(all[0].configuration, lex[0].configuration);
    assert_eq!(all[0].end_to_end, all[1].end_to_end);
}

#[test]
fn concurrent_ties_collapse() {
    let o = orch(choice_concurrency_net(), 1, &[("b", &[9])]);
    let all = execute(&o, 0, TieBreak::EnumerateAll).unwrap();
    assert_eq!(all.len(), 1);
}

#[test]
fn false_guard_blocks_completion() {
    let net = Net::builder()
        .marked_place("p")
        .place("q")
        .transition("t", ["p"], ["q"])
        .build()
        .unwrap();
    let mut o = orch(net, 1, &[]);
    let t = o.net().find_transition("t").unwrap();
    o.set_guard(
        t,
        Some(GuardSpec {
            op: GuardOp::Eq,
            lhs: Operand::Const(Value::int(0)),
            rhs: Operand::Const(Value::int(1)),
        }),
    );
    let run = execute_lex(&o, 0).unwrap();
    assert!(run.configuration.transitions.is_empty());
    assert_eq!(run.stalled, [t]);
    assert_eq!((run.end_to_end, run.values), (ExtDate::Infinite, BTreeSet::new()));
}

#[test]
fn false_guard_loses_race_to_finite_branch() {
    let mut o = orch(choice_net(), 1, &[("b", &[5])]);
    let a = o.net().find_transition("a").unwrap();
    o.set_guard(
        a,
        Some(GuardSpec {
            op: GuardOp::Lt,
            lhs: Operand::Const(Value::int(1)),
            rhs: Operand::Const(Value::int(0)),
        }),
    );
    let run = execute_lex(&o, 0).unwrap();
    assert_eq!(run.fired_ids(o.net()), ["b", "d"]);
    assert!(run.stalled.is_empty());
}

#[test]
fn value_dependent_latency() {
    let net = Net::builder()
        .marked_place("p")
        .place("q")
        .place("r")
        .transition("s", ["p"], ["q"])
        .transition("t", ["q"], ["r"])
        .build()
        .unwrap();
    let mut o = orch(net, 2, &[]);
    let s = o.net().find_transition("s").unwrap();
    let t = o.net().find_transition("t").unwrap();
    o.set_value_fn(s, ValueFnSpec::Table(vec![Value::int(2), Value::int(5)]));
    o.set_latency(t, LatencySpec::Expr(Expr::parse("2 * v0 + 1").unwrap()));
    assert_eq!(end_to_end(&o, 0).unwrap().0, ExtDate::int(5));
    assert_eq!(end_to_end(&o, 1).unwrap().0, ExtDate::int(11));
    let m = o.materialize().unwrap();
    assert_eq!(m.latency(t), &LatencySpec::PerOmega(vec![ExtDate::int(5), ExtDate::int(11)]));
    assert_eq!(end_to_end(&m, 1).unwrap().0, ExtDate::int(11));
}

#[test]
fn future_of_empty_configuration_is_identity() {
    let o = orch(choice_net(), 1, &[("a", &[2])]);
    let f = o.future(&Configuration::from_transitions(o.net(), [])).unwrap();
    assert_eq!(f.net().shape(), o.net().shape());
    assert_eq!(end_to_end(&f, 0).unwrap(), end_to_end(&o, 0).unwrap());
}

#[test]
fn future_after_choice_drops_other_branch() {
    let o = orch(choice_net(), 1, &[("a", &[2]), ("c", &[4])]);
    let f = o.future(&config(&o, &["a"])).unwrap();
    let net = f.net();
    let places: Vec<_> = net.places().map(|p| net.place_id(p)).collect();
    let transitions: Vec<_> = net.transitions().map(|t| net.transition_id(t)).collect();
    assert_eq!(places, ["p1", "p3"]);
    assert_eq!(transitions, ["c"]);
    let p1 = net.find_place("p1").unwrap();
    assert_eq!(f.initial_spec(p1).unwrap().date.at(0), Some(ExtDate::int(2)));
    assert_eq!(end_to_end(&f, 0).unwrap().0, ExtDate::int(6));
}

#[test]
fn future_rejects_non_configuration() {
    let o = orch(choice_net(), 1, &[]);
    assert!(matches!(o.future(&config(&o, &["a", "b"])), Err(ExecError::NotAConfiguration(_))));
}

#[test]
fn family_comparison() {
    let hi = orch(choice_net(), 1, &[("a", &[2]), ("b", &[3]), ("c", &[4]), ("d", &[7])]);
    let lo = orch(choice_net(), 1, &[("a", &[2]), ("b", &[1]), ("c", &[4]), ("d", &[7])]);
    assert!(compare_families(&hi, &hi).unwrap().is_geq());
    assert!(compare_families(&hi, &lo).unwrap().is_geq());
    match compare_families(&lo, &hi).unwrap() {
        FamilyOrder::NotGeq { witness } => {
            assert_eq!((witness.omega, witness.id.as_str()), (0, "b"));
        }
        FamilyOrder::Geq => panic!("expected not_geq"),
    }
    let up_a = orch(choice_net(), 1, &[("a", &[1])]);
    let up_b = orch(choice_net(), 1, &[("b", &[1])]);
    assert!(!compare_families(&up_a, &up_b).unwrap().is_geq());
    assert!(!compare_families(&up_b, &up_a).unwrap().is_geq());
}

#[test]
fn family_comparison_requires_same_shape() {
    let a = orch(choice_net(), 1, &[]);
    let b = orch(choice_concurrency_net(), 1, &[]);
    assert_eq!(compare_families(&a, &b), Err(ShapeMismatch::Net));
    let c = orch(choice_net(), 2, &[]);
    assert!(matches!(compare_families(&a, &c), Err(ShapeMismatch::Omega(1, 2))));
}

#[test]
fn constructor_checks_tables() {
    let on = Arc::new(OccurrenceNet::new(choice_net()).unwrap());
    let base = OrchNet::with_defaults(on.clone(), 2);
    let mut specs = base.transition_specs().to_vec();
    specs[0].latency = LatencySpec::PerOmega(vec![ExtDate::ZERO]);
    let err = OrchNet::new(on.clone(), specs, base.initial_specs().clone(), 2).unwrap_err();
    assert!(matches!(err, OrchNetError::TableLength { .. }));
    let mut specs = base.transition_specs().to_vec();
    specs[0].value_fn = ValueFnSpec::Select(3);
    let err = OrchNet::new(on, specs, base.initial_specs().clone(), 2).unwrap_err();
    assert!(matches!(err, OrchNetError::Arity { index: 3, arity: 1, .. }));
}

#[test]
fn omega_out_of_range() {
    let o = orch(choice_net(), 1, &[]);
    assert!(matches!(execute_lex(&o, 4), Err(ExecError::OmegaOutOfRange { .. })));
}
