//! JSON renderings of runs, configurations and verdicts.

use serde_json::{json, Value as Json};

use super::{format_values, NetDocument};
use crate::monotony::{MonotonyVerdict, Outcome, PairWitness, Verification};
use crate::net::{Configuration, Net};
use crate::timed::{TieBreak, TimedRun};
use crate::unfolding::Morphism;

pub fn tie_name(t: TieBreak) -> &'static str {
    match t {
        TieBreak::Lexicographic => "lex",
        TieBreak::EnumerateAll => "all",
    }
}

pub fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Monotonic => "monotonic",
        Outcome::NonMonotonic => "non_monotonic",
        Outcome::ConditionallyMonotonic => "conditionally_monotonic",
        Outcome::Undecided => "undecided",
    }
}

pub fn configuration(net: &Net, k: &Configuration) -> Json {
    json!(k.transition_ids(net))
}

/// Labels in the original net of unfolding events, where they differ.
pub fn run(net: &Net, original: Option<(&Net, &Morphism)>, r: &TimedRun) -> Json {
    let label = |t| match original {
        Some((o, m)) if o.transition_id(m.transition(t)) != net.transition_id(t) => {
            Json::String(o.transition_id(m.transition(t)).to_string())
        }
        _ => Json::Null,
    };
    let steps: Vec<Json> = r
        .steps
        .iter()
        .map(|s| {
            let mut step = json!({
                "transition": net.transition_id(s.transition),
                "date": s.date.to_string(),
                "preempted": s.preempted.iter().map(|&t| net.transition_id(t)).collect::<Vec<_>>(),
            });
            if let l @ Json::String(_) = label(s.transition) {
                step["label"] = l;
            }
            step
        })
        .collect();
    let ties: Vec<Json> = r
        .ties
        .iter()
        .map(|t| {
            json!({
                "step": t.step,
                "date": t.date.to_string(),
                "candidates": t.candidates.iter().map(|&c| net.transition_id(c)).collect::<Vec<_>>(),
                "chosen": net.transition_id(t.chosen),
            })
        })
        .collect();
    json!({
        "steps": steps,
        "ties": ties,
        "occurring": configuration(net, &r.configuration),
        "stalled": r.stalled.iter().map(|&t| net.transition_id(t)).collect::<Vec<_>>(),
        "E": r.end_to_end.to_string(),
        "V": format_values(&r.values),
    })
}

pub fn pair(w: &PairWitness, omega_names: Option<&Vec<String>>) -> Json {
    let member = |m: &Option<Vec<(String, crate::number::ExtDate)>>| match m {
        Some(slots) => {
            let map: serde_json::Map<String, Json> =
                slots.iter().map(|(k, d)| (k.clone(), Json::String(d.to_string()))).collect();
            Json::Object(map)
        }
        None => Json::Null,
    };
    json!({
        "omega": w.omega,
        "omega_name": omega_names.and_then(|n| n.get(w.omega)),
        "tie_break": tie_name(w.tie_break),
        "E_lo": w.e_lo.to_string(),
        "E_hi": w.e_hi.to_string(),
        "V_lo": format_values(&w.v_lo),
        "V_hi": format_values(&w.v_hi),
        "lo_member": member(&w.lo_member),
        "hi_member": member(&w.hi_member),
        "lo": NetDocument::from_orchnet(&w.lo, omega_names.cloned()),
        "hi": NetDocument::from_orchnet(&w.hi, omega_names.cloned()),
    })
}

pub fn verification(v: &Verification) -> Json {
    json!({
        "accepted": v.accepted,
        "reason": v.reason,
        "hi_geq_lo": v.order.is_geq(),
        "E_lo": v.e_lo.to_string(),
        "E_hi": v.e_hi.to_string(),
    })
}

pub fn verdict(v: &MonotonyVerdict, omega_names: Option<&Vec<String>>) -> Json {
    json!({
        "outcome": outcome_name(v.outcome),
        "grid_relative": v.grid_relative,
        "clusters": v.clusters,
        "witness": v.pair.as_ref().map(|w| pair(w, omega_names)),
        "notes": v.notes,
    })
}
