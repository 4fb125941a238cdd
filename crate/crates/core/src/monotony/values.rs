//! Distinct returned values and conditional monotony.

use std::collections::{BTreeSet, HashMap};

use super::oracle::Table;
use super::{CheckOptions, MonotonyVerdict, Outcome, PreOrchNet};
use crate::net::{maximal_configurations, ConfigError, Configuration, Node};
use crate::timed::{ExecError, OrchNet, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistinctValues {
    Holds,
    /// Two maximal configurations return the same value set.
    Violated {
        omega: usize,
        kappa: Configuration,
        kappa_prime: Configuration,
        values: BTreeSet<Value>,
    },
    Undecided {
        cap: usize,
    },
}

/// Whether distinct maximal configurations return distinct value sets, for
/// every daemon index. Values do not depend on latencies, so the answer is
/// the same for every member of a pre-OrchNet.
pub fn check_distinct_values(orch: &OrchNet, cap: usize) -> Result<DistinctValues, ExecError> {
    let configs = match maximal_configurations(orch.net(), cap) {
        Ok(c) => c,
        Err(ConfigError::CapExceeded(cap)) => return Ok(DistinctValues::Undecided { cap }),
        Err(e) => return Err(e.into()),
    };
    let net = orch.net().net();
    for omega in 0..orch.omega_count() {
        let (values, guards) = orch.evaluate_values(omega)?;
        let mut seen: HashMap<BTreeSet<Value>, &Configuration> = HashMap::new();
        for k in &configs {
            let v: BTreeSet<Value> = k
                .max_transitions(net)
                .into_iter()
                .filter(|t| guards[t.0])
                .map(|t| values[net.flat(Node::Transition(t))].clone())
                .collect();
            if let Some(prev) = seen.get(&v) {
                return Ok(DistinctValues::Violated {
                    omega,
                    kappa: (*prev).clone(),
                    kappa_prime: k.clone(),
                    values: v,
                });
            }
            seen.insert(v, k);
        }
    }
    Ok(DistinctValues::Holds)
}

/// Exhaustive check that `hi >= lo` and equal returned values imply
/// `E(hi) >= E(lo)`, without the distinct-values shortcut.
pub fn conditional_brute_force(pre: &PreOrchNet, opts: &CheckOptions) -> Result<MonotonyVerdict, ExecError> {
    if let Err(e) = pre.check_cap(opts.member_cap) {
        return Ok(MonotonyVerdict::undecided(e.to_string()));
    }
    let table = Table::build(pre, opts.tie_break)?;
    Ok(match table.search(true) {
        Some(f) => {
            let mut v = MonotonyVerdict::new(Outcome::NonMonotonic);
            v.pair = Some(table.witness(pre, &f, opts.tie_break));
            v.notes.push("violation among runs returning equal values".into());
            v
        }
        None => {
            let mut v = MonotonyVerdict::new(Outcome::ConditionallyMonotonic);
            v.grid_relative = true;
            v.notes.push(format!("conditionally monotonic over the {} grid members only", table.runs.len()));
            v
        }
    })
}

/// Distinct values give conditional monotony outright; otherwise falls back
/// to the exhaustive check.
pub fn conditional_monotony_check(pre: &PreOrchNet, opts: &CheckOptions) -> Result<MonotonyVerdict, ExecError> {
    match check_distinct_values(pre.base(), opts.config_cap)? {
        DistinctValues::Holds => {
            let mut v = MonotonyVerdict::new(Outcome::ConditionallyMonotonic);
            v.notes.push("maximal configurations return distinct values".into());
            Ok(v)
        }
        DistinctValues::Undecided { cap } => Ok(MonotonyVerdict::undecided(format!(
            "more than {cap} maximal configurations"
        ))),
        DistinctValues::Violated { omega, values, .. } => {
            let mut v = conditional_brute_force(pre, opts)?;
            v.notes.insert(
                0,
                format!(
                    "two maximal configurations return {} at daemon index {omega}",
                    crate::io::format_values(&values)
                ),
            );
            Ok(v)
        }
    }
}
