//! The global condition: no maximal configuration finishes strictly
//! earlier than the one that actually occurs.

use super::PairWitness;
use crate::net::{maximal_configurations, ConfigError, Configuration};
use crate::number::ExtDate;
use crate::timed::{execute_with, ExecError, OrchNet, TieBreak};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GlobalCondition {
    Holds {
        occurring: Configuration,
        e: ExtDate,
    },
    Violated {
        occurring: Configuration,
        e_occurring: ExtDate,
        /// First violating maximal configuration in canonical order.
        kappa: Configuration,
        e_kappa: ExtDate,
        violations: usize,
    },
    Undecided {
        cap: usize,
    },
}

impl GlobalCondition {
    pub fn is_violated(&self) -> bool {
        matches!(self, GlobalCondition::Violated { .. })
    }
}

pub fn check_global_condition(orch: &OrchNet, omega: usize, cap: usize) -> Result<GlobalCondition, ExecError> {
    let ev = orch.evaluate(omega)?;
    let run = execute_with(orch, &ev, omega, TieBreak::Lexicographic).remove(0);
    let configs = match maximal_configurations(orch.net(), cap) {
        Ok(c) => c,
        Err(ConfigError::CapExceeded(cap)) => return Ok(GlobalCondition::Undecided { cap }),
        Err(e) => return Err(e.into()),
    };
    let net = orch.net().net();
    let e_of = |k: &Configuration| k.nodes().map(|n| ev.date(net, n)).max().unwrap_or(ExtDate::ZERO);
    let mut first = None;
    let mut violations = 0;
    for k in configs {
        let e = e_of(&k);
        if e < run.end_to_end {
            violations += 1;
            first.get_or_insert((k, e));
        }
    }
    Ok(match first {
        None => GlobalCondition::Holds {
            occurring: run.configuration,
            e: run.end_to_end,
        },
        Some((kappa, e_kappa)) => GlobalCondition::Violated {
            occurring: run.configuration,
            e_occurring: run.end_to_end,
            kappa,
            e_kappa,
            violations,
        },
    })
}

/// For a pair `hi >= lo` with `E(hi) < E(lo)`, the configuration occurring
/// in `hi` is maximal in `lo` and finishes there no later than in `hi`, so
/// it violates the global condition of `lo`. Returns it when every step of
/// that argument checks out.
pub fn global_condition_explains(w: &PairWitness, cap: usize) -> Result<Option<Configuration>, ExecError> {
    let run_hi = execute_with(&w.hi, &w.hi.evaluate(w.omega)?, w.omega, TieBreak::Lexicographic).remove(0);
    let kappa = run_hi.configuration;
    if !kappa.is_maximal(w.lo.net()) {
        return Ok(None);
    }
    let ev_lo = w.lo.evaluate(w.omega)?;
    let net = w.lo.net().net();
    let e_lo_kappa = kappa.nodes().map(|n| ev_lo.date(net, n)).max().unwrap_or(ExtDate::ZERO);
    let run_lo = execute_with(&w.lo, &ev_lo, w.omega, TieBreak::Lexicographic).remove(0);
    if !(e_lo_kappa <= run_hi.end_to_end && e_lo_kappa < run_lo.end_to_end) {
        return Ok(None);
    }
    match check_global_condition(&w.lo, w.omega, cap)? {
        GlobalCondition::Violated { .. } => Ok(Some(kappa)),
        _ => Ok(None),
    }
}
