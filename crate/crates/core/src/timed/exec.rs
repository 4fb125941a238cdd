//! Race-policy execution: the enabled transition with the least date fires
//! first and preempts everything it conflicts with.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{Evaluation, ExecError, OrchNet, Value};
use crate::net::{Configuration, Net, Node, TransitionIx};
use crate::number::ExtDate;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Among tied transitions fire the one with the smallest identifier.
    #[default]
    Lexicographic,
    /// Explore every tie resolution.
    EnumerateAll,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub transition: TransitionIx,
    pub date: ExtDate,
    /// Enabled transitions disabled by this firing.
    pub preempted: Vec<TransitionIx>,
}

/// Several enabled transitions shared the least date.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tie {
    pub step: usize,
    pub date: ExtDate,
    pub candidates: Vec<TransitionIx>,
    pub chosen: TransitionIx,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedRun {
    pub omega: usize,
    pub steps: Vec<Step>,
    pub ties: Vec<Tie>,
    /// The occurring configuration.
    pub configuration: Configuration,
    /// Set when the run ended with enabled transitions that never occur
    /// (infinite date); the orchestration then never completes.
    pub stalled: Vec<TransitionIx>,
    pub end_to_end: ExtDate,
    pub values: BTreeSet<Value>,
}

impl TimedRun {
    pub fn fired(&self) -> impl Iterator<Item = TransitionIx> + '_ {
        self.steps.iter().map(|s| s.transition)
    }

    pub fn fired_ids(&self, net: &Net) -> Vec<String> {
        self.fired().map(|t| net.transition_id(t).to_string()).collect()
    }
}

/// Dates of every node of `prefix` for `omega`.
pub fn eval_dates(orch: &OrchNet, omega: usize, prefix: &Configuration) -> Result<BTreeMap<Node, ExtDate>, ExecError> {
    prefix.check(orch.net())?;
    let ev = orch.evaluate(omega)?;
    let net = orch.net().net();
    Ok(prefix.nodes().map(|n| (n, ev.date(net, n))).collect())
}

/// `E` of a prefix: the largest date of its nodes, zero when empty.
pub fn latency(orch: &OrchNet, omega: usize, prefix: &Configuration) -> Result<ExtDate, ExecError> {
    Ok(eval_dates(orch, omega, prefix)?.into_values().max().unwrap_or(ExtDate::ZERO))
}

struct Racer<'a> {
    orch: &'a OrchNet,
    dates: &'a [ExtDate],
    values: &'a [Value],
    guards: &'a [bool],
    omega: usize,
}

#[derive(Clone)]
struct State {
    marked: BTreeSet<crate::net::PlaceIx>,
    fired: BTreeSet<TransitionIx>,
    steps: Vec<Step>,
    ties: Vec<Tie>,
}

impl Racer<'_> {
    fn net(&self) -> &Net {
        self.orch.net().net()
    }

    fn start(&self) -> State {
        State {
            marked: self.net().initial_marking().iter().copied().collect(),
            fired: BTreeSet::new(),
            steps: Vec::new(),
            ties: Vec::new(),
        }
    }

    fn enabled(&self, s: &State) -> Vec<TransitionIx> {
        let net = self.net();
        net.transitions()
            .filter(|t| !s.fired.contains(t) && net.preset(*t).iter().all(|p| s.marked.contains(p)))
            .collect()
    }

    fn date(&self, t: TransitionIx) -> ExtDate {
        self.dates[self.net().flat(Node::Transition(t))]
    }

    /// The finite-dated enabled transitions sharing the least date.
    fn candidates(&self, s: &State) -> (Vec<TransitionIx>, Vec<TransitionIx>) {
        let enabled = self.enabled(s);
        let best = enabled.iter().map(|&t| self.date(t)).min();
        match best {
            Some(d) if d.is_finite() => (enabled.into_iter().filter(|&t| self.date(t) == d).collect(), Vec::new()),
            _ => (Vec::new(), enabled),
        }
    }

    fn fire(&self, s: &mut State, t: TransitionIx, candidates: &[TransitionIx]) {
        let net = self.net();
        let date = self.date(t);
        if candidates.len() > 1 {
            s.ties.push(Tie {
                step: s.steps.len(),
                date,
                candidates: candidates.to_vec(),
                chosen: t,
            });
        }
        let before = self.enabled(s);
        for p in net.preset(t) {
            s.marked.remove(p);
        }
        s.marked.extend(net.postset(t).iter().copied());
        s.fired.insert(t);
        let after: HashSet<TransitionIx> = self.enabled(s).into_iter().collect();
        let preempted = before.into_iter().filter(|u| *u != t && !after.contains(u)).collect();
        s.steps.push(Step { transition: t, date, preempted });
    }

    fn finish(&self, s: State, stalled: Vec<TransitionIx>) -> TimedRun {
        let net = self.net();
        let configuration = Configuration::from_transitions(net, s.fired.iter().copied());
        let (end_to_end, values) = if stalled.is_empty() {
            let values = configuration
                .max_transitions(net)
                .into_iter()
                .filter(|t| self.guards[t.0])
                .map(|t| self.values[net.flat(Node::Transition(t))].clone())
                .collect();
            let e = configuration.nodes().map(|n| self.dates[net.flat(n)]).max().unwrap_or(ExtDate::ZERO);
            (e, values)
        } else {
            (ExtDate::Infinite, BTreeSet::new())
        };
        TimedRun {
            omega: self.omega,
            steps: s.steps,
            ties: s.ties,
            configuration,
            stalled,
            end_to_end,
            values,
        }
    }

    fn run_lex(&self) -> TimedRun {
        let mut s = self.start();
        loop {
            let (cands, stalled) = self.candidates(&s);
            match cands.first() {
                Some(&t) => self.fire(&mut s, t, &cands),
                None => return self.finish(s, stalled),
            }
        }
    }

    fn run_all(&self) -> Vec<TimedRun> {
        let mut out: Vec<TimedRun> = Vec::new();
        let mut seen_final: HashSet<BTreeSet<TransitionIx>> = HashSet::new();
        let mut visited: HashSet<BTreeSet<TransitionIx>> = HashSet::new();
        let mut stack = vec![self.start()];
        while let Some(s) = stack.pop() {
            if !visited.insert(s.fired.clone()) {
                continue;
            }
            let (cands, stalled) = self.candidates(&s);
            if cands.is_empty() {
                if seen_final.insert(s.fired.clone()) {
                    out.push(self.finish(s, stalled));
                }
                continue;
            }
            // Reverse push so the smallest identifier is explored first and
            // the lexicographic run comes out first.
            for &t in cands.iter().rev() {
                let mut next = s.clone();
                self.fire(&mut next, t, &cands);
                stack.push(next);
            }
        }
        out
    }
}

/// Runs the race policy for daemon index `omega`. With
/// [`TieBreak::Lexicographic`] the result has exactly one run; with
/// [`TieBreak::EnumerateAll`] one run per distinct occurring configuration,
/// the lexicographic one first.
pub fn execute(orch: &OrchNet, omega: usize, tie_break: TieBreak) -> Result<Vec<TimedRun>, ExecError> {
    let ev = orch.evaluate(omega)?;
    Ok(execute_with(orch, &ev, omega, tie_break))
}

/// As [`execute`], reusing a precomputed evaluation.
pub fn execute_with(orch: &OrchNet, ev: &Evaluation, omega: usize, tie_break: TieBreak) -> Vec<TimedRun> {
    execute_parts(orch, omega, &ev.dates, &ev.values, &ev.guards, tie_break)
}

/// As [`execute`], from dates, values and guard outcomes computed elsewhere.
pub fn execute_parts(
    orch: &OrchNet,
    omega: usize,
    dates: &[ExtDate],
    values: &[Value],
    guards: &[bool],
    tie_break: TieBreak,
) -> Vec<TimedRun> {
    let racer = Racer {
        orch,
        dates,
        values,
        guards,
        omega,
    };
    match tie_break {
        TieBreak::Lexicographic => vec![racer.run_lex()],
        TieBreak::EnumerateAll => racer.run_all(),
    }
}

pub fn execute_lex(orch: &OrchNet, omega: usize) -> Result<TimedRun, ExecError> {
    Ok(execute(orch, omega, TieBreak::Lexicographic)?.remove(0))
}

/// `(E, V)` of the lexicographic run.
pub fn end_to_end(orch: &OrchNet, omega: usize) -> Result<(ExtDate, BTreeSet<Value>), ExecError> {
    let run = execute_lex(orch, omega)?;
    Ok((run.end_to_end, run.values))
}

/// Outcomes of every run under `tie_break`.
pub fn end_to_end_all(
    orch: &OrchNet,
    omega: usize,
    tie_break: TieBreak,
) -> Result<Vec<(ExtDate, BTreeSet<Value>)>, ExecError> {
    Ok(execute(orch, omega, tie_break)?
        .into_iter()
        .map(|r| (r.end_to_end, r.values))
        .collect())
}
