//! Counterexample synthesis for nets failing the cluster condition, and
//! independent verification of candidate pairs.
//!
//! Stage A builds `lo`, whose occurring run gets stuck behind infinite
//! latencies although some maximal configuration finishes in finite time.
//! Stage B raises everything outside that configuration so it occurs in
//! `hi >= lo`. All latencies are edited per unfolding event at one daemon
//! index, and every candidate is replayed before being returned.

use std::collections::BTreeSet;

use super::{check_global_condition, CheckOptions, ClusterWitness, GlobalCondition, MonotonyError, PairWitness};
use crate::net::{closure, Configuration, Node, PlaceIx, TransitionIx};
use crate::number::ExtDate;
use crate::timed::{compare_families, execute, FamilyOrder, LatencySpec, OrchNet, TieBreak, Value};
use crate::unfolding::{AnnotatedNet, UnfoldingResult};

#[derive(Debug, Clone)]
pub struct Verification {
    pub accepted: bool,
    pub reason: String,
    pub order: FamilyOrder,
    /// Largest `E` over the runs of `lo` and smallest over those of `hi`.
    pub e_lo: ExtDate,
    pub e_hi: ExtDate,
    pub v_lo: BTreeSet<Value>,
    pub v_hi: BTreeSet<Value>,
}

/// Accepts iff `hi >= lo` pointwise and `E(hi) < E(lo)`. Under
/// [`TieBreak::EnumerateAll`] one resolution on each side suffices.
pub fn verify_counterexample(
    lo: &OrchNet,
    hi: &OrchNet,
    omega: usize,
    tie_break: TieBreak,
) -> Result<Verification, MonotonyError> {
    let order = compare_families(hi, lo)?;
    let runs_lo = execute(lo, omega, tie_break)?;
    let runs_hi = execute(hi, omega, tie_break)?;
    let worst = runs_lo.into_iter().max_by(|a, b| a.end_to_end.cmp(&b.end_to_end)).expect("one run");
    let best = runs_hi.into_iter().min_by(|a, b| a.end_to_end.cmp(&b.end_to_end)).expect("one run");
    let (accepted, reason) = if !order.is_geq() {
        (false, "hi is not pointwise above lo".to_string())
    } else if best.end_to_end >= worst.end_to_end {
        (false, format!("E(hi) = {} is not below E(lo) = {}", best.end_to_end, worst.end_to_end))
    } else {
        (true, format!("hi >= lo and E(hi) = {} < E(lo) = {}", best.end_to_end, worst.end_to_end))
    };
    Ok(Verification {
        accepted,
        reason,
        order,
        e_lo: worst.end_to_end,
        e_hi: best.end_to_end,
        v_lo: worst.values,
        v_hi: best.values,
    })
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub pair: PairWitness,
    /// The configuration forced to occur in `hi`.
    pub kappa_dagger: Configuration,
    pub log: Vec<String>,
}

struct Ctx<'a> {
    u: &'a UnfoldingResult,
    ann: &'a AnnotatedNet,
    omega: usize,
    opts: &'a CheckOptions,
}

fn table_entry(o: &OrchNet, t: TransitionIx, w: usize) -> ExtDate {
    o.latency(t).at(w).expect("materialized latencies are tables")
}

fn set_at(o: &mut OrchNet, t: TransitionIx, w: usize, d: ExtDate) {
    if let LatencySpec::PerOmega(mut table) = o.latency(t).clone() {
        table[w] = d;
        o.set_latency(t, LatencySpec::PerOmega(table));
    }
}

fn raise(o: &mut OrchNet, t: TransitionIx, w: usize, to: ExtDate) {
    let cur = table_entry(o, t, w);
    if to > cur {
        set_at(o, t, w, to);
    }
}

impl Ctx<'_> {
    fn net(&self) -> &crate::net::Net {
        self.u.unfolding.net()
    }

    fn id(&self, t: TransitionIx) -> &str {
        self.net().transition_id(t)
    }

    fn strict_past(&self, e: TransitionIx) -> BTreeSet<TransitionIx> {
        let rel = self.u.unfolding.relations();
        rel.transition_cone(Node::Transition(e)).filter(|&u| u != e).collect()
    }

    fn past(&self, e: TransitionIx) -> BTreeSet<TransitionIx> {
        self.u.unfolding.relations().transition_cone(Node::Transition(e)).collect()
    }

    fn config(&self, ts: &BTreeSet<TransitionIx>) -> Configuration {
        Configuration::from_transitions(self.net(), ts.iter().copied())
    }

    fn e_of(&self, o: &OrchNet, k: &Configuration) -> Result<ExtDate, MonotonyError> {
        Ok(crate::timed::latency(o, self.omega, k)?)
    }

    /// Transitions outside `ts` that directly conflict with one inside.
    fn competitors(&self, ts: &BTreeSet<TransitionIx>) -> BTreeSet<TransitionIx> {
        let rel = self.u.unfolding.relations();
        ts.iter()
            .flat_map(|&t| rel.direct_conflicts(t))
            .filter(|u| !ts.contains(u))
            .collect()
    }

    /// Pairs of events, copies of `t1` and `t2`, consuming a common condition.
    fn lifts(&self, t1: TransitionIx, t2: TransitionIx) -> Vec<(TransitionIx, TransitionIx)> {
        let m = &self.u.morphism;
        let net = self.net();
        let mut out = Vec::new();
        for e1 in m.copies(t1) {
            for e2 in m.copies(t2) {
                if net.preset(e1).iter().any(|p| net.preset(e2).contains(p)) {
                    out.push((e1, e2));
                }
            }
        }
        out
    }

    /// Walks back to an earlier conflicting pair until `[e1) u [e2)` is a
    /// configuration.
    fn descend(&self, e1: TransitionIx, e2: TransitionIx) -> (TransitionIx, TransitionIx) {
        let (p1, p2) = (self.strict_past(e1), self.strict_past(e2));
        let k: BTreeSet<TransitionIx> = p1.union(&p2).copied().collect();
        if self.config(&k).is_configuration(&self.u.unfolding) {
            return (e1, e2);
        }
        let rel = self.u.unfolding.relations();
        let mut best: Option<(usize, TransitionIx, TransitionIx)> = None;
        for &a in p1.difference(&p2) {
            for &b in p2.difference(&p1) {
                if rel.directly_conflict(a, b) {
                    let size = self.past(a).len() + self.past(b).len();
                    if best.is_none_or(|(s, _, _)| size < s) {
                        best = Some((size, a, b));
                    }
                }
            }
        }
        let (_, a, b) = best.expect("a non-configuration union of two configurations has a conflicting pair");
        self.descend(a, b)
    }

    /// Places of `e1`'s postset that are consumed later and whose label is
    /// not produced by `e2`'s label, preferred first; then the others.
    fn blocking_places(&self, e1: TransitionIx, e2: TransitionIx) -> Vec<PlaceIx> {
        let net = self.net();
        let m = &self.u.morphism;
        let original = &self.ann.net;
        let post2: BTreeSet<PlaceIx> = original.postset(m.transition(e2)).iter().copied().collect();
        let mut preferred = Vec::new();
        let mut others = Vec::new();
        for &p in net.postset(e1) {
            if net.consumers(p).is_empty() {
                continue;
            }
            if post2.contains(&m.place(p)) {
                others.push(p);
            } else {
                preferred.push(p);
            }
        }
        preferred.extend(others);
        preferred
    }

    /// Stage B: force a faster maximal configuration of `lo` to occur.
    fn stage_b(&self, lo: &OrchNet, log: &mut Vec<String>) -> Result<Option<Synthesis>, MonotonyError> {
        let w = self.omega;
        let (kappa, e_kappa) = match check_global_condition(lo, w, self.opts.config_cap)? {
            GlobalCondition::Violated { kappa, e_kappa, .. } => (kappa, e_kappa),
            _ => return Ok(None),
        };
        let mut hi = lo.clone();
        let above = e_kappa.plus_int(1);
        for t in self.net().transitions() {
            if !kappa.transitions.contains(&t) {
                raise(&mut hi, t, w, above);
            }
        }
        let v = verify_counterexample(lo, &hi, w, self.opts.tie_break)?;
        if !v.accepted {
            log.push(format!("replay rejected: {}", v.reason));
            return Ok(None);
        }
        log.push(format!(
            "forced configuration {{{}}} with E = {}",
            kappa.transition_ids(self.net()).join(", "),
            e_kappa
        ));
        Ok(Some(Synthesis {
            pair: PairWitness {
                lo: lo.clone(),
                hi,
                omega: w,
                tie_break: self.opts.tie_break,
                e_lo: v.e_lo,
                e_hi: v.e_hi,
                v_lo: v.v_lo,
                v_hi: v.v_hi,
                lo_member: None,
                hi_member: None,
            },
            kappa_dagger: kappa,
            log: std::mem::take(log),
        }))
    }

    fn block_and_finish(
        &self,
        lo: &OrchNet,
        e1: TransitionIx,
        e2: TransitionIx,
        log: &mut Vec<String>,
    ) -> Result<Option<Synthesis>, MonotonyError> {
        for p in self.blocking_places(e1, e2) {
            let mut blocked = lo.clone();
            for &t in self.net().consumers(p) {
                set_at(&mut blocked, t, self.omega, ExtDate::Infinite);
            }
            let mark = log.len();
            log.push(format!("infinite latency on consumers of `{}`", self.net().place_id(p)));
            if let Some(s) = self.stage_b(&blocked, log)? {
                return Ok(Some(s));
            }
            log.truncate(mark);
        }
        Ok(None)
    }

    /// Stage A as in the necessity proof: let `K = [e1) u [e2)` complete,
    /// make `e1` win its cluster, then block a place only `e1` produces.
    fn attempt_proof(
        &self,
        star: &OrchNet,
        e1: TransitionIx,
        e2: TransitionIx,
        log: &mut Vec<String>,
    ) -> Result<Option<Synthesis>, MonotonyError> {
        let w = self.omega;
        let k_ts: BTreeSet<TransitionIx> = self.strict_past(e1).union(&self.strict_past(e2)).copied().collect();
        let k = self.config(&k_ts);
        let mut lo = star.clone();
        let n_star = self.e_of(&lo, &k)?;
        for u in self.competitors(&k_ts) {
            raise(&mut lo, u, w, n_star.plus_int(1));
        }
        let tau1 = table_entry(&lo, e1, w);
        let cluster = closure(self.net(), Node::Transition(e1));
        for &u in &cluster.transitions {
            if u == e1 {
                continue;
            }
            let extra = if u == e2 { 1 } else { 2 };
            raise(&mut lo, u, w, n_star.plus(tau1).plus_int(extra));
        }
        log.push(format!(
            "pair `{}`/`{}`: E(K) = {n_star}, cluster raised above {}",
            self.id(e1),
            self.id(e2),
            n_star.plus(tau1)
        ));
        self.block_and_finish(&lo, e1, e2, log)
    }

    /// Fallback: force the whole cone of `e1` ahead of its competitors.
    fn attempt_cone(
        &self,
        star: &OrchNet,
        e1: TransitionIx,
        e2: TransitionIx,
        log: &mut Vec<String>,
    ) -> Result<Option<Synthesis>, MonotonyError> {
        let w = self.omega;
        let cone = self.past(e1);
        let mut lo = star.clone();
        let e_cone = self.e_of(&lo, &self.config(&cone))?;
        for u in self.competitors(&cone) {
            raise(&mut lo, u, w, e_cone.plus_int(1));
        }
        log.push(format!("cone of `{}` forced before E = {}", self.id(e1), e_cone.plus_int(1)));
        self.block_and_finish(&lo, e1, e2, log)
    }
}

/// A member whose latencies and initial dates are all finite at `omega`:
/// the declared specs first, then grid members in canonical order.
fn finite_member(ann: &AnnotatedNet, u: &UnfoldingResult, omega: usize, opts: &CheckOptions) -> Result<Option<OrchNet>, MonotonyError> {
    let all_finite = |o: &OrchNet| -> Result<bool, MonotonyError> {
        let lat = o.effective_latencies(omega)?;
        let ev = o.evaluate(omega)?;
        let net = o.net().net();
        Ok(lat.iter().all(ExtDate::is_finite)
            && net.minimal_places().iter().all(|&p| ev.date(net, Node::Place(p)).is_finite()))
    };
    let base = ann.induced_orchnet(u).map_err(crate::unfolding::InduceError::from)?;
    if omega >= base.omega_count() {
        return Err(crate::timed::ExecError::OmegaOutOfRange {
            omega,
            count: base.omega_count(),
        }
        .into());
    }
    if all_finite(&base)? {
        return Ok(Some(base));
    }
    let pre = ann.induced_preorchnet(u)?;
    let n = (pre.member_count().min(opts.member_cap as u128)) as usize;
    for m in 0..n {
        let o = pre.member(&pre.decode(m));
        if all_finite(&o)? {
            return Ok(Some(o));
        }
    }
    Ok(None)
}

/// Builds `lo <= hi` with `E(hi) < E(lo)` at `omega` from a cluster of the
/// workflow net whose transitions have different postsets.
pub fn synthesize_counterexample(
    ann: &AnnotatedNet,
    violation: &ClusterWitness,
    omega: usize,
    opts: &CheckOptions,
) -> Result<Synthesis, MonotonyError> {
    if !super::violating_clusters(&ann.net).iter().any(|c| c.members == violation.members) {
        return Err(MonotonyError::NoViolation);
    }
    let u = ann.unfold(opts.state_cap)?;
    let member = finite_member(ann, &u, omega, opts)?.ok_or(MonotonyError::NoFiniteMember(omega))?;
    let star = member.materialize()?;
    let ctx = Ctx {
        u: &u,
        ann,
        omega,
        opts,
    };

    let original = &ann.net;
    let differs = |a: TransitionIx, b: TransitionIx| {
        let s = |t: TransitionIx| original.postset(t).iter().copied().collect::<BTreeSet<_>>();
        s(a) != s(b)
    };
    let mut pairs = vec![violation.pair, (violation.pair.1, violation.pair.0)];
    for &a in &violation.members {
        for &b in &violation.members {
            if a != b
                && differs(a, b)
                && original.preset(a).iter().any(|p| original.preset(b).contains(p))
                && !pairs.contains(&(a, b))
            {
                pairs.push((a, b));
            }
        }
    }

    let mut lifted = Vec::new();
    for &(t1, t2) in &pairs {
        for (e1, e2) in ctx.lifts(t1, t2) {
            let d = ctx.descend(e1, e2);
            if !lifted.contains(&d) {
                lifted.push(d);
            }
        }
    }
    let mut log = Vec::new();
    for &(e1, e2) in &lifted {
        if let Some(s) = ctx.attempt_proof(&star, e1, e2, &mut log)? {
            return Ok(s);
        }
        log.clear();
    }
    for &(e1, e2) in &lifted {
        if let Some(s) = ctx.attempt_cone(&star, e1, e2, &mut log)? {
            return Ok(s);
        }
        log.clear();
    }
    Err(MonotonyError::SynthesisFailed(format!(
        "no lift of the pair `{}`/`{}` produced a verified pair",
        violation.t1, violation.t2
    )))
}
