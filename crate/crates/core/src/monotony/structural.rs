//! The cluster condition: transitions of a cluster have equal postsets.

use std::collections::BTreeSet;

use super::{synthesize_counterexample, CheckOptions, ClusterWitness, MonotonyError, MonotonyVerdict, Outcome};
use crate::net::{clusters, is_sound, Net, SoundnessVerdict, TransitionIx, WorkflowNet};
use crate::unfolding::{AnnotatedNet, NetKind};

fn post(net: &Net, t: TransitionIx) -> BTreeSet<String> {
    net.postset(t).iter().map(|&p| net.place_id(p).to_string()).collect()
}

/// Clusters containing two transitions with different postsets. The
/// reported pair shares a preset place whenever such a pair exists.
pub fn violating_clusters(net: &Net) -> Vec<ClusterWitness> {
    let mut out = Vec::new();
    for c in clusters(net) {
        let ts: Vec<TransitionIx> = c.transitions.iter().copied().collect();
        let mut direct = None;
        let mut any = None;
        for (i, &a) in ts.iter().enumerate() {
            for &b in &ts[i + 1..] {
                if post(net, a) == post(net, b) {
                    continue;
                }
                any.get_or_insert((a, b));
                if direct.is_none() && net.preset(a).iter().any(|p| net.preset(b).contains(p)) {
                    direct = Some((a, b));
                }
            }
        }
        if let Some((a, b)) = direct.or(any) {
            out.push(ClusterWitness {
                places: c.places.iter().map(|&p| net.place_id(p).to_string()).collect(),
                transitions: ts.iter().map(|&t| net.transition_id(t).to_string()).collect(),
                t1: net.transition_id(a).to_string(),
                t2: net.transition_id(b).to_string(),
                post1: post(net, a).into_iter().collect(),
                post2: post(net, b).into_iter().collect(),
                pair: (a, b),
                members: ts,
            });
        }
    }
    out
}

/// Monotonic when every cluster passes. A failing cluster becomes a
/// non-monotonic verdict with a verified pair when the family set is upward
/// closed and synthesis succeeds; otherwise the verdict stays undecided.
pub fn structural_check(ann: &AnnotatedNet, opts: &CheckOptions) -> Result<MonotonyVerdict, MonotonyError> {
    if ann.kind == NetKind::Workflow {
        let wf = WorkflowNet::new(ann.net.clone()).map_err(crate::unfolding::UnfoldError::from)?;
        match is_sound(&wf, opts.state_cap) {
            SoundnessVerdict::Sound => {}
            SoundnessVerdict::Unsound { witness } => return Err(MonotonyError::Unsound(witness)),
            SoundnessVerdict::Undecided { cap } => {
                return Ok(MonotonyVerdict::undecided(format!("soundness undecided after {cap} markings")))
            }
        }
    }
    let violations = violating_clusters(&ann.net);
    if violations.is_empty() {
        return Ok(MonotonyVerdict::new(Outcome::Monotonic));
    }
    let mut verdict = MonotonyVerdict::new(Outcome::Undecided);
    verdict.clusters = violations;
    if !ann.upward_closed {
        verdict
            .notes
            .push("cluster condition fails; necessity needs an upward-closed family set".into());
        return Ok(verdict);
    }
    let first = verdict.clusters[0].clone();
    let mut last_err = None;
    for omega in 0..ann.omega_count {
        match synthesize_counterexample(ann, &first, omega, opts) {
            Ok(s) => {
                verdict.outcome = Outcome::NonMonotonic;
                verdict.pair = Some(s.pair);
                verdict.notes.extend(s.log);
                return Ok(verdict);
            }
            Err(e @ (MonotonyError::NoFiniteMember(_) | MonotonyError::SynthesisFailed(_))) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    if let Some(e) = last_err {
        verdict.notes.push(e.to_string());
    }
    Ok(verdict)
}
