//! Random sound workflow nets and the semantic invariants checked on them.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use orchnet::io::NetDocument;
use orchnet::net::{
    explore_markings, is_sound, maximal_configurations, Configuration, Net, Node, PlaceIx, TransitionIx,
    WorkflowNet, DEFAULT_STATE_CAP,
};
use orchnet::number::ExtDate;
use orchnet::timed::{
    execute, latency, GuardOp, GuardSpec, InitialSpec, LatencySpec, Operand, OrchNet, TieBreak, TransitionSpec,
    Value, ValueFnSpec,
};
use orchnet::unfolding::{unfold, AnnotatedNet, NetKind, UnfoldingResult};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRID: [i64; 4] = [0, 1, 2, 5];

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

pub fn load(name: &str) -> AnnotatedNet {
    let text = std::fs::read_to_string(corpus(name)).unwrap();
    NetDocument::parse(&text).unwrap().to_annotated().unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Place 0 is the source. Transitions are `(preset, postset)`.
#[derive(Clone, Debug)]
struct Sketch {
    places: usize,
    ts: Vec<(Vec<usize>, Vec<usize>)>,
}

impl Sketch {
    fn build(&self) -> Net {
        let mut b = Net::builder();
        b.marked_place("i");
        for p in 1..self.places {
            b.place(format!("p{p}"));
        }
        let name = |p: usize| if p == 0 { "i".to_string() } else { format!("p{p}") };
        for (k, (pre, post)) in self.ts.iter().enumerate() {
            b.transition(format!("t{k}"), pre.iter().map(|&p| name(p)), post.iter().map(|&p| name(p)));
        }
        b.build().unwrap()
    }

    fn consumers(&self, p: usize) -> Vec<usize> {
        (0..self.ts.len()).filter(|&t| self.ts[t].0.contains(&p)).collect()
    }

    fn producers(&self, p: usize) -> Vec<usize> {
        (0..self.ts.len()).filter(|&t| self.ts[t].1.contains(&p)).collect()
    }

    /// `p` becomes `p -> t -> q`, with the old consumers of `p` reading `q`.
    fn sequence(&mut self, p: usize) {
        let q = self.places;
        self.places += 1;
        for (pre, _) in &mut self.ts {
            for x in pre.iter_mut() {
                if *x == p {
                    *x = q;
                }
            }
        }
        self.ts.push((vec![p], vec![q]));
    }

    /// `t: P -> Q` gets an alternative `P -> y -> Q`.
    fn alternative(&mut self, t: usize) {
        let (pre, post) = self.ts[t].clone();
        let y = self.places;
        self.places += 1;
        self.ts.push((pre, vec![y]));
        self.ts.push((vec![y], post));
    }

    /// A twin of the internal place `p`, then refined so it runs in parallel.
    fn parallel(&mut self, p: usize) {
        let twin = self.places;
        self.places += 1;
        for (pre, post) in &mut self.ts {
            if pre.contains(&p) {
                pre.push(twin);
            }
            if post.contains(&p) {
                post.push(twin);
            }
        }
        self.sequence(twin);
    }

    fn duplicate(&mut self, t: usize) {
        let c = self.ts[t].clone();
        self.ts.push(c);
    }

    /// Extra causal link `a -> fresh place -> b`.
    fn link(&mut self, a: usize, b: usize) {
        let q = self.places;
        self.places += 1;
        self.ts[a].1.push(q);
        self.ts[b].0.push(q);
    }

    fn is_sound(&self) -> bool {
        let net = self.build();
        net.is_acyclic()
            && WorkflowNet::new(net)
                .map(|wf| is_sound(&wf, 10_000).is_sound())
                .unwrap_or(false)
    }
}

/// A sound, safe, loop-free workflow net with at most `max_t` transitions,
/// grown by soundness-preserving refinements plus occasional extra links
/// kept only when the result stays sound.
pub fn random_workflow(rng: &mut impl Rng, max_t: usize) -> Net {
    let target = rng.gen_range(1..=max_t);
    let mut s = Sketch {
        places: 2,
        ts: vec![(vec![0], vec![1])],
    };
    for _ in 0..200 {
        if s.ts.len() >= target {
            break;
        }
        let room = target - s.ts.len();
        match rng.gen_range(0..10) {
            0..=2 => {
                let p = rng.gen_range(0..s.places);
                s.sequence(p);
            }
            3..=5 if room >= 2 => {
                let t = rng.gen_range(0..s.ts.len());
                s.alternative(t);
            }
            6..=7 => {
                let internal: Vec<usize> = (0..s.places)
                    .filter(|&p| !s.producers(p).is_empty() && !s.consumers(p).is_empty())
                    .collect();
                if let Some(&p) = internal.choose(rng) {
                    s.parallel(p);
                }
            }
            8 => {
                let t = rng.gen_range(0..s.ts.len());
                s.duplicate(t);
            }
            _ => {}
        }
    }
    for _ in 0..rng.gen_range(0..3) {
        if s.ts.len() < 2 {
            break;
        }
        let a = rng.gen_range(0..s.ts.len());
        let b = rng.gen_range(0..s.ts.len());
        if a == b {
            continue;
        }
        let mut next = s.clone();
        next.link(a, b);
        if next.is_sound() {
            s = next;
        }
    }
    let net = s.build();
    assert!(s.is_sound(), "generator produced an unsound net");
    net
}

/// Constant atom values, latencies drawn from [`GRID`], at most six latency
/// classes, and the grid on every class.
pub fn annotate(rng: &mut impl Rng, net: Net) -> AnnotatedNet {
    let n = net.transition_count();
    let classes: Vec<String> = (0..n)
        .map(|k| format!("c{}", if k < 6 { k } else { rng.gen_range(0..6) }))
        .collect();
    let class_latency: BTreeMap<String, i64> = classes
        .iter()
        .map(|c| (c.clone(), *GRID.choose(rng).unwrap()))
        .collect();
    let transitions = net
        .transitions()
        .map(|t| {
            TransitionSpec::new(
                LatencySpec::constant(class_latency[&classes[t.0]]),
                ValueFnSpec::Const(Value::atom(net.transition_id(t))),
            )
        })
        .collect();
    let initial = net.minimal_places().into_iter().map(|p| (p, InitialSpec::at(0))).collect();
    let class_grids = class_latency
        .keys()
        .map(|c| (c.clone(), GRID.iter().map(|&x| ExtDate::int(x)).collect()))
        .collect();
    AnnotatedNet {
        kind: NetKind::Workflow,
        net,
        omega_count: 1,
        transitions,
        classes,
        initial,
        class_grids,
        initial_date_grids: BTreeMap::new(),
        upward_closed: true,
    }
}

/// Random per-event latencies over two daemon indices, a few constant-false
/// guards, and random initial dates.
pub fn random_orchnet(rng: &mut impl Rng, u: &UnfoldingResult) -> OrchNet {
    let net = u.unfolding.net();
    let mut o = OrchNet::with_defaults(u.unfolding.clone(), 2);
    for t in net.transitions() {
        let table = (0..2).map(|_| ExtDate::int(rng.gen_range(0..6))).collect();
        o.set_latency(t, LatencySpec::PerOmega(table));
        if rng.gen_bool(0.15) {
            o.set_guard(
                t,
                Some(GuardSpec {
                    op: GuardOp::Eq,
                    lhs: Operand::Const(Value::atom("x")),
                    rhs: Operand::Const(Value::atom("y")),
                }),
            );
        }
    }
    for p in net.minimal_places() {
        o.set_initial_date(p, LatencySpec::constant(rng.gen_range(0..3)));
    }
    o
}

/// Same shape as `lo` with every latency raised by a random non-negative
/// amount.
pub fn raised(rng: &mut impl Rng, lo: &OrchNet) -> OrchNet {
    let mut hi = lo.clone();
    let net = lo.net().net();
    for t in net.transitions() {
        let table = (0..lo.omega_count())
            .map(|w| lo.latency(t).at(w).unwrap().plus_int(rng.gen_range(0..4)))
            .collect();
        hi.set_latency(t, LatencySpec::PerOmega(table));
    }
    hi
}

pub fn unfold_workflow(net: &Net) -> UnfoldingResult {
    unfold(&WorkflowNet::new(net.clone()).unwrap(), DEFAULT_STATE_CAP).unwrap()
}

/// Morphism laws, completeness (reachable markings are the images of
/// reachable cuts) and minimality (no two events with the same label and
/// preset, no two conditions with the same label and producer).
pub fn check_unfolding(net: &Net, u: &UnfoldingResult) -> Result<(), String> {
    let un = u.unfolding.net();
    u.morphism.check_laws(un, net)?;
    let orig = explore_markings(net, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?.marking_sets();
    let unf = explore_markings(un, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    let images: BTreeSet<Vec<usize>> = unf
        .markings
        .iter()
        .map(|m| {
            let mut v: Vec<usize> = m.ones().map(|p| u.morphism.place(PlaceIx(p)).0).collect();
            v.sort();
            v
        })
        .collect();
    if images != orig {
        return Err(format!("cut images {images:?} differ from reachable markings {orig:?}"));
    }
    let mut events = BTreeSet::new();
    for e in un.transitions() {
        let mut pre = un.preset(e).to_vec();
        pre.sort();
        if !events.insert((u.morphism.transition(e), pre)) {
            return Err(format!("event `{}` is redundant", un.transition_id(e)));
        }
    }
    let mut conditions = BTreeSet::new();
    for p in un.places() {
        let producer = u.unfolding.producer(p);
        if !conditions.insert((u.morphism.place(p), producer)) {
            return Err(format!("condition `{}` is redundant", un.place_id(p)));
        }
    }
    for t in net.transitions() {
        if u.morphism.copies(t).is_empty() {
            return Err(format!("transition `{}` has no event", net.transition_id(t)));
        }
    }
    Ok(())
}

/// Every node date of the occurring configuration solves the max-plus
/// equations, and dates never decrease along causality.
pub fn check_date_fixpoint(o: &OrchNet, omega: usize, k: &Configuration) -> Result<(), String> {
    let net = o.net().net();
    let ev = o.evaluate(omega).map_err(|e| e.to_string())?;
    let tau = o.effective_latencies(omega).map_err(|e| e.to_string())?;
    for n in k.nodes() {
        let expect = match n {
            Node::Place(p) => match o.net().producer(p) {
                Some(t) => ev.date(net, Node::Transition(t)),
                None => o.initial_spec(p).unwrap().date.at(omega).unwrap(),
            },
            Node::Transition(t) => net
                .preset(t)
                .iter()
                .map(|&p| ev.date(net, Node::Place(p)))
                .max()
                .unwrap_or(ExtDate::ZERO)
                .plus(tau[t.0]),
        };
        if ev.date(net, n) != expect {
            return Err(format!("date of `{}` is {} not {}", net.node_id(n), ev.date(net, n), expect));
        }
        for m in k.nodes() {
            if o.net().relations().precedes(m, n) && ev.date(net, m) > ev.date(net, n) {
                return Err(format!("`{}` precedes `{}` but is later", net.node_id(m), net.node_id(n)));
            }
        }
    }
    Ok(())
}

/// Replays the steps: each fired transition is enabled with the least date
/// among enabled transitions, runs end only when nothing finite is enabled,
/// and a transition with a false guard never occurs.
pub fn check_race(o: &OrchNet, omega: usize, tie: TieBreak) -> Result<(), String> {
    let net = o.net().net();
    let ev = o.evaluate(omega).map_err(|e| e.to_string())?;
    for run in execute(o, omega, tie).map_err(|e| e.to_string())? {
        let mut marked: BTreeSet<PlaceIx> = net.initial_marking().iter().copied().collect();
        let mut fired: BTreeSet<TransitionIx> = BTreeSet::new();
        let enabled = |marked: &BTreeSet<PlaceIx>, fired: &BTreeSet<TransitionIx>| -> Vec<TransitionIx> {
            net.transitions()
                .filter(|t| !fired.contains(t) && net.preset(*t).iter().all(|p| marked.contains(p)))
                .collect()
        };
        for step in &run.steps {
            let t = step.transition;
            let en = enabled(&marked, &fired);
            if !en.contains(&t) {
                return Err(format!("`{}` fired while disabled", net.transition_id(t)));
            }
            let d = ev.date(net, Node::Transition(t));
            if d != step.date || !d.is_finite() {
                return Err(format!("`{}` fired at {} with date {}", net.transition_id(t), step.date, d));
            }
            if let Some(u) = en.iter().find(|&&u| ev.date(net, Node::Transition(u)) < d) {
                return Err(format!("`{}` fired before `{}`", net.transition_id(t), net.transition_id(*u)));
            }
            for p in net.preset(t) {
                marked.remove(p);
            }
            marked.extend(net.postset(t).iter().copied());
            fired.insert(t);
        }
        let rest = enabled(&marked, &fired);
        if rest.iter().any(|&u| ev.date(net, Node::Transition(u)).is_finite()) {
            return Err("run ended with a finite enabled transition".into());
        }
        if rest != run.stalled {
            return Err("stalled set differs from enabled leftovers".into());
        }
        if fired.iter().any(|t| !ev.guards[t.0]) {
            return Err("a transition with a false guard occurred".into());
        }
        if run.stalled.is_empty() {
            if !run.configuration.is_maximal(o.net()) {
                return Err("completed run is not maximal".into());
            }
            check_date_fixpoint(o, omega, &run.configuration)?;
            if run.end_to_end != latency(o, omega, &run.configuration).map_err(|e| e.to_string())? {
                return Err("end-to-end latency differs from the configuration latency".into());
            }
        } else if run.end_to_end != ExtDate::Infinite || !run.values.is_empty() {
            return Err("stalled run must report (inf, {})".into());
        }
    }
    Ok(())
}

/// `hi >= lo` implies `E(hi, k) >= E(lo, k)` for every maximal configuration.
pub fn check_max_plus(lo: &OrchNet, hi: &OrchNet) -> Result<(), String> {
    let configs = maximal_configurations(lo.net(), 100_000).map_err(|e| e.to_string())?;
    for w in 0..lo.omega_count() {
        for k in &configs {
            let a = latency(lo, w, k).map_err(|e| e.to_string())?;
            let b = latency(hi, w, k).map_err(|e| e.to_string())?;
            if b < a {
                return Err(format!("raised latencies gave {b} < {a}"));
            }
        }
    }
    Ok(())
}

pub struct Case {
    pub net: Net,
    pub unfolding: UnfoldingResult,
    pub lo: OrchNet,
    pub hi: OrchNet,
}

pub fn case(seed: u64) -> Case {
    let mut r = rng(seed);
    let net = random_workflow(&mut r, 8);
    let unfolding = unfold_workflow(&net);
    let lo = random_orchnet(&mut r, &unfolding);
    let hi = raised(&mut r, &lo);
    Case { net, unfolding, lo, hi }
}

/// The whole invariant suite on one generated case.
pub fn check_case(c: &Case) -> Result<(), String> {
    check_unfolding(&c.net, &c.unfolding)?;
    for w in 0..c.lo.omega_count() {
        check_race(&c.lo, w, TieBreak::Lexicographic)?;
        check_race(&c.lo, w, TieBreak::EnumerateAll)?;
    }
    check_max_plus(&c.lo, &c.hi)
}
