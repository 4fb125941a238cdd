//! OrchNets: occurrence nets with value, latency and initial-date functions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::{EvalError, GuardSpec, LatencySpec, Value, ValueFnSpec};
use crate::net::{ConfigError, Configuration, Net, Node, OccurrenceNet, PlaceIx, TransitionIx};
use crate::number::ExtDate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrchNetError {
    #[error("expected {expected} transition specs, got {got}")]
    TransitionCount { expected: usize, got: usize },
    #[error("minimal place `{0}` has no initial-date spec")]
    MissingInitial(String),
    #[error("place `{0}` is not minimal but has an initial-date spec")]
    NotMinimal(String),
    #[error("`{id}`: {what} table has {len} entries, expected one per daemon index ({omega_count})")]
    TableLength {
        id: String,
        what: &'static str,
        len: usize,
        omega_count: usize,
    },
    #[error("`{id}`: {what} reads input {index} but the preset has {arity} places")]
    Arity {
        id: String,
        what: &'static str,
        index: usize,
        arity: usize,
    },
    #[error("daemon domain must be nonempty")]
    EmptyOmega,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("evaluating `{id}`: {source}")]
    Eval { id: String, source: EvalError },
    #[error("daemon index {omega} outside 0..{count}")]
    OmegaOutOfRange { omega: usize, count: usize },
    #[error("not a configuration: {0}")]
    NotAConfiguration(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSpec {
    pub latency: LatencySpec,
    pub value_fn: ValueFnSpec,
    pub guard: Option<GuardSpec>,
}

impl TransitionSpec {
    pub fn new(latency: LatencySpec, value_fn: ValueFnSpec) -> Self {
        TransitionSpec {
            latency,
            value_fn,
            guard: None,
        }
    }
}

/// Initial token of a minimal place. Value-dependent dates see no inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialSpec {
    pub date: LatencySpec,
    pub value: ValueFnSpec,
}

impl InitialSpec {
    pub fn at(date: i64) -> Self {
        InitialSpec {
            date: LatencySpec::constant(date),
            value: ValueFnSpec::Const(Value::unit()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrchNet {
    net: Arc<OccurrenceNet>,
    transitions: Vec<TransitionSpec>,
    initial: BTreeMap<PlaceIx, InitialSpec>,
    omega_count: usize,
}

/// Dates, values and guard outcomes of every node for one daemon index.
/// These follow from the specs alone, independent of which branch runs.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub dates: Vec<ExtDate>,
    pub values: Vec<Value>,
    pub guards: Vec<bool>,
}

impl Evaluation {
    pub fn date(&self, net: &Net, n: Node) -> ExtDate {
        self.dates[net.flat(n)]
    }

    pub fn value(&self, net: &Net, n: Node) -> &Value {
        &self.values[net.flat(n)]
    }
}

fn check_table(id: &str, what: &'static str, len: usize, omega_count: usize) -> Result<(), OrchNetError> {
    if len != omega_count {
        Err(OrchNetError::TableLength {
            id: id.to_string(),
            what,
            len,
            omega_count,
        })
    } else {
        Ok(())
    }
}

impl OrchNet {
    pub fn new(
        net: Arc<OccurrenceNet>,
        transitions: Vec<TransitionSpec>,
        initial: BTreeMap<PlaceIx, InitialSpec>,
        omega_count: usize,
    ) -> Result<Self, OrchNetError> {
        if omega_count == 0 {
            return Err(OrchNetError::EmptyOmega);
        }
        if transitions.len() != net.transition_count() {
            return Err(OrchNetError::TransitionCount {
                expected: net.transition_count(),
                got: transitions.len(),
            });
        }
        for p in net.minimal_places() {
            if !initial.contains_key(&p) {
                return Err(OrchNetError::MissingInitial(net.place_id(p).to_string()));
            }
        }
        for (&p, spec) in &initial {
            let id = net.place_id(p);
            if !net.producers(p).is_empty() {
                return Err(OrchNetError::NotMinimal(id.to_string()));
            }
            if let LatencySpec::PerOmega(t) = &spec.date {
                check_table(id, "initial date", t.len(), omega_count)?;
            }
            if let ValueFnSpec::Table(t) = &spec.value {
                check_table(id, "initial value", t.len(), omega_count)?;
            }
            if let LatencySpec::Expr(e) = &spec.date {
                if let Some(index) = e.max_input() {
                    return Err(OrchNetError::Arity { id: id.to_string(), what: "initial date", index, arity: 0 });
                }
            }
            if let Some(index) = spec.value.max_input() {
                return Err(OrchNetError::Arity { id: id.to_string(), what: "initial value", index, arity: 0 });
            }
        }
        for t in net.transitions() {
            let spec = &transitions[t.0];
            let id = net.transition_id(t);
            let arity = net.preset(t).len();
            if let LatencySpec::PerOmega(table) = &spec.latency {
                check_table(id, "latency", table.len(), omega_count)?;
            }
            if let ValueFnSpec::Table(table) = &spec.value_fn {
                check_table(id, "value", table.len(), omega_count)?;
            }
            let reads = [
                ("latency", match &spec.latency {
                    LatencySpec::Expr(e) => e.max_input(),
                    _ => None,
                }),
                ("value function", spec.value_fn.max_input()),
                ("guard", spec.guard.as_ref().and_then(GuardSpec::max_input)),
            ];
            for (what, index) in reads {
                if let Some(index) = index {
                    if index >= arity {
                        return Err(OrchNetError::Arity { id: id.to_string(), what, index, arity });
                    }
                }
            }
        }
        Ok(OrchNet {
            net,
            transitions,
            initial,
            omega_count,
        })
    }

    /// All latencies zero, values `atom(<transition id>)`, initial dates zero.
    pub fn with_defaults(net: Arc<OccurrenceNet>, omega_count: usize) -> Self {
        let transitions = net
            .transitions()
            .map(|t| TransitionSpec::new(LatencySpec::constant(0), ValueFnSpec::Const(Value::atom(net.transition_id(t)))))
            .collect();
        let initial = net.minimal_places().into_iter().map(|p| (p, InitialSpec::at(0))).collect();
        OrchNet::new(net, transitions, initial, omega_count).expect("default specs are well formed")
    }

    pub fn net(&self) -> &OccurrenceNet {
        &self.net
    }

    pub fn shared_net(&self) -> &Arc<OccurrenceNet> {
        &self.net
    }

    pub fn omega_count(&self) -> usize {
        self.omega_count
    }

    pub fn transition_spec(&self, t: TransitionIx) -> &TransitionSpec {
        &self.transitions[t.0]
    }

    pub fn transition_specs(&self) -> &[TransitionSpec] {
        &self.transitions
    }

    pub fn initial_spec(&self, p: PlaceIx) -> Option<&InitialSpec> {
        self.initial.get(&p)
    }

    pub fn initial_specs(&self) -> &BTreeMap<PlaceIx, InitialSpec> {
        &self.initial
    }

    pub fn latency(&self, t: TransitionIx) -> &LatencySpec {
        &self.transitions[t.0].latency
    }

    /// Replaces a latency. Table lengths are the caller's responsibility.
    pub fn set_latency(&mut self, t: TransitionIx, spec: LatencySpec) {
        self.transitions[t.0].latency = spec;
    }

    pub fn set_value_fn(&mut self, t: TransitionIx, spec: ValueFnSpec) {
        self.transitions[t.0].value_fn = spec;
    }

    pub fn set_guard(&mut self, t: TransitionIx, guard: Option<GuardSpec>) {
        self.transitions[t.0].guard = guard;
    }

    pub fn set_initial_date(&mut self, p: PlaceIx, spec: LatencySpec) {
        if let Some(i) = self.initial.get_mut(&p) {
            i.date = spec;
        }
    }

    pub fn set_latency_by_id(&mut self, id: &str, spec: LatencySpec) {
        let t = self.net.find_transition(id).unwrap_or_else(|| panic!("no transition `{id}`"));
        self.set_latency(t, spec);
    }

    fn check_omega(&self, omega: usize) -> Result<(), ExecError> {
        if omega >= self.omega_count {
            Err(ExecError::OmegaOutOfRange {
                omega,
                count: self.omega_count,
            })
        } else {
            Ok(())
        }
    }

    /// Values and guard outcomes for `omega`; they do not depend on
    /// latencies, so one pass serves every latency family.
    pub fn evaluate_values(&self, omega: usize) -> Result<(Vec<Value>, Vec<bool>), ExecError> {
        self.check_omega(omega)?;
        let net = self.net.net();
        let mut values = vec![Value::unit(); net.node_count()];
        let mut guards = vec![true; net.transition_count()];
        let order = net.topological_order().expect("occurrence nets are acyclic");
        for node in order {
            let k = net.flat(node);
            match node {
                Node::Place(p) => {
                    values[k] = match self.net.producer(p) {
                        Some(t) => values[net.flat(Node::Transition(t))].clone(),
                        None => {
                            let spec = &self.initial[&p];
                            spec.value.eval(omega, &[]).map_err(|source| ExecError::Eval {
                                id: net.place_id(p).to_string(),
                                source,
                            })?
                        }
                    };
                }
                Node::Transition(t) => {
                    let inputs: Vec<Value> = net.preset(t).iter().map(|&p| values[p.0].clone()).collect();
                    let spec = &self.transitions[t.0];
                    let err = |source| ExecError::Eval {
                        id: net.transition_id(t).to_string(),
                        source,
                    };
                    if let Some(g) = &spec.guard {
                        guards[t.0] = g.eval(&inputs).map_err(err)?;
                    }
                    values[k] = spec.value_fn.eval(omega, &inputs).map_err(err)?;
                }
            }
        }
        Ok((values, guards))
    }

    /// Dates of every node given precomputed values.
    pub fn evaluate_dates(&self, omega: usize, values: &[Value], guards: &[bool]) -> Result<Vec<ExtDate>, ExecError> {
        self.check_omega(omega)?;
        let net = self.net.net();
        let mut dates = vec![ExtDate::ZERO; net.node_count()];
        let order = net.topological_order().expect("occurrence nets are acyclic");
        let mut inputs = Vec::new();
        for node in order {
            let k = net.flat(node);
            dates[k] = match node {
                Node::Place(p) => match self.net.producer(p) {
                    Some(t) => dates[net.flat(Node::Transition(t))],
                    None => self.initial[&p].date.eval(omega, &[]).map_err(|source| ExecError::Eval {
                        id: net.place_id(p).to_string(),
                        source,
                    })?,
                },
                Node::Transition(t) => {
                    let ready = net.preset(t).iter().map(|&p| dates[p.0]).max().unwrap_or(ExtDate::ZERO);
                    if !guards[t.0] {
                        ExtDate::Infinite
                    } else {
                        inputs.clear();
                        inputs.extend(net.preset(t).iter().map(|&p| values[p.0].clone()));
                        let tau = self.transitions[t.0].latency.eval(omega, &inputs).map_err(|source| {
                            ExecError::Eval {
                                id: net.transition_id(t).to_string(),
                                source,
                            }
                        })?;
                        ready.plus(tau)
                    }
                }
            };
        }
        Ok(dates)
    }

    pub fn evaluate(&self, omega: usize) -> Result<Evaluation, ExecError> {
        let (values, guards) = self.evaluate_values(omega)?;
        let dates = self.evaluate_dates(omega, &values, &guards)?;
        Ok(Evaluation { dates, values, guards })
    }

    /// Effective latency of every transition at `omega` (infinite where the
    /// guard fails).
    pub fn effective_latencies(&self, omega: usize) -> Result<Vec<ExtDate>, ExecError> {
        let (values, guards) = self.evaluate_values(omega)?;
        let net = self.net.net();
        net.transitions()
            .map(|t| {
                if !guards[t.0] {
                    return Ok(ExtDate::Infinite);
                }
                let inputs: Vec<Value> = net.preset(t).iter().map(|&p| values[p.0].clone()).collect();
                self.transitions[t.0].latency.eval(omega, &inputs).map_err(|source| ExecError::Eval {
                    id: net.transition_id(t).to_string(),
                    source,
                })
            })
            .collect()
    }

    /// Equivalent OrchNet whose latencies and initial dates are plain
    /// per-daemon tables and whose guards are folded into infinite latencies.
    pub fn materialize(&self) -> Result<OrchNet, ExecError> {
        let net = self.net.net();
        let mut lat: Vec<Vec<ExtDate>> = vec![Vec::with_capacity(self.omega_count); net.transition_count()];
        let mut init: BTreeMap<PlaceIx, Vec<ExtDate>> = BTreeMap::new();
        for omega in 0..self.omega_count {
            for (t, d) in self.effective_latencies(omega)?.into_iter().enumerate() {
                lat[t].push(d);
            }
            for (&p, spec) in &self.initial {
                let d = spec.date.eval(omega, &[]).map_err(|source| ExecError::Eval {
                    id: net.place_id(p).to_string(),
                    source,
                })?;
                init.entry(p).or_default().push(d);
            }
        }
        let mut out = self.clone();
        for (t, table) in lat.into_iter().enumerate() {
            out.transitions[t].latency = LatencySpec::PerOmega(table);
            out.transitions[t].guard = None;
        }
        for (p, table) in init {
            out.initial.get_mut(&p).expect("same places").date = LatencySpec::PerOmega(table);
        }
        Ok(out)
    }

    /// The future after configuration `kappa`: `kappa` and everything in
    /// conflict with it removed, except the cut of `kappa`, whose places
    /// become minimal with their computed dates and values as initial tokens.
    pub fn future(&self, kappa: &Configuration) -> Result<OrchNet, ExecError> {
        kappa.check(&self.net)?;
        let net = self.net.net();
        let rel = self.net.relations();
        let cut = kappa.cut(net);
        let in_conflict_with_kappa = |x: Node| {
            rel.transition_cone(x)
                .any(|u| !kappa.transitions.contains(&u) && kappa.transitions.iter().any(|&t| rel.directly_conflict(t, u)))
        };
        let keep: BTreeSet<Node> = net
            .nodes()
            .filter(|&x| match x {
                Node::Place(p) if cut.contains(&p) => true,
                _ => !kappa.contains(x) && !in_conflict_with_kappa(x),
            })
            .collect();
        let marked: BTreeSet<PlaceIx> = keep
            .iter()
            .filter_map(|&x| match x {
                Node::Place(p) if cut.contains(&p) || net.producers(p).is_empty() => Some(p),
                _ => None,
            })
            .collect();
        let sub = net.restrict(&keep, &marked);

        let evals: Vec<Evaluation> = (0..self.omega_count).map(|w| self.evaluate(w)).collect::<Result<_, _>>()?;
        let mut initial = BTreeMap::new();
        for &p in &marked {
            let np = sub.find_place(net.place_id(p)).expect("kept place");
            let spec = if cut.contains(&p) && !net.producers(p).is_empty() {
                InitialSpec {
                    date: LatencySpec::PerOmega(evals.iter().map(|e| e.dates[p.0]).collect()),
                    value: ValueFnSpec::Table(evals.iter().map(|e| e.values[p.0].clone()).collect()),
                }
            } else {
                self.initial[&p].clone()
            };
            initial.insert(np, spec);
        }
        let transitions = sub
            .transitions()
            .map(|t| self.transitions[net.find_transition(sub.transition_id(t)).expect("kept").0].clone())
            .collect();
        let on = OccurrenceNet::new(sub).expect("futures of occurrence nets are occurrence nets");
        Ok(OrchNet::new(Arc::new(on), transitions, initial, self.omega_count).expect("restricted specs stay valid"))
    }

    /// Same net, same value functions and guards, same daemon domain.
    pub fn same_shape(&self, other: &OrchNet) -> Result<(), ShapeMismatch> {
        let (a, b) = (self.net.net(), other.net.net());
        if a.shape() != b.shape()
            || a.place_count() != b.place_count()
            || a.places().any(|p| a.place_id(p) != b.place_id(p))
            || a.initial_marking() != b.initial_marking()
        {
            return Err(ShapeMismatch::Net);
        }
        if self.omega_count != other.omega_count {
            return Err(ShapeMismatch::Omega(self.omega_count, other.omega_count));
        }
        for t in a.transitions() {
            let (x, y) = (&self.transitions[t.0], &other.transitions[t.0]);
            if x.value_fn != y.value_fn || x.guard != y.guard {
                return Err(ShapeMismatch::Functions(a.transition_id(t).to_string()));
            }
        }
        for (p, x) in &self.initial {
            if other.initial.get(p).map(|y| &y.value) != Some(&x.value) {
                return Err(ShapeMismatch::Functions(a.place_id(*p).to_string()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeMismatch {
    #[error("the two OrchNets have different underlying nets")]
    Net,
    #[error("daemon domains differ ({0} vs {1})")]
    Omega(usize, usize),
    #[error("value functions or guards differ at `{0}`")]
    Functions(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Transition,
    InitialPlace,
}

/// Where a pointwise comparison `hi >= lo` fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderWitness {
    pub omega: usize,
    pub kind: SlotKind,
    pub id: String,
    /// `None` for value-dependent latencies, which only compare when identical.
    pub hi: Option<String>,
    pub lo: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "order", rename_all = "snake_case")]
pub enum FamilyOrder {
    Geq,
    NotGeq { witness: OrderWitness },
}

impl FamilyOrder {
    pub fn is_geq(&self) -> bool {
        matches!(self, FamilyOrder::Geq)
    }
}

/// Pointwise comparison of latency and initial-date families: `hi >= lo`
/// iff every transition latency and every initial date at every daemon
/// index is at least as large.
pub fn compare_families(hi: &OrchNet, lo: &OrchNet) -> Result<FamilyOrder, ShapeMismatch> {
    hi.same_shape(lo)?;
    let net = hi.net.net();
    let slot_ge = |a: &LatencySpec, b: &LatencySpec, omega: usize| -> Result<(), (Option<String>, Option<String>)> {
        match (a.at(omega), b.at(omega)) {
            (Some(x), Some(y)) if x >= y => Ok(()),
            (Some(x), Some(y)) => Err((Some(x.to_string()), Some(y.to_string()))),
            _ if a == b => Ok(()),
            (x, y) => Err((x.map(|d| d.to_string()), y.map(|d| d.to_string()))),
        }
    };
    for omega in 0..hi.omega_count {
        for t in net.transitions() {
            if let Err((h, l)) = slot_ge(&hi.transitions[t.0].latency, &lo.transitions[t.0].latency, omega) {
                return Ok(FamilyOrder::NotGeq {
                    witness: OrderWitness {
                        omega,
                        kind: SlotKind::Transition,
                        id: net.transition_id(t).to_string(),
                        hi: h,
                        lo: l,
                    },
                });
            }
        }
        for (p, spec) in &hi.initial {
            if let Err((h, l)) = slot_ge(&spec.date, &lo.initial[p].date, omega) {
                return Ok(FamilyOrder::NotGeq {
                    witness: OrderWitness {
                        omega,
                        kind: SlotKind::InitialPlace,
                        id: net.place_id(*p).to_string(),
                        hi: h,
                        lo: l,
                    },
                });
            }
        }
    }
    Ok(FamilyOrder::Geq)
}
