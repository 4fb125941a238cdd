//! The JSON net document: structure, schema validation with paths, and
//! conversion to and from annotated nets and OrchNets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::net::{Net, NetBuilder, PlaceIx};
use crate::number::ExtDate;
use crate::timed::{GuardSpec, InitialSpec, LatencySpec, OrchNet, TransitionSpec, Value, ValueFnSpec};
use crate::unfolding::{AnnotatedNet, NetKind};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    #[serde(default)]
    pub upward_closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_date: Option<LatencySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_value: Option<ValueFnSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub id: String,
    pub pre: Vec<String>,
    pub post: Vec<String>,
    pub latency: LatencySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_fn: Option<ValueFnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<GuardSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDocument {
    pub format_version: String,
    pub kind: NetKind,
    pub omega_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_names: Option<Vec<String>>,
    pub places: Vec<PlaceDoc>,
    pub transitions: Vec<TransitionDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grids: BTreeMap<String, Vec<ExtDate>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub initial_date_grids: BTreeMap<String, Vec<ExtDate>>,
    #[serde(default)]
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn err(path: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError {
        path: path.into(),
        message: message.into(),
    }
}

impl NetDocument {
    /// Parses and validates; every problem found is reported with its path.
    pub fn parse(text: &str) -> Result<NetDocument, Vec<SchemaError>> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: NetDocument = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            vec![err(path, e.into_inner().to_string())]
        })?;
        doc.to_annotated()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn omega_name(&self, omega: usize) -> Option<&str> {
        self.omega_names.as_ref().and_then(|n| n.get(omega)).map(String::as_str)
    }

    /// Resolves `--omega`: an index or one of the declared names.
    pub fn resolve_omega(&self, s: &str) -> Option<usize> {
        if let Ok(k) = s.parse::<usize>() {
            return (k < self.omega_count).then_some(k);
        }
        self.omega_names.as_ref()?.iter().position(|n| n == s)
    }

    fn validate_structure(&self) -> Vec<SchemaError> {
        let mut errors = Vec::new();
        if self.format_version != FORMAT_VERSION {
            errors.push(err(
                "format_version",
                format!("unsupported version `{}`, expected `{FORMAT_VERSION}`", self.format_version),
            ));
        }
        if self.omega_count == 0 {
            errors.push(err("omega_count", "must be at least 1"));
        }
        if let Some(names) = &self.omega_names {
            if names.len() != self.omega_count {
                errors.push(err("omega_names", format!("{} names for {} daemon indices", names.len(), self.omega_count)));
            }
            let distinct: BTreeSet<&String> = names.iter().collect();
            if distinct.len() != names.len() {
                errors.push(err("omega_names", "names must be distinct"));
            }
        }
        let mut ids: HashMap<&str, String> = HashMap::new();
        for (i, p) in self.places.iter().enumerate() {
            let path = format!("places[{i}].id");
            if let Some(prev) = ids.insert(&p.id, path.clone()) {
                errors.push(err(path, format!("duplicate id `{}` (first at {prev})", p.id)));
            }
        }
        let places: BTreeSet<&str> = self.places.iter().map(|p| p.id.as_str()).collect();
        for (i, t) in self.transitions.iter().enumerate() {
            let path = format!("transitions[{i}].id");
            if let Some(prev) = ids.insert(&t.id, path.clone()) {
                errors.push(err(path, format!("duplicate id `{}` (first at {prev})", t.id)));
            }
            for (side, list) in [("pre", &t.pre), ("post", &t.post)] {
                let mut seen = BTreeSet::new();
                for (j, p) in list.iter().enumerate() {
                    let path = format!("transitions[{i}].{side}[{j}]");
                    if !places.contains(p.as_str()) {
                        errors.push(err(path, format!("undeclared place `{p}`")));
                    } else if !seen.insert(p) {
                        errors.push(err(path, format!("place `{p}` listed twice")));
                    }
                }
            }
        }
        errors
    }

    fn build_net(&self) -> Net {
        let produced: BTreeSet<&str> = self.transitions.iter().flat_map(|t| t.post.iter().map(String::as_str)).collect();
        let mut b = NetBuilder::new();
        for p in &self.places {
            if produced.contains(p.id.as_str()) {
                b.place(p.id.clone());
            } else {
                b.marked_place(p.id.clone());
            }
        }
        for t in &self.transitions {
            b.transition(t.id.clone(), t.pre.iter().cloned(), t.post.iter().cloned());
        }
        b.build().expect("structure validated")
    }

    fn check_table<T>(&self, path: String, table: &[T], errors: &mut Vec<SchemaError>) {
        if table.len() != self.omega_count {
            errors.push(err(path, format!("{} entries, expected omega_count = {}", table.len(), self.omega_count)));
        }
    }

    /// Checks references, table lengths and class consistency, and builds
    /// the annotated net. Places without producers are initially marked.
    pub fn to_annotated(&self) -> Result<AnnotatedNet, Vec<SchemaError>> {
        let mut errors = self.validate_structure();
        if !errors.is_empty() {
            return Err(errors);
        }
        let net = self.build_net();

        let mut initial = BTreeMap::new();
        for (i, p) in self.places.iter().enumerate() {
            let ix = net.find_place(&p.id).expect("declared");
            let minimal = net.producers(ix).is_empty();
            if !minimal && (p.initial_date.is_some() || p.initial_value.is_some()) {
                errors.push(err(format!("places[{i}]"), format!("`{}` has a producer and cannot carry an initial token", p.id)));
                continue;
            }
            if !minimal {
                continue;
            }
            let date = p.initial_date.clone().unwrap_or(LatencySpec::constant(0));
            match &date {
                LatencySpec::PerOmega(t) => self.check_table(format!("places[{i}].initial_date.per_omega"), t, &mut errors),
                LatencySpec::Expr(e) if e.max_input().is_some() => {
                    errors.push(err(format!("places[{i}].initial_date"), "initial dates have no inputs"))
                }
                _ => {}
            }
            let value = p.initial_value.clone().unwrap_or(ValueFnSpec::Const(Value::unit()));
            match &value {
                ValueFnSpec::Table(t) => self.check_table(format!("places[{i}].initial_value.table"), t, &mut errors),
                ValueFnSpec::Const(_) => {}
                _ => errors.push(err(format!("places[{i}].initial_value"), "initial values must be `const` or `table`")),
            }
            initial.insert(ix, InitialSpec { date, value });
        }

        let by_id: HashMap<&str, &TransitionDoc> = self.transitions.iter().map(|t| (t.id.as_str(), t)).collect();
        let mut transitions = Vec::with_capacity(net.transition_count());
        let mut classes = Vec::with_capacity(net.transition_count());
        let mut class_latency: BTreeMap<String, (usize, &LatencySpec)> = BTreeMap::new();
        let position: HashMap<&str, usize> = self.transitions.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
        for t in net.transitions() {
            let id = net.transition_id(t);
            let doc = by_id[id];
            let i = position[id];
            let arity = doc.pre.len();
            if let LatencySpec::PerOmega(table) = &doc.latency {
                self.check_table(format!("transitions[{i}].latency.per_omega"), table, &mut errors);
            }
            if let LatencySpec::Expr(e) = &doc.latency {
                if let Some(k) = e.max_input().filter(|&k| k >= arity) {
                    errors.push(err(format!("transitions[{i}].latency"), format!("reads input {k} of {arity}")));
                }
            }
            let value_fn = doc.value_fn.clone().unwrap_or_else(|| ValueFnSpec::Const(Value::atom(id)));
            if let ValueFnSpec::Table(table) = &value_fn {
                self.check_table(format!("transitions[{i}].value_fn.table"), table, &mut errors);
            }
            if let Some(k) = value_fn.max_input().filter(|&k| k >= arity) {
                errors.push(err(format!("transitions[{i}].value_fn"), format!("reads input {k} of {arity}")));
            }
            if let Some(k) = doc.guard.as_ref().and_then(GuardSpec::max_input).filter(|&k| k >= arity) {
                errors.push(err(format!("transitions[{i}].guard"), format!("reads input {k} of {arity}")));
            }
            let class = doc.latency_class.clone().unwrap_or_else(|| id.to_string());
            match class_latency.get(&class) {
                Some((j, spec)) if **spec != doc.latency => errors.push(err(
                    format!("transitions[{i}].latency"),
                    format!("class `{class}` already has a different latency at transitions[{j}]"),
                )),
                Some(_) => {}
                None => {
                    class_latency.insert(class.clone(), (i, &doc.latency));
                }
            }
            classes.push(class);
            transitions.push(TransitionSpec {
                latency: doc.latency.clone(),
                value_fn,
                guard: doc.guard.clone(),
            });
        }

        for (class, grid) in &self.grids {
            if !class_latency.contains_key(class) {
                errors.push(err(format!("grids.{class}"), format!("undeclared latency class `{class}`")));
            }
            if grid.is_empty() {
                errors.push(err(format!("grids.{class}"), "empty grid"));
            }
        }
        let mut initial_date_grids = BTreeMap::new();
        for (place, grid) in &self.initial_date_grids {
            match net.find_place(place).filter(|p| initial.contains_key(p)) {
                Some(p) if !grid.is_empty() => {
                    initial_date_grids.insert(p, grid.clone());
                }
                Some(_) => errors.push(err(format!("initial_date_grids.{place}"), "empty grid")),
                None => errors.push(err(
                    format!("initial_date_grids.{place}"),
                    format!("`{place}` is not an initially marked place"),
                )),
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(AnnotatedNet {
            kind: self.kind,
            net,
            omega_count: self.omega_count,
            transitions,
            classes,
            initial,
            class_grids: self.grids.clone(),
            initial_date_grids,
            upward_closed: self.flags.upward_closed,
        })
    }

    /// Occurrence-kind document carrying exactly the specs of `orch`.
    pub fn from_orchnet(orch: &OrchNet, omega_names: Option<Vec<String>>) -> NetDocument {
        let net = orch.net().net();
        let ids = |ps: &[PlaceIx]| ps.iter().map(|&p| net.place_id(p).to_string()).collect();
        let unit = ValueFnSpec::Const(Value::unit());
        NetDocument {
            format_version: FORMAT_VERSION.to_string(),
            kind: NetKind::Occurrence,
            omega_count: orch.omega_count(),
            omega_names,
            places: net
                .places()
                .map(|p| {
                    let spec = orch.initial_spec(p);
                    PlaceDoc {
                        id: net.place_id(p).to_string(),
                        initial_date: spec.map(|s| s.date.clone()),
                        initial_value: spec.map(|s| s.value.clone()).filter(|v| *v != unit),
                    }
                })
                .collect(),
            transitions: net
                .transitions()
                .map(|t| {
                    let spec = orch.transition_spec(t);
                    TransitionDoc {
                        id: net.transition_id(t).to_string(),
                        pre: ids(net.preset(t)),
                        post: ids(net.postset(t)),
                        latency: spec.latency.clone(),
                        latency_class: None,
                        value_fn: Some(spec.value_fn.clone()),
                        guard: spec.guard.clone(),
                    }
                })
                .collect(),
            grids: BTreeMap::new(),
            initial_date_grids: BTreeMap::new(),
            flags: Flags::default(),
        }
    }
}
