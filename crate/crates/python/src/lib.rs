//! Python bindings: load net documents, run the race policy, and run the
//! monotony checks. Reports come back as the same dictionaries the command
//! line prints.

use std::path::PathBuf;

use orchnet::io::{format_values, report, run_cli as cli, NetDocument};
use orchnet::monotony::{
    brute_force_monotony, check_global_condition, conditional_monotony_check, structural_check,
    synthesize_counterexample, verify_counterexample, violating_clusters, CheckOptions, GlobalCondition,
    MonotonyError, MonotonyVerdict, PairWitness,
};
use orchnet::timed::{execute, OrchNet, TieBreak, TimedRun};
use orchnet::unfolding::{AnnotatedNet, UnfoldingResult};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_error(e: impl ToString) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, j: &serde_json::Value) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(j).map_err(runtime_error)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn tie_break(s: &str) -> PyResult<TieBreak> {
    match s {
        "lex" => Ok(TieBreak::Lexicographic),
        "all" => Ok(TieBreak::EnumerateAll),
        other => Err(value_error(format!("tie_break must be `lex` or `all`, not `{other}`"))),
    }
}

#[derive(FromPyObject)]
enum OmegaArg {
    Index(usize),
    Name(String),
}

/// A parsed net document.
#[pyclass(name = "Net", module = "pyorchnet", frozen)]
struct PyNet {
    doc: NetDocument,
    ann: AnnotatedNet,
}

impl PyNet {
    fn from_doc(doc: NetDocument) -> PyResult<Self> {
        let ann = doc.to_annotated().map_err(|errs| {
            value_error(errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))
        })?;
        Ok(PyNet { doc, ann })
    }

    fn omega(&self, omega: &OmegaArg) -> PyResult<usize> {
        let found = match omega {
            OmegaArg::Index(i) => (*i < self.doc.omega_count).then_some(*i),
            OmegaArg::Name(s) => self.doc.resolve_omega(s),
        };
        found.ok_or_else(|| value_error("unknown daemon index"))
    }

    fn unfolded(&self, opts: &CheckOptions) -> PyResult<(UnfoldingResult, OrchNet)> {
        let u = self.ann.unfold(opts.state_cap).map_err(value_error)?;
        let orch = self.ann.induced_orchnet(&u).map_err(value_error)?;
        Ok((u, orch))
    }

    fn names(&self) -> Option<&Vec<String>> {
        self.doc.omega_names.as_ref()
    }
}

fn options(tie: &str) -> PyResult<CheckOptions> {
    Ok(CheckOptions {
        tie_break: tie_break(tie)?,
        ..CheckOptions::default()
    })
}

#[pymethods]
impl PyNet {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc = NetDocument::parse(text).map_err(|errs| {
            value_error(errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))
        })?;
        PyNet::from_doc(doc)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(value_error)?;
        PyNet::from_json(&text)
    }

    fn to_json(&self) -> String {
        self.doc.to_json()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.ann.kind {
            orchnet::unfolding::NetKind::Workflow => "workflow",
            orchnet::unfolding::NetKind::Occurrence => "occurrence",
        }
    }

    #[getter]
    fn omega_count(&self) -> usize {
        self.doc.omega_count
    }

    #[getter]
    fn places(&self) -> Vec<String> {
        self.doc.places.iter().map(|p| p.id.clone()).collect()
    }

    #[getter]
    fn transitions(&self) -> Vec<String> {
        self.doc.transitions.iter().map(|t| t.id.clone()).collect()
    }

    /// Unfolding with the label of every event and condition.
    fn unfold(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let (u, _) = self.unfolded(&CheckOptions::default())?;
        let j = serde_json::to_value(u.report(&self.ann.net)).map_err(runtime_error)?;
        to_py(py, &j)
    }

    /// Race-policy runs for one daemon index; one run under `lex`, one per
    /// distinct outcome under `all`.
    #[pyo3(signature = (omega = OmegaArg::Index(0), tie_break = "lex"))]
    fn simulate(&self, omega: OmegaArg, tie_break: &str) -> PyResult<Vec<Run>> {
        let opts = options(tie_break)?;
        let w = self.omega(&omega)?;
        let (_, orch) = self.unfolded(&opts)?;
        let runs = execute(&orch, w, opts.tie_break).map_err(value_error)?;
        Ok(runs.iter().map(|r| Run::new(&orch, r)).collect())
    }

    #[pyo3(signature = (tie_break = "lex"))]
    fn check_structural(&self, tie_break: &str) -> PyResult<Verdict> {
        let v = structural_check(&self.ann, &options(tie_break)?).map_err(value_error)?;
        Ok(Verdict::new(&v, self.names()))
    }

    #[pyo3(signature = (omega = OmegaArg::Index(0)))]
    fn check_global(&self, py: Python<'_>, omega: OmegaArg) -> PyResult<Py<PyAny>> {
        let opts = CheckOptions::default();
        let w = self.omega(&omega)?;
        let (_, orch) = self.unfolded(&opts)?;
        let net = orch.net().net();
        let j = match check_global_condition(&orch, w, opts.config_cap).map_err(value_error)? {
            GlobalCondition::Holds { occurring, e } => serde_json::json!({
                "verdict": "holds",
                "occurring": report::configuration(net, &occurring),
                "E_occurring": e.to_string(),
            }),
            GlobalCondition::Violated { occurring, e_occurring, kappa, e_kappa, .. } => serde_json::json!({
                "verdict": "violated",
                "occurring": report::configuration(net, &occurring),
                "E_occurring": e_occurring.to_string(),
                "kappa": report::configuration(net, &kappa),
                "E_kappa": e_kappa.to_string(),
            }),
            GlobalCondition::Undecided { cap } => serde_json::json!({ "verdict": "undecided", "cap": cap }),
        };
        to_py(py, &j)
    }

    /// Exhaustive search over the latency grids.
    #[pyo3(signature = (tie_break = "lex", member_cap = None))]
    fn oracle(&self, tie_break: &str, member_cap: Option<usize>) -> PyResult<Verdict> {
        let mut opts = options(tie_break)?;
        if let Some(cap) = member_cap {
            opts.member_cap = cap;
        }
        let u = self.ann.unfold(opts.state_cap).map_err(value_error)?;
        let pre = self.ann.induced_preorchnet(&u).map_err(value_error)?;
        let v = brute_force_monotony(&pre, &opts).map_err(value_error)?;
        Ok(Verdict::new(&v, self.names()))
    }

    #[pyo3(signature = (tie_break = "lex"))]
    fn check_conditional(&self, tie_break: &str) -> PyResult<Verdict> {
        let opts = options(tie_break)?;
        let u = self.ann.unfold(opts.state_cap).map_err(value_error)?;
        let pre = self.ann.induced_preorchnet(&u).map_err(value_error)?;
        let v = conditional_monotony_check(&pre, &opts).map_err(value_error)?;
        Ok(Verdict::new(&v, self.names()))
    }

    /// Synthesized pair for the first violating cluster, or `None` when
    /// every cluster passes.
    #[pyo3(signature = (omega = OmegaArg::Index(0)))]
    fn counterexample(&self, omega: OmegaArg) -> PyResult<Option<Pair>> {
        let opts = CheckOptions::default();
        let w = self.omega(&omega)?;
        let Some(first) = violating_clusters(&self.ann.net).into_iter().next() else {
            return Ok(None);
        };
        match synthesize_counterexample(&self.ann, &first, w, &opts) {
            Ok(s) => Pair::new(&s.pair, self.names()).map(Some),
            Err(e @ (MonotonyError::NoFiniteMember(_) | MonotonyError::SynthesisFailed(_))) => Err(runtime_error(e)),
            Err(e) => Err(value_error(e)),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Net(kind={}, places={}, transitions={}, omega_count={})",
            self.kind(),
            self.doc.places.len(),
            self.doc.transitions.len(),
            self.doc.omega_count
        )
    }
}

/// One execution under the race policy.
#[pyclass(module = "pyorchnet", frozen, get_all)]
struct Run {
    omega: usize,
    end_to_end: String,
    values: String,
    occurring: Vec<String>,
    stalled: Vec<String>,
    /// `(transition, date)` in firing order.
    steps: Vec<(String, String)>,
}

impl Run {
    fn new(orch: &OrchNet, r: &TimedRun) -> Self {
        let net = orch.net().net();
        Run {
            omega: r.omega,
            end_to_end: r.end_to_end.to_string(),
            values: format_values(&r.values),
            occurring: r.configuration.transition_ids(net),
            stalled: r.stalled.iter().map(|&t| net.transition_id(t).to_string()).collect(),
            steps: r
                .steps
                .iter()
                .map(|s| (net.transition_id(s.transition).to_string(), s.date.to_string()))
                .collect(),
        }
    }
}

#[pymethods]
impl Run {
    fn __repr__(&self) -> String {
        format!("Run(E={}, V={}, occurring={:?})", self.end_to_end, self.values, self.occurring)
    }
}

/// Outcome of a monotony check.
#[pyclass(module = "pyorchnet", frozen)]
struct Verdict {
    #[pyo3(get)]
    outcome: &'static str,
    #[pyo3(get)]
    grid_relative: bool,
    #[pyo3(get)]
    notes: Vec<String>,
    report: serde_json::Value,
}

impl Verdict {
    fn new(v: &MonotonyVerdict, names: Option<&Vec<String>>) -> Self {
        Verdict {
            outcome: report::outcome_name(v.outcome),
            grid_relative: v.grid_relative,
            notes: v.notes.clone(),
            report: report::verdict(v, names),
        }
    }
}

#[pymethods]
impl Verdict {
    /// The full report, including clusters and witness documents.
    fn report(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.report)
    }

    fn __repr__(&self) -> String {
        format!("Verdict(outcome={})", self.outcome)
    }
}

/// `hi >= lo` with a smaller end-to-end latency for `hi`.
#[pyclass(module = "pyorchnet", frozen, get_all)]
struct Pair {
    lo: Py<PyNet>,
    hi: Py<PyNet>,
    omega: usize,
    e_lo: String,
    e_hi: String,
    v_lo: String,
    v_hi: String,
}

impl Pair {
    fn new(w: &PairWitness, names: Option<&Vec<String>>) -> PyResult<Self> {
        let side = |o: &OrchNet| PyNet::from_doc(NetDocument::from_orchnet(o, names.cloned()));
        let (lo, hi) = (side(&w.lo)?, side(&w.hi)?);
        Python::attach(|py| {
            Ok(Pair {
                lo: Py::new(py, lo)?,
                hi: Py::new(py, hi)?,
                omega: w.omega,
                e_lo: w.e_lo.to_string(),
                e_hi: w.e_hi.to_string(),
                v_lo: format_values(&w.v_lo),
                v_hi: format_values(&w.v_hi),
            })
        })
    }
}

#[pymethods]
impl Pair {
    fn __repr__(&self) -> String {
        format!("Pair(omega={}, E_lo={}, E_hi={})", self.omega, self.e_lo, self.e_hi)
    }
}

/// Checks `hi >= lo` pointwise and `E(hi) < E(lo)` at `omega`.
#[pyfunction]
#[pyo3(signature = (lo, hi, omega = 0, tie_break = "lex"))]
fn verify(lo: &PyNet, hi: &PyNet, omega: usize, tie_break: &str) -> PyResult<bool> {
    let opts = options(tie_break)?;
    let (_, lo) = lo.unfolded(&opts)?;
    let (_, hi) = hi.unfolded(&opts)?;
    let v = verify_counterexample(&lo, &hi, omega, opts.tie_break).map_err(value_error)?;
    Ok(v.accepted)
}

/// Runs the command line with `args` (without the program name) and returns
/// `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("orchnet".to_string()).chain(args).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli(&argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

#[pymodule]
fn pyorchnet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNet>()?;
    m.add_class::<Run>()?;
    m.add_class::<Verdict>()?;
    m.add_class::<Pair>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
