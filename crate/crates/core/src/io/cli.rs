//! `orchnet` subcommands. Reports go to standard output as JSON,
//! diagnostics to standard error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use super::report::{self, tie_name};
use super::NetDocument;
use crate::monotony::{
    brute_force_monotony, check_global_condition, conditional_monotony_check, structural_check,
    synthesize_counterexample, verify_counterexample, violating_clusters, CheckOptions, GlobalCondition,
    MonotonyError, MonotonyVerdict, Outcome, DEFAULT_MEMBER_CAP,
};
use crate::net::{is_sound, validate_occurrence_net, SoundnessVerdict, WorkflowNet, DEFAULT_STATE_CAP};
use crate::timed::{execute, ExecError, OrchNet, TieBreak};
use crate::unfolding::{AnnotatedNet, NetKind, UnfoldError, UnfoldingResult};

const EXIT_OK: i32 = 0;
const EXIT_VIOLATION: i32 = 1;
const EXIT_INPUT: i32 = 2;
const EXIT_UNDECIDED: i32 = 3;

#[derive(Parser)]
#[command(name = "orchnet", version, about = "Latency monotony analysis of timed orchestration nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Lex,
    All,
}

impl From<TieArg> for TieBreak {
    fn from(t: TieArg) -> TieBreak {
        match t {
            TieArg::Lex => TieBreak::Lexicographic,
            TieArg::All => TieBreak::EnumerateAll,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Net document (JSON).
    file: PathBuf,
    /// Bound on reachable markings explored by the soundness check.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,
    /// Bound on enumerated maximal configurations.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    config_cap: usize,
    /// Bound on enumerated grid members.
    #[arg(long, default_value_t = DEFAULT_MEMBER_CAP)]
    member_cap: usize,
    #[arg(long, value_enum, default_value = "lex")]
    tie_break: TieArg,
}

#[derive(Args)]
struct WithOmega {
    #[command(flatten)]
    common: Common,
    /// Daemon index, or one of the document's omega names.
    #[arg(long, default_value = "0")]
    omega: String,
}

#[derive(Subcommand)]
enum Command {
    /// Check the document, the net's structure and soundness.
    Validate(Common),
    /// Print the unfolding and its morphism.
    Unfold(Common),
    /// Run the race policy for one daemon index.
    Simulate(WithOmega),
    /// Cluster condition, with a synthesized pair when it fails.
    CheckStructural(Common),
    /// Compare the occurring configuration against all maximal ones.
    CheckGlobal(WithOmega),
    /// Exhaustive search over the latency grids.
    Oracle(Common),
    /// Synthesize and verify a counterexample pair.
    Counterexample(WithOmega),
    /// Monotony restricted to runs returning equal values.
    CheckConditional(Common),
}

impl Common {
    fn options(&self) -> CheckOptions {
        CheckOptions {
            state_cap: self.state_cap,
            config_cap: self.config_cap,
            member_cap: self.member_cap,
            tie_break: self.tie_break.into(),
        }
    }
}

struct Session<'a> {
    echo: Vec<String>,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Outcome of a subcommand: report body plus exit code.
type Reported = (Json, i32);

struct Failure {
    verdict: &'static str,
    messages: Vec<String>,
    code: i32,
}

impl Failure {
    fn input(messages: Vec<String>) -> Self {
        Failure {
            verdict: "input_error",
            messages,
            code: EXIT_INPUT,
        }
    }
}

impl From<UnfoldError> for Failure {
    fn from(e: UnfoldError) -> Self {
        match e {
            UnfoldError::Undecided(_) | UnfoldError::EventCap(_) => Failure {
                verdict: "undecided",
                messages: vec![e.to_string()],
                code: EXIT_UNDECIDED,
            },
            UnfoldError::Unsound(_) => Failure {
                verdict: "unsound",
                messages: vec![e.to_string()],
                code: EXIT_INPUT,
            },
            _ => Failure::input(vec![e.to_string()]),
        }
    }
}

impl From<MonotonyError> for Failure {
    fn from(e: MonotonyError) -> Self {
        match e {
            MonotonyError::Unfold(u) => u.into(),
            MonotonyError::Unsound(_) => Failure {
                verdict: "unsound",
                messages: vec![e.to_string()],
                code: EXIT_INPUT,
            },
            _ => Failure::input(vec![e.to_string()]),
        }
    }
}

impl From<ExecError> for Failure {
    fn from(e: ExecError) -> Self {
        Failure::input(vec![e.to_string()])
    }
}

struct Loaded {
    doc: NetDocument,
    ann: AnnotatedNet,
}

impl Loaded {
    fn names(&self) -> Option<&Vec<String>> {
        self.doc.omega_names.as_ref()
    }

    fn omega(&self, s: &str) -> Result<usize, Failure> {
        self.doc.resolve_omega(s).ok_or_else(|| {
            Failure::input(vec![format!("--omega `{s}` is neither an index below {} nor a declared name", self.doc.omega_count)])
        })
    }

    fn omega_json(&self, omega: usize) -> Json {
        json!({ "index": omega, "name": self.doc.omega_name(omega) })
    }

    fn unfolded(&self, opts: &CheckOptions) -> Result<(UnfoldingResult, OrchNet), Failure> {
        let u = self.ann.unfold(opts.state_cap)?;
        let orch = self
            .ann
            .induced_orchnet(&u)
            .map_err(|e| Failure::input(vec![e.to_string()]))?;
        Ok((u, orch))
    }
}

fn load(path: &PathBuf) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(vec![format!("cannot read {}: {e}", path.display())]))?;
    let doc = NetDocument::parse(&text).map_err(|errs| Failure::input(errs.iter().map(ToString::to_string).collect()))?;
    let ann = doc.to_annotated().map_err(|errs| Failure::input(errs.iter().map(ToString::to_string).collect()))?;
    Ok(Loaded { doc, ann })
}

fn verdict_code(v: &MonotonyVerdict) -> i32 {
    match v.outcome {
        Outcome::Monotonic | Outcome::ConditionallyMonotonic => EXIT_OK,
        Outcome::NonMonotonic => EXIT_VIOLATION,
        Outcome::Undecided if !v.clusters.is_empty() => EXIT_VIOLATION,
        Outcome::Undecided => EXIT_UNDECIDED,
    }
}

fn validate(c: &Common) -> Result<Reported, Failure> {
    let l = load(&c.file)?;
    let net = &l.ann.net;
    let mut body = json!({
        "kind": l.ann.kind,
        "places": net.place_count(),
        "transitions": net.transition_count(),
        "omega_count": l.ann.omega_count,
    });
    match l.ann.kind {
        NetKind::Occurrence => {
            let violations = validate_occurrence_net(net);
            let ok = violations.is_empty();
            body["occurrence_violations"] = json!(violations);
            if !ok {
                body["verdict"] = json!("invalid");
                return Ok((body, EXIT_INPUT));
            }
        }
        NetKind::Workflow => {
            let wf = match WorkflowNet::new(net.clone()) {
                Ok(wf) => wf,
                Err(e) => {
                    body["verdict"] = json!("invalid");
                    body["workflow_error"] = json!(e.to_string());
                    return Ok((body, EXIT_INPUT));
                }
            };
            let s = is_sound(&wf, c.state_cap);
            body["soundness"] = json!(s);
            match s {
                SoundnessVerdict::Sound => {}
                SoundnessVerdict::Unsound { .. } => {
                    body["verdict"] = json!("unsound");
                    return Ok((body, EXIT_INPUT));
                }
                SoundnessVerdict::Undecided { .. } => {
                    body["verdict"] = json!("undecided");
                    return Ok((body, EXIT_UNDECIDED));
                }
            }
        }
    }
    let (u, _) = l.unfolded(&c.options())?;
    body["unfolding_events"] = json!(u.unfolding.transition_count());
    body["verdict"] = json!("valid");
    Ok((body, EXIT_OK))
}

fn unfold(c: &Common) -> Result<Reported, Failure> {
    let l = load(&c.file)?;
    let (u, orch) = l.unfolded(&c.options())?;
    let names = l.names().cloned();
    Ok((
        json!({
            "verdict": "ok",
            "unfolding": u.report(&l.ann.net),
            "document": NetDocument::from_orchnet(&orch, names),
        }),
        EXIT_OK,
    ))
}

fn simulate(a: &WithOmega) -> Result<Reported, Failure> {
    let l = load(&a.common.file)?;
    let omega = l.omega(&a.omega)?;
    let (u, orch) = l.unfolded(&a.common.options())?;
    let tie: TieBreak = a.common.tie_break.into();
    let runs = execute(&orch, omega, tie)?;
    let net = orch.net().net();
    let first = &runs[0];
    let tie_sensitive = runs.iter().any(|r| r.end_to_end != first.end_to_end || r.values != first.values);
    Ok((
        json!({
            "verdict": "ok",
            "omega": l.omega_json(omega),
            "tie_break": tie_name(tie),
            "E": first.end_to_end.to_string(),
            "V": super::format_values(&first.values),
            "occurring": report::configuration(net, &first.configuration),
            "tie_sensitive": tie_sensitive,
            "runs": runs.iter().map(|r| report::run(net, Some((&l.ann.net, &u.morphism)), r)).collect::<Vec<_>>(),
        }),
        EXIT_OK,
    ))
}

fn check_structural(c: &Common) -> Result<Reported, Failure> {
    let l = load(&c.file)?;
    let v = structural_check(&l.ann, &c.options())?;
    Ok((report::verdict(&v, l.names()), verdict_code(&v)))
}

fn check_global(a: &WithOmega) -> Result<Reported, Failure> {
    let l = load(&a.common.file)?;
    let omega = l.omega(&a.omega)?;
    let (_, orch) = l.unfolded(&a.common.options())?;
    let net = orch.net().net();
    let body = match check_global_condition(&orch, omega, a.common.config_cap)? {
        GlobalCondition::Holds { occurring, e } => (
            json!({
                "verdict": "holds",
                "occurring": report::configuration(net, &occurring),
                "E_occurring": e.to_string(),
            }),
            EXIT_OK,
        ),
        GlobalCondition::Violated {
            occurring,
            e_occurring,
            kappa,
            e_kappa,
            violations,
        } => (
            json!({
                "verdict": "violated",
                "occurring": report::configuration(net, &occurring),
                "E_occurring": e_occurring.to_string(),
                "kappa": report::configuration(net, &kappa),
                "E_kappa": e_kappa.to_string(),
                "violations": violations,
            }),
            EXIT_VIOLATION,
        ),
        GlobalCondition::Undecided { cap } => (
            json!({ "verdict": "undecided", "notes": [format!("more than {cap} maximal configurations")] }),
            EXIT_UNDECIDED,
        ),
    };
    let (mut j, code) = body;
    j["omega"] = l.omega_json(omega);
    Ok((j, code))
}

fn oracle(c: &Common) -> Result<Reported, Failure> {
    let l = load(&c.file)?;
    let opts = c.options();
    let u = l.ann.unfold(opts.state_cap)?;
    let pre = l.ann.induced_preorchnet(&u).map_err(|e| Failure::input(vec![e.to_string()]))?;
    let v = brute_force_monotony(&pre, &opts)?;
    let mut j = report::verdict(&v, l.names());
    j["members"] = json!(pre.member_count().to_string());
    j["tie_break"] = json!(tie_name(opts.tie_break));
    Ok((j, verdict_code(&v)))
}

fn counterexample(a: &WithOmega) -> Result<Reported, Failure> {
    let l = load(&a.common.file)?;
    let omega = l.omega(&a.omega)?;
    let opts = a.common.options();
    let clusters = violating_clusters(&l.ann.net);
    let Some(first) = clusters.first() else {
        return Ok((
            json!({ "verdict": "no_violation", "notes": ["every cluster satisfies the cluster condition"] }),
            EXIT_OK,
        ));
    };
    match synthesize_counterexample(&l.ann, first, omega, &opts) {
        Ok(s) => {
            let v = verify_counterexample(&s.pair.lo, &s.pair.hi, omega, opts.tie_break)?;
            let net = s.pair.lo.net().net();
            Ok((
                json!({
                    "verdict": if v.accepted { "counterexample" } else { "rejected" },
                    "cluster": first,
                    "kappa_dagger": report::configuration(net, &s.kappa_dagger),
                    "witness": report::pair(&s.pair, l.names()),
                    "verification": report::verification(&v),
                    "notes": s.log,
                }),
                if v.accepted { EXIT_VIOLATION } else { EXIT_UNDECIDED },
            ))
        }
        Err(e @ (MonotonyError::NoFiniteMember(_) | MonotonyError::SynthesisFailed(_))) => Ok((
            json!({ "verdict": "undecided", "cluster": first, "notes": [e.to_string()] }),
            EXIT_UNDECIDED,
        )),
        Err(e) => Err(e.into()),
    }
}

fn check_conditional(c: &Common) -> Result<Reported, Failure> {
    let l = load(&c.file)?;
    let opts = c.options();
    let u = l.ann.unfold(opts.state_cap)?;
    let pre = l.ann.induced_preorchnet(&u).map_err(|e| Failure::input(vec![e.to_string()]))?;
    let v = conditional_monotony_check(&pre, &opts)?;
    Ok((report::verdict(&v, l.names()), verdict_code(&v)))
}

impl Session<'_> {
    fn emit(&mut self, mut body: Json) {
        let mut report = serde_json::Map::new();
        report.insert("command".into(), json!(self.echo));
        if let Json::Object(map) = &mut body {
            report.append(map);
        }
        let text = serde_json::to_string_pretty(&Json::Object(report)).expect("reports serialize");
        let _ = writeln!(self.out, "{text}");
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code: 0 pass, 1 violation with witness, 2 input error, 3 undecided.
pub fn run_cli(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let mut session = Session {
        echo: argv.iter().skip(1).cloned().collect(),
        out,
        err,
    };
    let result = match &cli.command {
        Command::Validate(c) => validate(c),
        Command::Unfold(c) => unfold(c),
        Command::Simulate(a) => simulate(a),
        Command::CheckStructural(c) => check_structural(c),
        Command::CheckGlobal(a) => check_global(a),
        Command::Oracle(c) => oracle(c),
        Command::Counterexample(a) => counterexample(a),
        Command::CheckConditional(c) => check_conditional(c),
    };
    match result {
        Ok((body, code)) => {
            session.emit(body);
            code
        }
        Err(f) => {
            for m in &f.messages {
                let _ = writeln!(session.err, "error: {m}");
            }
            session.emit(json!({ "verdict": f.verdict, "errors": f.messages }));
            f.code
        }
    }
}
