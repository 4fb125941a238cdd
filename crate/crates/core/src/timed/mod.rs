//! Timed, colored semantics of occurrence nets: values, latencies, dates and
//! the race policy.

mod exec;
mod orchnet;
mod spec;
mod value;

pub use exec::{end_to_end, end_to_end_all, eval_dates, execute, execute_lex, execute_parts, execute_with, latency, Step, Tie, TieBreak, TimedRun};
pub use orchnet::{
    compare_families, Evaluation, ExecError, FamilyOrder, InitialSpec, OrchNet, OrchNetError, OrderWitness,
    ShapeMismatch, SlotKind, TransitionSpec,
};
pub use spec::{EvalError, Expr, ExprError, GuardOp, GuardSpec, LatencySpec, Operand, ValueFnSpec};
pub use value::Value;

#[cfg(test)]
mod tests;
