//! Net documents, reports and the command-line front end.

mod cli;
mod document;
pub mod report;

use std::collections::BTreeSet;

pub use cli::run_cli;
pub use document::{Flags, NetDocument, PlaceDoc, SchemaError, TransitionDoc, FORMAT_VERSION};

use crate::timed::Value;

/// `{a, b}` rendering of a value set.
pub fn format_values(values: &BTreeSet<Value>) -> String {
    let items: Vec<String> = values.iter().map(Value::to_string).collect();
    format!("{{{}}}", items.join(", "))
}
