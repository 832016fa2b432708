//! CSV/JSON output helpers shared by the experiment drivers.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Full-precision scientific notation (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Write a header line and one row per item.
pub fn write_csv<W: Write, T>(mut w: W, header: &str, rows: &[T], row: impl Fn(&T) -> String) -> Result<()> {
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{}", row(r))?;
    }
    Ok(())
}

/// One named claim checked by an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Assertion { name: name.into(), passed, detail: detail.into() }
    }
}

/// JSON summary emitted by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Summary<T: Serialize> {
    pub command: String,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    pub data: T,
}

impl<T: Serialize> Summary<T> {
    pub fn new(command: impl Into<String>, assertions: Vec<Assertion>, data: T) -> Self {
        let passed = assertions.iter().all(|a| a.passed);
        Summary { command: command.into(), passed, assertions, data }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }
}
