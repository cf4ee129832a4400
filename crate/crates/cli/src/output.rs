//! Long-format CSV rows and their deterministic serialization.

use std::io::Write;

use sha2::{Digest, Sha256};

pub const COLUMNS: [&str; 8] = ["run_id", "command", "param", "param_value", "quantity", "index", "value", "status"];

/// Row status. The failing variants turn the exit status into 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A bound or identity that must hold did not.
    Violation,
    NoBoundState,
    DegeneratePerturbation,
    /// The requested bound has no formula for this curvature regime.
    UnsupportedRegime,
    /// Diagnostic that is expected but not guaranteed, e.g. monotone decay in separation.
    Nonmonotone,
    /// The quantity does not apply, e.g. Geršgorin for a subcritical surface.
    NotApplicable,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Violation => "violation",
            Status::NoBoundState => "no-bound-state",
            Status::DegeneratePerturbation => "degenerate-perturbation",
            Status::UnsupportedRegime => "unsupported-regime",
            Status::Nonmonotone => "nonmonotone",
            Status::NotApplicable => "not-applicable",
            Status::Error => "error",
        }
    }

    pub fn is_failure(self) -> bool {
        matches!(self, Status::Violation | Status::NoBoundState | Status::DegeneratePerturbation | Status::Error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub param: Option<(String, f64)>,
    pub quantity: String,
    pub index: Option<usize>,
    pub value: Option<f64>,
    pub status: Status,
}

/// Accumulates rows for one command invocation.
#[derive(Debug, Default)]
pub struct Rows {
    pub rows: Vec<Row>,
    param: Option<(String, f64)>,
}

impl Rows {
    /// Tags subsequent rows with a sweep parameter value.
    pub fn set_param(&mut self, name: &str, value: f64) {
        self.param = Some((name.to_string(), value));
    }

    pub fn clear_param(&mut self) {
        self.param = None;
    }

    pub fn push(&mut self, quantity: &str, index: Option<usize>, value: Option<f64>, status: Status) {
        self.rows.push(Row { param: self.param.clone(), quantity: quantity.to_string(), index, value, status });
    }

    pub fn value(&mut self, quantity: &str, value: f64) {
        self.push(quantity, None, Some(value), Status::Ok);
    }

    pub fn indexed(&mut self, quantity: &str, index: usize, value: f64) {
        self.push(quantity, Some(index), Some(value), Status::Ok);
    }

    /// A row whose status records whether `ok` held.
    pub fn check(&mut self, quantity: &str, index: Option<usize>, value: f64, ok: bool) {
        self.push(quantity, index, Some(value), if ok { Status::Ok } else { Status::Violation });
    }

    pub fn any_failure(&self) -> bool {
        self.rows.iter().any(|r| r.status.is_failure())
    }
}

/// Shortest round-trip scientific notation; identical bits give identical text.
pub fn format_float(x: f64) -> String {
    format!("{x:e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes the `# config_sha256=` comment line, the header and all rows.
pub fn write_csv<W: Write>(
    out: W,
    config_bytes: &[u8],
    run_id: &str,
    command: &str,
    rows: &[Row],
) -> std::io::Result<()> {
    let mut out = out;
    write!(out, "# config_sha256={}\r\n", sha256_hex(config_bytes))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        let (param, param_value) = match &r.param {
            Some((name, v)) => (name.clone(), format_float(*v)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            run_id.to_string(),
            command.to_string(),
            param,
            param_value,
            r.quantity.clone(),
            r.index.map(|i| i.to_string()).unwrap_or_default(),
            r.value.map(format_float).unwrap_or_default(),
            r.status.as_str().to_string(),
        ])?;
    }
    w.flush()
}
