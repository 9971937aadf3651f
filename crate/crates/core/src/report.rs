//! Verdict reports shared by the CLI and the acceptance harness.
//!
//! The report body is deterministic for a given configuration; wall-clock
//! timing lives in a separate top-level field so bodies can be compared.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// Informational entry; never affects the exit code.
    Value,
}

/// One named entry. Comparisons carry both operands as text, so exact
/// values appear as lossless `"p/q"` strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn pass_fail(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

impl Verdict {
    pub fn compare(name: impl Into<String>, lhs: impl Into<String>, relation: &str, rhs: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            outcome: pass_fail(ok),
            relation: Some(relation.to_string()),
            lhs: Some(lhs.into()),
            rhs: Some(rhs.into()),
            detail: None,
        }
    }

    /// `lhs relation rhs` decided by the scalar's own comparison.
    pub fn scalar<S: Scalar>(name: impl Into<String>, lhs: &S, relation: &str, rhs: &S) -> Self {
        let ok = match relation {
            "=" => lhs == rhs,
            "<" => lhs < rhs,
            "<=" => lhs <= rhs,
            ">" => lhs > rhs,
            ">=" => lhs >= rhs,
            "!=" => lhs != rhs,
            other => panic!("unknown relation {other}"),
        };
        Self::compare(name, lhs.to_text(), relation, rhs.to_text(), ok)
    }

    /// Equality within an absolute tolerance, for float mode.
    pub fn approx(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let mut v = Self::compare(name, lhs.to_string(), "~=", rhs.to_string(), (lhs - rhs).abs() <= tol);
        v.detail = Some(format!("tolerance {tol:e}"));
        v
    }

    pub fn check(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), outcome: pass_fail(ok), relation: None, lhs: None, rhs: None, detail: Some(detail.into()) }
    }

    pub fn value(name: impl Into<String>, value: impl Into<String>) -> Self {
        Self { name: name.into(), outcome: Outcome::Value, relation: None, lhs: Some(value.into()), rhs: None, detail: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn failed(&self) -> bool {
        self.outcome == Outcome::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config: Value,
}

impl Provenance {
    pub fn new(config: Value) -> Self {
        Self { tool: env!("CARGO_PKG_NAME").to_string(), version: env!("CARGO_PKG_VERSION").to_string(), config }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBody {
    pub command: String,
    pub verdicts: Vec<Verdict>,
    /// Command-specific payload such as certificates or tables.
    pub data: Value,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    #[serde(flatten)]
    pub body: ReportBody,
    pub timing: Timing,
}

impl ReportBody {
    pub fn new(command: impl Into<String>, config: Value) -> Self {
        Self { command: command.into(), verdicts: Vec::new(), data: Value::Null, provenance: Provenance::new(config) }
    }

    pub fn push(&mut self, verdict: Verdict) {
        self.verdicts.push(verdict);
    }

    pub fn passed(&self) -> bool {
        !self.verdicts.iter().any(Verdict::failed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.body.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// One row per verdict; payload and provenance are JSON-only.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let io = |e: csv::Error| Error::Parse(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["command", "name", "outcome", "lhs", "relation", "rhs", "detail"]).map_err(io)?;
        for v in &self.body.verdicts {
            let outcome = match v.outcome {
                Outcome::Pass => "pass",
                Outcome::Fail => "fail",
                Outcome::Value => "value",
            };
            let opt = |s: &Option<String>| s.clone().unwrap_or_default();
            w.write_record([
                self.body.command.clone(),
                v.name.clone(),
                outcome.to_string(),
                opt(&v.lhs),
                opt(&v.relation),
                opt(&v.rhs),
                opt(&v.detail),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }
}
