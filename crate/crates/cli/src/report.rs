use std::fmt::{self, Write as _};

use serde::Serialize;
use varinv_core::report::ConditionSetReport;
use varinv_core::{Error, ZeroStatus};

use crate::problem::ProblemError;

#[derive(Clone, Debug, Serialize)]
pub struct Named {
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub id: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Condition {
    pub fn new(id: impl Into<String>, status: &ZeroStatus) -> Self {
        let witness = match status {
            ZeroStatus::NonZero(w) => Some(w.to_string()),
            _ => None,
        };
        Condition { id: id.into(), status: status.label().to_string(), witness }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub verdict: String,
    pub expressions: Vec<Named>,
    pub conditions: Vec<Condition>,
    pub diagnostics: Vec<String>,
    #[serde(skip)]
    pub exit: i32,
}

impl Report {
    pub fn new(command: &str, verdict: impl Into<String>) -> Self {
        Report {
            command: command.to_string(),
            verdict: verdict.into(),
            expressions: Vec::new(),
            conditions: Vec::new(),
            diagnostics: Vec::new(),
            exit: 0,
        }
    }

    pub fn expr(&mut self, name: impl Into<String>, value: impl fmt::Display) {
        self.expressions.push(Named { name: name.into(), value: value.to_string() });
    }

    pub fn conditions(&mut self, report: &ConditionSetReport) {
        self.conditions.extend(report.entries.iter().map(|e| Condition::new(&e.id, &e.status)));
    }

    pub fn error(command: &str, err: &Failure) -> Self {
        let mut r = Report::new(command, "error");
        if let Failure::Core(Error::ConditionsFailed(report)) = err {
            r.conditions(report);
        }
        r.diagnostics.push(err.to_string());
        r.exit = err.exit_code();
        r
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}: {}", self.command, self.verdict);
        for e in &self.expressions {
            let _ = writeln!(s, "{} = {}", e.name, e.value);
        }
        if !self.conditions.is_empty() {
            s.push_str("conditions:\n");
            for c in &self.conditions {
                match &c.witness {
                    Some(w) => writeln!(s, "  {} {} at {w}", c.id, c.status),
                    None => writeln!(s, "  {} {}", c.id, c.status),
                }
                .expect("writing to a string");
            }
        }
        for d in &self.diagnostics {
            let _ = writeln!(s, "note: {d}");
        }
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Failure {
    /// 2: conditions failed; 3: engine limitation; 4: input or shape error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Problem(_) | Failure::Io { .. } => 4,
            Failure::Core(e) => match e {
                Error::ConditionsFailed(_)
                | Error::IncompatibleHessian(_)
                | Error::AsymmetryUnrepairable { .. }
                | Error::NotNullLagrangian { .. } => 2,
                Error::NotClosedFormIntegrable(_)
                | Error::AnsatzFailed { .. }
                | Error::PoleExhaustion { .. }
                | Error::PotentialVerificationFailed(_)
                | Error::VerificationFailed(_) => 3,
                _ => 4,
            },
        }
    }
}
