//! Condition reports shared by the variationality checks and the solvers.

use std::fmt;

use crate::error::Result;
use crate::expr::Expr;
use crate::zero::{is_zero, ZeroStatus, ZeroTestConfig};

#[derive(Clone, Debug)]
pub struct ConditionEntry {
    /// Stable identifier such as `(3.2)[1,1,2]`.
    pub id: String,
    /// Left-hand side minus right-hand side.
    pub residual: Expr,
    pub status: ZeroStatus,
}

#[derive(Clone, Debug, Default)]
pub struct ConditionSetReport {
    pub entries: Vec<ConditionEntry>,
}

impl ConditionSetReport {
    pub fn push(&mut self, id: String, residual: Expr, status: ZeroStatus) {
        self.entries.push(ConditionEntry { id, residual, status });
    }

    /// Zero-tests `residual` and records it under `id`.
    pub fn check(&mut self, id: impl Into<String>, residual: Expr, cfg: &ZeroTestConfig) -> Result<()> {
        let status = is_zero(&residual, cfg)?;
        self.push(id.into(), residual, status);
        Ok(())
    }

    pub fn extend(&mut self, other: ConditionSetReport) {
        self.entries.extend(other.entries);
    }

    pub fn has_failure(&self) -> bool {
        self.entries.iter().any(|e| e.status.is_nonzero())
    }

    pub fn failed_ids(&self) -> Vec<String> {
        self.entries.iter().filter(|e| e.status.is_nonzero()).map(|e| e.id.clone()).collect()
    }

    pub fn weakest(&self) -> ZeroStatus {
        self.entries.iter().fold(ZeroStatus::Zero, |acc, e| acc.weakest(e.status.clone()))
    }

    pub fn get(&self, id: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

impl fmt::Display for ConditionSetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{} {}", e.id, e.status)?;
        }
        Ok(())
    }
}
