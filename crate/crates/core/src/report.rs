//! Pass/fail reports shared by the verifier suites.

use serde::Serialize;

use crate::rational::{fmt_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
    NotEvaluated,
}

/// Where a clause failed (or was skipped): a cell and the offending index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub lo: String,
    pub hi: String,
    pub index: Option<usize>,
    pub detail: String,
}

impl Witness {
    pub fn new(lo: &Q, hi: &Q, index: Option<usize>, detail: impl Into<String>) -> Self {
        Witness { lo: fmt_q(lo), hi: fmt_q(hi), index, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseResult {
    pub clause: String,
    pub status: CheckStatus,
    pub witnesses: Vec<Witness>,
}

impl ClauseResult {
    pub fn pass(clause: &str) -> Self {
        ClauseResult { clause: clause.into(), status: CheckStatus::Pass, witnesses: Vec::new() }
    }

    pub fn not_applicable(clause: &str, why: &str) -> Self {
        ClauseResult {
            clause: clause.into(),
            status: CheckStatus::NotApplicable,
            witnesses: vec![Witness { lo: String::new(), hi: String::new(), index: None, detail: why.into() }],
        }
    }

    /// Pass when no failures were found; `skipped` cells are kept as notes.
    pub fn from_failures(clause: &str, failures: Vec<Witness>) -> Self {
        let status = if failures.is_empty() { CheckStatus::Pass } else { CheckStatus::Fail };
        ClauseResult { clause: clause.into(), status, witnesses: failures }
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

/// An ordered list of clause results.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub clauses: Vec<ClauseResult>,
}

impl Report {
    pub fn push(&mut self, c: ClauseResult) {
        self.clauses.push(c);
    }

    pub fn all_passed(&self) -> bool {
        !self.clauses.iter().any(ClauseResult::failed)
    }

    pub fn get(&self, clause: &str) -> Option<&ClauseResult> {
        self.clauses.iter().find(|c| c.clause == clause)
    }

    pub fn status(&self, clause: &str) -> Option<CheckStatus> {
        self.get(clause).map(|c| c.status)
    }
}
