//! Command outcomes and exit codes.

use lefkit_core::Error;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    HypothesisViolation,
    ContractError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::HypothesisViolation => 2,
            Status::ContractError => 3,
        }
    }
}

/// A failed command. `diagnostics` is never empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliError {
    pub status: Status,
    pub diagnostics: Vec<String>,
}

impl CliError {
    pub fn contract(msg: impl Into<String>) -> Self {
        CliError { status: Status::ContractError, diagnostics: vec![msg.into()] }
    }

    pub fn hypothesis(msg: impl Into<String>) -> Self {
        CliError { status: Status::HypothesisViolation, diagnostics: vec![msg.into()] }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_hypothesis() {
            CliError::hypothesis(e.to_string())
        } else {
            // Internal inconsistencies are reported like bad input: the
            // caller cannot do anything different about either.
            CliError::contract(e.to_string())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandResult {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    pub diagnostics: Vec<String>,
}

impl CommandResult {
    pub fn ok(payload: Value) -> Self {
        CommandResult { status: Status::Ok, payload: Some(payload), diagnostics: Vec::new() }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// Pretty JSON with a trailing newline; key order is sorted, so the
    /// output is byte-stable.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_else(|_| String::from("{}"));
        s.push('\n');
        s
    }
}

impl From<CliError> for CommandResult {
    fn from(e: CliError) -> Self {
        CommandResult { status: e.status, payload: None, diagnostics: e.diagnostics }
    }
}
