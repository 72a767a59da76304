//! Solver output shared by every algorithm.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Version of the serialized report layout.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    GuessRejected,
    IterationCap,
}

/// Counts for one runtime-checked property.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckTally {
    pub checked: u64,
    pub violated: u64,
    /// Soft checks depend on the guess being valid, which a run cannot know.
    pub soft: bool,
    /// First violation, with enough context to reproduce it.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_violation: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub checks: BTreeMap<String, CheckTally>,
    pub metrics: BTreeMap<String, f64>,
}

impl Diagnostics {
    pub fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        self.record(name, ok, false, detail);
    }

    pub fn soft_check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        self.record(name, ok, true, detail);
    }

    fn record(&mut self, name: &str, ok: bool, soft: bool, detail: impl FnOnce() -> String) {
        let t = self.checks.entry(name.to_string()).or_default();
        t.soft = soft;
        t.checked += 1;
        if !ok {
            t.violated += 1;
            if t.first_violation.is_none() {
                t.first_violation = Some(detail());
            }
        }
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub fn metric_max(&mut self, name: &str, value: f64) {
        let e = self.metrics.entry(name.to_string()).or_insert(value);
        *e = e.max(value);
    }

    /// Violations of checks that must hold for every guess.
    pub fn hard_violations(&self) -> u64 {
        self.checks
            .values()
            .filter(|t| !t.soft)
            .map(|t| t.violated)
            .sum()
    }

    pub fn violations(&self, name: &str) -> u64 {
        self.checks.get(name).map_or(0, |t| t.violated)
    }

    pub fn checked(&self, name: &str) -> u64 {
        self.checks.get(name).map_or(0, |t| t.checked)
    }
}

/// One ladder entry as tried by the guessing driver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuessOutcome {
    pub guess: f64,
    pub value: f64,
    pub termination: Termination,
    pub iterations: usize,
    pub adaptive_rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: u32,
    pub algorithm: String,
    pub solution: Vec<f64>,
    pub value: f64,
    pub epochs: usize,
    pub inner_iterations: usize,
    pub adaptive_rounds: usize,
    pub feasible: bool,
    /// Packing: `1 − 2ε − ‖Ax‖∞`. Polymatroid: `min_F (r(F) − z(F))` over the
    /// defining constraints. Non-negative when feasible.
    pub slack: f64,
    pub guess_used: f64,
    pub termination: Termination,
    #[serde(default)]
    pub guess_trace: Vec<GuessOutcome>,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trajectory: Option<Vec<Vec<f64>>>,
}

impl SolveReport {
    pub(crate) fn new(algorithm: &str, n: usize, guess: f64) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            algorithm: algorithm.to_string(),
            solution: vec![0.0; n],
            value: 0.0,
            epochs: 0,
            inner_iterations: 0,
            adaptive_rounds: 0,
            feasible: true,
            slack: 0.0,
            guess_used: guess,
            termination: Termination::Converged,
            guess_trace: Vec::new(),
            diagnostics: Diagnostics::default(),
            trajectory: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite data")
    }
}
