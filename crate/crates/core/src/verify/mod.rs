//! Numerical checks of the entropy inequalities, concentration bounds and the
//! converse entropy chain.
//!
//! Each `check_*` function evaluates one instance and returns a [`Check`];
//! suites fold many checks into a [`LemmaReport`].

mod chernoff;
mod converse;
mod lemmas;
mod suite;

pub use chernoff::{chernoff_experiment, ChernoffModel, ChernoffReport};
pub use converse::{concavity_step_check, converse_chain, ConverseReport};
pub use lemmas::{check_fannes, check_gentle, check_l4, check_l6, fannes_eta, GentleCheck};
pub use suite::{run_suite, SuiteConfig, SuiteName};

use serde::{Deserialize, Serialize};

/// Default violation slack.
pub const DEFAULT_SLACK: f64 = 1e-8;

/// One evaluated inequality `lhs ≤ bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub lhs: f64,
    pub bound: f64,
}

impl Check {
    pub fn new(lhs: f64, bound: f64) -> Self {
        Self { lhs, bound }
    }

    /// `bound − lhs`; negative means the inequality fails.
    pub fn margin(&self) -> f64 {
        self.bound - self.lhs
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.margin() >= -slack
    }
}

/// Aggregate of many checks of one inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `bound − lhs` seen.
    pub worst_margin: f64,
    pub slack: f64,
    /// Violations of an auxiliary diagnostic bound; not part of pass/fail.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic_violations: Option<usize>,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl LemmaReport {
    pub fn new(lemma_id: &str, slack: f64, seed: u64, config: serde_json::Value) -> Self {
        Self {
            lemma_id: lemma_id.to_string(),
            samples: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            slack,
            diagnostic_violations: None,
            seed,
            config,
        }
    }

    pub fn record(&mut self, check: &Check) {
        self.record_margin(check.margin());
    }

    pub fn record_margin(&mut self, m: f64) {
        self.samples += 1;
        // NaN counts as a violation
        if !(m >= -self.slack) {
            self.violations += 1;
        }
        if !(m >= self.worst_margin) {
            self.worst_margin = m;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn summary_line(&self) -> String {
        let mut s = format!(
            "{}: samples={} violations={} worst_margin={:.3e}",
            self.lemma_id, self.samples, self.violations, self.worst_margin
        );
        if let Some(d) = self.diagnostic_violations {
            s.push_str(&format!(" diagnostic_violations={d}"));
        }
        s
    }
}
