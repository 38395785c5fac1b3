//! Machine-readable verification records.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Exhaustive,
    Sampled,
}

/// The offending generators (or labels) and the nonzero value found there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub generators: Vec<String>,
    pub value: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<String>,
}

impl Witness {
    pub fn new(generators: Vec<String>, value: impl fmt::Display, detail: impl Into<String>) -> Self {
        Self { generators, value: value.to_string(), detail: detail.into(), replay: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub passed: bool,
    /// Number of cases evaluated.
    pub checked: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub wall_time_ms: f64,
}

impl CheckResult {
    /// Evaluates `case` on every item in parallel and keeps the first
    /// failure in item order, so the witness does not depend on scheduling.
    pub fn run<T, F>(name: &str, regime: Regime, seed: Option<u64>, items: &[T], case: F) -> Self
    where
        T: Sync,
        F: Fn(&T) -> Option<Witness> + Sync + Send,
    {
        let start = Instant::now();
        let witness = items.par_iter().find_map_first(case);
        Self {
            name: name.to_string(),
            regime,
            seed,
            passed: witness.is_none(),
            checked: items.len(),
            witness,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    }

    pub fn with_replay(mut self, replay: impl Into<String>) -> Self {
        if let Some(w) = self.witness.as_mut() {
            w.replay = Some(replay.into());
        }
        self
    }
}

/// Summary of exact-vs-quadrature comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub compared: usize,
    pub max_abs_delta: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
}

impl VerificationReport {
    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let regime = match c.regime {
                Regime::Exhaustive => "exhaustive".to_string(),
                Regime::Sampled => format!("sampled seed={}", c.seed.unwrap_or_default()),
            };
            writeln!(
                f,
                "{:<4} {:<28} {:>8} cases  {:>10.1} ms  ({regime})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.checked,
                c.wall_time_ms
            )?;
            if let Some(w) = &c.witness {
                writeln!(f, "     witness: [{}] value {}", w.generators.join(", "), w.value)?;
                writeln!(f, "     {}", w.detail)?;
                if let Some(r) = &w.replay {
                    writeln!(f, "     replay: {r}")?;
                }
            }
        }
        if let Some(o) = &self.oracle {
            writeln!(
                f,
                "oracle: {} comparisons, max |Δ| = {:.3e} (tolerance {:.0e})",
                o.compared, o.max_abs_delta, o.tolerance
            )?;
        }
        Ok(())
    }
}
