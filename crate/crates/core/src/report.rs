//! Experiment reports: named statistics with Monte Carlo standard errors and
//! the thresholds they are judged against.
//!
//! Every threshold has the form `null_quantile + allowance`; `pass` is
//! recomputed from the statistics whenever a threshold is added, so a report
//! cannot claim a result its numbers do not support.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub value: f64,
    /// Monte Carlo standard error; zero for exact (deterministic) quantities.
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rule {
    /// `value < limit`
    Below,
    /// `value > limit`
    Above,
    /// `|value − center| ≤ limit`
    Within { center: f64 },
    /// `value == target` exactly
    Exact { target: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub stat: String,
    pub rule: Rule,
    pub null_quantile: f64,
    pub allowance: f64,
    pub passed: bool,
}

impl Threshold {
    pub fn limit(&self) -> f64 {
        self.null_quantile + self.allowance
    }

    fn evaluate(&self, value: f64) -> bool {
        let limit = self.limit();
        match self.rule {
            Rule::Below => value < limit,
            Rule::Above => value > limit,
            Rule::Within { center } => (value - center).abs() <= limit,
            Rule::Exact { target } => value == target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: Value,
    pub stats: BTreeMap<String, Statistic>,
    pub thresholds: BTreeMap<String, Threshold>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
}

fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.4e}")
    } else {
        format!("{v:.6}")
    }
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, params: Value) -> Self {
        Self {
            experiment: experiment.into(),
            params,
            stats: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            pass: true,
            config: None,
        }
    }

    pub fn stat(&mut self, name: impl Into<String>, value: f64, std_error: f64) -> &mut Self {
        self.stats.insert(name.into(), Statistic { value, std_error });
        self
    }

    pub fn exact(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.stat(name, value, 0.0)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.stats.get(name).map(|s| s.value)
    }

    /// Adds a threshold on an already recorded statistic.
    ///
    /// # Panics
    /// If `stat` has not been recorded.
    pub fn threshold(
        &mut self,
        name: impl Into<String>,
        stat: &str,
        rule: Rule,
        null_quantile: f64,
        allowance: f64,
    ) -> &mut Self {
        let value = self.stats.get(stat).unwrap_or_else(|| panic!("unknown statistic `{stat}`")).value;
        let mut t = Threshold {
            stat: stat.to_string(),
            rule,
            null_quantile,
            allowance,
            passed: false,
        };
        t.passed = t.evaluate(value);
        self.thresholds.insert(name.into(), t);
        self.recompute();
        self
    }

    /// Re-derives every threshold verdict and the overall `pass`.
    pub fn recompute(&mut self) {
        for t in self.thresholds.values_mut() {
            t.passed = self.stats.get(&t.stat).is_some_and(|s| t.evaluate(s.value));
        }
        self.pass = self.thresholds.values().all(|t| t.passed);
    }

    pub fn failed_thresholds(&self) -> Vec<&str> {
        self.thresholds
            .iter()
            .filter(|(_, t)| !t.passed)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn with_config(mut self, config: Value) -> Self {
        self.config = Some(config);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut r: Self = serde_json::from_str(text)?;
        r.recompute();
        Ok(r)
    }

    /// Human-readable multi-line summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}: {}", self.experiment, if self.pass { "PASS" } else { "FAIL" });
        for (name, s) in &self.stats {
            let _ = writeln!(out, "  {name} = {} ± {}", num(s.value), num(s.std_error));
        }
        for (name, t) in &self.thresholds {
            let v = self.stats.get(&t.stat).map_or(f64::NAN, |s| s.value);
            let rel = match t.rule {
                Rule::Below => format!("< {}", num(t.limit())),
                Rule::Above => format!("> {}", num(t.limit())),
                Rule::Within { center } => format!("within {} of {center}", num(t.limit())),
                Rule::Exact { target } => format!("== {target}"),
            };
            let _ = writeln!(
                out,
                "  [{}] {name}: {} = {} {rel} (null {} + allowance {})",
                if t.passed { "ok" } else { "FAIL" },
                t.stat,
                num(v),
                num(t.null_quantile),
                num(t.allowance)
            );
        }
        out
    }
}
