//! Pass/fail bookkeeping shared by every check.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Outcome of one named check over a batch of cases.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// First failing case, if any.
    pub witness: Option<Value>,
    /// Measured quantities that are reported but not asserted.
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            passed: true,
            cases: 0,
            failures: 0,
            witness: None,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Records one case. The witness closure only runs for the first failure.
    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            self.passed = false;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    pub fn diagnostic(&mut self, key: impl Into<String>, value: f64) {
        self.diagnostics.insert(key.into(), value);
    }

    /// Keeps the running maximum of a diagnostic.
    pub fn diagnostic_max(&mut self, key: &str, value: f64) {
        let slot = self.diagnostics.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        if value > *slot {
            *slot = value;
        }
    }

    /// Keeps the running minimum of a diagnostic.
    pub fn diagnostic_min(&mut self, key: &str, value: f64) {
        let slot = self.diagnostics.entry(key.to_string()).or_insert(f64::INFINITY);
        if value < *slot {
            *slot = value;
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Folds another report into this one (cases, failures, first witness).
    pub fn absorb(&mut self, other: CheckReport) {
        self.cases += other.cases;
        self.failures += other.failures;
        self.passed &= other.passed;
        if self.witness.is_none() {
            self.witness = other.witness;
        }
        for (k, v) in other.diagnostics {
            let key = format!("{}.{}", other.name, k);
            self.diagnostics.insert(key, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_failure_is_kept() {
        let mut r = CheckReport::new("demo");
        r.record(true, || Value::from(0));
        r.record(false, || Value::from(1));
        r.record(false, || Value::from(2));
        assert!(!r.passed);
        assert_eq!((r.cases, r.failures), (3, 2));
        assert_eq!(r.witness, Some(Value::from(1)));
    }
}
