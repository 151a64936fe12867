//! Outcome records shared by every verification routine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Undetermined,
}

/// A point at which a bound was observed to fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub value: f64,
    pub note: String,
}

impl Witness {
    pub fn new(point: Vec<f64>, value: f64, note: impl Into<String>) -> Self {
        Self { point, value, note: note.into() }
    }
}

/// Result of a bound verification.
///
/// A failing report always carries a witness; a passing one always carries
/// its fitted constants and the grid/sample budgets it used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub check: String,
    pub status: Status,
    pub constants: BTreeMap<String, f64>,
    pub witness: Option<Witness>,
    pub budget: BTreeMap<String, u64>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Value>,
}

impl BoundReport {
    pub fn new(check: impl Into<String>, status: Status) -> Self {
        Self {
            check: check.into(),
            status,
            constants: BTreeMap::new(),
            witness: None,
            budget: BTreeMap::new(),
            warnings: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn pass(check: impl Into<String>) -> Self {
        Self::new(check, Status::Pass)
    }

    pub fn fail(check: impl Into<String>, witness: Witness) -> Self {
        let mut r = Self::new(check, Status::Fail);
        r.witness = Some(witness);
        r
    }

    pub fn undetermined(check: impl Into<String>, reason: impl Into<String>) -> Self {
        let mut r = Self::new(check, Status::Undetermined);
        r.warnings.push(reason.into());
        r
    }

    pub fn constant(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_owned(), value);
        self
    }

    pub fn budget(mut self, name: &str, value: u64) -> Self {
        self.budget.insert(name.to_owned(), value);
        self
    }

    pub fn warn(mut self, msg: impl Into<String>) -> Self {
        self.warnings.push(msg.into());
        self
    }

    pub fn detail(mut self, name: &str, value: impl Serialize) -> Self {
        self.details
            .insert(name.to_owned(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    /// Checks the structural invariants of the record.
    pub fn is_well_formed(&self) -> bool {
        match self.status {
            Status::Fail => self.witness.is_some(),
            Status::Pass => !self.constants.is_empty() && !self.budget.is_empty(),
            Status::Undetermined => !self.warnings.is_empty(),
        }
    }

    /// Combines sub-reports: fail dominates undetermined, which dominates pass.
    pub fn combine(check: impl Into<String>, parts: Vec<BoundReport>) -> Self {
        let status = if parts.iter().any(|p| p.failed()) {
            Status::Fail
        } else if parts.iter().any(|p| p.status == Status::Undetermined) {
            Status::Undetermined
        } else {
            Status::Pass
        };
        let check = check.into();
        let mut out = Self::new(check, status);
        for p in &parts {
            for (k, v) in &p.constants {
                out.constants.insert(format!("{}.{}", p.check, k), *v);
            }
            for (k, v) in &p.budget {
                *out.budget.entry(k.clone()).or_insert(0) += v;
            }
            out.warnings.extend(p.warnings.iter().map(|w| format!("{}: {}", p.check, w)));
            if out.witness.is_none() && p.failed() {
                out.witness = p.witness.clone();
            }
        }
        if status == Status::Undetermined && out.warnings.is_empty() {
            out.warnings.push("sub-check undetermined".into());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants() {
        let p = BoundReport::pass("x").constant("C", 1.0).budget("grid", 512);
        assert!(p.is_well_formed());
        assert!(!BoundReport::pass("x").is_well_formed());
        let f = BoundReport::fail("y", Witness::new(vec![1.0], 2.0, "boom"));
        assert!(f.is_well_formed());
        let c = BoundReport::combine("both", vec![p, f]);
        assert!(c.failed() && c.witness.is_some());
    }
}
