//! The JSON verification report.

use std::collections::BTreeMap;

use momap::momentum::HamiltonianModel;
use serde::Serialize;

pub const REPORT_SCHEMA: &str = "momap-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub detail: serde_json::Value,
}

impl CheckResult {
    /// Pass when `max_residual < tolerance`, or `<=` for a zero tolerance.
    pub fn from_residual(name: &str, max_residual: f64, tolerance: f64, samples: usize) -> Self {
        let ok = if tolerance == 0.0 {
            max_residual == 0.0
        } else {
            max_residual < tolerance
        };
        CheckResult {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            max_residual,
            tolerance,
            samples,
            detail: serde_json::Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: impl Serialize) -> Self {
        self.detail = serde_json::to_value(detail).unwrap_or(serde_json::Value::Null);
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub name: String,
    pub group_dim: usize,
    pub subgroup_dim: usize,
    pub rep_dim: usize,
    pub slice_dim: usize,
}

impl ModelSummary {
    pub fn of(m: &HamiltonianModel) -> Self {
        ModelSummary {
            name: m.name().into(),
            group_dim: m.group().dim(),
            subgroup_dim: m.sub_dim(),
            rep_dim: m.rep_dim(),
            slice_dim: m.slice_dim(),
        }
    }
}

/// Wall times in milliseconds, kept apart so the rest of the report is
/// reproducible byte for byte.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub total_ms: f64,
    pub checks: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSummary>,
    pub seed: u64,
    pub equality_tolerance: f64,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub sections: serde_json::Value,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: &str, model: Option<&HamiltonianModel>, seed: u64, equality_tolerance: f64) -> Self {
        Report {
            schema: REPORT_SCHEMA,
            command: command.into(),
            model: model.map(ModelSummary::of),
            seed,
            equality_tolerance,
            checks: Vec::new(),
            sections: serde_json::Value::Null,
            timing: Timing::default(),
        }
    }

    pub fn add_section(&mut self, name: &str, value: impl Serialize) {
        if !self.sections.is_object() {
            self.sections = serde_json::Value::Object(Default::default());
        }
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.sections
            .as_object_mut()
            .expect("sections is an object")
            .insert(name.into(), v);
    }

    pub fn push(&mut self, check: CheckResult, ms: f64) {
        self.timing.checks.insert(check.name.clone(), ms);
        self.checks.push(check);
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            crate::EXIT_PASS
        } else {
            crate::EXIT_FAIL
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// The report without its timing field.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serialises");
        if let Some(o) = v.as_object_mut() {
            o.remove("timing");
        }
        serde_json::to_string_pretty(&v).expect("report serialises")
    }
}
