//! Machine-readable verification reports.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mismatch_index: Option<u64>,
    /// Set when the check had nothing to compare (e.g. a zero-length prefix).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub vacuous: bool,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl Finding {
    pub fn pass(name: impl Into<String>) -> Self {
        Finding { name: name.into(), pass: true, mismatch_index: None, vacuous: false, detail: Value::Null }
    }

    pub fn fail(name: impl Into<String>) -> Self {
        Finding { pass: false, ..Finding::pass(name) }
    }

    pub fn check(name: impl Into<String>, pass: bool) -> Self {
        Finding { pass, ..Finding::pass(name) }
    }

    /// Passes iff `mismatch` is none.
    pub fn mismatch(name: impl Into<String>, mismatch: Option<u64>) -> Self {
        Finding { pass: mismatch.is_none(), mismatch_index: mismatch, ..Finding::pass(name) }
    }

    pub fn vacuous(mut self, vacuous: bool) -> Self {
        self.vacuous = vacuous;
        self
    }

    pub fn with_detail(mut self, detail: impl Serialize) -> Self {
        self.detail = serde_json::to_value(detail).expect("detail serializes");
        self
    }
}

/// `pass` holds exactly when no component failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub op: String,
    pub params: Map<String, Value>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mismatch_index: Option<u64>,
    pub components: Vec<Finding>,
}

impl Report {
    pub fn new(op: impl Into<String>, params: Map<String, Value>, components: Vec<Finding>) -> Self {
        let pass = components.iter().all(|c| c.pass);
        let mismatch_index = components.iter().find_map(|c| c.mismatch_index);
        Report { op: op.into(), params, pass, mismatch_index, components }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Builds a parameter map from `(name, value)` pairs.
pub fn params<const N: usize>(items: [(&str, Value); N]) -> Map<String, Value> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn pass_iff_no_failures() {
        let ok = Report::new("t", params([("bits", json!(4))]), vec![Finding::pass("a"), Finding::pass("b")]);
        assert!(ok.pass);
        let bad = Report::new("t", Map::new(), vec![Finding::pass("a"), Finding::mismatch("b", Some(7))]);
        assert!(!bad.pass);
        assert_eq!(bad.mismatch_index, Some(7));
        assert!(Report::new("t", Map::new(), vec![]).pass);
    }

    #[test]
    fn json_omits_empty_fields() {
        let r = Report::new("op", Map::new(), vec![Finding::pass("x").vacuous(true)]);
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(text, r#"{"op":"op","params":{},"pass":true,"components":[{"name":"x","pass":true,"vacuous":true}]}"#);
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
