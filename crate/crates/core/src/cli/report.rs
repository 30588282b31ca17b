//! The JSON report of a run.
//!
//! Reports are test fixtures: the schema is versioned, unknown fields are
//! rejected on read, and everything except `timings` is a function of the
//! document and the seed.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calculus::{BoundReport, Holds};
use crate::convexity::{FrechetScalarization, Intrad, SharpMinConvex};
use crate::error::{Error, Result};
use crate::expr::{Expect, Op};
use crate::ext;
use crate::mappings::Injectivity;
use crate::moduli::Certificate;
use crate::rates::{RateEstimate, SamplingSchedule};

pub const SCHEMA: u32 = 1;

/// What a task computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskResult {
    Certificate(Certificate),
    Bound(BoundReport),
    Rate(RateEstimate),
    Injectivity(Injectivity),
    Intrad(Intrad),
    FrechetScalarization(FrechetScalarization),
    SharpMinConvex(SharpMinConvex),
}

impl TaskResult {
    /// Rate estimates behind the result, labelled by suffix, for CSV curves.
    pub fn curves(&self) -> Vec<(&'static str, &RateEstimate)> {
        fn cert(c: &Certificate) -> Vec<(&'static str, &RateEstimate)> {
            let mut v: Vec<_> = c.estimate.iter().map(|e| ("", e)).collect();
            if let Some(epi) = &c.epigraph {
                v.extend(epi.estimate.iter().map(|e| (".epigraph", e)));
            }
            v
        }
        match self {
            TaskResult::Certificate(c) => cert(c),
            TaskResult::Rate(r) => vec![("", r)],
            TaskResult::FrechetScalarization(f) => cert(&f.certificate),
            TaskResult::SharpMinConvex(s) => cert(&s.certificate),
            _ => Vec::new(),
        }
    }

    pub fn bound_holds(&self) -> Option<Holds> {
        match self {
            TaskResult::Bound(b) => Some(b.holds),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskReport {
    pub id: String,
    pub op: Op,
    pub expect: Expect,
    /// The op's own criterion: a certified verdict, a holding bound, a
    /// positive rate or constant.
    pub success: bool,
    pub expectation_met: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub result: Option<TaskResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskTiming {
    pub id: String,
    pub seconds: f64,
}

/// Wall-clock timings, the only nondeterministic part of a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    pub total_seconds: f64,
    pub tasks: Vec<TaskTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: u32,
    pub version: String,
    /// Hex SHA-256 of the document bytes.
    pub document_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub example: Option<String>,
    pub schedule: SamplingSchedule,
    /// Set by `--assume-eps`; bounds using it carry an `eps_assumed`
    /// quantity.
    #[serde(with = "ext::option")]
    pub assume_eps: Option<f64>,
    pub tasks: Vec<TaskReport>,
    pub exit_code: i32,
    pub timings: Timings,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// JSON with timings cleared, identical across runs of one document and
    /// seed.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.timings = Timings::default();
        r.to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed report: {e}")))?;
        if r.schema != SCHEMA {
            return Err(Error::invalid(format!("unsupported report schema {}", r.schema)));
        }
        Ok(r)
    }

    pub fn task(&self, id: &str) -> Option<&TaskReport> {
        self.tasks.iter().find(|t| t.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::{reproduce, RunOptions};

    #[test]
    fn report_roundtrips_through_json() {
        let r = reproduce("ex-prederiv-abs", &RunOptions::default()).unwrap();
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(back.task("prederivative").is_some());
    }

    #[test]
    fn canonical_json_ignores_timings() {
        let a = reproduce("ex-F1", &RunOptions::default()).unwrap();
        let b = reproduce("ex-F1", &RunOptions::default()).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert!(!a.canonical_json().contains("\"seconds\""));
    }

    #[test]
    fn unknown_fields_and_schemas_are_rejected() {
        let r = reproduce("ex-F2", &RunOptions::default()).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(Report::from_json(&v.to_string()).is_err());
        v.as_object_mut().unwrap().remove("extra");
        v["schema"] = serde_json::json!(SCHEMA + 1);
        assert!(Report::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
