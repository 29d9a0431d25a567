use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// A cap was reached where a finite value was expected.
    Inconclusive,
    Fail,
}

/// Result of one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub key: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Value::is_null", default)]
    pub detail: Value,
    /// Element(s) or system showing the failure.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Value>,
}

impl CaseOutcome {
    pub fn pass(key: impl Into<String>, detail: Value) -> Self {
        CaseOutcome {
            key: key.into(),
            status: Status::Pass,
            detail,
            witness: None,
        }
    }

    pub fn fail(key: impl Into<String>, detail: Value, witness: Value) -> Self {
        CaseOutcome {
            key: key.into(),
            status: Status::Fail,
            detail,
            witness: Some(witness),
        }
    }

    pub fn inconclusive(key: impl Into<String>, detail: Value) -> Self {
        CaseOutcome {
            key: key.into(),
            status: Status::Inconclusive,
            detail,
            witness: None,
        }
    }

    /// Pass when `ok`, otherwise fail with `witness`.
    pub fn check(
        key: impl Into<String>,
        ok: bool,
        detail: Value,
        witness: impl FnOnce() -> Value,
    ) -> Self {
        if ok {
            Self::pass(key, detail)
        } else {
            Self::fail(key, detail, witness())
        }
    }
}

/// Machine-readable result of a suite run. Cases are sorted by key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lemma: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub group: Option<String>,
    pub p: Option<u64>,
    pub seed: u64,
    pub samples: usize,
    pub caps: Vec<u64>,
    pub verdict: Status,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub cases: Vec<CaseOutcome>,
    /// Only filled in when timing is requested, so that reports stay
    /// reproducible byte for byte.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<u64>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CaseOutcome> {
        self.cases.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn case(&self, key: &str) -> Option<&CaseOutcome> {
        self.cases.iter().find(|c| c.key == key)
    }

    /// 0 pass, 1 violation, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        }
    }
}
