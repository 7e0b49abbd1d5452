use serde::Serialize;

/// Schema version of the JSON run report. Bump on any breaking change to
/// the field set.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub algorithm: String,
    pub config: ConfigEcho,
    pub phases: Vec<Phase>,
    pub total_rounds: u64,
    /// Max messages delivered over a single edge direction, summed across
    /// phases.
    pub congestion: u64,
    pub verdict: Verdict,
    /// Algorithm-specific summary (blocker set, center count, ...).
    pub result: serde_json::Value,
    pub wall_time_ms: u64,
}

/// Echo of the resolved invocation, so a report is reproducible on its own.
#[derive(Serialize)]
pub struct ConfigEcho {
    pub graph: String,
    pub n: u32,
    pub directed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<(u32, i64)>>,
}

#[derive(Serialize)]
pub struct Phase {
    pub name: String,
    pub rounds: u64,
}

#[derive(Serialize, Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "within-epsilon")]
    WithinEpsilon,
    #[serde(rename = "FAIL")]
    Fail,
}
