//! The JSON report.
//!
//! Floats are written as strings that parse back to the same `f64`:
//! shortest round-trip scientific notation, or `"inf"` / `"-inf"`.

use serde::{Deserialize, Serialize};

use crate::assumptions::{AssumptionStatus, Check, StallReason};
use crate::config::{Budget, CurveMode};
use crate::interval::{Box2, Box3, IBox};
use crate::isolate::IsolationStatus;
use crate::oracle::ExactKind;
use crate::system::Chart;
use crate::topology::{ClassificationTest, Hint, LoopTest, Phase, SingularityKind};

pub const SCHEMA: &str = "singuline/1";

/// `[xlo, xhi, ylo, yhi]`.
pub type JsonBox = [String; 4];

pub fn float_str(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:e}")
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

pub fn box_json(b: &Box2<f64>) -> JsonBox {
    let [(xl, xh), (yl, yh)] = b.to_f64_bounds();
    [float_str(xl), float_str(xh), float_str(yl), float_str(yh)]
}

pub fn box3_json(b: &Box3<f64>) -> [String; 6] {
    let [(a, b_), (c, d), (e, f)] = b.to_f64_bounds();
    [a, b_, c, d, e, f].map(float_str)
}

/// Parses `[xlo, xhi, ylo, yhi]`, requiring `lo ≤ hi` on each axis.
pub fn parse_box(j: &JsonBox) -> Option<Box2<f64>> {
    let v: Vec<f64> = j.iter().map(|s| parse_float(s)).collect::<Option<_>>()?;
    (v[0] <= v[1] && v[2] <= v[3]).then(|| IBox::from_f64s([(v[0], v[1]), (v[2], v[3])], 53))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainEntry {
    Box { bounds: JsonBox },
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StalledEntry {
    #[serde(rename = "box")]
    pub bbox: JsonBox,
    pub check: Check,
    pub reason: StallReason,
    pub depth: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartVerdict {
    pub chart: Chart,
    pub status: AssumptionStatus,
    pub boxes_processed: usize,
    pub max_depth_reached: u32,
    pub stalled: Vec<StalledEntry>,
    /// Every stalled box lies on the chart's line at infinity.
    pub only_at_infinity: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionSummary {
    Verified,
    /// Stalls remain only on lines at infinity of the global charts.
    VerifiedInThePlane,
    BudgetExhausted,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionsSection {
    pub status: AssumptionSummary,
    pub charts: Vec<ChartVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartIsolation {
    pub chart: Chart,
    pub status: IsolationStatus,
    pub candidates: usize,
    pub boxes_processed: usize,
    pub max_depth_reached: u32,
    pub min_accepted_diameter: Option<String>,
    pub frontier_size: usize,
    /// The first undecided boxes, in lexicographic order.
    pub frontier: Vec<JsonBox>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolationSection {
    pub status: IsolationStatus,
    pub charts: Vec<ChartIsolation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityEntry {
    /// Enclosure in the plane; unbounded when the chart box touches a line
    /// at infinity.
    #[serde(rename = "box")]
    pub bbox: JsonBox,
    pub chart: Chart,
    pub chart_box: JsonBox,
    pub kind: SingularityKind,
    pub branches: u32,
    pub loop_free: bool,
    pub boundary_crossings: Option<u32>,
    pub classification: Option<ClassificationTest>,
    pub loop_test: Option<LoopTest>,
    pub precision: Option<String>,
    pub contractions: u32,
    pub corner_retries: u32,
    pub triple_root_box: Option<[String; 6]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureEntry {
    pub code: String,
    pub phase: Phase,
    pub hint: Option<Hint>,
    pub chart: Chart,
    /// Isolation box of the singularity, in chart coordinates.
    pub candidate_box: JsonBox,
    /// Last working box, in chart coordinates.
    pub last_box: JsonBox,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    Unchecked,
    VerifiedByOracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub squarefree_f: HypothesisStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleStatus {
    Agree,
    Disagree,
    Error,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OraclePointEntry {
    /// Midpoints of the isolating intervals after refinement.
    pub x: String,
    pub y: String,
    pub kind: ExactKind,
    pub hessian_sign: i8,
    /// Number of isolation boxes containing the point.
    pub boxes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSection {
    pub status: OracleStatus,
    pub message: Option<String>,
    pub points: Vec<OraclePointEntry>,
    /// Isolation boxes holding no oracle point or several.
    pub unmatched_boxes: usize,
    /// Certified kinds that differ from the exact classification.
    pub kind_mismatches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub code: String,
    pub message: String,
}

/// Wall-clock time of each phase in milliseconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub assumptions_ms: f64,
    pub isolation_ms: f64,
    pub topology_ms: f64,
    pub oracle_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub mode: CurveMode,
    pub domain: DomainEntry,
    pub budget: Budget,
    pub assumptions: AssumptionsSection,
    pub isolation: Option<IsolationSection>,
    pub singularities: Vec<SingularityEntry>,
    pub failures: Vec<FailureEntry>,
    pub hypotheses: Hypotheses,
    /// Distinct working precisions used by the topology phases.
    pub precision_levels: Vec<String>,
    pub oracle: Option<OracleSection>,
    pub errors: Vec<ErrorEntry>,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("invalid JSON for the report schema: {0}")]
    Shape(String),
    #[error("unsupported schema {0:?}")]
    Version(String),
    #[error("malformed box {0:?}")]
    Box(Vec<String>),
    #[error("malformed float {0:?}")]
    Float(String),
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Parses a report and checks everything serde cannot: the schema
    /// version and that every box and float string is well formed.
    pub fn parse(text: &str) -> Result<Report, SchemaError> {
        let r: Report = serde_json::from_str(text).map_err(|e| SchemaError::Shape(e.to_string()))?;
        if r.schema != SCHEMA {
            return Err(SchemaError::Version(r.schema));
        }
        let check = |b: &JsonBox| parse_box(b).map(|_| ()).ok_or_else(|| SchemaError::Box(b.to_vec()));
        let float = |s: &String| parse_float(s).map(|_| ()).ok_or_else(|| SchemaError::Float(s.clone()));
        if let DomainEntry::Box { bounds } = &r.domain {
            check(bounds)?;
        }
        for c in &r.assumptions.charts {
            c.stalled.iter().try_for_each(|s| check(&s.bbox))?;
        }
        for c in r.isolation.iter().flat_map(|i| &i.charts) {
            c.frontier.iter().try_for_each(check)?;
            c.min_accepted_diameter.iter().try_for_each(float)?;
        }
        for s in &r.singularities {
            check(&s.bbox)?;
            check(&s.chart_box)?;
            if let Some(t) = &s.triple_root_box {
                t.iter().try_for_each(float)?;
            }
        }
        for f in &r.failures {
            check(&f.candidate_box)?;
            check(&f.last_box)?;
        }
        for p in r.oracle.iter().flat_map(|o| &o.points) {
            float(&p.x)?;
            float(&p.y)?;
        }
        Ok(r)
    }
}
