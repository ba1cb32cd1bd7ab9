//! Machine-readable verification reports and sweep tables.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::construction::ConstantEstimates;
use crate::curves::measure::KRow;
use crate::jet::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Recorded, not asserted.
    Flagged,
}

impl CheckStatus {
    pub fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Flagged => "FLAG",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    pub status: CheckStatus,
    /// Residual or estimate.
    pub value: f64,
    /// Threshold the value is compared with, if any.
    pub threshold: Option<f64>,
    /// Stacked `(x, y)` coordinates of the worst point, if any.
    pub witness: Option<Vec<f64>>,
    pub detail: String,
}

impl CheckRecord {
    /// `value ≤ threshold`.
    pub fn at_most(suite: &str, name: &str, value: f64, threshold: f64) -> Self {
        Self::new(suite, name, value <= threshold, value, Some(threshold))
    }

    /// `value ≥ threshold`.
    pub fn at_least(suite: &str, name: &str, value: f64, threshold: f64) -> Self {
        Self::new(suite, name, value >= threshold, value, Some(threshold))
    }

    pub fn new(suite: &str, name: &str, ok: bool, value: f64, threshold: Option<f64>) -> Self {
        Self {
            suite: suite.into(),
            name: name.into(),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            value,
            threshold,
            witness: None,
            detail: String::new(),
        }
    }

    pub fn flagged(suite: &str, name: &str, value: f64) -> Self {
        Self {
            status: CheckStatus::Flagged,
            ..Self::new(suite, name, true, value, None)
        }
    }

    pub fn with_witness(mut self, p: Option<&Point>) -> Self {
        self.witness = p.map(Point::coords);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// One log line.
    pub fn line(&self) -> String {
        let mut s = format!(
            "[{}] {}/{} value={:.6e}",
            self.status.label(),
            self.suite,
            self.name,
            self.value
        );
        if let Some(t) = self.threshold {
            let _ = write!(s, " threshold={t:.3e}");
        }
        if !self.detail.is_empty() {
            let _ = write!(s, " ({})", self.detail);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    /// SHA-256 of the canonical JSON of the effective configuration.
    pub config_sha256: String,
    pub seed: u64,
    pub lemma_points: usize,
    pub variety_points: usize,
    pub construction_grid: crate::construction::GridSpec,
    pub s_values: Vec<f64>,
    pub t_points: usize,
}

impl Provenance {
    pub fn of(config: &RunConfig) -> Self {
        let digest = Sha256::digest(config.canonical_json().as_bytes());
        Self {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: hex::encode(digest),
            seed: config.seed,
            lemma_points: config.grids.lemma_points,
            variety_points: config.grids.variety_points,
            construction_grid: config.grids.construction,
            s_values: config.curves.s_values.clone(),
            t_points: config.curves.t_points,
        }
    }
}

/// One row of the constants table over `r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusRow {
    pub r: f64,
    pub c0_star: f64,
    pub c1_prime: f64,
    pub c2_prime: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OverallStatus {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub suites: Vec<String>,
    pub status: OverallStatus,
    pub checks: Vec<CheckRecord>,
    pub constants: Option<ConstantEstimates>,
    pub radius_table: Vec<RadiusRow>,
    pub curve_rows: Vec<CurveRow>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

/// One row of the curve sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    #[serde(flatten)]
    pub k: KRow,
    pub monotonic: bool,
}

impl VerificationReport {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            suites: Vec::new(),
            status: OverallStatus::Pass,
            checks: Vec::new(),
            constants: None,
            radius_table: Vec::new(),
            curve_rows: Vec::new(),
            warnings: Vec::new(),
            provenance: Provenance::of(config),
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        if check.status == CheckStatus::Fail {
            self.status = OverallStatus::Fail;
        }
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.status == OverallStatus::Pass
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let count = |s| self.checks.iter().filter(|c| c.status == s).count();
        (
            count(CheckStatus::Pass),
            count(CheckStatus::Fail),
            count(CheckStatus::Flagged),
        )
    }

    pub fn summary(&self) -> String {
        let (p, f, g) = self.counts();
        format!(
            "{}: {} checks, {p} passed, {f} failed, {g} flagged",
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len()
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

pub const CSV_HEADER: &str = "curve,s,length,area,K,monotonic";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.k.curve),
            r.k.s,
            r.k.length,
            r.k.area,
            r.k.k,
            r.monotonic
        );
    }
    out
}
