//! Machine-readable verification reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "momentlab.report/1";

/// Anchor naming the statement a check exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremRef {
    SchrodingerOperator,
    ClassicalConstant,
    SemiclassicalLimit,
    SharpLiebThirring,
    CouplingMonotonicity,
    ConfinementCondition,
    HeatTraceMonotonicity,
    GoldenThompson,
    TraceFormula,
    CanonicalCommutation,
    GapFormula,
    SumRule,
    QuadraticIdentity,
    FeynmanHellmann,
    AizenmanLieb,
    OscillatorCounterexample,
}

impl TheoremRef {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::SchrodingerOperator => "schrodinger-operator",
            Self::ClassicalConstant => "classical-constant",
            Self::SemiclassicalLimit => "semiclassical-limit",
            Self::SharpLiebThirring => "sharp-lieb-thirring",
            Self::CouplingMonotonicity => "coupling-monotonicity",
            Self::ConfinementCondition => "confinement-condition",
            Self::HeatTraceMonotonicity => "heat-trace-monotonicity",
            Self::GoldenThompson => "golden-thompson",
            Self::TraceFormula => "trace-formula",
            Self::CanonicalCommutation => "canonical-commutation",
            Self::GapFormula => "gap-formula",
            Self::SumRule => "sum-rule",
            Self::QuadraticIdentity => "quadratic-identity",
            Self::FeynmanHellmann => "feynman-hellmann",
            Self::AizenmanLieb => "aizenman-lieb",
            Self::OscillatorCounterexample => "oscillator-counterexample",
        }
    }
}

/// One pass/fail record. Non-finite values are not representable in JSON
/// and are listed in `non_finite` instead of `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub theorem_ref: TheoremRef,
    pub values: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub non_finite: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, theorem_ref: TheoremRef, tolerance: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            theorem_ref,
            values: BTreeMap::new(),
            tolerance,
            passed,
            non_finite: Vec::new(),
            note: None,
        }
    }

    /// Passes when `value <= limit`.
    pub fn at_most(name: impl Into<String>, theorem_ref: TheoremRef, value: f64, limit: f64) -> Self {
        Self::new(name, theorem_ref, limit, value <= limit).with("value", value)
    }

    /// Passes when `lo <= value <= hi`.
    pub fn within(name: impl Into<String>, theorem_ref: TheoremRef, value: f64, lo: f64, hi: f64) -> Self {
        Self::new(name, theorem_ref, hi - lo, (lo..=hi).contains(&value))
            .with("value", value)
            .with("lower", lo)
            .with("upper", hi)
    }

    /// Passes when `|value - expected| <= tolerance`.
    pub fn close(name: impl Into<String>, theorem_ref: TheoremRef, value: f64, expected: f64, tolerance: f64) -> Self {
        Self::new(name, theorem_ref, tolerance, (value - expected).abs() <= tolerance)
            .with("value", value)
            .with("expected", expected)
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        if value.is_finite() {
            self.values.insert(key.to_owned(), value);
        } else {
            self.passed = false;
            self.non_finite.push(key.to_owned());
        }
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// A check that could not be evaluated.
    pub fn failed_with(name: impl Into<String>, theorem_ref: TheoremRef, error: &Error) -> Self {
        Self::new(name, theorem_ref, 0.0, false).note(error.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    /// Rows with a non-finite entry are dropped; JSON has no NaN.
    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        if row.iter().all(|v| v.is_finite()) {
            self.rows.push(row);
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub runtime_seconds: f64,
    pub version: String,
    /// SHA-256 of the command and its parameters.
    pub input_hash: String,
}

impl VerificationReport {
    pub fn new(command: impl Into<String>, parameters: BTreeMap<String, String>) -> Self {
        let command = command.into();
        let input_hash = input_hash(&command, &parameters);
        Self {
            schema: SCHEMA.to_owned(),
            command,
            parameters,
            checks: Vec::new(),
            tables: Vec::new(),
            runtime_seconds: 0.0,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            input_hash,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.schema != SCHEMA {
            return Err(Error::Parse(format!(
                "unsupported report schema {:?}, expected {SCHEMA:?}",
                report.schema
            )));
        }
        Ok(report)
    }

    /// Writes `<command>.json` and, when `csv` is set, one
    /// `<command>-<table>.csv` per table. Returns the written paths.
    pub fn write(&self, dir: &Path, json: bool, csv: bool) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_owned(),
            source,
        })?;
        let mut written = Vec::new();
        if json {
            let path = dir.join(format!("{}.json", self.command));
            fs::write(&path, self.to_json()?).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        if csv {
            for table in &self.tables {
                let path = dir.join(format!("{}-{}.csv", self.command, table.name));
                table.write_csv(&path)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

pub fn input_hash(command: &str, parameters: &BTreeMap<String, String>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(command.as_bytes());
    for (k, v) in parameters {
        hasher.update([0u8]);
        hasher.update(k.as_bytes());
        hasher.update(b"=");
        hasher.update(v.as_bytes());
    }
    format!("{:x}", hasher.finalize())
}
