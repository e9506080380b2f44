//! Transcribed expression tables: a CSV index plus one expression file per
//! row that has an expression.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::Enumerator;
use crate::error::{Error, Result};
use crate::express::{minimal_level_multiplier, verify_expression, Expression, ExpressionFile};
use crate::ingest::load_fixture;

pub const INDEX_FILE: &str = "index.csv";
const INDEX_HEADER: &str = "level,label,d,n_lower,n_upper,status,source";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MinimalStatus {
    Check,
    NRange { lo: usize, hi: usize },
    /// No expression at levels `N * d` for `d < lo`.
    DBound { lo: u64 },
}

impl fmt::Display for MinimalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinimalStatus::Check => write!(f, "check"),
            MinimalStatus::NRange { lo, hi } => write!(f, "{lo} <= n <= {hi}"),
            MinimalStatus::DBound { lo } => write!(f, "{lo} <= d"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub level: u64,
    pub label: String,
    pub expression: Option<Expression>,
    /// Level multiplier of the expression, or of the omitted one.
    pub d: Option<u64>,
    pub minimal_status: MinimalStatus,
    pub source: Option<String>,
}

/// Reads `index.csv` from `dir` together with the `<label>.txt` expression
/// files it refers to.
pub fn load_table(dir: impl AsRef<Path>) -> Result<Vec<TableRow>> {
    let dir = dir.as_ref();
    let path = dir.join(INDEX_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == INDEX_HEADER) {
            continue;
        }
        let schema = |message: String| Error::Schema {
            path: path.clone(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [level, label, d, n_lower, n_upper, status, source] = fields[..] else {
            return Err(schema(format!("expected 7 fields, found {}", fields.len())));
        };
        let num = |name: &str, v: &str| -> Result<Option<u64>> {
            if v.is_empty() {
                return Ok(None);
            }
            v.parse().map(Some).map_err(|_| schema(format!("{name}: not a number: {v:?}")))
        };
        let required = |name: &str, v: Option<u64>| v.ok_or_else(|| schema(format!("{name} is required")));
        let level = required("level", num("level", level)?)?;
        let d = num("d", d)?;
        let minimal_status = match status {
            "check" => MinimalStatus::Check,
            "n-range" => MinimalStatus::NRange {
                lo: required("n_lower", num("n_lower", n_lower)?)? as usize,
                hi: required("n_upper", num("n_upper", n_upper)?)? as usize,
            },
            "d-bound" => MinimalStatus::DBound {
                lo: required("d", d)?,
            },
            other => return Err(schema(format!("unknown status {other:?}"))),
        };
        let file = dir.join(format!("{label}.txt"));
        let expression = if file.exists() {
            let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            let parsed = text.parse::<ExpressionFile>().map_err(|e| Error::Schema {
                path: file.clone(),
                line: 0,
                message: e.to_string(),
            })?;
            if parsed.label != label {
                return Err(schema(format!("{} holds {}", file.display(), parsed.label)));
            }
            Some(parsed.expression)
        } else {
            None
        };
        if matches!(minimal_status, MinimalStatus::Check) && expression.is_none() {
            return Err(schema(format!("{label} is marked minimal but has no expression file")));
        }
        if matches!(minimal_status, MinimalStatus::DBound { .. }) && expression.is_some() {
            return Err(schema(format!("{label} has both a d bound and an expression")));
        }
        rows.push(TableRow {
            level,
            label: label.to_string(),
            expression,
            d,
            minimal_status,
            source: (!source.is_empty()).then(|| source.to_string()),
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum RowOutcome {
    Verified,
    Mismatch,
    /// No expression for any `d <= checked`.
    BoundConfirmed { checked: u64 },
    /// An expression exists at `N * d` below the claimed bound.
    BoundViolated { d: u64 },
    Skipped { reason: String },
    Failed { error: String },
}

impl RowOutcome {
    pub fn passed(&self) -> bool {
        !matches!(
            self,
            RowOutcome::Mismatch | RowOutcome::BoundViolated { .. } | RowOutcome::Failed { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowReport {
    pub label: String,
    #[serde(flatten)]
    pub outcome: RowOutcome,
}

impl fmt::Display for RowReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.outcome.passed() { "ok  " } else { "FAIL" };
        match &self.outcome {
            RowOutcome::Verified => write!(f, "{mark} {} expression verified", self.label),
            RowOutcome::Mismatch => write!(f, "{mark} {} expression does not match the form", self.label),
            RowOutcome::BoundConfirmed { checked } => {
                write!(f, "{mark} {} no expression for d <= {checked}", self.label)
            }
            RowOutcome::BoundViolated { d } => write!(f, "{mark} {} expressible at d = {d}", self.label),
            RowOutcome::Skipped { reason } => write!(f, "skip {} {reason}", self.label),
            RowOutcome::Failed { error } => write!(f, "{mark} {} {error}", self.label),
        }
    }
}

/// Checks table rows against coefficient records in `forms_dir`.
#[derive(Clone, Debug)]
pub struct TableVerifier {
    pub forms_dir: PathBuf,
    pub enumerator: Enumerator,
    /// Largest `d` swept for d-bound rows; `None` skips them, and smaller
    /// caps give partial confirmations.
    pub d_bound_max: Option<u64>,
}

impl TableVerifier {
    pub fn new(forms_dir: impl Into<PathBuf>) -> Self {
        TableVerifier {
            forms_dir: forms_dir.into(),
            enumerator: Enumerator::default(),
            d_bound_max: None,
        }
    }

    pub fn verify_row(&self, row: &TableRow) -> RowReport {
        let outcome = self.row_outcome(row).unwrap_or_else(|e| RowOutcome::Failed { error: e.to_string() });
        RowReport {
            label: row.label.clone(),
            outcome,
        }
    }

    fn row_outcome(&self, row: &TableRow) -> Result<RowOutcome> {
        if let Some(e) = &row.expression {
            let form = load_fixture(&self.forms_dir, &row.label)?.target()?;
            return Ok(if verify_expression(e, &form)? {
                RowOutcome::Verified
            } else {
                RowOutcome::Mismatch
            });
        }
        match (&row.minimal_status, self.d_bound_max) {
            (MinimalStatus::DBound { lo }, Some(cap)) => {
                let checked = (lo - 1).min(cap);
                if checked == 0 {
                    return Ok(RowOutcome::Skipped {
                        reason: "nothing below the bound".into(),
                    });
                }
                let form = load_fixture(&self.forms_dir, &row.label)?.target()?;
                Ok(match minimal_level_multiplier(&form, checked, &self.enumerator)? {
                    None => RowOutcome::BoundConfirmed { checked },
                    Some(m) => RowOutcome::BoundViolated { d: m.multiplier },
                })
            }
            (MinimalStatus::DBound { .. }, None) => Ok(RowOutcome::Skipped {
                reason: "d-bound sweeps disabled".into(),
            }),
            _ => Ok(RowOutcome::Skipped {
                reason: "no expression in the table".into(),
            }),
        }
    }

    /// Expression rows in parallel, then d-bound sweeps one at a time.
    pub fn verify_table(&self, rows: &[TableRow]) -> Vec<RowReport> {
        let mut reports: Vec<Option<RowReport>> = rows
            .par_iter()
            .map(|r| r.expression.is_some().then(|| self.verify_row(r)))
            .collect();
        for (slot, row) in reports.iter_mut().zip(rows) {
            if slot.is_none() {
                *slot = Some(self.verify_row(row));
            }
        }
        reports.into_iter().flatten().collect()
    }
}
