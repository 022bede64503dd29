//! Verification records and their text and JSON renderings.

use std::fmt::Write as _;

use crate::sampling::Reduction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub check_id: String,
    pub suite: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub note: String,
}

impl Record {
    /// Passes exactly when `max_residual <= tolerance`; NaN fails.
    pub fn measured(suite: &str, check_id: impl Into<String>, samples: usize, max_residual: f64, tolerance: f64, note: impl Into<String>) -> Record {
        let verdict = if max_residual <= tolerance { Verdict::Pass } else { Verdict::Fail };
        Record {
            check_id: check_id.into(),
            suite: suite.to_string(),
            samples,
            max_residual,
            tolerance,
            verdict,
            note: note.into(),
        }
    }

    /// A sampled check. Any aborted sample turns the residual infinite and
    /// the first failure goes into the note.
    pub fn from_reduction(suite: &str, check_id: impl Into<String>, r: &Reduction, tolerance: f64, note: &str) -> Record {
        let samples = r.evaluated + r.aborted;
        match &r.first_error {
            Some((i, msg)) => {
                let detail = format!("{} of {samples} samples failed; first at {i}: {msg}", r.aborted);
                let note = if note.is_empty() { detail } else { format!("{note}; {detail}") };
                Record::measured(suite, check_id, samples, f64::INFINITY, tolerance, note)
            }
            None => Record::measured(suite, check_id, samples, r.max, tolerance, note),
        }
    }

    /// A check that could not be evaluated at all.
    pub fn failed(suite: &str, check_id: impl Into<String>, tolerance: f64, note: impl Into<String>) -> Record {
        Record::measured(suite, check_id, 0, f64::INFINITY, tolerance, note)
    }

    pub fn skipped(suite: &str, check_id: impl Into<String>, note: impl Into<String>) -> Record {
        Record {
            check_id: check_id.into(),
            suite: suite.to_string(),
            samples: 0,
            max_residual: f64::NAN,
            tolerance: f64::NAN,
            verdict: Verdict::Skipped,
            note: note.into(),
        }
    }
}

/// Records ordered by `check_id`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    records: Vec<Record>,
}

impl Report {
    pub fn new(mut records: Vec<Record>) -> Report {
        records.sort_by(|a, b| a.check_id.cmp(&b.check_id));
        Report { records }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.records.iter().filter(|r| r.verdict == v).count()
    }

    pub fn has_failures(&self) -> bool {
        self.count(Verdict::Fail) > 0
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.has_failures())
    }

    pub fn summary(&self) -> String {
        let n = self.records.len();
        if n == 0 {
            return "0 checks".into();
        }
        format!(
            "{n} check{}: {} passed, {} failed, {} skipped",
            if n == 1 { "" } else { "s" },
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::Skipped)
        )
    }

    pub fn to_text(&self) -> String {
        let header = ["check", "suite", "samples", "max_residual", "tolerance", "verdict", "note"];
        let rows: Vec<[String; 7]> = self
            .records
            .iter()
            .map(|r| {
                [
                    r.check_id.clone(),
                    r.suite.clone(),
                    r.samples.to_string(),
                    short_real(r.max_residual),
                    short_real(r.tolerance),
                    r.verdict.as_str().to_string(),
                    r.note.clone(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        if !rows.is_empty() {
            let line = |cells: &[&str]| {
                let mut s = String::new();
                for (k, (cell, w)) in cells.iter().zip(widths).enumerate() {
                    match k {
                        0 | 1 | 5 => write!(s, "{cell:<w$}  ").unwrap(),
                        6 => s.push_str(cell),
                        _ => write!(s, "{cell:>w$}  ").unwrap(),
                    }
                }
                s.trim_end().to_string()
            };
            out.push_str(&line(&header));
            out.push('\n');
            for row in &rows {
                out.push_str(&line(&row.each_ref().map(String::as_str)));
                out.push('\n');
            }
        }
        out.push_str(&self.summary());
        out.push('\n');
        out
    }

    /// An array of record objects; reals carry 17 significant digits and
    /// non-finite values are written as `null`.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, r) in self.records.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            write!(
                out,
                "\"check_id\": {}, \"suite\": {}, \"samples\": {}, \"max_residual\": {}, \"tolerance\": {}, \"verdict\": \"{}\", \"note\": {}",
                json_string(&r.check_id),
                json_string(&r.suite),
                r.samples,
                json_real(r.max_residual),
                json_real(r.tolerance),
                r.verdict.as_str(),
                json_string(&r.note)
            )
            .unwrap();
            out.push('}');
        }
        if !self.records.is_empty() {
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }
}

fn short_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.3e}")
    } else if x.is_nan() {
        "-".into()
    } else {
        "inf".into()
    }
}

fn json_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn json_string(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}
