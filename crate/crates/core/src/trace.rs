//! Trace output: one CSV row per outer iterate, and a full-precision JSON
//! document that can be re-audited against the problem it came from.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{ScheduleConfig, SolveTrace};

/// Tag on the first line of every CSV trace and in every JSON trace.
pub const TRACE_FORMAT: &str = "alcc-trace/1";

pub const CSV_HEADER: &str =
    "k,mu,alpha,eta,inner_iters,infeas,obj,y_norm,thm7_residual,thm6_residual,thm5_residual";

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:e}"),
        Some(x) => format!("{x}"),
        None => "nan".to_string(),
    }
}

/// Renders the trace as CSV: a `# alcc-trace/1` line, the header, then one row per iterate.
pub fn to_csv(trace: &SolveTrace<f64>) -> String {
    let mut out = format!("# {TRACE_FORMAT}\n{CSV_HEADER}\n");
    for it in &trace.iterates {
        let y_norm = crate::linalg::norm2(&it.y);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            it.k,
            cell(Some(it.mu)),
            cell(Some(it.alpha)),
            cell(Some(it.eta)),
            it.inner_iters,
            cell(Some(it.infeas)),
            cell(Some(it.obj)),
            cell(Some(y_norm)),
            cell(Some(it.bounds.infeasibility)),
            cell(it.bounds.suboptimality_upper),
            cell(it.bounds.suboptimality_lower),
        );
    }
    out
}

/// JSON trace document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub format: String,
    /// SHA-256 of the canonical problem JSON, hex encoded.
    pub problem_sha256: String,
    pub schedule: ScheduleConfig<f64>,
    pub trace: SolveTrace<f64>,
}

impl TraceFile {
    pub fn new(problem_sha256: String, schedule: ScheduleConfig<f64>, trace: SolveTrace<f64>) -> Self {
        Self {
            format: TRACE_FORMAT.to_string(),
            problem_sha256,
            schedule,
            trace,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TraceFile = serde_json::from_str(text).map_err(|e| Error::Schema {
            field: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        if file.format != TRACE_FORMAT {
            return Err(Error::Schema {
                field: "format".into(),
                message: format!("expected {TRACE_FORMAT}, found {}", file.format),
            });
        }
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::random_solvable_lp;
    use crate::solver::solve;

    #[test]
    fn csv_layout() {
        let f = random_solvable_lp(3, 2, 1).unwrap();
        let trace = solve(&f.program().unwrap(), &ScheduleConfig::default()).unwrap();
        let csv = to_csv(&trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# alcc-trace/1");
        assert_eq!(lines[1], CSV_HEADER);
        assert_eq!(lines.len(), 2 + trace.iterates.len());
        for line in &lines[2..] {
            assert_eq!(line.split(',').count(), 11);
        }
        let first: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(first[0], "1");
        assert_eq!(first[1].parse::<f64>().unwrap(), 2.0);
    }

    #[test]
    fn csv_marks_missing_bounds() {
        let mut f = random_solvable_lp(2, 1, 3).unwrap().program().unwrap();
        f = f
            .with_reference(crate::solver::Reference::default())
            .unwrap();
        let trace = solve(&f, &ScheduleConfig::default()).unwrap();
        let csv = to_csv(&trace);
        assert!(csv.lines().nth(2).unwrap().ends_with(",nan,nan"));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let f = random_solvable_lp(4, 3, 2).unwrap();
        let schedule = ScheduleConfig::default();
        let trace = solve(&f.program().unwrap(), &schedule).unwrap();
        let file = TraceFile::new("abc".into(), schedule, trace);
        let back = TraceFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn wrong_format_tag_rejected() {
        let f = random_solvable_lp(2, 1, 0).unwrap();
        let schedule = ScheduleConfig::default();
        let trace = solve(&f.program().unwrap(), &schedule).unwrap();
        let text = TraceFile::new("abc".into(), schedule, trace)
            .to_json()
            .replace(TRACE_FORMAT, "alcc-trace/0");
        assert!(TraceFile::from_json(&text).is_err());
    }
}
