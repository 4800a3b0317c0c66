//! Acceptance suite for the `alcc` solver: ten property and oracle checks,
//! each with a pinned tolerance and wall-clock budget.

pub mod criteria;
pub mod oracles;

use std::fmt;
use std::time::Duration;

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    /// Tolerances and measured worst cases.
    pub detail: String,
    pub checks_passed: bool,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl CriterionReport {
    pub fn within_limit(&self) -> bool {
        self.limit.map_or(true, |l| self.elapsed <= l)
    }

    pub fn passed(&self) -> bool {
        self.checks_passed && self.within_limit()
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let budget = match self.limit {
            Some(l) => format!("{:.2}s / {}s", self.elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", self.elapsed.as_secs_f64()),
        };
        write!(
            f,
            "criterion {:>2} {verdict}  {}  [{budget}]  {}",
            self.id, self.title, self.detail
        )?;
        if !self.within_limit() {
            write!(f, "  (over time budget)")?;
        }
        Ok(())
    }
}

/// Runs all ten criteria and returns the reports in order.
pub fn run_all() -> Vec<CriterionReport> {
    criteria::run_all()
}
