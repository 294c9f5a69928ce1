//! Hypothesis tests and per-frequency report aggregation.

mod adf;
mod anderson;
mod descriptive;
mod granger;
mod kruskal;
mod report;

pub use adf::{adf_test, adf_test_with, default_max_lag, mackinnon_p, AdfLag};
pub use anderson::{anderson_darling, anderson_darling_raw, AD_CRITICAL_05};
pub use descriptive::{median_iqr, quantile};
pub use granger::granger_causality;
pub use kruskal::kruskal_wallis;
pub use report::{
    build_report, write_report, AnalysisRecord, FrequencyGroupReport, Report, SummaryRow,
};

/// Significance level used for every `reject_at_05` flag.
pub const ALPHA: f64 = 0.05;

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    /// Absent for tests that only report against a critical value.
    pub p_value: Option<f64>,
    pub reject_at_05: bool,
    /// Lag order used by lag-based tests.
    pub lag: Option<usize>,
    /// Observations entering the final regression, where applicable.
    pub nobs: Option<usize>,
    /// Degrees of freedom of the reference distribution, where applicable.
    pub df: Option<usize>,
}

impl TestResult {
    pub(crate) fn from_p(statistic: f64, p: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value: Some(p),
            reject_at_05: p < ALPHA,
            lag: None,
            nobs: None,
            df: None,
        }
    }

    /// Whether the null is rejected at level `alpha`. Falls back to the
    /// 5 % flag for critical-value tests.
    pub fn rejects_at(&self, alpha: f64) -> bool {
        match self.p_value {
            Some(p) => p < alpha,
            None => self.reject_at_05,
        }
    }
}
