use statrs::distribution::{ContinuousCDF, Normal};

use super::TestResult;
use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// 5 % critical value for the corrected statistic `A*` when both normal
/// parameters are estimated.
pub const AD_CRITICAL_05: f64 = 0.752;

const MIN_SAMPLES: usize = 8;

/// Uncorrected `A²` against a normal with sample mean and sample standard
/// deviation (ddof = 1).
pub fn anderson_darling_raw(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "Anderson-Darling needs at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let sd = (ss / (nf - 1.0)).sqrt();
    if sd.is_nan() || sd <= 0.0 || sd <= 1e-12 * mean.abs() {
        return Err(Error::Degenerate("sample has zero variance".into()));
    }
    let mut z: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let norm = Normal::standard();
    let mut s = 0.0;
    for i in 0..n {
        let lower = norm.cdf(z[i]).max(f64::MIN_POSITIVE).ln();
        let upper = norm.sf(z[n - 1 - i]).max(f64::MIN_POSITIVE).ln();
        s += (2 * i + 1) as f64 * (lower + upper);
    }
    Ok((-nf - s / nf).max(0.0))
}

/// Anderson-Darling normality test with estimated mean and variance.
///
/// The statistic is `A* = A²·(1 + 0.75/n + 2.25/n²)` and the null is rejected
/// when `A*` exceeds [`AD_CRITICAL_05`]. No p-value is reported.
pub fn anderson_darling(ts: &TimeSeries) -> Result<TestResult> {
    let a2 = anderson_darling_raw(ts.samples())?;
    let n = ts.len() as f64;
    let corrected = a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
    Ok(TestResult {
        statistic: corrected,
        p_value: None,
        reject_at_05: corrected > AD_CRITICAL_05,
        lag: None,
        nobs: Some(ts.len()),
        df: None,
    })
}
