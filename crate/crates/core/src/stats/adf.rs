use statrs::distribution::{ContinuousCDF, Normal};

use super::TestResult;
use crate::error::{Error, Result};
use crate::linalg::{last_coefficient_t, nested_rss, Matrix};
use crate::timeseries::TimeSeries;

// MacKinnon (1994) response surface, constant-only regression, one series.
const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;
const TAU_SMALLP: [f64; 3] = [2.1659, 1.4412, 0.038269];
const TAU_LARGEP: [f64; 4] = [1.7339, 0.93202, -0.12745, -0.010368];

/// Lag-order policy for the augmented regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdfLag {
    /// Choose `p` in `0..=max` by minimum AIC on a common sample.
    Auto { max: usize },
    /// Use exactly `p` lagged differences.
    Fixed(usize),
}

/// `floor(12·(n/100)^{1/4})`.
pub fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Approximate asymptotic p-value of the ADF t-ratio (constant, no trend).
pub fn mackinnon_p(tau: f64) -> f64 {
    if tau > TAU_MAX {
        return 1.0;
    }
    if tau < TAU_MIN {
        return 0.0;
    }
    let coeffs: &[f64] = if tau <= TAU_STAR {
        &TAU_SMALLP
    } else {
        &TAU_LARGEP
    };
    let poly = coeffs.iter().rev().fold(0.0, |acc, c| acc * tau + c);
    Normal::standard().cdf(poly)
}

/// Augmented Dickey-Fuller test with a constant and AIC lag selection over
/// `0..=max_lag` (default [`default_max_lag`]).
///
/// Rejection means the unit-root null is rejected, i.e. the series is
/// stationary.
pub fn adf_test(ts: &TimeSeries, max_lag: Option<usize>) -> Result<TestResult> {
    let max = max_lag.unwrap_or_else(|| default_max_lag(ts.len()));
    adf_test_with(ts, AdfLag::Auto { max })
}

/// Regressors `[1, Δy_{t-1}..Δy_{t-p}, y_{t-1}]` and target `Δy_t` over the
/// last `n - 1 - start` differences.
fn adf_design(y: &[f64], p: usize, start: usize) -> (Matrix, Vec<f64>) {
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let rows = dy.len() - start;
    let mut cols = Vec::with_capacity(p + 2);
    cols.push(vec![1.0; rows]);
    for j in 1..=p {
        cols.push((start..dy.len()).map(|t| dy[t - j]).collect());
    }
    // Δy index t corresponds to y[t+1] - y[t]; its level regressor is y[t]
    cols.push((start..dy.len()).map(|t| y[t]).collect());
    let target = dy[start..].to_vec();
    (
        Matrix::from_columns(&cols).expect("columns share a length"),
        target,
    )
}

pub fn adf_test_with(ts: &TimeSeries, lag: AdfLag) -> Result<TestResult> {
    let y = ts.samples();
    let n = y.len();
    let max = match lag {
        AdfLag::Auto { max } | AdfLag::Fixed(max) => max,
    };
    if n <= 3 * (max + 2) {
        return Err(Error::InvalidArgument(format!(
            "ADF with max lag {max} needs more than {} samples, got {n}",
            3 * (max + 2)
        )));
    }
    let used = match lag {
        AdfLag::Fixed(p) => p,
        AdfLag::Auto { max } => select_lag(y, max)?,
    };
    let (x, target) = adf_design(y, used, used);
    let nobs = target.len();
    let (t, _) = last_coefficient_t(&x, &target)?;
    let mut out = TestResult::from_p(t, mackinnon_p(t));
    out.lag = Some(used);
    out.nobs = Some(nobs);
    Ok(out)
}

fn select_lag(y: &[f64], max: usize) -> Result<usize> {
    // common sample: every candidate sees the same max-lag-trimmed rows;
    // ordering [1, y_{t-1}, Δy lags] lets one factorization give all fits
    let (full, target) = adf_design(y, max, max);
    let mut cols: Vec<Vec<f64>> = vec![full.column(0).to_vec(), full.column(max + 1).to_vec()];
    for j in 1..=max {
        cols.push(full.column(j).to_vec());
    }
    let ordered = Matrix::from_columns(&cols)?;
    let rss = nested_rss(&ordered, &target);
    let nobs = target.len() as f64;
    let mut best: Option<(usize, f64)> = None;
    for p in 0..=max {
        let k = p + 2;
        let Some(r) = rss[k] else { break };
        if r <= 0.0 {
            break;
        }
        let aic = nobs * (r / nobs).ln() + 2.0 * k as f64;
        if best.is_none_or(|(_, b)| aic < b) {
            best = Some((p, aic));
        }
    }
    best.map(|(p, _)| p).ok_or_else(|| {
        Error::SingularRegression("ADF design is rank deficient at every lag".into())
    })
}
