use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::TestResult;
use crate::error::{Error, Result};
use crate::linalg::{lstsq, Matrix};
use crate::timeseries::TimeSeries;

/// Chi-square Granger causality test of `x → y` at lag order `lag`.
///
/// Both models regress `y_t` on a constant and `y_{t-1..t-L}`; the
/// unrestricted one adds `x_{t-1..t-L}`. With `n = N - L` usable rows the
/// statistic is `n·(RSS_r − RSS_u)/RSS_u`, referred to chi-square with as many
/// degrees of freedom as the `x` block adds to the column rank (normally `L`).
/// Numerically dependent regressors, as in noise-free periodic signals, are
/// dropped rather than rejected.
pub fn granger_causality(x: &TimeSeries, y: &TimeSeries, lag: usize) -> Result<TestResult> {
    if lag == 0 {
        return Err(Error::InvalidArgument(
            "Granger lag must be positive".into(),
        ));
    }
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = y.len();
    if n <= 4 * lag {
        return Err(Error::InvalidArgument(format!(
            "Granger test at lag {lag} needs more than {} samples, got {n}",
            4 * lag
        )));
    }
    for (name, s) in [("input", x), ("output", y)] {
        if s.variance() <= 1e-24 * s.mean().powi(2) || s.variance() == 0.0 {
            return Err(Error::Degenerate(format!(
                "{name} series has zero variance"
            )));
        }
    }
    let (xs, ys) = (x.samples(), y.samples());
    let rows = n - lag;
    let target = ys[lag..].to_vec();
    let mut cols = vec![vec![1.0; rows]];
    for j in 1..=lag {
        cols.push((lag..n).map(|t| ys[t - j]).collect());
    }
    let restricted = lstsq(&Matrix::from_columns(&cols)?, &target)?;
    for j in 1..=lag {
        cols.push((lag..n).map(|t| xs[t - j]).collect());
    }
    let unrestricted = lstsq(&Matrix::from_columns(&cols)?, &target)?;

    let df = unrestricted.rank.saturating_sub(restricted.rank);
    if df == 0 {
        return Err(Error::SingularRegression(
            "lagged input adds no information beyond the output's own lags".into(),
        ));
    }
    let (rss_r, rss_u) = (restricted.rss, unrestricted.rss);
    let scale = crate::linalg::dot(&target, &target).max(f64::MIN_POSITIVE);
    let stat = if rss_u <= 1e-28 * scale {
        if rss_r <= 1e-28 * scale {
            return Err(Error::Degenerate(
                "output is an exact function of its own past".into(),
            ));
        }
        f64::INFINITY
    } else {
        rows as f64 * (rss_r - rss_u).max(0.0) / rss_u
    };
    let p = if stat.is_infinite() {
        0.0
    } else {
        ChiSquared::new(df as f64)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .sf(stat)
    };
    let mut out = TestResult::from_p(stat, p);
    out.lag = Some(lag);
    out.nobs = Some(rows);
    out.df = Some(df);
    Ok(out)
}
