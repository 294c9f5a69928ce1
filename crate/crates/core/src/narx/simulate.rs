use super::NarxModel;
use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// Free-run outputs beyond this magnitude count as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

/// One-step-ahead prediction from measured outputs and inputs. The first
/// `history` samples, which have no prediction, repeat the measured output.
/// Noise terms are not evaluated.
pub fn predict_one_step(model: &NarxModel, x: &TimeSeries, y: &TimeSeries) -> Result<TimeSeries> {
    let ys = one_step(model, x.samples(), y.samples())?;
    TimeSeries::new(ys, y.sample_rate_hz())
}

pub(crate) fn one_step(model: &NarxModel, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "input has {} samples but output has {}",
            x.len(),
            y.len()
        )));
    }
    let h = model.max_lags.history();
    if y.len() <= h {
        return Err(Error::InsufficientHistory {
            required: h + 1,
            available: y.len(),
        });
    }
    let mut out = y[..h].to_vec();
    out.extend((h..y.len()).map(|k| model.eval_process(y, x, k)));
    Ok(out)
}

/// Recursive simulation: after the seed values `y_init`, every output is
/// computed from earlier simulated outputs and the input. Noise terms
/// contribute zero. The result has the length of `x`.
pub fn free_run(model: &NarxModel, x: &TimeSeries, y_init: &[f64]) -> Result<TimeSeries> {
    let ys = free_run_slice(model, x.samples(), y_init)?;
    TimeSeries::new(ys, x.sample_rate_hz())
}

pub(crate) fn free_run_slice(model: &NarxModel, x: &[f64], y_init: &[f64]) -> Result<Vec<f64>> {
    let h = model.max_lags.history();
    if y_init.len() < h {
        return Err(Error::InsufficientHistory {
            required: h,
            available: y_init.len(),
        });
    }
    if x.len() < y_init.len() {
        return Err(Error::InvalidArgument(format!(
            "input of {} samples is shorter than the {} seed values",
            x.len(),
            y_init.len()
        )));
    }
    if y_init.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("seed values must be finite".into()));
    }
    let mut y = Vec::with_capacity(x.len());
    y.extend_from_slice(y_init);
    for k in y_init.len()..x.len() {
        let v = model.eval_process(&y, x, k);
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { step: k });
        }
        y.push(v);
    }
    Ok(y)
}

/// Relative root squared error `sqrt(Σ(ŷ−y)² / Σ(y−ȳ)²)`.
pub fn rrse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidArgument(format!(
            "lengths differ ({} vs {})",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.len() < 2 {
        return Err(Error::InvalidArgument(
            "RRSE needs at least two samples".into(),
        ));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let den: f64 = y_true.iter().map(|v| (v - mean).powi(2)).sum();
    if den <= 0.0 || den <= 1e-28 * mean * mean * y_true.len() as f64 {
        return Err(Error::Degenerate("observed series is constant".into()));
    }
    let num: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (b - a).powi(2))
        .sum();
    Ok((num / den).sqrt())
}
