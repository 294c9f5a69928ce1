use super::simulate::one_step;
use super::{CandidateSet, Factor, MaxLags, NarxModel, RegressorTerm, Segment};
use crate::error::{Error, Result};
use crate::linalg::lstsq;

/// Coefficient magnitude treated as divergence.
const DIVERGENCE_BOUND: f64 = 1e6;
/// Iteration stops once no coefficient moves by more than this.
const CONVERGENCE: f64 = 1e-8;

/// Extended least squares refinement.
///
/// Each iteration appends residual regressors `e(k-1..k-n_e)` to the selected
/// process terms, refits every coefficient jointly and recomputes residuals
/// from the extended model. The returned model carries the noise terms (with
/// zero ERR) but simulation ignores them.
pub fn estimate_els(
    model: &NarxModel,
    segments: &[Segment<'_>],
    noise_lags: usize,
    iterations: usize,
) -> Result<NarxModel> {
    if iterations == 0 {
        return Ok(model.clone());
    }
    if noise_lags == 0 {
        return Err(Error::InvalidConfig(
            "ELS needs at least one noise lag".into(),
        ));
    }
    let kept: Vec<usize> = (0..model.len())
        .filter(|&i| !model.terms[i].has_noise())
        .collect();
    let mut process = model.clone();
    process.terms = kept.iter().map(|&i| model.terms[i].clone()).collect();
    process.coefficients = kept.iter().map(|&i| model.coefficients[i]).collect();
    process.err = kept.iter().map(|&i| model.err[i]).collect();
    process.max_lags.noise = 0;

    let base_history = process.max_lags.history();
    let mut residuals = Vec::with_capacity(segments.len());
    let mut total = 0.0;
    let mut scale = 0.0;
    for s in segments {
        let pred = one_step(&process, s.x, s.y)?;
        let e: Vec<f64> = (0..s.y.len())
            .map(|k| {
                if k < base_history {
                    0.0
                } else {
                    s.y[k] - pred[k]
                }
            })
            .collect();
        total += e.iter().map(|v| v * v).sum::<f64>();
        scale += s.y.iter().map(|v| v * v).sum::<f64>();
        residuals.push(e);
    }
    if total <= 1e-24 * scale {
        return Ok(process);
    }

    let mut terms = process.terms.clone();
    terms.extend((1..=noise_lags).map(|l| RegressorTerm::new(vec![Factor::noise(l)])));
    let max_lags = MaxLags {
        noise: noise_lags,
        ..process.max_lags
    };
    let history = max_lags.output.max(max_lags.input).max(noise_lags);
    let mut theta: Vec<f64> = process
        .coefficients
        .iter()
        .copied()
        .chain(std::iter::repeat_n(0.0, noise_lags))
        .collect();

    for iteration in 1..=iterations {
        let set = CandidateSet::with_terms(
            segments,
            terms.clone(),
            process.basis,
            max_lags,
            process.scaling,
            Some(residuals.clone()),
        )?;
        let all: Vec<usize> = (0..set.len()).collect();
        let fit = lstsq(&set.design(&all)?, set.target())?;
        if fit
            .coefficients
            .iter()
            .any(|c| !c.is_finite() || c.abs() > DIVERGENCE_BOUND)
        {
            return Err(Error::ElsDivergence { iteration });
        }
        let change = fit
            .coefficients
            .iter()
            .zip(&theta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        theta = fit.coefficients;
        // write the new residuals back into each segment's series
        let mut offset = 0;
        for (s, e) in segments.iter().zip(residuals.iter_mut()) {
            let rows = s.y.len() - history;
            e[history..].copy_from_slice(&fit.residuals[offset..offset + rows]);
            offset += rows;
        }
        log::debug!("ELS iteration {iteration}: max coefficient change {change:e}");
        if change < CONVERGENCE {
            break;
        }
    }

    let mut err = process.err.clone();
    err.extend(std::iter::repeat_n(0.0, noise_lags));
    Ok(NarxModel {
        basis: process.basis,
        terms,
        coefficients: theta,
        err,
        scaling: process.scaling,
        max_lags,
        uncertainties: None,
        truncated: process.truncated,
    })
}
