use super::{lags_of, CandidateSet, NarxModel};
use crate::error::{Error, Result};
use crate::linalg::{dot, lstsq};

/// A candidate whose orthogonalized energy falls below this fraction of its
/// own energy is treated as lying in the span of the selected terms.
const SPAN_TOLERANCE: f64 = 1e-10;

/// Outcome of greedy structure selection, in selection order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrolsSelection {
    pub selected: Vec<usize>,
    pub err: Vec<f64>,
    /// Fewer terms than requested were selected because every remaining
    /// candidate was numerically dependent on the chosen ones.
    pub truncated: bool,
}

/// Forward regression with orthogonal least squares.
///
/// Each step orthogonalizes the remaining candidates against the selected
/// ones and picks the largest error reduction ratio
/// `ERR = <w,y>² / (<w,w><y,y>)`. Projections onto the orthonormal basis are
/// accumulated incrementally, so a step costs one pass over the candidates;
/// the chosen column itself is re-orthogonalized explicitly (twice) before it
/// joins the basis.
pub fn frols_select(cands: &CandidateSet<'_>, n_terms: usize) -> Result<FrolsSelection> {
    let m = cands.len();
    if n_terms == 0 {
        return Err(Error::InvalidConfig("n_terms must be positive".into()));
    }
    if n_terms > m {
        return Err(Error::InvalidConfig(format!(
            "{n_terms} terms requested from {m} candidates"
        )));
    }
    let y = cands.target();
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var.is_nan() || var <= 1e-300 || var <= 1e-24 * mean * mean {
        return Err(Error::Degenerate("target has zero variance".into()));
    }
    let yy = dot(y, y);

    let mut energy = vec![0.0; m];
    let mut ww = vec![0.0; m];
    let mut wy = vec![0.0; m];
    for j in 0..m {
        let c = cands.column(j);
        energy[j] = dot(&c, &c);
        ww[j] = energy[j];
        wy[j] = dot(&c, y);
    }

    let mut available = vec![true; m];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n_terms);
    let mut selected = Vec::with_capacity(n_terms);
    let mut err = Vec::with_capacity(n_terms);

    while selected.len() < n_terms {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            if !available[j] || energy[j] == 0.0 || ww[j] <= SPAN_TOLERANCE * energy[j] {
                continue;
            }
            let score = wy[j] * wy[j] / (ww[j] * yy);
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let Some((j, _)) = best else {
            log::warn!(
                "FROLS stopped after {} of {n_terms} terms: remaining candidates are dependent",
                selected.len()
            );
            return Ok(FrolsSelection {
                selected,
                err,
                truncated: true,
            });
        };
        available[j] = false;

        let mut w = cands.column(j).into_owned();
        for _ in 0..2 {
            for q in &basis {
                let p = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= p * qi);
            }
        }
        let w_energy = dot(&w, &w);
        if w_energy <= SPAN_TOLERANCE * energy[j] {
            // the running bookkeeping overestimated this candidate
            continue;
        }
        let w_y = dot(&w, y);
        err.push((w_y * w_y / (w_energy * yy)).clamp(0.0, 1.0));
        selected.push(j);

        let norm = w_energy.sqrt();
        w.iter_mut().for_each(|v| *v /= norm);
        let qy = dot(&w, y);
        for k in 0..m {
            if available[k] {
                let p = dot(&w, &cands.column(k));
                ww[k] -= p * p;
                wy[k] -= p * qy;
            }
        }
        basis.push(w);
    }

    Ok(FrolsSelection {
        selected,
        err,
        truncated: false,
    })
}

impl FrolsSelection {
    /// Least-squares coefficients of the selected terms in the original
    /// (non-orthogonal) basis.
    pub fn into_model(self, cands: &CandidateSet<'_>) -> Result<NarxModel> {
        let design = cands.design(&self.selected)?;
        let fit = lstsq(&design, cands.target())?;
        let terms: Vec<_> = self
            .selected
            .iter()
            .map(|&j| cands.terms()[j].clone())
            .collect();
        let max_lags = lags_of(&terms);
        Ok(NarxModel {
            basis: cands.basis(),
            terms,
            coefficients: fit.coefficients,
            err: self.err,
            scaling: cands.scaling(),
            max_lags,
            uncertainties: None,
            truncated: self.truncated,
        })
    }
}
