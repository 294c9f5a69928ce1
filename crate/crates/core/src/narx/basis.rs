use std::borrow::Cow;

use super::{BasisKind, Factor, FitConfig, MaxLags, RegressorTerm, Scaling, Transform};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::timeseries::TimeSeries;

/// Upper bound on the number of candidate regressors.
pub const MAX_CANDIDATES: u128 = 1_000_000;

/// Candidate columns are materialized when `terms × rows` stays below this.
const CACHE_LIMIT: usize = 1 << 24;

/// One aligned input/output record contributing rows to a regression.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
}

impl<'a> Segment<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "input has {} samples but output has {}",
                x.len(),
                y.len()
            )));
        }
        Ok(Self { x, y })
    }
}

/// Candidate regressors evaluated over the rows `k = history..len` of every
/// segment, stacked in segment order.
pub struct CandidateSet<'a> {
    terms: Vec<RegressorTerm>,
    segments: Vec<Segment<'a>>,
    /// Residual series per segment, used for noise-lag terms.
    noise: Option<Vec<Vec<f64>>>,
    history: usize,
    scaling: Option<Scaling>,
    basis: super::BasisSpec,
    max_lags: MaxLags,
    target: Vec<f64>,
    cache: Option<Vec<Vec<f64>>>,
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn lagged_variables(cfg: &FitConfig) -> Vec<Factor> {
    let mut vars: Vec<Factor> = (1..=cfg.max_output_lag).map(Factor::output).collect();
    if cfg.max_input_lag > 0 {
        vars.extend((cfg.input_delay..=cfg.largest_input_lag()).map(Factor::input));
    }
    vars
}

/// Number of candidates `cfg` would generate.
pub(crate) fn candidate_count(cfg: &FitConfig) -> u128 {
    let v = lagged_variables(cfg).len() as u128;
    let d = u128::from(cfg.basis.degree);
    match cfg.basis.kind {
        BasisKind::Polynomial => binomial(v + d, d),
        BasisKind::Fourier => 1 + 2 * d * v,
    }
}

fn enumerate_terms(cfg: &FitConfig) -> Result<Vec<RegressorTerm>> {
    let count = candidate_count(cfg);
    if count > MAX_CANDIDATES {
        return Err(Error::ConfigTooLarge {
            count,
            limit: MAX_CANDIDATES,
        });
    }
    let vars = lagged_variables(cfg);
    let mut terms = vec![RegressorTerm::constant()];
    match cfg.basis.kind {
        BasisKind::Polynomial => {
            // multisets of each size, as non-decreasing index sequences
            for size in 1..=cfg.basis.degree as usize {
                let mut idx = vec![0usize; size];
                loop {
                    terms.push(RegressorTerm {
                        factors: idx.iter().map(|&i| vars[i]).collect(),
                    });
                    let Some(pos) = (0..size).rev().find(|&p| idx[p] + 1 < vars.len()) else {
                        break;
                    };
                    let next = idx[pos] + 1;
                    for slot in &mut idx[pos..] {
                        *slot = next;
                    }
                }
            }
        }
        BasisKind::Fourier => {
            for v in &vars {
                for j in 1..=cfg.basis.degree {
                    terms.push(RegressorTerm::new(
                        vec![v.with_transform(Transform::Cos(j))],
                    ));
                    terms.push(RegressorTerm::new(
                        vec![v.with_transform(Transform::Sin(j))],
                    ));
                }
            }
        }
    }
    Ok(terms)
}

fn range_of<'b>(values: impl Iterator<Item = &'b f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

impl<'a> CandidateSet<'a> {
    pub fn from_segments(segments: &[Segment<'a>], cfg: &FitConfig) -> Result<Self> {
        cfg.validate()?;
        let terms = enumerate_terms(cfg)?;
        let scaling = (cfg.basis.kind == BasisKind::Fourier).then(|| Scaling {
            output: range_of(segments.iter().flat_map(|s| s.y.iter())),
            input: range_of(segments.iter().flat_map(|s| s.x.iter())),
        });
        let max_lags = MaxLags {
            output: cfg.max_output_lag,
            input: cfg.largest_input_lag(),
            noise: 0,
        };
        Self::with_terms(segments, terms, cfg.basis, max_lags, scaling, None)
    }

    /// Candidate set over explicit terms. `noise` supplies one residual series
    /// per segment when any term carries a noise lag.
    pub(crate) fn with_terms(
        segments: &[Segment<'a>],
        terms: Vec<RegressorTerm>,
        basis: super::BasisSpec,
        max_lags: MaxLags,
        scaling: Option<Scaling>,
        noise: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument("no data segments".into()));
        }
        let history = max_lags.output.max(max_lags.input).max(max_lags.noise);
        for s in segments {
            if s.y.len() <= history {
                return Err(Error::InsufficientHistory {
                    required: history + 1,
                    available: s.y.len(),
                });
            }
        }
        let target: Vec<f64> = segments
            .iter()
            .flat_map(|s| s.y[history..].iter().copied())
            .collect();
        let mut set = Self {
            terms,
            segments: segments.to_vec(),
            noise,
            history,
            scaling,
            basis,
            max_lags,
            target,
            cache: None,
        };
        if set.terms.len().saturating_mul(set.rows()) <= CACHE_LIMIT {
            let cols = (0..set.terms.len())
                .map(|j| set.compute(&set.terms[j]))
                .collect();
            set.cache = Some(cols);
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.target.len()
    }

    pub fn terms(&self) -> &[RegressorTerm] {
        &self.terms
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn history(&self) -> usize {
        self.history
    }

    pub fn scaling(&self) -> Option<Scaling> {
        self.scaling
    }

    pub fn basis(&self) -> super::BasisSpec {
        self.basis
    }

    pub fn max_lags(&self) -> MaxLags {
        self.max_lags
    }

    pub fn column(&self, j: usize) -> Cow<'_, [f64]> {
        match &self.cache {
            Some(cols) => Cow::Borrowed(&cols[j]),
            None => Cow::Owned(self.compute(&self.terms[j])),
        }
    }

    pub(crate) fn compute(&self, term: &RegressorTerm) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows());
        let empty: Vec<f64> = Vec::new();
        for (i, s) in self.segments.iter().enumerate() {
            let e = self.noise.as_ref().map_or(&empty, |n| &n[i]);
            for k in self.history..s.y.len() {
                out.push(term.eval(s.y, s.x, e, k, self.scaling.as_ref()));
            }
        }
        out
    }

    /// Dense design matrix of the selected columns.
    pub fn design(&self, columns: &[usize]) -> Result<Matrix> {
        let cols: Vec<Vec<f64>> = columns
            .iter()
            .map(|&j| self.column(j).into_owned())
            .collect();
        if cols.is_empty() {
            return Ok(Matrix::zeros(self.rows(), 0));
        }
        Matrix::from_columns(&cols)
    }
}

/// Full candidate design matrix and its term list for one recording.
pub fn build_candidates(
    x: &TimeSeries,
    y: &TimeSeries,
    cfg: &FitConfig,
) -> Result<(Matrix, Vec<RegressorTerm>)> {
    let seg = Segment::new(x.samples(), y.samples())?;
    let set = CandidateSet::from_segments(&[seg], cfg)?;
    let all: Vec<usize> = (0..set.len()).collect();
    let m = set.design(&all)?;
    Ok((m, set.terms))
}
