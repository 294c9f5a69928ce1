//! NARX identification: candidate regressors, FROLS structure selection,
//! extended least squares, simulation and grid search.

mod basis;
mod els;
mod frols;
mod grid;
mod simulate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use basis::{build_candidates, CandidateSet, Segment, MAX_CANDIDATES};
pub use els::estimate_els;
pub use frols::{frols_select, FrolsSelection};
pub use grid::{
    default_grid, grid_search, write_scores, GridCell, GridOptions, GridOutcome, LagPolicy,
    ScoreRow,
};
pub use simulate::{free_run, predict_one_step, rrse, DIVERGENCE_LIMIT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Polynomial,
    Fourier,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Polynomial => "polynomial",
            BasisKind::Fourier => "fourier",
        })
    }
}

/// Basis family with its degree: the nonlinearity degree for polynomials,
/// the harmonic count for Fourier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub degree: u32,
}

impl BasisSpec {
    pub fn polynomial(degree: u32) -> Self {
        Self {
            kind: BasisKind::Polynomial,
            degree,
        }
    }

    pub fn fourier(harmonics: u32) -> Self {
        Self {
            kind: BasisKind::Fourier,
            degree: harmonics,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    OutputLag,
    InputLag,
    NoiseLag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Cos(u32),
    Sin(u32),
}

/// One lagged variable inside a regressor, e.g. `y(k-3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Factor {
    pub variable: Variable,
    pub lag: usize,
    pub transform: Transform,
}

impl Factor {
    pub fn output(lag: usize) -> Self {
        Self {
            variable: Variable::OutputLag,
            lag,
            transform: Transform::Identity,
        }
    }

    pub fn input(lag: usize) -> Self {
        Self {
            variable: Variable::InputLag,
            lag,
            transform: Transform::Identity,
        }
    }

    pub fn noise(lag: usize) -> Self {
        Self {
            variable: Variable::NoiseLag,
            lag,
            transform: Transform::Identity,
        }
    }

    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.variable {
            Variable::OutputLag => "y",
            Variable::InputLag => "x",
            Variable::NoiseLag => "e",
        };
        match self.transform {
            Transform::Identity => write!(f, "{name}(k-{})", self.lag),
            Transform::Cos(j) => write!(f, "cos({j}*2pi*{name}(k-{}))", self.lag),
            Transform::Sin(j) => write!(f, "sin({j}*2pi*{name}(k-{}))", self.lag),
        }
    }
}

/// Product of factors; the empty product is the constant term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegressorTerm {
    pub factors: Vec<Factor>,
}

impl RegressorTerm {
    pub fn constant() -> Self {
        Self {
            factors: Vec::new(),
        }
    }

    pub fn new(mut factors: Vec<Factor>) -> Self {
        factors.sort();
        Self { factors }
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn has_noise(&self) -> bool {
        self.factors
            .iter()
            .any(|f| f.variable == Variable::NoiseLag)
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    /// Value at sample `k`. Callers guarantee `k` exceeds every lag.
    #[inline]
    pub(crate) fn eval(
        &self,
        y: &[f64],
        x: &[f64],
        e: &[f64],
        k: usize,
        scaling: Option<&Scaling>,
    ) -> f64 {
        let mut v = 1.0;
        for fac in &self.factors {
            let (series, range) = match fac.variable {
                Variable::OutputLag => (y, scaling.map(|s| s.output)),
                Variable::InputLag => (x, scaling.map(|s| s.input)),
                Variable::NoiseLag => (e, None),
            };
            let raw = series[k - fac.lag];
            v *= match fac.transform {
                Transform::Identity => raw,
                Transform::Cos(j) => {
                    (2.0 * std::f64::consts::PI * j as f64 * unit(raw, range)).cos()
                }
                Transform::Sin(j) => {
                    (2.0 * std::f64::consts::PI * j as f64 * unit(raw, range)).sin()
                }
            };
        }
        v
    }
}

#[inline]
fn unit(v: f64, range: Option<(f64, f64)>) -> f64 {
    match range {
        Some((lo, hi)) if hi > lo => (v - lo) / (hi - lo),
        Some((lo, _)) => v - lo,
        None => v,
    }
}

impl fmt::Display for RegressorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, fac) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{fac}")?;
        }
        Ok(())
    }
}

/// Min-max ranges used to map lagged variables onto `[0, 1]` before the
/// Fourier transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub output: (f64, f64),
    pub input: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MaxLags {
    pub output: usize,
    pub input: usize,
    #[serde(default)]
    pub noise: usize,
}

impl MaxLags {
    /// History needed before a free-run or one-step prediction can start.
    pub fn history(&self) -> usize {
        self.output.max(self.input)
    }
}

/// Identified model. Noise terms, when present, come from extended least
/// squares and are ignored by simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarxModel {
    pub basis: BasisSpec,
    pub terms: Vec<RegressorTerm>,
    pub coefficients: Vec<f64>,
    pub err: Vec<f64>,
    pub scaling: Option<Scaling>,
    pub max_lags: MaxLags,
    /// Reference or estimated coefficient half-widths, metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainties: Option<Vec<f64>>,
    /// Set when FROLS stopped before reaching the requested term count.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

impl NarxModel {
    /// Builds a model, deriving `max_lags` from the terms.
    pub fn new(
        basis: BasisSpec,
        terms: Vec<RegressorTerm>,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        if terms.len() != coefficients.len() {
            return Err(Error::InvalidArgument(format!(
                "{} terms but {} coefficients",
                terms.len(),
                coefficients.len()
            )));
        }
        let err = vec![0.0; terms.len()];
        let max_lags = lags_of(&terms);
        Ok(Self {
            basis,
            terms,
            coefficients,
            err,
            scaling: None,
            max_lags,
            uncertainties: None,
            truncated: false,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_input_terms(&self) -> bool {
        self.terms
            .iter()
            .any(|t| t.factors.iter().any(|f| f.variable == Variable::InputLag))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.terms.len();
        if self.coefficients.len() != n || self.err.len() != n {
            return Err(Error::InvalidArgument(
                "terms, coefficients and err must have equal lengths".into(),
            ));
        }
        if let Some(u) = &self.uncertainties {
            if u.len() != n {
                return Err(Error::InvalidArgument(
                    "uncertainties length mismatch".into(),
                ));
            }
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        if self.err.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::InvalidArgument(
                "ERR values must lie in [0, 1]".into(),
            ));
        }
        let needed = lags_of(&self.terms);
        if needed.output > self.max_lags.output
            || needed.input > self.max_lags.input
            || needed.noise > self.max_lags.noise
        {
            return Err(Error::InvalidArgument(
                "a term exceeds the declared maximum lags".into(),
            ));
        }
        if self
            .terms
            .iter()
            .any(|t| t.factors.iter().any(|f| f.lag == 0))
        {
            return Err(Error::InvalidArgument("lags must be positive".into()));
        }
        let fourier = self
            .terms
            .iter()
            .flat_map(|t| &t.factors)
            .any(|f| f.transform != Transform::Identity);
        if fourier && self.scaling.is_none() {
            return Err(Error::InvalidArgument(
                "Fourier terms need scaling ranges".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    /// Process-term contribution at sample `k` (noise terms skipped).
    #[inline]
    pub(crate) fn eval_process(&self, y: &[f64], x: &[f64], k: usize) -> f64 {
        self.terms
            .iter()
            .zip(&self.coefficients)
            .filter(|(t, _)| !t.has_noise())
            .map(|(t, c)| c * t.eval(y, x, &[], k, self.scaling.as_ref()))
            .sum()
    }
}

impl fmt::Display for NarxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y(k) =")?;
        for (i, (t, c)) in self.terms.iter().zip(&self.coefficients).enumerate() {
            let sign = match (*c < 0.0, i == 0) {
                (true, true) => " -",
                (true, false) => " - ",
                (false, true) => " ",
                (false, false) => " + ",
            };
            if t.is_constant() {
                write!(f, "{sign}{}", c.abs())?;
            } else {
                write!(f, "{sign}{}*{t}", c.abs())?;
            }
        }
        Ok(())
    }
}

pub(crate) fn lags_of(terms: &[RegressorTerm]) -> MaxLags {
    let mut m = MaxLags::default();
    for fac in terms.iter().flat_map(|t| &t.factors) {
        let slot = match fac.variable {
            Variable::OutputLag => &mut m.output,
            Variable::InputLag => &mut m.input,
            Variable::NoiseLag => &mut m.noise,
        };
        *slot = (*slot).max(fac.lag);
    }
    m
}

/// Structure-selection and estimation settings for one fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub n_terms: usize,
    pub basis: BasisSpec,
    pub use_els: bool,
    pub els_iterations: usize,
    pub max_output_lag: usize,
    /// Number of input lags, starting at `input_delay`.
    pub max_input_lag: usize,
    pub input_delay: usize,
    /// Residual lags used by ELS; `None` means `max_output_lag`.
    pub noise_lags: Option<usize>,
}

impl FitConfig {
    pub fn new(
        basis: BasisSpec,
        n_terms: usize,
        max_output_lag: usize,
        max_input_lag: usize,
    ) -> Self {
        Self {
            n_terms,
            basis,
            use_els: false,
            els_iterations: 20,
            max_output_lag,
            max_input_lag,
            input_delay: 1,
            noise_lags: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_terms == 0 {
            return Err(Error::InvalidConfig("n_terms must be positive".into()));
        }
        if self.basis.degree == 0 {
            return Err(Error::InvalidConfig(
                "basis degree must be at least 1".into(),
            ));
        }
        if self.max_output_lag == 0 && self.max_input_lag == 0 {
            return Err(Error::InvalidConfig(
                "at least one lagged variable is required".into(),
            ));
        }
        if self.max_input_lag > 0 && self.input_delay == 0 {
            return Err(Error::InvalidConfig(
                "input delay must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Largest input lag in samples, `d + n_x - 1`, or 0 without inputs.
    pub fn largest_input_lag(&self) -> usize {
        if self.max_input_lag == 0 {
            0
        } else {
            self.input_delay + self.max_input_lag - 1
        }
    }

    pub fn history(&self) -> usize {
        self.max_output_lag.max(self.largest_input_lag())
    }
}

/// Selects structure with FROLS on the given segments, estimates
/// coefficients, and optionally refines them with extended least squares.
pub fn fit_segments(segments: &[Segment<'_>], cfg: &FitConfig) -> Result<NarxModel> {
    cfg.validate()?;
    let cands = CandidateSet::from_segments(segments, cfg)?;
    let selection = frols_select(&cands, cfg.n_terms)?;
    let mut model = selection.into_model(&cands)?;
    if cfg.use_els {
        let noise = cfg.noise_lags.unwrap_or(cfg.max_output_lag).max(1);
        model = estimate_els(&model, segments, noise, cfg.els_iterations)?;
    }
    Ok(model)
}

/// Single-recording convenience wrapper around [`fit_segments`].
pub fn fit(x: &[f64], y: &[f64], cfg: &FitConfig) -> Result<NarxModel> {
    fit_segments(&[Segment::new(x, y)?], cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_display() {
        let t = RegressorTerm::new(vec![Factor::input(1), Factor::output(2)]);
        assert_eq!(t.to_string(), "y(k-2)*x(k-1)");
        assert_eq!(RegressorTerm::constant().to_string(), "1");
        let c = RegressorTerm::new(vec![Factor::output(1).with_transform(Transform::Cos(2))]);
        assert_eq!(c.to_string(), "cos(2*2pi*y(k-1))");
    }

    #[test]
    fn json_round_trip() {
        let mut m = NarxModel::new(
            BasisSpec::fourier(2),
            vec![
                RegressorTerm::constant(),
                RegressorTerm::new(vec![Factor::output(3).with_transform(Transform::Sin(2))]),
                RegressorTerm::new(vec![Factor::input(1), Factor::output(1)]),
            ],
            vec![0.1, -0.25, 1.0 / 3.0],
        )
        .unwrap();
        m.scaling = Some(Scaling {
            output: (-1.0, 2.0),
            input: (0.0, 5.0),
        });
        m.err = vec![0.5, 0.25, 0.125];
        let text = m.to_json().unwrap();
        let back = NarxModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in [
            "basis",
            "terms",
            "coefficients",
            "err",
            "scaling",
            "max_lags",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["terms"][1][0]["transform"]["sin"], 2);
        assert_eq!(v["terms"][1][0]["variable"], "output_lag");
    }

    #[test]
    fn validate_catches_lag_overflow() {
        let mut m = NarxModel::new(
            BasisSpec::polynomial(1),
            vec![RegressorTerm::new(vec![Factor::output(4)])],
            vec![0.5],
        )
        .unwrap();
        m.max_lags.output = 2;
        assert!(m.validate().is_err());
    }
}
