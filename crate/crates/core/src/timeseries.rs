//! Uniformly sampled signals, square-wave stimuli and preprocessing.

use crate::error::{Error, Result};

/// A uniformly sampled real-valued signal.
///
/// Construction validates that the series is non-empty, every sample is
/// finite and the sample rate is positive; the fields are private so those
/// invariants hold for every value of the type.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate_hz: f64,
    label: String,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        Self::with_label(samples, sample_rate_hz, "")
    }

    pub fn with_label(
        samples: Vec<f64>,
        sample_rate_hz: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSeries(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::InvalidSeries(
                "series must contain at least one sample".into(),
            ));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            label: label.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn mean(&self) -> f64 {
        mean(&self.samples)
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        variance(&self.samples)
    }

    /// A copy with a different label.
    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Sub-series over `range`, keeping rate and label.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.samples.len() {
            return Err(Error::InvalidArgument(format!(
                "slice {range:?} out of bounds for a series of length {}",
                self.samples.len()
            )));
        }
        Ok(Self {
            samples: self.samples[range].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
            label: self.label.clone(),
        })
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

/// Synchronously captured stimulus and response.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingPair {
    input: TimeSeries,
    output: TimeSeries,
    input_frequency_hz: f64,
    replicate_id: String,
}

impl RecordingPair {
    pub fn new(
        input: TimeSeries,
        output: TimeSeries,
        input_frequency_hz: f64,
        replicate_id: impl Into<String>,
    ) -> Result<Self> {
        if input.sample_rate_hz() != output.sample_rate_hz() {
            return Err(Error::InvalidSeries(format!(
                "input rate {} Hz differs from output rate {} Hz",
                input.sample_rate_hz(),
                output.sample_rate_hz()
            )));
        }
        if input.len() != output.len() {
            return Err(Error::InvalidSeries(format!(
                "input has {} samples but output has {}",
                input.len(),
                output.len()
            )));
        }
        if !(input_frequency_hz.is_finite() && input_frequency_hz > 0.0) {
            return Err(Error::InvalidSeries(format!(
                "input frequency must be positive, got {input_frequency_hz}"
            )));
        }
        Ok(Self {
            input,
            output,
            input_frequency_hz,
            replicate_id: replicate_id.into(),
        })
    }

    pub fn input(&self) -> &TimeSeries {
        &self.input
    }

    pub fn output(&self) -> &TimeSeries {
        &self.output
    }

    pub fn input_frequency_hz(&self) -> f64 {
        self.input_frequency_hz
    }

    pub fn replicate_id(&self) -> &str {
        &self.replicate_id
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.input.sample_rate_hz()
    }

    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }

    /// Splits both channels at the same index; see [`split_train_test`].
    pub fn split(&self, train_fraction: f64) -> Result<(RecordingPair, RecordingPair)> {
        let (xi, xo) = split_train_test(&self.input, train_fraction)?;
        let (yi, yo) = split_train_test(&self.output, train_fraction)?;
        Ok((
            RecordingPair::new(xi, yi, self.input_frequency_hz, self.replicate_id.clone())?,
            RecordingPair::new(xo, yo, self.input_frequency_hz, self.replicate_id.clone())?,
        ))
    }
}

/// A bipolar square-wave stimulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StimulusSpec {
    pub frequency_hz: f64,
    pub amplitude_v: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
}

impl StimulusSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("frequency_hz", self.frequency_hz)?;
        positive("amplitude_v", self.amplitude_v)?;
        positive("duration_s", self.duration_s)?;
        positive("sample_rate_hz", self.sample_rate_hz)?;
        if self.frequency_hz >= self.sample_rate_hz / 2.0 {
            return Err(Error::InvalidSpec(format!(
                "{} Hz is at or above the Nyquist frequency {} Hz",
                self.frequency_hz,
                self.sample_rate_hz / 2.0
            )));
        }
        if self.sample_count() == 0 {
            return Err(Error::InvalidSpec("duration yields zero samples".into()));
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).floor() as usize
    }
}

/// Generates a square wave starting on its positive half-period.
///
/// Each sample takes the sign of the phase accumulator `frac(k·f/fs)`, so the
/// frequency need not divide the sample rate.
pub fn make_square_wave(spec: &StimulusSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let n = spec.sample_count();
    let samples = (0..n)
        .map(|k| {
            let phase = (k as f64 * spec.frequency_hz / spec.sample_rate_hz).fract();
            if phase < 0.5 {
                spec.amplitude_v
            } else {
                -spec.amplitude_v
            }
        })
        .collect();
    TimeSeries::with_label(
        samples,
        spec.sample_rate_hz,
        format!("square_{}hz", spec.frequency_hz),
    )
}

/// `order`-th finite difference. The result is `order` samples shorter.
pub fn difference(ts: &TimeSeries, order: usize) -> Result<TimeSeries> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "difference order must be at least 1".into(),
        ));
    }
    if order >= ts.len() {
        return Err(Error::Degenerate(format!(
            "cannot take order-{order} differences of a series of length {}",
            ts.len()
        )));
    }
    let mut v = ts.samples().to_vec();
    for _ in 0..order {
        v = v.windows(2).map(|w| w[1] - w[0]).collect();
    }
    TimeSeries::with_label(v, ts.sample_rate_hz(), ts.label())
}

/// Contiguous prefix/suffix split; the prefix holds `floor(fraction·N)` samples.
pub fn split_train_test(ts: &TimeSeries, train_fraction: f64) -> Result<(TimeSeries, TimeSeries)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = ts.len();
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidArgument(format!(
            "fraction {train_fraction} of {n} samples leaves an empty partition"
        )));
    }
    Ok((ts.slice(0..n_train)?, ts.slice(n_train..n)?))
}

/// Normalized cross-correlation of `x` delayed by `lag` against `y`:
/// `Σ (x[k-lag]-x̄)(y[k]-ȳ) / ((N-lag)·σx·σy)` using full-series moments.
fn normalized_xcorr(x: &[f64], y: &[f64], mx: f64, my: f64, sx: f64, sy: f64, lag: usize) -> f64 {
    let n = x.len().min(y.len());
    let s: f64 = (lag..n).map(|k| (x[k - lag] - mx) * (y[k] - my)).sum();
    s / ((n - lag) as f64 * sx * sy)
}

/// Lag in `1..=max_search_lag` maximizing the absolute normalized
/// cross-correlation between `x` delayed by the lag and `y`. Ties go to the
/// smallest lag.
pub fn cross_correlation_best_lag(
    x: &TimeSeries,
    y: &TimeSeries,
    max_search_lag: usize,
) -> Result<usize> {
    if x.sample_rate_hz() != y.sample_rate_hz() {
        return Err(Error::InvalidArgument(
            "series have different sample rates".into(),
        ));
    }
    let n = x.len().min(y.len());
    if max_search_lag == 0 || max_search_lag >= n {
        return Err(Error::InvalidArgument(format!(
            "max search lag {max_search_lag} must lie in [1, {})",
            n
        )));
    }
    let (xs, ys) = (&x.samples()[..n], &y.samples()[..n]);
    let (mx, my) = (mean(xs), mean(ys));
    let (sx, sy) = (variance(xs).sqrt(), variance(ys).sqrt());
    if sx == 0.0 || sy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero-variance series".into()));
    }
    let mut best_lag = 1;
    let mut best = f64::NEG_INFINITY;
    for lag in 1..=max_search_lag {
        let r = normalized_xcorr(xs, ys, mx, my, sx, sy, lag).abs();
        if r > best + 1e-12 {
            best = r;
            best_lag = lag;
        }
    }
    Ok(best_lag)
}

/// First lag in `1..=cap` whose sample autocorrelation falls inside the
/// ±1.96/√N white-noise band; `cap` when none does.
pub fn autocorrelation_lag(y: &TimeSeries, cap: usize) -> Result<usize> {
    let n = y.len();
    if cap == 0 || cap >= n {
        return Err(Error::InvalidArgument(format!(
            "cap {cap} must lie in [1, {n})"
        )));
    }
    let v = y.samples();
    let m = mean(v);
    let s = variance(v).sqrt();
    if s == 0.0 {
        return Err(Error::UndefinedCorrelation("zero-variance series".into()));
    }
    let band = 1.96 / (n as f64).sqrt();
    for lag in 1..=cap {
        let r = normalized_xcorr(v, v, m, m, s, s, lag);
        if r.abs() < band {
            return Ok(lag);
        }
    }
    Ok(cap)
}
