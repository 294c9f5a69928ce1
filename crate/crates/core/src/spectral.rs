//! Amplitude spectra, Welch cross-spectral density and dominant-frequency
//! extraction.

use std::f64::consts::PI;
use std::fmt;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// Highest harmonic order accepted by [`recoverable_frequency`].
pub const MAX_HARMONIC_ORDER: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralKind {
    AmplitudeSpectrum,
    CrossSpectralDensity,
}

impl SpectralKind {
    /// Name used in the `# kind=` line of exported spectra.
    pub fn export_name(self) -> &'static str {
        match self {
            SpectralKind::AmplitudeSpectrum => "AmplitudeSpectrum",
            SpectralKind::CrossSpectralDensity => "CSD",
        }
    }
}

impl fmt::Display for SpectralKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.export_name())
    }
}

/// One-sided spectrum: non-negative magnitudes on increasing frequency bins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    frequencies_hz: Vec<f64>,
    magnitudes: Vec<f64>,
    kind: SpectralKind,
}

impl SpectralEstimate {
    pub fn new(frequencies_hz: Vec<f64>, magnitudes: Vec<f64>, kind: SpectralKind) -> Result<Self> {
        if frequencies_hz.len() != magnitudes.len() {
            return Err(Error::InvalidArgument(
                "frequency and magnitude lengths differ".into(),
            ));
        }
        if frequencies_hz.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("frequencies must increase".into()));
        }
        if magnitudes.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidArgument(
                "magnitudes must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            frequencies_hz,
            magnitudes,
            kind,
        })
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn kind(&self) -> SpectralKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// Index of the largest magnitude, skipping the 0 Hz bin when asked.
    /// Ties resolve to the lowest frequency.
    pub fn peak_index(&self, exclude_dc: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, (&f, &m)) in self.frequencies_hz.iter().zip(&self.magnitudes).enumerate() {
            if exclude_dc && f == 0.0 {
                continue;
            }
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((i, m));
            }
        }
        best.map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    /// Periodic window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

/// Welch estimator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    pub segment_length: usize,
    pub overlap_fraction: f64,
    pub window: Window,
}

impl Default for WelchConfig {
    /// Hann window, 10 000-sample segments (5 Hz bins at 50 kHz, so every
    /// stimulation frequency sits on a bin), 50 % overlap.
    fn default() -> Self {
        Self {
            segment_length: 10_000,
            overlap_fraction: 0.5,
            window: Window::Hann,
        }
    }
}

impl WelchConfig {
    pub fn validate(&self, series_len: usize) -> Result<()> {
        if self.segment_length < 2 {
            return Err(Error::InvalidConfig(
                "segment length must be at least 2".into(),
            ));
        }
        if self.segment_length > series_len {
            return Err(Error::InvalidConfig(format!(
                "segment length {} exceeds series length {series_len}",
                self.segment_length
            )));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(Error::InvalidConfig(format!(
                "overlap fraction {} outside [0, 1)",
                self.overlap_fraction
            )));
        }
        Ok(())
    }

    fn step(&self) -> usize {
        // the small guard keeps fractions like 1/3 from flooring one sample short
        let overlap = (self.segment_length as f64 * self.overlap_fraction + 1e-9).floor() as usize;
        (self.segment_length - overlap).max(1)
    }
}

fn fft(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

/// One-sided amplitude spectrum: `|X_0|/N` at DC, `2|X_m|/N` for
/// `0 < m < N/2`, and `|X_{N/2}|/N` at the Nyquist bin of even-length series.
pub fn dft_amplitude_spectrum(ts: &TimeSeries) -> Result<SpectralEstimate> {
    let n = ts.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "amplitude spectrum needs at least 2 samples".into(),
        ));
    }
    let spectrum = fft(ts.samples());
    let fs = ts.sample_rate_hz();
    let nf = n as f64;
    let bins = n / 2 + 1;
    let mut freqs = Vec::with_capacity(bins);
    let mut mags = Vec::with_capacity(bins);
    for (m, x) in spectrum.iter().take(bins).enumerate() {
        freqs.push(m as f64 * fs / nf);
        let scale = if m == 0 || (n.is_multiple_of(2) && m == n / 2) {
            1.0
        } else {
            2.0
        };
        mags.push(scale * x.norm() / nf);
    }
    SpectralEstimate::new(freqs, mags, SpectralKind::AmplitudeSpectrum)
}

/// Magnitude of the Welch cross-spectral density estimate `E[conj(X)·Y]`.
///
/// Segments are mean-detrended and windowed, the cross-periodograms averaged,
/// and the result density-scaled by `1/(fs·Σw²)` and folded to one side.
pub fn welch_csd(x: &TimeSeries, y: &TimeSeries, cfg: &WelchConfig) -> Result<SpectralEstimate> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.sample_rate_hz() != y.sample_rate_hz() {
        return Err(Error::InvalidArgument("series sample rates differ".into()));
    }
    cfg.validate(x.len())?;
    let seg = cfg.segment_length;
    let step = cfg.step();
    let window = cfg.window.coefficients(seg);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let fs = x.sample_rate_hz();
    let bins = seg / 2 + 1;

    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_forward(seg);
    let mut acc = vec![Complex64::new(0.0, 0.0); bins];
    let mut segments = 0usize;
    let mut bx = vec![Complex64::new(0.0, 0.0); seg];
    let mut by = vec![Complex64::new(0.0, 0.0); seg];
    let mut start = 0;
    while start + seg <= x.len() {
        let xs = &x.samples()[start..start + seg];
        let ys = &y.samples()[start..start + seg];
        let mx = xs.iter().sum::<f64>() / seg as f64;
        let my = ys.iter().sum::<f64>() / seg as f64;
        for i in 0..seg {
            bx[i] = Complex64::new((xs[i] - mx) * window[i], 0.0);
            by[i] = Complex64::new((ys[i] - my) * window[i], 0.0);
        }
        plan.process(&mut bx);
        plan.process(&mut by);
        for m in 0..bins {
            acc[m] += bx[m].conj() * by[m];
        }
        segments += 1;
        start += step;
    }

    let scale = 1.0 / (fs * window_power * segments as f64);
    let mut freqs = Vec::with_capacity(bins);
    let mut mags = Vec::with_capacity(bins);
    for (m, v) in acc.iter().enumerate() {
        let fold = if m == 0 || (seg.is_multiple_of(2) && m == seg / 2) {
            1.0
        } else {
            2.0
        };
        freqs.push(m as f64 * fs / seg as f64);
        mags.push(fold * scale * v.norm());
    }
    SpectralEstimate::new(freqs, mags, SpectralKind::CrossSpectralDensity)
}

/// Welch power spectral density, the auto case of [`welch_csd`].
pub fn welch_psd(x: &TimeSeries, cfg: &WelchConfig) -> Result<SpectralEstimate> {
    welch_csd(x, x, cfg)
}

/// Frequency of the largest magnitude, rounded to two significant figures.
pub fn dominant_frequency(est: &SpectralEstimate, exclude_dc: bool) -> Result<f64> {
    let idx = est
        .peak_index(exclude_dc)
        .ok_or_else(|| Error::NoDominantFrequency("spectrum has no eligible bins".into()))?;
    if est.magnitudes()[idx] <= 0.0 {
        return Err(Error::NoDominantFrequency(
            "spectrum is identically zero".into(),
        ));
    }
    Ok(round_sigfigs(est.frequencies_hz()[idx], 2))
}

/// True when the rounded dominant frequency is an integer multiple (order
/// 1 to 50) of the rounded input frequency.
pub fn recoverable_frequency(dominant_hz: f64, input_hz: f64) -> bool {
    if !(dominant_hz > 0.0 && input_hz > 0.0) {
        return false;
    }
    let ratio = round_sigfigs(dominant_hz, 2) / round_sigfigs(input_hz, 2);
    let order = ratio.round();
    (1.0..=MAX_HARMONIC_ORDER).contains(&order) && (ratio - order).abs() <= 1e-9 * ratio
}

/// Magnitude of the largest non-DC bin of the amplitude spectrum.
pub fn dominant_amplitude(ts: &TimeSeries) -> Result<f64> {
    let est = dft_amplitude_spectrum(ts)?;
    let idx = est
        .peak_index(true)
        .ok_or_else(|| Error::NoDominantFrequency("no non-DC bins".into()))?;
    let peak = est.magnitudes()[idx];
    let scale = ts.samples().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak <= 1e-12 * scale || peak == 0.0 {
        return Err(Error::NoDominantFrequency(
            "series has no non-DC content".into(),
        ));
    }
    Ok(peak)
}

/// Rounds to `n` significant figures, halves away from zero.
pub fn round_sigfigs(x: f64, n: u32) -> f64 {
    if x == 0.0 || !x.is_finite() || n == 0 {
        return x;
    }
    let a = x.abs();
    let mut exp = a.log10().floor() as i32;
    // guard log10 rounding at exact powers of ten
    if a >= 10f64.powi(exp + 1) {
        exp += 1;
    } else if a < 10f64.powi(exp) {
        exp -= 1;
    }
    let shift = n as i32 - 1 - exp;
    let rounded = if shift >= 0 {
        let s = 10f64.powi(shift);
        (a * s).round() / s
    } else {
        let s = 10f64.powi(-shift);
        (a / s).round() * s
    };
    rounded.copysign(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(v: Vec<f64>, fs: f64) -> TimeSeries {
        TimeSeries::new(v, fs).unwrap()
    }

    #[test]
    fn sigfig_examples() {
        assert_eq!(round_sigfigs(912.3, 2), 910.0);
        assert_eq!(round_sigfigs(9876.0, 2), 9900.0);
        assert_eq!(round_sigfigs(0.0456, 2), 0.046);
        assert_eq!(round_sigfigs(9950.0, 2), 10_000.0);
        assert_eq!(round_sigfigs(0.0, 2), 0.0);
        assert_eq!(round_sigfigs(-912.3, 2), -910.0);
        assert_eq!(round_sigfigs(1000.0, 2), 1000.0);
        assert_eq!(round_sigfigs(100.0, 2), 100.0);
    }

    #[test]
    fn recoverable_examples() {
        assert!(recoverable_frequency(200.0, 100.0));
        assert!(!recoverable_frequency(150.0, 100.0));
        assert!(!recoverable_frequency(910.0, 900.0));
        assert!(recoverable_frequency(1800.0, 900.0));
        assert!(!recoverable_frequency(50.0, 100.0));
        // order 51 is beyond the cap
        assert!(!recoverable_frequency(5100.0, 100.0));
        assert!(recoverable_frequency(5000.0, 100.0));
    }

    #[test]
    fn on_bin_sine_amplitude() {
        let n = 1000;
        let fs = 1000.0;
        let v: Vec<f64> = (0..n)
            .map(|k| (2.0 * PI * 50.0 * k as f64 / fs).sin())
            .collect();
        let est = dft_amplitude_spectrum(&series(v, fs)).unwrap();
        let idx = est.peak_index(true).unwrap();
        assert_eq!(est.frequencies_hz()[idx], 50.0);
        assert!((est.magnitudes()[idx] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_series_is_dc_only() {
        let est = dft_amplitude_spectrum(&series(vec![-2.5; 64], 10.0)).unwrap();
        assert!((est.magnitudes()[0] - 2.5).abs() < 1e-12);
        assert!(est.magnitudes()[1..].iter().all(|m| *m < 1e-12));
        assert!(dominant_amplitude(&series(vec![-2.5; 64], 10.0)).is_err());
    }

    #[test]
    fn dominant_amplitude_cases() {
        let fs = 1000.0;
        let s: Vec<f64> = (0..1000)
            .map(|k| 0.09 * (2.0 * PI * 40.0 * k as f64 / fs).cos())
            .collect();
        assert!((dominant_amplitude(&series(s, fs)).unwrap() - 0.09).abs() < 1e-6);
        let two: Vec<f64> = (0..1000)
            .map(|k| {
                let t = k as f64 / fs;
                0.2 * (2.0 * PI * 30.0 * t).sin() + 0.05 * (2.0 * PI * 120.0 * t).sin()
            })
            .collect();
        assert!((dominant_amplitude(&series(two, fs)).unwrap() - 0.2).abs() < 1e-9);
        assert!(matches!(
            dominant_amplitude(&series(vec![0.0; 100], fs)),
            Err(Error::NoDominantFrequency(_))
        ));
    }

    #[test]
    fn dominant_frequency_rounds() {
        let est = SpectralEstimate::new(
            vec![0.0, 500.0, 912.3, 1500.0],
            vec![10.0, 1.0, 3.0, 2.0],
            SpectralKind::CrossSpectralDensity,
        )
        .unwrap();
        assert_eq!(dominant_frequency(&est, true).unwrap(), 910.0);
        assert_eq!(dominant_frequency(&est, false).unwrap(), 0.0);
        let ties = SpectralEstimate::new(
            vec![0.0, 100.0, 200.0],
            vec![0.0, 2.0, 2.0],
            SpectralKind::AmplitudeSpectrum,
        )
        .unwrap();
        assert_eq!(dominant_frequency(&ties, true).unwrap(), 100.0);
        let zero = SpectralEstimate::new(
            vec![0.0, 1.0],
            vec![0.0, 0.0],
            SpectralKind::AmplitudeSpectrum,
        )
        .unwrap();
        assert!(dominant_frequency(&zero, true).is_err());
    }

    #[test]
    fn welch_rejects_long_segment() {
        let x = series(vec![1.0; 100], 1000.0);
        let cfg = WelchConfig {
            segment_length: 128,
            ..WelchConfig::default()
        };
        assert!(matches!(
            welch_csd(&x, &x, &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn welch_auto_equals_psd() {
        let v: Vec<f64> = (0..2048).map(|k| ((k * 31) % 17) as f64 - 8.0).collect();
        let x = series(v, 100.0);
        let cfg = WelchConfig {
            segment_length: 256,
            ..WelchConfig::default()
        };
        assert_eq!(
            welch_csd(&x, &x, &cfg).unwrap(),
            welch_psd(&x, &cfg).unwrap()
        );
    }

    proptest! {
        #[test]
        fn sigfig_idempotent(x in -1e7f64..1e7, n in 1u32..6) {
            let once = round_sigfigs(x, n);
            prop_assert_eq!(round_sigfigs(once, n), once);
        }

        #[test]
        fn recoverable_reflexive(f in 0.01f64..1e6) {
            prop_assert!(recoverable_frequency(f, f));
        }

        #[test]
        fn dominant_frequency_scale_invariant(
            v in proptest::collection::vec(-1.0f64..1.0, 16..128),
            c in 0.001f64..1000.0,
        ) {
            let a = dft_amplitude_spectrum(&series(v.clone(), 100.0)).unwrap();
            let b = dft_amplitude_spectrum(&series(v.iter().map(|x| x * c).collect(), 100.0)).unwrap();
            match (dominant_frequency(&a, true), dominant_frequency(&b, true)) {
                (Ok(fa), Ok(fb)) => {
                    // equal unless two bins are within rounding of each other
                    let mags = a.magnitudes();
                    let mut sorted: Vec<f64> = mags[1..].to_vec();
                    sorted.sort_by(|p, q| q.total_cmp(p));
                    if sorted.len() < 2 || sorted[0] - sorted[1] > 1e-9 * sorted[0] {
                        prop_assert_eq!(fa, fb);
                    }
                }
                (Err(_), Err(_)) => {}
                (ra, rb) => prop_assert!(false, "{:?} vs {:?}", ra, rb),
            }
        }

        #[test]
        fn welch_auto_nonnegative(v in proptest::collection::vec(-5.0f64..5.0, 64..300)) {
            let x = series(v, 10.0);
            let cfg = WelchConfig { segment_length: 32, overlap_fraction: 0.5, window: Window::Hann };
            let est = welch_psd(&x, &cfg).unwrap();
            prop_assert!(est.magnitudes().iter().all(|m| *m >= 0.0));
        }
    }
}
