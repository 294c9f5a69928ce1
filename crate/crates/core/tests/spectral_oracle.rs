mod common;

use common::{ts, Lcg};
use mycosig_core::spectral::{
    dft_amplitude_spectrum, dominant_frequency, recoverable_frequency, welch_csd, welch_psd,
    WelchConfig, Window,
};
use mycosig_core::{stimulation_schedule_hz, timeseries::make_square_wave, StimulusSpec};

/// Direct O(N²) one-sided amplitude spectrum.
fn direct_amplitude(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..=n / 2)
        .map(|m| {
            let (mut re, mut im) = (0.0, 0.0);
            for (k, v) in x.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * ((m * k) % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            let scale = if m == 0 || (n.is_multiple_of(2) && m == n / 2) {
                1.0
            } else {
                2.0
            };
            scale * re.hypot(im) / n as f64
        })
        .collect()
}

#[test]
fn fft_matches_direct_dft() {
    let mut rng = Lcg::new(11);
    for _ in 0..40 {
        let n = 2 + (rng.uniform() * 1500.0) as usize;
        let x = rng.normals(n);
        let got = dft_amplitude_spectrum(&ts(x.clone(), 1000.0)).unwrap();
        let want = direct_amplitude(&x);
        let peak = want.iter().cloned().fold(0.0, f64::max);
        for (g, w) in got.magnitudes().iter().zip(&want) {
            // relative to each bin, with a floor at the rounding level of the peak
            assert!(
                (g - w).abs() <= 1e-6 * w.max(peak * 1e-6),
                "n={n}: {g} vs {w}"
            );
        }
        assert_eq!(got.frequencies_hz().len(), n / 2 + 1);
    }
}

#[test]
fn parseval_on_amplitude_spectrum() {
    let mut rng = Lcg::new(5);
    let n = 1024;
    let x = rng.normals(n);
    let est = dft_amplitude_spectrum(&ts(x.clone(), 1.0)).unwrap();
    let mags = est.magnitudes();
    let energy_t: f64 = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let mut energy_f = mags[0].powi(2) + mags[n / 2].powi(2);
    energy_f += mags[1..n / 2].iter().map(|m| m * m / 2.0).sum::<f64>();
    assert!((energy_t - energy_f).abs() < 1e-10 * energy_t);
}

#[test]
fn square_wave_fundamental_at_every_schedule_frequency() {
    for f in stimulation_schedule_hz() {
        let sq = make_square_wave(&StimulusSpec {
            frequency_hz: f,
            amplitude_v: 5.0,
            duration_s: 1.0,
            sample_rate_hz: 50_000.0,
        })
        .unwrap();
        let psd = welch_psd(&sq, &WelchConfig::default()).unwrap();
        let dom = dominant_frequency(&psd, true).unwrap();
        assert_eq!(dom, f, "self-CSD of {f} Hz square wave");
        assert!(recoverable_frequency(dom, f));
        let amp = dft_amplitude_spectrum(&sq).unwrap();
        assert_eq!(dominant_frequency(&amp, true).unwrap(), f);
    }
}

#[test]
fn csd_is_symmetric_in_magnitude() {
    let mut rng = Lcg::new(9);
    let x = ts(rng.normals(4000), 100.0);
    let y = ts(rng.normals(4000), 100.0);
    let cfg = WelchConfig {
        segment_length: 512,
        overlap_fraction: 0.5,
        window: Window::Hann,
    };
    let a = welch_csd(&x, &y, &cfg).unwrap();
    let b = welch_csd(&y, &x, &cfg).unwrap();
    for (p, q) in a.magnitudes().iter().zip(b.magnitudes()) {
        assert!((p - q).abs() <= 1e-12 * p.max(1e-300));
    }
}
