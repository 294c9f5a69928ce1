//! Signal analysis and NARX system identification for frequency transmission
//! through bio-electrical channels.
//!
//! The crate is organised around the analysis pipeline:
//!
//! - [`timeseries`]: the sampled-signal container, square-wave stimuli and
//!   preprocessing (differencing, splitting, lag estimation).
//! - [`io`]: the two-channel recording CSV format and metadata sidecars.
//! - [`spectral`]: DFT amplitude spectra, Welch cross-spectral density and the
//!   recoverable-frequency criterion.
//! - [`stats`]: Anderson-Darling, ADF, Granger causality, Kruskal-Wallis and
//!   per-frequency report aggregation.
//! - [`narx`]: candidate construction, FROLS structure selection, extended
//!   least squares, simulation, RRSE and grid search.
//! - [`channel`]: a simulated channel driven by an identified NARX model.
//! - [`pipeline`]: the per-recording analysis used by `analyze`.

pub mod channel;
pub mod error;
pub mod io;
pub mod linalg;
pub mod narx;
pub mod pipeline;
pub mod spectral;
pub mod stats;
pub mod timeseries;

pub use error::{Error, ErrorClass, ParseError, Result};
pub use timeseries::{RecordingPair, StimulusSpec, TimeSeries};

/// Sample rate used by the acquisition hardware the toolkit was built around.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 50_000.0;

/// The 19 stimulation frequencies: 100 Hz to 1 kHz in 100 Hz steps, then
/// 2 kHz to 10 kHz in 1 kHz steps.
pub fn stimulation_schedule_hz() -> Vec<f64> {
    (1..=10)
        .map(|i| f64::from(i) * 100.0)
        .chain((2..=10).map(|i| f64::from(i) * 1000.0))
        .collect()
}
