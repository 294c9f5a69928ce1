//! Per-recording analysis feeding the per-frequency report.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::Result;
use crate::spectral::{
    dominant_amplitude, dominant_frequency, recoverable_frequency, welch_csd, SpectralEstimate,
    WelchConfig,
};
use crate::stats::{
    adf_test, anderson_darling, granger_causality, kruskal_wallis, AnalysisRecord, TestResult,
};
use crate::timeseries::{cross_correlation_best_lag, difference, RecordingPair, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub welch: WelchConfig,
    pub alpha: f64,
    /// Largest lag searched when picking the Granger lag by cross-correlation.
    pub granger_max_search_lag: usize,
    /// `None` uses the ADF default rule.
    pub adf_max_lag: Option<usize>,
    /// Differencing applied to both series before the Granger test.
    pub difference_order: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            welch: WelchConfig::default(),
            alpha: crate::stats::ALPHA,
            granger_max_search_lag: 30,
            adf_max_lag: None,
            difference_order: 1,
        }
    }
}

/// Everything computed for one recording. Steps that fail leave their field
/// empty and add a note; the remaining steps still run.
#[derive(Debug, Clone)]
pub struct RecordingAnalysis {
    pub replicate_id: String,
    pub input_frequency_hz: f64,
    pub normality: Option<TestResult>,
    pub csd: Option<SpectralEstimate>,
    pub dominant_frequency_hz: Option<f64>,
    pub recoverable: bool,
    pub dominant_amplitude_v: Option<f64>,
    /// Dominant amplitude of each non-overlapping Welch-length window of the
    /// output, the per-recording sample for within-group comparisons.
    pub window_amplitudes_v: Vec<f64>,
    pub adf: Option<TestResult>,
    pub granger_lag: Option<usize>,
    pub granger: Option<TestResult>,
    pub alpha: f64,
    pub notes: Vec<String>,
}

impl RecordingAnalysis {
    pub fn record(&self) -> AnalysisRecord {
        AnalysisRecord {
            input_frequency_hz: self.input_frequency_hz,
            replicate_id: self.replicate_id.clone(),
            recoverable: self.recoverable,
            dominant_amplitude_v: self.dominant_amplitude_v,
            stationary: self.adf.as_ref().map(|r| r.rejects_at(self.alpha)),
            granger_rejects: self.granger.as_ref().map(|r| r.rejects_at(self.alpha)),
        }
    }
}

/// Runs the normality screen, CSD-based frequency recovery, dominant
/// amplitude, ADF and Granger tests on one recording.
pub fn analyze_recording(pair: &RecordingPair, cfg: &AnalysisConfig) -> RecordingAnalysis {
    let mut notes = Vec::new();
    let mut note = |step: &str, e: &dyn std::fmt::Display| notes.push(format!("{step}: {e}"));
    let (x, y) = (pair.input(), pair.output());

    let normality = anderson_darling(y)
        .map_err(|e| note("anderson_darling", &e))
        .ok();

    let mut welch = cfg.welch;
    if welch.segment_length > y.len() {
        note(
            "welch",
            &format!(
                "segment length {} clamped to series length {}",
                welch.segment_length,
                y.len()
            ),
        );
        welch.segment_length = y.len();
    }
    let csd = welch_csd(x, y, &welch).map_err(|e| note("csd", &e)).ok();
    let dominant_frequency_hz = csd.as_ref().and_then(|est| {
        dominant_frequency(est, true)
            .map_err(|e| note("dominant_frequency", &e))
            .ok()
    });
    let recoverable =
        dominant_frequency_hz.is_some_and(|f| recoverable_frequency(f, pair.input_frequency_hz()));

    let dominant_amplitude_v = dominant_amplitude(y)
        .map_err(|e| note("dominant_amplitude", &e))
        .ok();
    let window_amplitudes_v = window_amplitudes(y, welch.segment_length)
        .map_err(|e| note("window_amplitudes", &e))
        .unwrap_or_default();
    let adf = adf_test(y, cfg.adf_max_lag)
        .map_err(|e| note("adf", &e))
        .ok();

    let mut granger_lag = None;
    let granger = (|| -> Result<TestResult> {
        let (dx, dy) = if cfg.difference_order == 0 {
            (x.clone(), y.clone())
        } else {
            (
                difference(x, cfg.difference_order)?,
                difference(y, cfg.difference_order)?,
            )
        };
        let lag = cross_correlation_best_lag(&dx, &dy, cfg.granger_max_search_lag)?.max(1);
        granger_lag = Some(lag);
        granger_causality(&dx, &dy, lag)
    })()
    .map_err(|e| note("granger", &e))
    .ok();

    for n in &notes {
        log::debug!("{}: {n}", pair.replicate_id());
    }
    RecordingAnalysis {
        replicate_id: pair.replicate_id().to_string(),
        input_frequency_hz: pair.input_frequency_hz(),
        normality,
        csd,
        dominant_frequency_hz,
        recoverable,
        dominant_amplitude_v,
        window_amplitudes_v,
        adf,
        granger_lag,
        granger,
        alpha: cfg.alpha,
        notes,
    }
}

fn window_amplitudes(y: &TimeSeries, window: usize) -> Result<Vec<f64>> {
    (0..y.len() / window.max(2))
        .map(|i| dominant_amplitude(&y.slice(i * window..(i + 1) * window)?))
        .collect()
}

/// A Kruskal-Wallis comparison of dominant amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTest {
    /// `None` for the comparison between frequency groups, otherwise the
    /// frequency whose replicates were compared with each other.
    pub input_frequency_hz: Option<f64>,
    pub groups: usize,
    pub n: usize,
    pub result: Option<TestResult>,
    pub note: Option<String>,
}

fn kruskal_entry(frequency: Option<f64>, groups: Vec<Vec<f64>>) -> AmplitudeTest {
    let groups: Vec<Vec<f64>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
    let n = groups.iter().map(Vec::len).sum();
    let (result, note) = match kruskal_wallis(&groups) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    AmplitudeTest {
        input_frequency_hz: frequency,
        groups: groups.len(),
        n,
        result,
        note,
    }
}

/// Compares dominant amplitudes between frequency groups (one value per
/// recording), then within each group across replicates (windowed values per
/// recording). Frequencies are visited in ascending order.
pub fn amplitude_tests(analyses: &[RecordingAnalysis]) -> Vec<AmplitudeTest> {
    let mut by_freq: BTreeMap<u64, Vec<&RecordingAnalysis>> = BTreeMap::new();
    for a in analyses {
        by_freq
            .entry(a.input_frequency_hz.to_bits())
            .or_default()
            .push(a);
    }
    let between = by_freq
        .values()
        .map(|g| g.iter().filter_map(|a| a.dominant_amplitude_v).collect())
        .collect();
    let mut out = vec![kruskal_entry(None, between)];
    for (bits, group) in &by_freq {
        let within = group
            .iter()
            .map(|a| a.window_amplitudes_v.clone())
            .collect();
        out.push(kruskal_entry(Some(f64::from_bits(*bits)), within));
    }
    out
}

pub const AMPLITUDE_TEST_HEADER: &str = "scope,input_hz,groups,n,statistic,p_value,reject,note";

pub fn write_amplitude_tests<W: Write>(
    tests: &[AmplitudeTest],
    alpha: f64,
    mut sink: W,
) -> Result<()> {
    writeln!(sink, "{AMPLITUDE_TEST_HEADER}")?;
    for t in tests {
        let (scope, freq) = match t.input_frequency_hz {
            None => ("between", String::new()),
            Some(f) => ("within", f.to_string()),
        };
        let (stat, p, reject) = match &t.result {
            Some(r) => (
                r.statistic.to_string(),
                r.p_value.map(|p| p.to_string()).unwrap_or_default(),
                r.rejects_at(alpha).to_string(),
            ),
            None => Default::default(),
        };
        let note = t.note.as_deref().unwrap_or("").replace(['"', ','], " ");
        writeln!(
            sink,
            "{scope},{freq},{},{},{stat},{p},{reject},{note}",
            t.groups, t.n
        )?;
    }
    sink.flush()?;
    Ok(())
}

/// Header of the per-recording detail table.
pub const DETAIL_HEADER: &str =
    "replicate_id,input_hz,dominant_hz,recoverable,amp_v,ad_stat,ad_reject,\
adf_stat,adf_p,adf_lag,stationary,granger_lag,granger_stat,granger_p,granger_reject,notes";

/// Writes one detail row per analysis; failed steps leave empty cells.
pub fn write_details<W: Write>(analyses: &[RecordingAnalysis], mut sink: W) -> Result<()> {
    writeln!(sink, "{DETAIL_HEADER}")?;
    fn cell<T: std::fmt::Display>(v: Option<T>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    for a in analyses {
        let rec = a.record();
        let notes = a.notes.join("; ").replace(['"', ','], " ");
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            a.replicate_id,
            a.input_frequency_hz,
            cell(a.dominant_frequency_hz),
            a.recoverable,
            cell(a.dominant_amplitude_v),
            cell(a.normality.as_ref().map(|r| r.statistic)),
            cell(a.normality.as_ref().map(|r| r.reject_at_05)),
            cell(a.adf.as_ref().map(|r| r.statistic)),
            cell(a.adf.as_ref().and_then(|r| r.p_value)),
            cell(a.adf.as_ref().and_then(|r| r.lag)),
            cell(rec.stationary),
            cell(a.granger_lag),
            cell(a.granger.as_ref().map(|r| r.statistic)),
            cell(a.granger.as_ref().and_then(|r| r.p_value)),
            cell(rec.granger_rejects),
            notes
        )?;
    }
    sink.flush()?;
    Ok(())
}
