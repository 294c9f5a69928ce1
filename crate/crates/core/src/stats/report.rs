use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::descriptive::median_iqr;
use crate::error::Result;

/// Per-recording outcomes feeding the report. Optional fields are `None`
/// when the corresponding analysis step failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub input_frequency_hz: f64,
    pub replicate_id: String,
    pub recoverable: bool,
    pub dominant_amplitude_v: Option<f64>,
    /// ADF outcome: `Some(true)` when the unit root is rejected.
    pub stationary: Option<bool>,
    pub granger_rejects: Option<bool>,
}

/// One row of the per-frequency table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGroupReport {
    pub input_frequency_hz: f64,
    pub pct_recoverable: f64,
    /// `None` when no recording in the group yielded an amplitude.
    pub median_amplitude_v: Option<f64>,
    pub iqr_amplitude_v: Option<f64>,
    /// Share of recordings where ADF did not reject the unit root.
    pub pct_nonstationary: f64,
    pub pct_granger: f64,
    pub n: usize,
}

/// Column-wise median and IQR across groups. Amplitude is summarised over
/// every recording rather than over group medians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub pct_recoverable: (f64, f64),
    pub amplitude_v: Option<(f64, f64)>,
    pub pct_nonstationary: (f64, f64),
    pub pct_granger: (f64, f64),
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub groups: Vec<FrequencyGroupReport>,
    pub summary: Option<SummaryRow>,
}

fn pct(count: usize, n: usize) -> f64 {
    count as f64 / n as f64 * 100.0
}

/// Aggregates records by input frequency (ascending). Every record counts in
/// its group's denominator; a failed test counts as not satisfying.
pub fn build_report(records: &[AnalysisRecord]) -> Report {
    let mut by_freq: BTreeMap<u64, Vec<&AnalysisRecord>> = BTreeMap::new();
    for r in records {
        if !(r.input_frequency_hz.is_finite() && r.input_frequency_hz > 0.0) {
            log::warn!("skipping record {} with invalid frequency", r.replicate_id);
            continue;
        }
        by_freq
            .entry(r.input_frequency_hz.to_bits())
            .or_default()
            .push(r);
    }
    // to_bits preserves order for positive floats
    let mut groups = Vec::with_capacity(by_freq.len());
    let mut all_amplitudes = Vec::new();
    for (bits, recs) in by_freq {
        let freq = f64::from_bits(bits);
        let n = recs.len();
        if n == 0 {
            log::warn!("no recordings for {freq} Hz; group excluded");
            continue;
        }
        let amps: Vec<f64> = recs.iter().filter_map(|r| r.dominant_amplitude_v).collect();
        all_amplitudes.extend_from_slice(&amps);
        let amp = median_iqr(&amps).ok();
        groups.push(FrequencyGroupReport {
            input_frequency_hz: freq,
            pct_recoverable: pct(recs.iter().filter(|r| r.recoverable).count(), n),
            median_amplitude_v: amp.map(|a| a.0),
            iqr_amplitude_v: amp.map(|a| a.1),
            pct_nonstationary: pct(
                recs.iter().filter(|r| r.stationary == Some(false)).count(),
                n,
            ),
            pct_granger: pct(
                recs.iter()
                    .filter(|r| r.granger_rejects == Some(true))
                    .count(),
                n,
            ),
            n,
        });
    }
    let summary = summarize(&groups, &all_amplitudes);
    Report { groups, summary }
}

fn summarize(groups: &[FrequencyGroupReport], amplitudes: &[f64]) -> Option<SummaryRow> {
    let column = |f: fn(&FrequencyGroupReport) -> f64| {
        median_iqr(&groups.iter().map(f).collect::<Vec<_>>()).ok()
    };
    Some(SummaryRow {
        pct_recoverable: column(|g| g.pct_recoverable)?,
        amplitude_v: median_iqr(amplitudes).ok(),
        pct_nonstationary: column(|g| g.pct_nonstationary)?,
        pct_granger: column(|g| g.pct_granger)?,
        n: groups.iter().map(|g| g.n).sum(),
    })
}

/// Writes the report as `input_hz,pct_rf,median_amp_v,iqr_amp_v,pct_adf,pct_gc,n`.
/// The final `summary` row gives each percentage column as `median (IQR)`
/// across groups; missing amplitudes are left empty.
pub fn write_report<W: Write>(report: &Report, mut sink: W) -> Result<()> {
    writeln!(
        sink,
        "input_hz,pct_rf,median_amp_v,iqr_amp_v,pct_adf,pct_gc,n"
    )?;
    let amp = |v: Option<f64>| v.map(|a| format!("{a:.6}")).unwrap_or_default();
    for g in &report.groups {
        writeln!(
            sink,
            "{},{:.2},{},{},{:.2},{:.2},{}",
            g.input_frequency_hz,
            g.pct_recoverable,
            amp(g.median_amplitude_v),
            amp(g.iqr_amplitude_v),
            g.pct_nonstationary,
            g.pct_granger,
            g.n
        )?;
    }
    if let Some(s) = &report.summary {
        let mi = |(m, i): (f64, f64)| format!("{m:.2} ({i:.2})");
        writeln!(
            sink,
            "summary,{},{},{},{},{},{}",
            mi(s.pct_recoverable),
            amp(s.amplitude_v.map(|a| a.0)),
            amp(s.amplitude_v.map(|a| a.1)),
            mi(s.pct_nonstationary),
            mi(s.pct_granger),
            s.n
        )?;
    }
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(f: f64, i: usize, rf: bool, amp: f64, stat: bool, gc: bool) -> AnalysisRecord {
        AnalysisRecord {
            input_frequency_hz: f,
            replicate_id: format!("r{i}"),
            recoverable: rf,
            dominant_amplitude_v: Some(amp),
            stationary: Some(stat),
            granger_rejects: Some(gc),
        }
    }

    #[test]
    fn all_recoverable_is_hundred() {
        let recs: Vec<_> = (0..28)
            .map(|i| rec(100.0, i, true, 0.2, i % 2 == 0, true))
            .collect();
        let r = build_report(&recs);
        assert_eq!(r.groups.len(), 1);
        assert_eq!(r.groups[0].pct_recoverable, 100.0);
        assert_eq!(r.groups[0].pct_nonstationary, 50.0);
        assert_eq!(r.groups[0].n, 28);
    }

    #[test]
    fn groups_sorted_and_csv_shape() {
        let recs = vec![
            rec(900.0, 0, true, 0.1, true, true),
            rec(100.0, 1, false, 0.3, false, false),
            rec(100.0, 2, true, 0.5, false, true),
        ];
        let r = build_report(&recs);
        assert_eq!(r.groups[0].input_frequency_hz, 100.0);
        let mut buf = Vec::new();
        write_report(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "input_hz,pct_rf,median_amp_v,iqr_amp_v,pct_adf,pct_gc,n"
        );
        assert_eq!(lines[1], "100,50.00,0.400000,0.100000,100.00,50.00,2");
        assert!(lines[3].starts_with("summary,"));
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn failed_steps_count_against() {
        let mut r = rec(200.0, 0, true, 0.1, true, true);
        r.granger_rejects = None;
        r.stationary = None;
        r.dominant_amplitude_v = None;
        let rep = build_report(&[r]);
        assert_eq!(rep.groups[0].pct_granger, 0.0);
        assert_eq!(rep.groups[0].pct_nonstationary, 0.0);
        assert_eq!(rep.groups[0].median_amplitude_v, None);
    }

    // Column values of the reference per-frequency table; the summary row
    // medians and IQRs must come out as printed (100.00 (16.08), 71.43 (37.50),
    // 96.43 (10.72)).
    #[test]
    fn reference_column_summaries() {
        let pcrf = [
            100.00, 100.00, 100.00, 100.00, 100.00, 100.00, 100.00, 96.43, 96.43, 100.00, 100.00,
            82.14, 85.71, 100.00, 60.71, 71.43, 78.57, 46.43, 96.43,
        ];
        let pcadf = [
            82.14, 75.00, 60.71, 35.71, 35.71, 39.29, 53.57, 60.71, 57.14, 50.00, 100.00, 100.00,
            92.86, 71.43, 96.43, 85.71, 96.43, 75.00, 39.29,
        ];
        let pcgc = [
            100.00, 96.43, 100.00, 100.00, 85.71, 92.86, 100.00, 100.00, 100.00, 75.00, 75.00,
            96.43, 82.14, 96.43, 96.43, 100.00, 96.43, 100.00, 78.57,
        ];
        let fmt = |v: &[f64]| {
            let (m, i) = median_iqr(v).unwrap();
            format!("{m:.2} ({i:.2})")
        };
        assert_eq!(fmt(&pcrf), "100.00 (16.08)");
        assert_eq!(fmt(&pcadf), "71.43 (37.50)");
        assert_eq!(fmt(&pcgc), "96.43 (10.72)");
    }

    proptest! {
        #[test]
        fn percentages_are_exact(flags in proptest::collection::vec((any::<bool>(), any::<bool>(), any::<bool>()), 1..40)) {
            let recs: Vec<_> = flags.iter().enumerate()
                .map(|(i, &(a, b, c))| rec(500.0, i, a, 0.1, b, c)).collect();
            let r = build_report(&recs);
            let n = flags.len();
            let g = &r.groups[0];
            prop_assert_eq!(g.pct_recoverable, flags.iter().filter(|f| f.0).count() as f64 / n as f64 * 100.0);
            prop_assert_eq!(g.pct_nonstationary, flags.iter().filter(|f| !f.1).count() as f64 / n as f64 * 100.0);
            prop_assert_eq!(g.pct_granger, flags.iter().filter(|f| f.2).count() as f64 / n as f64 * 100.0);
            prop_assert!(g.pct_recoverable >= 0.0 && g.pct_recoverable <= 100.0);
        }
    }
}
