//! Recording CSV format and metadata sidecars.
//!
//! A recording is a UTF-8 CSV with header `t,input_v,output_v`: time in
//! seconds (strictly increasing, uniform step) and both voltages in volts.
//! Metadata lives in a JSON sidecar `<name>.meta.json` next to `<name>.csv`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ParseError, Result};
use crate::spectral::SpectralEstimate;
use crate::timeseries::{RecordingPair, TimeSeries};

pub const RECORDING_HEADER: [&str; 3] = ["t", "input_v", "output_v"];
/// Header of a stimulus-only file, as written by [`write_series`] for an input.
pub const STIMULUS_HEADER: [&str; 2] = ["t", "input_v"];

/// Relative tolerance between an inferred and a declared sample rate.
const RATE_TOLERANCE: f64 = 1e-3;
/// Relative tolerance on each time step against the median step.
const STEP_TOLERANCE: f64 = 1e-2;

/// Ingestion options: an optional declared rate plus metadata to use when no
/// sidecar is available.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordingFormat {
    pub rate_hz: Option<f64>,
    pub input_frequency_hz: Option<f64>,
    pub replicate_id: Option<String>,
}

/// Contents of `<name>.meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub input_frequency_hz: f64,
    pub replicate_id: String,
}

struct Columns {
    t: Vec<f64>,
    input: Vec<f64>,
    output: Vec<f64>,
}

fn parse_columns<R: Read>(source: R, accepted: &[&[&'static str]]) -> Result<Columns> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let header = reader
        .headers()
        .map_err(|e| ParseError::Csv(e.to_string()))?
        .clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(ParseError::MissingHeader.into());
    }
    let Some(names) = accepted
        .iter()
        .find(|h| header.iter().eq(h.iter().copied()))
    else {
        return Err(ParseError::BadHeader {
            found: header.iter().collect::<Vec<_>>().join(","),
        }
        .into());
    };
    let width = names.len();
    let mut cols = Columns {
        t: Vec::new(),
        input: Vec::new(),
        output: Vec::new(),
    };
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| ParseError::Csv(format!("row {row}: {e}")))?;
        if record.len() != width {
            return Err(ParseError::Ragged {
                row,
                expected: width,
                found: record.len(),
            }
            .into());
        }
        let mut values = [0.0; 3];
        for (j, column) in names.iter().enumerate() {
            let text = &record[j];
            let v: f64 = text.parse().map_err(|_| ParseError::InvalidNumber {
                row,
                column,
                text: text.to_string(),
            })?;
            if !v.is_finite() {
                return Err(ParseError::NonFinite { row, column }.into());
            }
            values[j] = v;
        }
        cols.t.push(values[0]);
        cols.input.push(values[1]);
        cols.output.push(values[2]);
    }
    Ok(cols)
}

fn infer_rate(t: &[f64], declared: Option<f64>) -> Result<f64> {
    for (i, w) in t.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(ParseError::NonIncreasingTime { row: i + 2 }.into());
        }
    }
    if t.len() < 2 {
        return match declared {
            Some(rate) => Ok(rate),
            None => Err(ParseError::TooShort {
                rows: t.len(),
                required: 2,
            }
            .into()),
        };
    }
    let mut steps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sorted = steps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    for (i, dt) in steps.drain(..).enumerate() {
        if ((dt - median) / median).abs() > STEP_TOLERANCE {
            return Err(ParseError::NonUniformTime { row: i + 2 }.into());
        }
    }
    let inferred = 1.0 / median;
    match declared {
        Some(rate) if ((inferred - rate) / rate).abs() > RATE_TOLERANCE => {
            Err(ParseError::RateMismatch {
                inferred,
                declared: rate,
            }
            .into())
        }
        Some(rate) => Ok(rate),
        None => Ok(inferred),
    }
}

/// Parses a recording from `source`. Metadata comes from `format`; use
/// [`load_recording_file`] to pick up a sidecar.
pub fn load_recording<R: Read>(source: R, format: &RecordingFormat) -> Result<RecordingPair> {
    let cols = parse_columns(source, &[&RECORDING_HEADER])?;
    if cols.t.is_empty() {
        return Err(ParseError::TooShort {
            rows: 0,
            required: 1,
        }
        .into());
    }
    let rate = infer_rate(&cols.t, format.rate_hz)?;
    let freq = format
        .input_frequency_hz
        .ok_or_else(|| ParseError::MissingMetadata("input_frequency_hz".into()))?;
    let id = format
        .replicate_id
        .clone()
        .ok_or_else(|| ParseError::MissingMetadata("replicate_id".into()))?;
    let input = TimeSeries::with_label(cols.input, rate, "input")?;
    let output = TimeSeries::with_label(cols.output, rate, "output")?;
    RecordingPair::new(input, output, freq, id)
}

/// Reads the input channel of a stimulus file (`t,input_v`) or a recording
/// (`t,input_v,output_v`).
pub fn load_stimulus<R: Read>(source: R, rate_hz: Option<f64>) -> Result<TimeSeries> {
    let cols = parse_columns(source, &[&STIMULUS_HEADER, &RECORDING_HEADER])?;
    let rate = infer_rate(&cols.t, rate_hz)?;
    TimeSeries::with_label(cols.input, rate, "input")
}

/// Path of the metadata sidecar belonging to a recording CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv_path.with_file_name(format!("{stem}.meta.json"))
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| ParseError::MissingMetadata(format!("{}: {e}", path.display())).into())
}

/// Loads `<name>.csv`, taking metadata from `<name>.meta.json` when present
/// and from `fallback` otherwise. Without either, the replicate id defaults to
/// the file stem but the input frequency is required.
pub fn load_recording_file(path: &Path, fallback: &RecordingFormat) -> Result<RecordingPair> {
    let mut format = fallback.clone();
    let side = sidecar_path(path);
    if side.exists() {
        let meta = read_sidecar(&side)?;
        format.input_frequency_hz = Some(meta.input_frequency_hz);
        format.replicate_id = Some(meta.replicate_id);
    }
    if format.replicate_id.is_none() {
        format.replicate_id = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    load_recording(File::open(path)?, &format)
}

/// Writes a recording. Values use the shortest decimal form that parses back
/// to the identical `f64`, so a load/write round trip is exact.
pub fn write_recording<W: Write>(pair: &RecordingPair, sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    writeln!(w, "{}", RECORDING_HEADER.join(","))?;
    let fs = pair.sample_rate_hz();
    for (k, (x, y)) in pair
        .input()
        .samples()
        .iter()
        .zip(pair.output().samples())
        .enumerate()
    {
        writeln!(w, "{},{},{}", k as f64 / fs, x, y)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.meta.json`; returns the CSV path.
pub fn write_recording_files(pair: &RecordingPair, dir: &Path, name: &str) -> Result<PathBuf> {
    let csv_path = dir.join(format!("{name}.csv"));
    write_recording(pair, File::create(&csv_path)?)?;
    let meta = Sidecar {
        input_frequency_hz: pair.input_frequency_hz(),
        replicate_id: pair.replicate_id().to_string(),
    };
    std::fs::write(
        sidecar_path(&csv_path),
        serde_json::to_string_pretty(&meta)? + "\n",
    )?;
    Ok(csv_path)
}

/// Writes a single-channel series as `t,<column>`.
pub fn write_series<W: Write>(ts: &TimeSeries, column: &str, sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    writeln!(w, "t,{column}")?;
    let fs = ts.sample_rate_hz();
    for (k, v) in ts.samples().iter().enumerate() {
        writeln!(w, "{},{}", k as f64 / fs, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a spectrum as `frequency_hz,magnitude` under a `# kind=` comment.
pub fn write_spectrum<W: Write>(est: &SpectralEstimate, sink: W) -> Result<()> {
    let mut w = BufWriter::new(sink);
    writeln!(w, "# kind={}", est.kind().export_name())?;
    writeln!(w, "frequency_hz,magnitude")?;
    for (f, m) in est.frequencies_hz().iter().zip(est.magnitudes()) {
        writeln!(w, "{f},{m}")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::timeseries::{make_square_wave, StimulusSpec};

    #[test]
    fn stimulus_file_round_trip() {
        let sq = make_square_wave(&StimulusSpec {
            frequency_hz: 1000.0,
            amplitude_v: 5.0,
            duration_s: 0.01,
            sample_rate_hz: 50_000.0,
        })
        .unwrap();
        let mut buf = Vec::new();
        write_series(&sq, "input_v", &mut buf).unwrap();
        let back = load_stimulus(buf.as_slice(), Some(50_000.0)).unwrap();
        assert_eq!(back.samples(), sq.samples());
        assert!(load_recording(buf.as_slice(), &meta()).is_err());
    }
    use proptest::prelude::*;

    fn meta() -> RecordingFormat {
        RecordingFormat {
            rate_hz: None,
            input_frequency_hz: Some(900.0),
            replicate_id: Some("r1".into()),
        }
    }

    #[test]
    fn three_rows() {
        let text = "t,input_v,output_v\n0,5,0.1\n0.00002,5,0.2\n0.00004,-5,0.3\n";
        let pair = load_recording(text.as_bytes(), &meta()).unwrap();
        assert_eq!(pair.len(), 3);
        assert!((pair.sample_rate_hz() - 50_000.0).abs() < 1e-6);
        assert_eq!(pair.output().samples(), &[0.1, 0.2, 0.3]);
        assert_eq!(pair.replicate_id(), "r1");
    }

    #[test]
    fn nan_row_is_cited() {
        let mut text = String::from("t,input_v,output_v\n");
        for k in 1..=10 {
            let out = if k == 7 {
                "NaN".to_string()
            } else {
                "0.5".to_string()
            };
            text.push_str(&format!("{},1,{}\n", k as f64 * 0.001, out));
        }
        let err = load_recording(text.as_bytes(), &meta()).unwrap_err();
        match err {
            Error::Parse(ParseError::NonFinite { row, column }) => {
                assert_eq!(row, 7);
                assert_eq!(column, "output_v");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        let bad_header = "time,in,out\n0,1,2\n";
        assert!(matches!(
            load_recording(bad_header.as_bytes(), &meta()),
            Err(Error::Parse(ParseError::BadHeader { .. }))
        ));
        let ragged = "t,input_v,output_v\n0,1,2\n0.1,1\n";
        assert!(matches!(
            load_recording(ragged.as_bytes(), &meta()),
            Err(Error::Parse(ParseError::Ragged { row: 2, .. }))
        ));
        let text = "t,input_v,output_v\n0,1,2\n0.1,abc,2\n";
        assert!(matches!(
            load_recording(text.as_bytes(), &meta()),
            Err(Error::Parse(ParseError::InvalidNumber {
                row: 2,
                column: "input_v",
                ..
            }))
        ));
        let backwards = "t,input_v,output_v\n0,1,2\n0.1,1,2\n0.05,1,2\n";
        assert!(matches!(
            load_recording(backwards.as_bytes(), &meta()),
            Err(Error::Parse(ParseError::NonIncreasingTime { row: 3 }))
        ));
        let jitter = "t,input_v,output_v\n0,1,2\n0.1,1,2\n0.3,1,2\n0.4,1,2\n";
        assert!(matches!(
            load_recording(jitter.as_bytes(), &meta()),
            Err(Error::Parse(ParseError::NonUniformTime { .. }))
        ));
    }

    #[test]
    fn rate_override_must_agree() {
        let text = "t,input_v,output_v\n0,1,2\n0.001,1,2\n0.002,1,2\n";
        let mut f = meta();
        f.rate_hz = Some(1000.5);
        assert!(load_recording(text.as_bytes(), &f).is_ok());
        f.rate_hz = Some(1100.0);
        assert!(matches!(
            load_recording(text.as_bytes(), &f),
            Err(Error::Parse(ParseError::RateMismatch { .. }))
        ));
    }

    #[test]
    fn metadata_required_without_sidecar() {
        let text = "t,input_v,output_v\n0,1,2\n0.001,1,2\n";
        let err = load_recording(text.as_bytes(), &RecordingFormat::default()).unwrap_err();
        assert!(matches!(err, Error::Parse(ParseError::MissingMetadata(_))));
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            xs in proptest::collection::vec(-10.0f64..10.0, 2..60),
            ys in proptest::collection::vec(-1.0f64..1.0, 60),
            rate in prop_oneof![Just(50_000.0), Just(1000.0), Just(44_100.0)],
        ) {
            let n = xs.len();
            let input = TimeSeries::new(xs, rate).unwrap();
            let output = TimeSeries::new(ys[..n].to_vec(), rate).unwrap();
            let pair = RecordingPair::new(input, output, 100.0, "p").unwrap();
            let mut buf = Vec::new();
            write_recording(&pair, &mut buf).unwrap();
            let back = load_recording(buf.as_slice(), &RecordingFormat {
                rate_hz: None,
                input_frequency_hz: Some(100.0),
                replicate_id: Some("p".into()),
            }).unwrap();
            prop_assert_eq!(back.input().samples(), pair.input().samples());
            prop_assert_eq!(back.output().samples(), pair.output().samples());
            prop_assert!(((back.sample_rate_hz() - rate) / rate).abs() < 1e-9);
        }
    }
}
