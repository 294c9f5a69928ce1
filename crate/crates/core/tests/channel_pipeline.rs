//! Simulated channel through ingestion, per-recording analysis and the report.

mod common;

use common::ts;
use mycosig_core::channel::{eq2_default, make_corpus, simulate_channel, ChannelSpec, CorpusSpec};
use mycosig_core::io::{load_recording_file, write_recording_files, RecordingFormat};
use mycosig_core::narx::free_run;
use mycosig_core::pipeline::{analyze_recording, AnalysisConfig};
use mycosig_core::stats::build_report;
use mycosig_core::Error;

fn corpus(freqs: &[f64], reps: usize, sigma: f64) -> Vec<mycosig_core::RecordingPair> {
    let template = ChannelSpec {
        noise_sigma_v: sigma,
        ..ChannelSpec::default()
    };
    let mut spec = CorpusSpec::new(freqs.to_vec(), reps, template);
    spec.duration_s = 0.4;
    make_corpus(&spec).unwrap()
}

#[test]
fn default_channel_never_diverges_over_a_million_steps() {
    let model = eq2_default();
    let x = ts(vec![0.0; 1_000_000], 50_000.0);
    let y = free_run(&model, &x, &[5.0; 27]).unwrap();
    assert!(y.samples().iter().all(|v| v.is_finite() && v.abs() < 10.0));
    assert!((y.samples()[999_999] - 0.51220).abs() < 1e-4);
}

#[test]
fn uncoupled_channel_at_its_fixed_point_ignores_the_input() {
    let spec = ChannelSpec {
        input_coupling: vec![],
        ..ChannelSpec::default()
    };
    let x = ts(
        (0..2000)
            .map(|k| if k % 50 < 25 { 5.0 } else { -5.0 })
            .collect(),
        50_000.0,
    );
    let pair = simulate_channel(&spec, &x, 1000.0, "flat").unwrap();
    let fp = spec.initial_output_v;
    assert!(pair
        .output()
        .samples()
        .iter()
        .all(|v| (v - fp).abs() < 1e-12));
}

#[test]
fn clean_corpus_is_fully_recoverable() {
    let pairs = corpus(&[100.0, 900.0, 5000.0], 2, 0.0);
    let cfg = AnalysisConfig::default();
    let records: Vec<_> = pairs
        .iter()
        .map(|p| analyze_recording(p, &cfg).record())
        .collect();
    let report = build_report(&records);
    assert_eq!(report.groups.len(), 3);
    for g in &report.groups {
        assert_eq!(g.pct_recoverable, 100.0, "{} Hz", g.input_frequency_hz);
        assert_eq!(g.pct_granger, 100.0, "{} Hz", g.input_frequency_hz);
    }
}

#[test]
fn corpus_is_seed_deterministic_and_survives_a_file_round_trip() {
    let a = corpus(&[300.0], 2, 0.01);
    let b = corpus(&[300.0], 2, 0.01);
    assert_eq!(a, b);
    assert_ne!(
        a[0].output(),
        a[1].output(),
        "replicates get distinct noise"
    );
    let dir = tempfile::tempdir().unwrap();
    let path = write_recording_files(&a[1], dir.path(), "rec").unwrap();
    let back = load_recording_file(&path, &RecordingFormat::default()).unwrap();
    assert_eq!(back.replicate_id(), "300hz_r01");
    assert_eq!(back.output().samples(), a[1].output().samples());
    assert_eq!(back.input_frequency_hz(), 300.0);
}

#[test]
fn unstable_model_is_reported_with_its_step() {
    let mut spec = ChannelSpec::default();
    spec.model.coefficients[0] = 1.2;
    spec.initial_output_v = 0.0;
    let x = ts(vec![1.0; 5000], 50_000.0);
    match simulate_channel(&spec, &x, 100.0, "bad") {
        Err(Error::UnstableChannel { step }) => assert!(step > 27 && step < 5000),
        other => panic!("expected UnstableChannel, got {other:?}"),
    }
}
