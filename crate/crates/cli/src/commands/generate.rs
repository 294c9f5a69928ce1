use std::fs::File;
use std::path::PathBuf;

use mycosig_core::channel::{make_corpus, CorpusSpec};
use mycosig_core::io::{write_recording_files, write_series};
use mycosig_core::timeseries::make_square_wave;
use mycosig_core::StimulusSpec;

use super::emit;
use crate::args::{GenerateArgs, Shared};
use crate::{parse_frequency_list, CliError};

/// Writes a stimulus file or a simulated corpus; returns the CSV paths.
pub fn run(shared: &Shared, args: &GenerateArgs) -> Result<Vec<PathBuf>, CliError> {
    let written = if args.square {
        vec![square(shared, args)?]
    } else {
        corpus(shared, args)?
    };
    let listing: String = written
        .iter()
        .map(|p| format!("{}\n", p.display()))
        .collect();
    emit(shared.stdout, &listing)?;
    Ok(written)
}

fn square(shared: &Shared, args: &GenerateArgs) -> Result<PathBuf, CliError> {
    let freq = args
        .freq
        .ok_or_else(|| CliError::Usage("--square needs --freq".into()))?;
    let wave = make_square_wave(&StimulusSpec {
        frequency_hz: freq,
        amplitude_v: args.amp,
        duration_s: args.dur,
        sample_rate_hz: args.rate,
    })?;
    let path = shared.out_dir()?.join(format!("square_{freq}hz.csv"));
    write_series(&wave, "input_v", File::create(&path)?)?;
    log::info!("wrote {} ({} samples)", path.display(), wave.len());
    Ok(path)
}

fn corpus(shared: &Shared, args: &GenerateArgs) -> Result<Vec<PathBuf>, CliError> {
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    let freqs = parse_frequency_list(&args.freqs)?;
    for &f in &freqs {
        // Nyquist and positivity checks before any simulation work
        StimulusSpec {
            frequency_hz: f,
            amplitude_v: args.amp,
            duration_s: args.dur,
            sample_rate_hz: args.rate,
        }
        .validate()?;
    }
    let template = args.channel.spec()?;
    template.check_stability()?;
    let dir = shared.out_dir()?;
    let mut written = Vec::with_capacity(freqs.len() * args.reps);
    // one frequency at a time keeps memory bounded; seeds continue the
    // frequency-major numbering of a single corpus
    for (fi, &f) in freqs.iter().enumerate() {
        let mut spec = CorpusSpec::new(vec![f], args.reps, template.clone());
        spec.duration_s = args.dur;
        spec.sample_rate_hz = args.rate;
        spec.amplitude_v = args.amp;
        spec.seed_base = shared.seed.wrapping_add((fi * args.reps) as u64);
        for pair in make_corpus(&spec)? {
            written.push(write_recording_files(&pair, dir, pair.replicate_id())?);
        }
        log::debug!("{f} Hz: {} recordings", args.reps);
    }
    log::info!("wrote {} recordings to {}", written.len(), dir.display());
    Ok(written)
}
