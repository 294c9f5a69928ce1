use std::fs::File;
use std::path::PathBuf;

use mycosig_core::channel::simulate_channel;
use mycosig_core::io::{load_stimulus, write_recording_files};
use mycosig_core::timeseries::make_square_wave;
use mycosig_core::StimulusSpec;

use super::emit;
use crate::args::{Shared, SimulateArgs};
use crate::CliError;

/// Drives the channel with a stimulus file or a generated square wave and
/// writes the recording with its sidecar; returns the CSV path.
pub fn run(shared: &Shared, args: &SimulateArgs) -> Result<PathBuf, CliError> {
    let input = match &args.input {
        Some(path) => load_stimulus(File::open(path)?, None)?,
        None => make_square_wave(&StimulusSpec {
            frequency_hz: args.freq,
            amplitude_v: args.amp,
            duration_s: args.dur,
            sample_rate_hz: args.rate,
        })?,
    };
    let mut spec = args.channel.spec()?;
    spec.seed = shared.seed;
    let id = args
        .id
        .clone()
        .unwrap_or_else(|| format!("sim_{}hz", args.freq));
    let pair = simulate_channel(&spec, &input, args.freq, id.as_str())?;
    let path = write_recording_files(&pair, shared.out_dir()?, &id)?;
    log::info!("wrote {} ({} samples)", path.display(), pair.len());
    emit(shared.stdout, &format!("{}\n", path.display()))?;
    Ok(path)
}
