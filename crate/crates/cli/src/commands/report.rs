use std::fs::File;
use std::path::PathBuf;

use mycosig_core::io::{load_recording_file, write_recording, write_spectrum, RecordingFormat};
use mycosig_core::spectral::{dft_amplitude_spectrum, welch_csd};
use mycosig_core::RecordingPair;

use super::emit;
use crate::args::{ReportArgs, Shared};
use crate::inputs::replicate_id_of;
use crate::{expand_inputs, CliError};

/// Writes the three plot-data files for one recording:
///
/// - `<id>_excerpt.csv`: `t,input_v,output_v`, the first `--excerpt` samples
/// - `<id>_amplitude.csv`: `frequency_hz,magnitude`, DFT amplitude spectrum of the output
/// - `<id>_csd.csv`: `frequency_hz,magnitude`, Welch CSD of input and output
///
/// Both spectra start with a `# kind=` comment line.
pub fn run(shared: &Shared, args: &ReportArgs) -> Result<Vec<PathBuf>, CliError> {
    let paths = expand_inputs(&args.inputs)?;
    let format = RecordingFormat {
        rate_hz: args.rate,
        ..RecordingFormat::default()
    };
    let path = paths
        .iter()
        .find(|p| replicate_id_of(p).as_deref() == Some(args.id.as_str()))
        .ok_or_else(|| CliError::Data(format!("no recording with id {:?}", args.id)))?;
    let pair = load_recording_file(path, &format)?;
    if args.excerpt == 0 || args.excerpt > pair.len() {
        return Err(CliError::Usage(format!(
            "--excerpt must lie in [1, {}] for {}",
            pair.len(),
            args.id
        )));
    }

    let dir = shared.out_dir()?;
    let excerpt = RecordingPair::new(
        pair.input().slice(0..args.excerpt)?,
        pair.output().slice(0..args.excerpt)?,
        pair.input_frequency_hz(),
        pair.replicate_id(),
    )?;
    let files = [
        dir.join(format!("{}_excerpt.csv", args.id)),
        dir.join(format!("{}_amplitude.csv", args.id)),
        dir.join(format!("{}_csd.csv", args.id)),
    ];
    write_recording(&excerpt, File::create(&files[0])?)?;
    write_spectrum(
        &dft_amplitude_spectrum(pair.output())?,
        File::create(&files[1])?,
    )?;
    let mut welch = shared.welch();
    if welch.segment_length > pair.len() {
        log::warn!(
            "Welch segment clamped to the recording length {}",
            pair.len()
        );
        welch.segment_length = pair.len();
    }
    write_spectrum(
        &welch_csd(pair.input(), pair.output(), &welch)?,
        File::create(&files[2])?,
    )?;
    log::info!("wrote plot data for {} to {}", args.id, dir.display());
    let listing: String = files.iter().map(|p| format!("{}\n", p.display())).collect();
    emit(shared.stdout, &listing)?;
    Ok(files.to_vec())
}
