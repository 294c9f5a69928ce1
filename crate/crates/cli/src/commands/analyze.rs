use std::fs::File;
use std::io::BufWriter;

use mycosig_core::io::{load_recording_file, write_spectrum, RecordingFormat};
use mycosig_core::pipeline::{
    amplitude_tests, analyze_recording, write_amplitude_tests, write_details, AnalysisConfig,
    RecordingAnalysis,
};
use mycosig_core::stats::{build_report, write_report, Report};
use rayon::prelude::*;

use super::emit;
use crate::args::{AnalyzeArgs, Shared};
use crate::{expand_inputs, CliError};

pub const REPORT_FILE: &str = "report.csv";
pub const DETAILS_FILE: &str = "details.csv";
pub const KRUSKAL_FILE: &str = "kruskal.csv";
pub const SPECTRA_DIR: &str = "spectra";

#[derive(Debug)]
pub struct AnalyzeOutcome {
    pub report: Report,
    pub analyses: Vec<RecordingAnalysis>,
    pub skipped: usize,
}

/// Analyzes every matched recording and writes `report.csv`, `details.csv`,
/// `kruskal.csv` and `spectra/<id>_csd.csv`.
///
/// Recordings that cannot be loaded are skipped with a warning. Outputs are
/// still written when more than half are skipped, but the command then fails
/// with a data error.
pub fn run(shared: &Shared, args: &AnalyzeArgs) -> Result<AnalyzeOutcome, CliError> {
    let paths = expand_inputs(&args.inputs)?;
    if args.granger_lag_cap == 0 {
        return Err(CliError::Usage("--granger-lag-cap must be positive".into()));
    }
    let cfg = AnalysisConfig {
        welch: shared.welch(),
        alpha: shared.alpha,
        granger_max_search_lag: args.granger_lag_cap,
        adf_max_lag: args.adf_max_lag,
        difference_order: 1,
    };
    let format = RecordingFormat {
        rate_hz: args.rate,
        input_frequency_hz: args.freq,
        replicate_id: None,
    };
    log::info!("analyzing {} recordings", paths.len());

    // load and analyze in one pass so only the small results stay in memory
    let results: Vec<_> = paths
        .par_iter()
        .map(|p| load_recording_file(p, &format).map(|pair| analyze_recording(&pair, &cfg)))
        .collect();
    let mut analyses = Vec::with_capacity(results.len());
    let mut skipped = 0;
    for (path, res) in paths.iter().zip(results) {
        match res {
            Ok(a) => {
                for n in &a.notes {
                    log::debug!("{}: {n}", a.replicate_id);
                }
                analyses.push(a);
            }
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                skipped += 1;
            }
        }
    }

    let dir = shared.out_dir()?;
    let records: Vec<_> = analyses.iter().map(RecordingAnalysis::record).collect();
    let report = build_report(&records);
    let mut text = Vec::new();
    write_report(&report, &mut text)?;
    std::fs::write(dir.join(REPORT_FILE), &text)?;
    write_details(
        &analyses,
        BufWriter::new(File::create(dir.join(DETAILS_FILE))?),
    )?;
    let kw = amplitude_tests(&analyses);
    write_amplitude_tests(
        &kw,
        shared.alpha,
        BufWriter::new(File::create(dir.join(KRUSKAL_FILE))?),
    )?;
    if !args.no_spectra {
        let spectra = dir.join(SPECTRA_DIR);
        std::fs::create_dir_all(&spectra)?;
        for a in &analyses {
            if let Some(csd) = &a.csd {
                let path = spectra.join(format!("{}_csd.csv", a.replicate_id));
                write_spectrum(csd, File::create(path)?)?;
            }
        }
    }
    emit(shared.stdout, &String::from_utf8_lossy(&text))?;
    log::info!(
        "analyzed {} recordings ({skipped} skipped), report in {}",
        analyses.len(),
        dir.join(REPORT_FILE).display()
    );
    if let Some(between) = kw.first().and_then(|t| t.result.as_ref()) {
        log::info!(
            "amplitude differences between frequencies: H = {:.3}, p = {:.3e}",
            between.statistic,
            between.p_value.unwrap_or(f64::NAN)
        );
    }

    let total = paths.len();
    if skipped * 2 > total {
        return Err(CliError::Data(format!(
            "{skipped} of {total} recordings were skipped"
        )));
    }
    Ok(AnalyzeOutcome {
        report,
        analyses,
        skipped,
    })
}
