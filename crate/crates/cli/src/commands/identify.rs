use std::fs::File;
use std::io::BufWriter;

use mycosig_core::io::RecordingFormat;
use mycosig_core::narx::{
    default_grid, grid_search, write_scores, GridCell, GridOptions, GridOutcome, LagPolicy,
};
use mycosig_core::RecordingPair;

use super::emit;
use crate::args::{IdentifyArgs, Shared};
use crate::inputs::load_all;
use crate::{expand_inputs, CliError};

pub const MODEL_FILE: &str = "model.json";
pub const SCORES_FILE: &str = "scores.csv";

fn parse_lag_policy(rule: &str, cap: usize) -> Result<LagPolicy, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "--lags expects xcorr, acf or fixed:NY:NX, got {rule:?}"
        ))
    };
    match rule.split(':').collect::<Vec<_>>().as_slice() {
        ["xcorr"] => Ok(LagPolicy::CrossCorrelation { cap }),
        ["acf"] => Ok(LagPolicy::Autocorrelation { cap }),
        ["fixed", ny, nx] => Ok(LagPolicy::Fixed {
            output: ny.parse().map_err(|_| bad())?,
            input: nx.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn load(
    patterns: &[String],
    format: &RecordingFormat,
    freq: Option<f64>,
) -> Result<Vec<RecordingPair>, CliError> {
    let paths = expand_inputs(patterns)?;
    let (mut pairs, skipped) = load_all(&paths, format);
    if skipped > 0 {
        log::warn!(
            "{skipped} of {} recordings could not be loaded",
            paths.len()
        );
    }
    if let Some(f) = freq {
        pairs.retain(|p| (p.input_frequency_hz() - f).abs() <= 1e-9 * f.abs().max(1.0));
    }
    if pairs.is_empty() {
        return Err(CliError::Data("no usable recordings".into()));
    }
    Ok(pairs)
}

/// Grid search on the training recordings; writes the best model as JSON and
/// the full score table.
pub fn run(shared: &Shared, args: &IdentifyArgs) -> Result<GridOutcome, CliError> {
    let grid: Vec<GridCell> = if args.grid.is_empty() {
        default_grid()
    } else {
        args.grid
            .iter()
            .map(|g| {
                g.parse()
                    .map_err(|e| CliError::Usage(format!("--grid {g:?}: {e}")))
            })
            .collect::<Result<_, _>>()?
    };
    if args.lag_cap == 0 {
        return Err(CliError::Usage("--lag-cap must be positive".into()));
    }
    let opts = GridOptions {
        lag_policy: parse_lag_policy(&args.lags, args.lag_cap)?,
        train_fraction: args.train_fraction,
        input_delay: args.delay,
        els_iterations: args.els_iterations,
    };
    let format = RecordingFormat {
        rate_hz: args.rate,
        ..RecordingFormat::default()
    };
    let train = load(&args.inputs, &format, args.freq)?;
    let validation = if args.validation.is_empty() {
        Vec::new()
    } else {
        load(&args.validation, &format, args.freq)?
    };
    log::info!(
        "searching {} grid cells over {} training and {} validation recordings",
        grid.len(),
        train.len(),
        validation.len()
    );
    let outcome = grid_search(&train, &grid, &validation, &opts)?;

    let dir = shared.out_dir()?;
    let json = outcome.model.to_json()?;
    std::fs::write(dir.join(MODEL_FILE), format!("{json}\n"))?;
    write_scores(
        &outcome.scores,
        BufWriter::new(File::create(dir.join(SCORES_FILE))?),
    )?;
    let best = outcome.scores.iter().find(|r| r.cell == outcome.best);
    log::info!(
        "best {} (mean test RRSE {}): {}",
        outcome.best,
        best.and_then(|r| r.mean_test_rrse)
            .map_or("n/a".into(), |v| format!("{v:.4}")),
        outcome.model
    );
    if !outcome.model.has_input_terms() {
        log::info!("selected model has no input terms");
    }
    emit(shared.stdout, &format!("{json}\n"))?;
    Ok(outcome)
}
