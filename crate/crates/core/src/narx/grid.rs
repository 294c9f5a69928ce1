use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use super::simulate::free_run_slice;
use super::{fit_segments, rrse, BasisKind, BasisSpec, FitConfig, NarxModel, Segment};
use crate::error::{Error, Result};
use crate::timeseries::{autocorrelation_lag, cross_correlation_best_lag, RecordingPair};

/// How maximum lags are chosen for each recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagPolicy {
    Fixed {
        output: usize,
        input: usize,
    },
    /// Best input-to-output cross-correlation lag, at least 1, capped.
    CrossCorrelation {
        cap: usize,
    },
    /// First lag at which the output autocorrelation becomes insignificant.
    Autocorrelation {
        cap: usize,
    },
}

impl Default for LagPolicy {
    fn default() -> Self {
        LagPolicy::CrossCorrelation { cap: 30 }
    }
}

impl LagPolicy {
    fn lags(&self, pair: &RecordingPair) -> Result<(usize, usize)> {
        match *self {
            LagPolicy::Fixed { output, input } => Ok((output, input)),
            LagPolicy::CrossCorrelation { cap } => {
                let l = cross_correlation_best_lag(pair.input(), pair.output(), cap)?.max(1);
                Ok((l, l))
            }
            LagPolicy::Autocorrelation { cap } => {
                let l = autocorrelation_lag(pair.output(), cap)?.max(1);
                Ok((l, l))
            }
        }
    }
}

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridCell {
    pub basis: BasisSpec,
    pub n_terms: usize,
    pub use_els: bool,
}

impl fmt::Display for GridCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}",
            self.basis.kind, self.basis.degree, self.n_terms
        )?;
        if self.use_els {
            f.write_str(":els")?;
        }
        Ok(())
    }
}

impl FromStr for GridCell {
    type Err = Error;

    /// Parses `kind:degree:n_terms[:els]`, e.g. `polynomial:1:5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad =
            || Error::InvalidArgument(format!("grid cell {s:?} is not kind:degree:n_terms[:els]"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let kind = match parts[0].to_ascii_lowercase().as_str() {
            "polynomial" | "poly" => BasisKind::Polynomial,
            "fourier" => BasisKind::Fourier,
            _ => return Err(bad()),
        };
        let degree: u32 = parts[1].parse().map_err(|_| bad())?;
        let n_terms: usize = parts[2].parse().map_err(|_| bad())?;
        let use_els = match parts.get(3) {
            None => false,
            Some(&"els") => true,
            Some(&"ols") => false,
            Some(_) => return Err(bad()),
        };
        if degree == 0 || n_terms == 0 {
            return Err(bad());
        }
        Ok(GridCell {
            basis: BasisSpec { kind, degree },
            n_terms,
            use_els,
        })
    }
}

/// Basis ∈ {polynomial, Fourier} × degree ∈ {1, 2, 3} × terms ∈
/// {3, 5, 8, 13, 21} × ELS ∈ {off, on}.
pub fn default_grid() -> Vec<GridCell> {
    let mut grid = Vec::new();
    for kind in [BasisKind::Polynomial, BasisKind::Fourier] {
        for degree in 1..=3 {
            for n_terms in [3, 5, 8, 13, 21] {
                for use_els in [false, true] {
                    grid.push(GridCell {
                        basis: BasisSpec { kind, degree },
                        n_terms,
                        use_els,
                    });
                }
            }
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub lag_policy: LagPolicy,
    pub train_fraction: f64,
    pub input_delay: usize,
    pub els_iterations: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            lag_policy: LagPolicy::default(),
            train_fraction: 0.8,
            input_delay: 1,
            els_iterations: 20,
        }
    }
}

/// Score table row for one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub cell: GridCell,
    pub n_ok: usize,
    pub n_total: usize,
    pub mean_test_rrse: Option<f64>,
    pub var_test_rrse: Option<f64>,
    pub mean_validation_rrse: Option<f64>,
    pub var_validation_rrse: Option<f64>,
    pub viable: bool,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub best: GridCell,
    /// Configuration of the joint refit that produced `model`.
    pub config: FitConfig,
    pub model: NarxModel,
    pub scores: Vec<ScoreRow>,
}

fn mean_var(v: &[f64]) -> (Option<f64>, Option<f64>) {
    if v.is_empty() {
        return (None, None);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (Some(m), Some(var))
}

fn config_for(cell: &GridCell, lags: (usize, usize), opts: &GridOptions) -> FitConfig {
    let mut cfg = FitConfig::new(cell.basis, cell.n_terms, lags.0, lags.1);
    cfg.use_els = cell.use_els;
    cfg.els_iterations = opts.els_iterations;
    cfg.input_delay = opts.input_delay;
    cfg
}

/// Free-run RRSE on `(x, y)`, seeded with the model's history from `y`.
fn free_run_rrse(model: &NarxModel, x: &[f64], y: &[f64]) -> Result<f64> {
    let h = model.max_lags.history();
    if y.len() < h + 2 {
        return Err(Error::InsufficientHistory {
            required: h + 2,
            available: y.len(),
        });
    }
    let sim = free_run_slice(model, x, &y[..h])?;
    rrse(&y[h..], &sim[h..])
}

fn score_one(
    cell: &GridCell,
    pair: &RecordingPair,
    lags: (usize, usize),
    opts: &GridOptions,
) -> Result<f64> {
    let (train, test) = pair.split(opts.train_fraction)?;
    let seg = Segment::new(train.input().samples(), train.output().samples())?;
    let model = fit_segments(&[seg], &config_for(cell, lags, opts))?;
    free_run_rrse(&model, test.input().samples(), test.output().samples())
}

/// Grid search over model structures.
///
/// Every cell is fitted on the leading `train_fraction` of each training
/// recording and scored by free-run RRSE on the remainder. A cell is viable
/// when at least half of its fits succeed; the best viable cell has the lowest
/// mean test RRSE, ties going to fewer terms and then lower degree. Each viable
/// cell is then refitted jointly on all training recordings and scored on the
/// validation recordings.
pub fn grid_search(
    train: &[RecordingPair],
    grid: &[GridCell],
    validation: &[RecordingPair],
    opts: &GridOptions,
) -> Result<GridOutcome> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("no training recordings".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let lags: Vec<Result<(usize, usize)>> =
        train.par_iter().map(|p| opts.lag_policy.lags(p)).collect();

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|c| (0..train.len()).map(move |r| (c, r)))
        .collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(c, r)| match &lags[r] {
            Ok(l) => score_one(&grid[c], &train[r], *l, opts),
            Err(e) => Err(Error::InvalidArgument(e.to_string())),
        })
        .collect();

    let mut scores: Vec<ScoreRow> = grid
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let cell_results = &results[c * train.len()..(c + 1) * train.len()];
            let ok: Vec<f64> = cell_results
                .iter()
                .filter_map(|r| r.as_ref().ok().copied())
                .collect();
            for (r, res) in cell_results.iter().enumerate() {
                if let Err(e) = res {
                    log::debug!("{cell} on {}: {e}", train[r].replicate_id());
                }
            }
            let (mean, var) = mean_var(&ok);
            ScoreRow {
                cell: *cell,
                n_ok: ok.len(),
                n_total: train.len(),
                mean_test_rrse: mean,
                var_test_rrse: var,
                mean_validation_rrse: None,
                var_validation_rrse: None,
                viable: !ok.is_empty() && 2 * ok.len() >= train.len(),
            }
        })
        .collect();

    let best_idx = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| s.viable)
        .min_by(|(ia, a), (ib, b)| {
            let (ma, mb) = (a.mean_test_rrse.unwrap(), b.mean_test_rrse.unwrap());
            let tol = 1e-12 * ma.abs().max(mb.abs()).max(1.0);
            let by_score = if (ma - mb).abs() <= tol {
                std::cmp::Ordering::Equal
            } else {
                ma.total_cmp(&mb)
            };
            by_score
                .then(a.cell.n_terms.cmp(&b.cell.n_terms))
                .then(a.cell.basis.degree.cmp(&b.cell.basis.degree))
                .then(ia.cmp(ib))
        })
        .map(|(i, _)| i)
        .ok_or_else(|| {
            Error::NoViableModel(format!(
                "none of {} grid cells fitted at least half the recordings",
                grid.len()
            ))
        })?;

    // joint refit uses the largest per-recording lags
    let joint_lags = lags
        .iter()
        .filter_map(|l| l.as_ref().ok())
        .fold((0, 0), |acc, l| (acc.0.max(l.0), acc.1.max(l.1)));
    let segments: Vec<Segment<'_>> = train
        .iter()
        .map(|p| Segment::new(p.input().samples(), p.output().samples()))
        .collect::<Result<_>>()?;

    let viable: Vec<usize> = (0..scores.len()).filter(|&i| scores[i].viable).collect();
    let refits: Vec<(usize, Result<(FitConfig, NarxModel)>)> = viable
        .par_iter()
        .map(|&i| {
            let cfg = config_for(&scores[i].cell, joint_lags, opts);
            (i, fit_segments(&segments, &cfg).map(|m| (cfg, m)))
        })
        .collect();

    let mut best = None;
    for (i, refit) in refits {
        match refit {
            Ok((cfg, model)) => {
                let val: Vec<f64> = validation
                    .iter()
                    .filter_map(|p| {
                        free_run_rrse(&model, p.input().samples(), p.output().samples())
                            .map_err(|e| log::debug!("validation {}: {e}", p.replicate_id()))
                            .ok()
                    })
                    .collect();
                let (m, v) = mean_var(&val);
                scores[i].mean_validation_rrse = m;
                scores[i].var_validation_rrse = v;
                if i == best_idx {
                    best = Some((cfg, model));
                }
            }
            Err(e) => {
                log::warn!("joint refit of {} failed: {e}", scores[i].cell);
                if i == best_idx {
                    return Err(e);
                }
            }
        }
    }
    let (config, model) = best.expect("best cell is viable and was refitted");
    Ok(GridOutcome {
        best: scores[best_idx].cell,
        config,
        model,
        scores,
    })
}

/// Writes the score table, one grid cell per row.
pub fn write_scores<W: Write>(rows: &[ScoreRow], mut sink: W) -> Result<()> {
    writeln!(
        sink,
        "basis,degree,n_terms,els,n_ok,n_total,mean_test_rrse,var_test_rrse,mean_validation_rrse,var_validation_rrse,viable"
    )?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for r in rows {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.cell.basis.kind,
            r.cell.basis.degree,
            r.cell.n_terms,
            r.cell.use_els,
            r.n_ok,
            r.n_total,
            opt(r.mean_test_rrse),
            opt(r.var_test_rrse),
            opt(r.mean_validation_rrse),
            opt(r.var_validation_rrse),
            r.viable
        )?;
    }
    sink.flush()?;
    Ok(())
}
