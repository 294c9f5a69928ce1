use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use mycosig_core::io::{load_recording_file, read_sidecar, sidecar_path, RecordingFormat};
use mycosig_core::RecordingPair;

use crate::CliError;

fn is_recording(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Resolves files, directories (their `*.csv` entries) and glob patterns to
/// a sorted, de-duplicated list of recording CSVs.
pub fn expand_inputs(patterns: &[String]) -> Result<Vec<PathBuf>, CliError> {
    if patterns.is_empty() {
        return Err(CliError::Usage("no input recordings given".into()));
    }
    let mut found = BTreeSet::new();
    for pattern in patterns {
        let path = Path::new(pattern);
        if path.is_dir() {
            for entry in std::fs::read_dir(path)? {
                let p = entry?.path();
                if is_recording(&p) {
                    found.insert(p);
                }
            }
        } else if path.is_file() {
            found.insert(path.to_path_buf());
        } else {
            let matches = glob::glob(pattern)
                .map_err(|e| CliError::Usage(format!("bad pattern {pattern:?}: {e}")))?;
            found.extend(matches.filter_map(|m| m.ok()).filter(|p| is_recording(p)));
        }
    }
    if found.is_empty() {
        return Err(CliError::Usage(format!(
            "no recordings match {}",
            patterns.join(" ")
        )));
    }
    Ok(found.into_iter().collect())
}

/// Replicate id a file would load with, read cheaply from its sidecar or
/// file name without parsing the data.
pub(crate) fn replicate_id_of(path: &Path) -> Option<String> {
    let side = sidecar_path(path);
    if side.exists() {
        return read_sidecar(&side).ok().map(|s| s.replicate_id);
    }
    path.file_stem().map(|s| s.to_string_lossy().into_owned())
}

/// Loads recordings, skipping (and logging) the ones that fail. Returns the
/// loaded pairs in path order and the number skipped.
pub(crate) fn load_all(paths: &[PathBuf], format: &RecordingFormat) -> (Vec<RecordingPair>, usize) {
    use rayon::prelude::*;
    let loaded: Vec<_> = paths
        .par_iter()
        .map(|p| (p, load_recording_file(p, format)))
        .collect();
    let mut pairs = Vec::with_capacity(loaded.len());
    let mut skipped = 0;
    for (path, res) in loaded {
        match res {
            Ok(pair) => pairs.push(pair),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                skipped += 1;
            }
        }
    }
    (pairs, skipped)
}

/// Parses `100:1000:100,1000:10000:1000` style lists. Ranges include both
/// ends; repeated values keep their first position.
pub fn parse_frequency_list(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |item: &str| CliError::Usage(format!("bad frequency list item {item:?}"));
    let num = |s: &str, item: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(item))
    };
    let mut out: Vec<f64> = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let values = match parts.as_slice() {
            [v] => vec![num(v, item)?],
            [a, b, s] => {
                let (start, stop, step) = (num(a, item)?, num(b, item)?, num(s, item)?);
                if step <= 0.0 || stop < start {
                    return Err(bad(item));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=count).map(|i| start + i as f64 * step).collect()
            }
            _ => return Err(bad(item)),
        };
        for v in values {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty frequency list".into()));
    }
    Ok(out)
}
