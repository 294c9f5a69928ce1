//! One module per subcommand. Each `run` returns what it produced so the
//! commands can be driven from tests without going through the binary.

use std::io::Write;

use mycosig_core::channel::{eq2_default, fixed_point, ChannelSpec};
use mycosig_core::narx::NarxModel;

use crate::args::ChannelArgs;
use crate::CliError;

pub mod analyze;
pub mod generate;
pub mod identify;
pub mod report;
pub mod simulate;

fn parse_coupling(text: &str) -> Result<(usize, f64), CliError> {
    let bad = || CliError::Usage(format!("--coupling expects LAG:GAIN, got {text:?}"));
    let (lag, gain) = text.split_once(':').ok_or_else(bad)?;
    let lag: usize = lag.trim().parse().map_err(|_| bad())?;
    let gain: f64 = gain.trim().parse().map_err(|_| bad())?;
    Ok((lag, gain))
}

impl ChannelArgs {
    /// Channel spec from the flags; the seed is filled in by the caller.
    pub(crate) fn spec(&self) -> Result<ChannelSpec, CliError> {
        let model = match &self.model {
            Some(path) => NarxModel::from_json(&std::fs::read_to_string(path)?)?,
            None => eq2_default(),
        };
        let input_coupling = if self.no_coupling {
            Vec::new()
        } else {
            self.coupling
                .iter()
                .map(|c| parse_coupling(c))
                .collect::<Result<_, _>>()?
        };
        let initial_output_v = self
            .init
            .unwrap_or_else(|| fixed_point(&model).unwrap_or(0.0));
        let spec = ChannelSpec {
            model,
            input_coupling,
            noise_sigma_v: self.noise,
            seed: 0,
            initial_output_v,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Writes `text` to stdout when `--stdout` is set.
pub(crate) fn emit(enabled: bool, text: &str) -> Result<(), CliError> {
    if enabled {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()?;
    }
    Ok(())
}
