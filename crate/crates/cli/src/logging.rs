use std::io::Write;

use log::LevelFilter;

/// Structured `level=<..> msg=<..>` lines on stderr. `MYCOSIG_LOG` overrides
/// the level chosen by the flags.
pub(crate) fn init(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => LevelFilter::Warn,
        (false, 0) => LevelFilter::Info,
        (false, 1) => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    // a second init (e.g. several in-process runs in tests) keeps the first logger
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("MYCOSIG_LOG")
        .target(env_logger::Target::Stderr)
        .format(|buf, record| {
            writeln!(
                buf,
                "level={} msg={:?}",
                record.level().as_str().to_ascii_lowercase(),
                record.args().to_string()
            )
        })
        .try_init();
}
