//! Experiment harness, file formats and command line for the `onefifth`
//! optimizers. The algorithmic core lives in `onefifth-core`; this crate
//! adds everything that needs an operating system: CSV emission, config
//! files, parallel replicates, and the `es` binary.

pub mod cli;
pub mod csvio;
pub mod harness;
pub mod objspec;

/// Entry point used by the `es` binary: parses `argv` and runs the chosen
/// subcommand. Returns the process exit status: 0 on success, 1 on
/// configuration errors, 2 on numeric aborts.
pub fn parse_and_dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    cli::dispatch(argv)
}
