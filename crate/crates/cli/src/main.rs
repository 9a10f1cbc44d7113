use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(onefifth_cli::parse_and_dispatch(std::env::args()) as u8)
}
