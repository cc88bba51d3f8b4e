use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(stable_entropy::cli::run(std::env::args()) as u8)
}
