use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(wavescope_cli::run(std::env::args_os()))
}
