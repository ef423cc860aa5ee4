use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(rnet::cli::run(std::env::args_os()))
}
