use std::process::ExitCode;

fn main() -> ExitCode {
    lztimes::cli::run(std::env::args_os())
}
