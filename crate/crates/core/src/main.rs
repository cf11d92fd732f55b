use std::process::ExitCode;

fn main() -> ExitCode {
    levy_multipliers::cli::run_from_args(std::env::args_os())
}
