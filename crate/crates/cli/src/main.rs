use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(polar_marginals_cli::run(std::env::args_os()))
}
