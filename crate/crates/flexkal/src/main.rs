use std::process::ExitCode;

fn main() -> ExitCode {
    flexkal::cli::run()
}
