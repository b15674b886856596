use std::process::ExitCode;

fn main() -> ExitCode {
    shus::runner::cli::main_with_args(std::env::args_os())
}
