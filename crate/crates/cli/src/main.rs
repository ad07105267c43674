use std::process::ExitCode;

fn main() -> ExitCode {
    covario_cli::run(std::env::args_os())
}
