use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(kgns::cli::main(std::env::args_os()))
}
