use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(canal4d::run(std::env::args_os()))
}
