use std::io::{stderr, stdout};
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = ufrac_cli::run(std::env::args_os(), &mut stdout().lock(), &mut stderr());
    ExitCode::from(code as u8)
}
