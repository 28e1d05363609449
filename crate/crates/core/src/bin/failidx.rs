use std::io::Write;
use std::process::ExitCode;

use failidx::cli;

fn main() -> ExitCode {
    let result = std::panic::catch_unwind(|| cli::run(std::env::args_os()));
    let (code, out, err) = match result {
        Ok(r) => r,
        Err(_) => (cli::EXIT_INTERNAL, String::new(), "internal error\n".into()),
    };
    let _ = std::io::stdout().write_all(out.as_bytes());
    let _ = std::io::stderr().write_all(err.as_bytes());
    ExitCode::from(code as u8)
}
