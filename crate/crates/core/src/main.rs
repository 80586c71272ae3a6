use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (out, err, code) = tstruct_core::cli_io::run(std::env::args_os(), std::env::var("TSTRUCT_SEED").ok());
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    let _ = std::io::stderr().lock().write_all(err.as_bytes());
    ExitCode::from(code as u8)
}
