use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match wbr_cli::run(std::env::args_os(), &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            let msg = e.to_string();
            eprintln!("wbr: {}", msg.trim_end());
            ExitCode::from(e.exit_code())
        }
    }
}
