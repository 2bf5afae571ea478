use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use heraldsim::cli::{run, Cli};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli, &argv) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.stdout.as_bytes());
            if let Some(msg) = out.stderr {
                eprintln!("error: {msg}");
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
