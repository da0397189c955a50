use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use favres_cli::{exit, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = run(&cli);
    if !out.json.is_empty() {
        let written = match &out.output {
            Some(path) => {
                std::fs::write(path, &out.json).map_err(|e| format!("{}: {e}", path.display()))
            }
            None => std::io::stdout()
                .write_all(out.json.as_bytes())
                .map_err(|e| e.to_string()),
        };
        if let Err(e) = written {
            eprintln!("favres: {e}");
            return ExitCode::from(exit::INTERNAL as u8);
        }
    }
    if !out.message.is_empty() {
        if out.code == exit::OK {
            eprintln!("{}", out.message);
        } else {
            eprintln!("favres: {}", out.message);
        }
    }
    ExitCode::from(out.code as u8)
}
