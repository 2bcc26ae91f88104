use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ldod::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let body = if cli.json {
                serde_json::to_string_pretty(&outcome.json).expect("JSON values serialize") + "\n"
            } else {
                outcome.text
            };
            // A closed pipe downstream is not an error of the command.
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
