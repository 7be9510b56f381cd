use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use taskdiff_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) is not an error.
            match writeln!(io::stdout().lock(), "{}", out.text) {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                    eprintln!("error: cannot write output: {e}");
                    ExitCode::from(1)
                }
                _ => ExitCode::from(out.code),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
