use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use onemirror_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("onemirror: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match RunConfig::from_cli(&cli).and_then(|config| run(&config)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("onemirror: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
