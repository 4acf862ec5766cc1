use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use varmod::cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.common.output {
        Some(path) => File::create(path).map_err(CliError::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            let r = run(&cli, &mut w);
            w.flush()?;
            r
        }),
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            run(&cli, &mut w)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("varmod: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
