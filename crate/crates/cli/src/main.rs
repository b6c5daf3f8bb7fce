use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use spgm::{run, Cli, Format, EXIT_VALIDATION};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let mut echo = vec!["spgm".to_string()];
    echo.extend(argv.into_iter().skip(1));

    let start = Instant::now();
    match run(&cli, echo) {
        Ok(mut outcome) => {
            outcome.report.wall_time_s = start.elapsed().as_secs_f64();
            for w in &outcome.report.warnings {
                eprintln!("warning: {w}");
            }
            match (&outcome.raw_output, cli.format) {
                (Some(raw), _) => print!("{raw}"),
                (None, Format::Text) => print!("{}", outcome.report.to_text()),
                (None, Format::Structured) => println!("{}", outcome.report.to_structured()),
            }
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
