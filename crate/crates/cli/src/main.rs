use std::process::ExitCode;

use clap::Parser;
use koszul_cli::error::{CliError, EXIT_CHECK_FAILED, EXIT_INVALID_INPUT, EXIT_PASS};
use koszul_cli::{run, thread_count, Cli};

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let threads = thread_count(std::env::var("KOSZUL_THREADS").ok().as_deref())?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::io(e.to_string()))?;
    }
    let report = run(cli)?;
    let text = report.to_json()?;
    match &cli.global.report {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    eprint!("{}", report.summary());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return exit(if e.use_stderr() { EXIT_INVALID_INPUT } else { EXIT_PASS });
        }
    };
    match execute(&cli) {
        Ok(true) => exit(EXIT_PASS),
        Ok(false) => exit(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            exit(e.exit_code())
        }
    }
}
