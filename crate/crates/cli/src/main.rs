use clap::Parser;
use plflow_cli::cli::Cli;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage mistakes are parameter errors; --help and --version are not.
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    match plflow_cli::run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("plflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
