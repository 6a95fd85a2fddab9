use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = tcoal::Cli::parse();
    match tcoal::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
