mod args;
mod commands;
mod config;
mod error;
mod io;
mod manifest;

use clap::error::ErrorKind;
use clap::Parser;

fn main() {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                e.exit();
            }
            // Usage errors are validation failures; 2 is reserved for missing files.
            let _ = e.print();
            std::process::exit(4);
        }
    };
    if let Err(e) = commands::run(cli) {
        eprintln!("lexmask: {e}");
        std::process::exit(error::exit_code(&e));
    }
}
